//! Two-resolution world model.
//!
//! [`GroundTruthField`] is the fine-resolution binary obstacle grid the
//! simulator hides from the robot. [`GridMap`] is the robot's coarse belief:
//! every coarse cell spans a `k x k` block of fine sub-cells and carries one of
//! four [`CellState`]s. Coarse cells whose block mixes blocked and free
//! sub-cells are tracked as partial obstacles together with their sub-mask.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Coarse-cell coordinate, row-major with the origin at the top left.
///
/// The derived ordering is row-major, which is the tie-break order used by
/// the planners and target selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GridPos {
    pub row: usize,
    pub col: usize,
}

impl GridPos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn chebyshev(self, other: GridPos) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    /// Applies a signed offset, returning `None` on underflow or when the
    /// result leaves a `rows x cols` map.
    pub fn offset(self, dr: isize, dc: isize, rows: usize, cols: usize) -> Option<GridPos> {
        let row = self.row.checked_add_signed(dr)?;
        let col = self.col.checked_add_signed(dc)?;
        (row < rows && col < cols).then_some(GridPos { row, col })
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

impl From<(usize, usize)> for GridPos {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

/// A `k x k` boolean sub-cell mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubMask {
    k: usize,
    bits: Vec<bool>,
}

impl SubMask {
    pub fn empty(k: usize) -> Self {
        Self { k, bits: vec![false; k * k] }
    }

    pub fn from_bits(k: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != k * k {
            return Err(Error::InvalidArgument(format!(
                "sub-mask needs {} bits, got {}",
                k * k,
                bits.len()
            )));
        }
        Ok(Self { k, bits })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.k + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.bits[r * self.k + c] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn count_zeros(&self) -> usize {
        self.bits.len() - self.count_ones()
    }

    pub fn complement(&self) -> Self {
        Self { k: self.k, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn is_disjoint(&self, other: &SubMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !(a & b))
    }

    /// Hex encoding of each sub-row (bit `c` of the row is bit `c % 8` of
    /// byte `c / 8`), rows joined by `/`.
    pub fn to_hex_rows(&self) -> String {
        let bytes_per_row = self.k.div_ceil(8);
        (0..self.k)
            .map(|r| {
                let mut bytes = vec![0u8; bytes_per_row];
                for c in 0..self.k {
                    if self.get(r, c) {
                        bytes[c / 8] |= 1 << (c % 8);
                    }
                }
                hex::encode(bytes)
            })
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn from_hex_rows(k: usize, text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.split('/').collect();
        if rows.len() != k {
            return Err(Error::InvalidArgument(format!("expected {k} mask rows, got {}", rows.len())));
        }
        let mut mask = SubMask::empty(k);
        for (r, row) in rows.iter().enumerate() {
            let bytes = hex::decode(row)
                .map_err(|e| Error::InvalidArgument(format!("bad mask hex {row:?}: {e}")))?;
            if bytes.len() != k.div_ceil(8) {
                return Err(Error::InvalidArgument(format!("mask row {row:?} has wrong width")));
            }
            for c in 0..k {
                mask.set(r, c, bytes[c / 8] & (1 << (c % 8)) != 0);
            }
            // padding bits must be zero for a canonical encoding
            if (k..bytes.len() * 8).any(|c| bytes[c / 8] & (1 << (c % 8)) != 0) {
                return Err(Error::InvalidArgument(format!("mask row {row:?} has padding bits set")));
            }
        }
        Ok(mask)
    }
}

/// Fine-resolution binary obstacle grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundTruthField {
    k: usize,
    rows_fine: usize,
    cols_fine: usize,
    blocked: Vec<bool>,
}

impl GroundTruthField {
    pub fn new(k: usize, rows_fine: usize, cols_fine: usize, blocked: Vec<bool>) -> Result<Self> {
        if k == 0 || rows_fine == 0 || cols_fine == 0 {
            return Err(Error::InvalidArgument("field dimensions and k must be positive".into()));
        }
        if !rows_fine.is_multiple_of(k) || !cols_fine.is_multiple_of(k) {
            return Err(Error::InvalidArgument(format!(
                "fine size {rows_fine}x{cols_fine} is not a multiple of k={k}"
            )));
        }
        if blocked.len() != rows_fine * cols_fine {
            return Err(Error::InvalidArgument(format!(
                "blocked array has {} entries, expected {}",
                blocked.len(),
                rows_fine * cols_fine
            )));
        }
        Ok(Self { k, rows_fine, cols_fine, blocked })
    }

    /// All-free field of `rows x cols` coarse cells.
    pub fn free(rows: usize, cols: usize, k: usize) -> Result<Self> {
        Self::new(k, rows * k, cols * k, vec![false; rows * k * cols * k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows_fine(&self) -> usize {
        self.rows_fine
    }

    pub fn cols_fine(&self) -> usize {
        self.cols_fine
    }

    pub fn rows(&self) -> usize {
        self.rows_fine / self.k
    }

    pub fn cols(&self) -> usize {
        self.cols_fine / self.k
    }

    pub fn is_blocked(&self, r: usize, c: usize) -> bool {
        self.blocked[r * self.cols_fine + c]
    }

    pub fn set_blocked(&mut self, r: usize, c: usize, value: bool) {
        self.blocked[r * self.cols_fine + c] = value;
    }

    pub fn blocked(&self) -> &[bool] {
        &self.blocked
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn free_count(&self) -> usize {
        self.blocked.len() - self.blocked_count()
    }

    pub fn obstacle_fraction(&self) -> f64 {
        self.blocked_count() as f64 / self.blocked.len() as f64
    }

    pub fn contains(&self, p: GridPos) -> bool {
        p.row < self.rows() && p.col < self.cols()
    }

    /// Sets every sub-cell of coarse cell `p` to `value`.
    pub fn fill_cell(&mut self, p: GridPos, value: bool) {
        let k = self.k;
        for r in p.row * k..(p.row + 1) * k {
            for c in p.col * k..(p.col + 1) * k {
                self.set_blocked(r, c, value);
            }
        }
    }

    pub fn cell_mask(&self, p: GridPos) -> SubMask {
        let k = self.k;
        let mut mask = SubMask::empty(k);
        for r in 0..k {
            for c in 0..k {
                mask.set(r, c, self.is_blocked(p.row * k + r, p.col * k + c));
            }
        }
        mask
    }

    fn check_bounds(&self, p: GridPos) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { pos: p, rows: self.rows(), cols: self.cols() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Unexplored,
    Covered,
    Obstacle,
    PartialObstacle,
}

/// Ground-truth classification of one coarse cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellClass {
    Free,
    Obstacle,
    /// Mixed cell; the mask marks blocked sub-cells.
    Partial(SubMask),
}

/// Classifies coarse cell `p` of `truth` from its `k x k` sub-block.
pub fn classify_coarse_cell(truth: &GroundTruthField, p: GridPos) -> Result<CellClass> {
    truth.check_bounds(p)?;
    let mask = truth.cell_mask(p);
    let blocked = mask.count_ones();
    Ok(if blocked == 0 {
        CellClass::Free
    } else if blocked == mask.bits.len() {
        CellClass::Obstacle
    } else {
        CellClass::Partial(mask)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StateCounts {
    pub unexplored: usize,
    pub covered: usize,
    pub obstacle: usize,
    pub partial: usize,
}

impl StateCounts {
    pub fn total(&self) -> usize {
        self.unexplored + self.covered + self.obstacle + self.partial
    }
}

/// The robot's coarse belief map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    rows: usize,
    cols: usize,
    k: usize,
    state: Vec<CellState>,
    sensed: Vec<bool>,
    partial_masks: BTreeMap<GridPos, SubMask>,
    covered_sub: BTreeMap<GridPos, SubMask>,
}

impl GridMap {
    /// Fresh belief map: every cell unexplored and unsensed.
    pub fn new(rows: usize, cols: usize, k: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "belief map needs positive dimensions, got {rows}x{cols} k={k}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            k,
            state: vec![CellState::Unexplored; rows * cols],
            sensed: vec![false; rows * cols],
            partial_masks: BTreeMap::new(),
            covered_sub: BTreeMap::new(),
        })
    }

    /// Belief map sized for `truth`.
    pub fn for_field(truth: &GroundTruthField) -> Self {
        Self::new(truth.rows(), truth.cols(), truth.k()).expect("field dimensions are positive")
    }

    /// Belief map with every cell sensed, used for offline planning.
    pub fn fully_known(truth: &GroundTruthField, keep_partial: bool) -> Self {
        let mut map = Self::for_field(truth);
        let pose = GridPos::new(0, 0);
        let radius = map.rows.max(map.cols);
        map.sense_with(truth, pose, radius, keep_partial).expect("origin is in bounds");
        map
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: GridPos) -> bool {
        p.row < self.rows && p.col < self.cols
    }

    pub fn index(&self, p: GridPos) -> usize {
        p.row * self.cols + p.col
    }

    pub fn pos(&self, idx: usize) -> GridPos {
        GridPos::new(idx / self.cols, idx % self.cols)
    }

    pub fn state(&self, p: GridPos) -> CellState {
        self.state[self.index(p)]
    }

    pub fn is_sensed(&self, p: GridPos) -> bool {
        self.sensed[self.index(p)]
    }

    pub fn partial_mask(&self, p: GridPos) -> Option<&SubMask> {
        self.partial_masks.get(&p)
    }

    pub fn covered_sub(&self, p: GridPos) -> Option<&SubMask> {
        self.covered_sub.get(&p)
    }

    pub fn partial_masks(&self) -> &BTreeMap<GridPos, SubMask> {
        &self.partial_masks
    }

    pub fn covered_subs(&self) -> &BTreeMap<GridPos, SubMask> {
        &self.covered_sub
    }

    pub fn positions(&self) -> impl Iterator<Item = GridPos> + '_ {
        (0..self.len()).map(|i| self.pos(i))
    }

    /// Partial cell that has not been visited yet.
    pub fn is_uncovered_partial(&self, p: GridPos) -> bool {
        self.state(p) == CellState::PartialObstacle
            && self.covered_sub.get(&p).is_none_or(|m| m.count_ones() == 0)
    }

    pub fn check_bounds(&self, p: GridPos) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { pos: p, rows: self.rows, cols: self.cols })
        }
    }

    fn check_field(&self, truth: &GroundTruthField) -> Result<()> {
        if truth.rows() != self.rows || truth.cols() != self.cols || truth.k() != self.k {
            return Err(Error::InvalidArgument(format!(
                "map {}x{} k={} does not match field {}x{} k={}",
                self.rows,
                self.cols,
                self.k,
                truth.rows(),
                truth.cols(),
                truth.k()
            )));
        }
        Ok(())
    }

    /// Reveals every unsensed cell within Chebyshev `radius` of `pose`.
    ///
    /// Obstacle and partial cells get their state immediately; free cells stay
    /// `Unexplored` until visited. Returns the newly sensed cells in row-major
    /// order together with the class recorded for them.
    pub fn sense(
        &mut self,
        truth: &GroundTruthField,
        pose: GridPos,
        radius: usize,
    ) -> Result<Vec<(GridPos, CellClass)>> {
        self.sense_with(truth, pose, radius, true)
    }

    /// As [`GridMap::sense`]; with `keep_partial == false` every partial
    /// classification is recorded as a plain obstacle (three-state mapping).
    pub fn sense_with(
        &mut self,
        truth: &GroundTruthField,
        pose: GridPos,
        radius: usize,
        keep_partial: bool,
    ) -> Result<Vec<(GridPos, CellClass)>> {
        self.check_field(truth)?;
        self.check_bounds(pose)?;
        let r0 = pose.row.saturating_sub(radius);
        let c0 = pose.col.saturating_sub(radius);
        let r1 = pose.row.saturating_add(radius).min(self.rows - 1);
        let c1 = pose.col.saturating_add(radius).min(self.cols - 1);
        let mut revealed = Vec::new();
        for row in r0..=r1 {
            for col in c0..=c1 {
                let q = GridPos::new(row, col);
                let i = self.index(q);
                if self.sensed[i] {
                    continue;
                }
                self.sensed[i] = true;
                let class = match classify_coarse_cell(truth, q)? {
                    CellClass::Partial(_) if !keep_partial => CellClass::Obstacle,
                    other => other,
                };
                match &class {
                    CellClass::Free => {}
                    CellClass::Obstacle => self.state[i] = CellState::Obstacle,
                    CellClass::Partial(mask) => {
                        self.state[i] = CellState::PartialObstacle;
                        self.partial_masks.insert(q, mask.clone());
                    }
                }
                revealed.push((q, class));
            }
        }
        Ok(revealed)
    }

    /// Records a visit to `p`.
    pub fn mark_covered(&mut self, p: GridPos) -> Result<()> {
        self.check_bounds(p)?;
        let i = self.index(p);
        match self.state[i] {
            CellState::Obstacle => {
                return Err(Error::InvalidTransition { pos: p, state: CellState::Obstacle })
            }
            CellState::Covered => {}
            CellState::Unexplored => self.state[i] = CellState::Covered,
            CellState::PartialObstacle => {
                let free = self.partial_masks[&p].complement();
                self.covered_sub.insert(p, free);
            }
        }
        self.sensed[i] = true;
        Ok(())
    }

    /// Replaces every partial cell with a plain obstacle.
    pub fn collapse_partials(&mut self) {
        for p in std::mem::take(&mut self.partial_masks).into_keys() {
            let i = self.index(p);
            self.state[i] = CellState::Obstacle;
        }
        self.covered_sub.clear();
    }

    /// Percentage of free fine sub-cells covered.
    pub fn coverage_percent(&self, truth: &GroundTruthField) -> Result<f64> {
        self.check_field(truth)?;
        let total_free = truth.free_count();
        if total_free == 0 {
            return Ok(100.0);
        }
        let mut covered = 0usize;
        for p in self.positions() {
            match self.state(p) {
                CellState::Covered => covered += truth.cell_mask(p).count_zeros(),
                CellState::PartialObstacle => {
                    if let Some(sub) = self.covered_sub.get(&p) {
                        covered += sub.count_ones();
                    }
                }
                _ => {}
            }
        }
        Ok(100.0 * covered as f64 / total_free as f64)
    }

    pub fn state_counts(&self) -> StateCounts {
        let mut counts = StateCounts::default();
        for s in &self.state {
            match s {
                CellState::Unexplored => counts.unexplored += 1,
                CellState::Covered => counts.covered += 1,
                CellState::Obstacle => counts.obstacle += 1,
                CellState::PartialObstacle => counts.partial += 1,
            }
        }
        counts
    }

    /// Rebuilds a map from raw parts, checking every structural invariant.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        k: usize,
        state: Vec<CellState>,
        sensed: Vec<bool>,
        partial_masks: BTreeMap<GridPos, SubMask>,
        covered_sub: BTreeMap<GridPos, SubMask>,
    ) -> Result<Self> {
        let map = Self { rows, cols, k, state, sensed, partial_masks, covered_sub };
        map.validate()?;
        Ok(map)
    }

    /// Checks the structural invariants of the map.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.rows == 0 || self.cols == 0 || self.k == 0 {
            return bad("zero dimension".into());
        }
        if self.state.len() != self.len() || self.sensed.len() != self.len() {
            return bad("state/sensed arrays do not match dimensions".into());
        }
        for p in self.positions() {
            let partial = self.state(p) == CellState::PartialObstacle;
            if partial != self.partial_masks.contains_key(&p) {
                return bad(format!("partial state and mask disagree at {p}"));
            }
            if !self.is_sensed(p) && self.state(p) != CellState::Unexplored {
                return bad(format!("unsensed cell {p} is not unexplored"));
            }
        }
        for (p, mask) in &self.partial_masks {
            if mask.k() != self.k || mask.count_ones() == 0 || mask.count_zeros() == 0 {
                return bad(format!("partial mask at {p} is not mixed"));
            }
        }
        for (p, sub) in &self.covered_sub {
            let Some(mask) = self.partial_masks.get(p) else {
                return bad(format!("covered sub-mask at non-partial cell {p}"));
            };
            if sub.k() != self.k || !sub.is_disjoint(mask) {
                return bad(format!("covered sub-mask at {p} overlaps blocked sub-cells"));
            }
        }
        Ok(())
    }
}
