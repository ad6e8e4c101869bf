//! Robot operation state machine around the coverage loop, with text
//! checkpoints for restart and resume.
//!
//! ```text
//! Idle ──new field──▶ MappingLocalization ──▶ MapConversion ──▶ Covering ──▶ Complete
//!   └──known field──────────────────────────────────────────────▲
//! any ──restart──▶ Recovering ──▶ Covering | MappingLocalization
//! ```

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::coverage::{CoverageConfig, CoverageEvent, CoverageReport, CoverageRun, ScenarioMode};
use crate::error::{parse_err, Error, Result};
use crate::field_gen::serialize_field;
use crate::grid_map::{CellState, GridMap, GridPos, GroundTruthField, SubMask};
use crate::planners::PlannerKind;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpState {
    Idle,
    MappingLocalization,
    MapConversion,
    Covering,
    Recovering,
    Complete,
}

impl OpState {
    pub fn name(self) -> &'static str {
        match self {
            OpState::Idle => "Idle",
            OpState::MappingLocalization => "MappingLocalization",
            OpState::MapConversion => "MapConversion",
            OpState::Covering => "Covering",
            OpState::Recovering => "Recovering",
            OpState::Complete => "Complete",
        }
    }
}

impl fmt::Display for OpState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            OpState::Idle,
            OpState::MappingLocalization,
            OpState::MapConversion,
            OpState::Covering,
            OpState::Recovering,
            OpState::Complete,
        ]
        .into_iter()
        .find(|st| st.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown op state {s:?}")))
    }
}

pub fn is_legal_transition(from: OpState, to: OpState) -> bool {
    use OpState::*;
    matches!(
        (from, to),
        (Idle, MappingLocalization)
            | (Idle, Covering)
            | (MappingLocalization, MapConversion)
            | (MapConversion, Covering)
            | (Covering, Complete)
            | (_, Recovering)
            | (Recovering, Covering)
            | (Recovering, MappingLocalization)
    )
}

/// Checks an event log of transitions; returns the first illegal one.
pub fn validate_transitions(log: &[(OpState, OpState)]) -> std::result::Result<(), (OpState, OpState)> {
    match log.iter().find(|(a, b)| !is_legal_transition(*a, *b)) {
        Some(&bad) => Err(bad),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimEvent {
    StateChanged { from: OpState, to: OpState },
    Moved { to: GridPos },
    Sensed { revealed: usize },
    Replanned { planner: PlannerKind },
    Completed,
}

/// Perimeter cells clockwise from the origin, each listed once.
fn perimeter(rows: usize, cols: usize) -> Vec<GridPos> {
    let mut cells = Vec::with_capacity(2 * (rows + cols));
    cells.extend((0..cols).map(|c| GridPos::new(0, c)));
    cells.extend((1..rows).map(|r| GridPos::new(r, cols - 1)));
    if rows > 1 {
        cells.extend((0..cols - 1).rev().map(|c| GridPos::new(rows - 1, c)));
    }
    if cols > 1 {
        cells.extend((1..rows - 1).rev().map(|r| GridPos::new(r, 0)));
    }
    cells
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_digest(config: &CoverageConfig) -> String {
    sha256_hex(config.canonical().as_bytes())
}

pub fn field_digest(truth: &GroundTruthField) -> String {
    sha256_hex(serialize_field(truth).as_bytes())
}

#[derive(Debug, Clone)]
pub struct Simulator {
    truth: GroundTruthField,
    op_state: OpState,
    resume_to: Option<OpState>,
    run: CoverageRun,
    perimeter: Vec<GridPos>,
    mapping_cursor: usize,
    mapping_ticks: u64,
    steps: u64,
    transitions: Vec<(OpState, OpState)>,
}

impl Simulator {
    /// New simulator. Without a known map the robot first maps the field;
    /// with one it converts the map and starts covering immediately.
    pub fn new(
        truth: GroundTruthField,
        start: GridPos,
        config: CoverageConfig,
        known_map: Option<GridMap>,
    ) -> Result<Self> {
        let (run, first) = match known_map {
            None => (CoverageRun::new(&truth, start, config)?, OpState::MappingLocalization),
            Some(mut map) => {
                if (map.rows(), map.cols(), map.k()) != (truth.rows(), truth.cols(), truth.k()) {
                    return Err(Error::InvalidArgument(format!(
                        "known map {}x{} k={} does not match field {}x{} k={}",
                        map.rows(),
                        map.cols(),
                        map.k(),
                        truth.rows(),
                        truth.cols(),
                        truth.k()
                    )));
                }
                map.validate()?;
                if config.mode == ScenarioMode::ThreeState {
                    map.collapse_partials();
                }
                if !map.contains(start) || map.state(start) == CellState::Obstacle {
                    return Err(Error::InvalidArgument(format!("start {start} is blocked in the known map")));
                }
                (CoverageRun::with_map(&truth, start, config, map)?, OpState::Covering)
            }
        };
        let perimeter = perimeter(truth.rows(), truth.cols());
        Ok(Self {
            truth,
            op_state: first,
            resume_to: None,
            run,
            perimeter,
            mapping_cursor: 0,
            mapping_ticks: 0,
            steps: 0,
            transitions: vec![(OpState::Idle, first)],
        })
    }

    pub fn op_state(&self) -> OpState {
        self.op_state
    }

    pub fn map(&self) -> &GridMap {
        self.run.map()
    }

    pub fn pose(&self) -> GridPos {
        self.run.pose()
    }

    pub fn truth(&self) -> &GroundTruthField {
        &self.truth
    }

    pub fn config(&self) -> &CoverageConfig {
        self.run.config()
    }

    pub fn mapping_ticks(&self) -> u64 {
        self.mapping_ticks
    }

    /// Number of `step` calls so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn transitions(&self) -> &[(OpState, OpState)] {
        &self.transitions
    }

    pub fn report(&self) -> Result<CoverageReport> {
        self.run.report(&self.truth)
    }

    fn transition(&mut self, to: OpState) -> SimEvent {
        let from = self.op_state;
        debug_assert!(is_legal_transition(from, to), "{from} -> {to}");
        self.transitions.push((from, to));
        self.op_state = to;
        SimEvent::StateChanged { from, to }
    }

    /// Advances the simulation by one unit of work, emitting one event.
    pub fn step(&mut self) -> Result<SimEvent> {
        let event = match self.op_state {
            OpState::Complete => return Err(Error::InvalidState("simulator is complete".into())),
            OpState::Idle => return Err(Error::InvalidState("simulator was never started".into())),
            OpState::MappingLocalization => match self.perimeter.get(self.mapping_cursor).copied() {
                Some(cell) => {
                    self.mapping_cursor += 1;
                    self.mapping_ticks += 1;
                    let radius = self.run.config.sensor_radius;
                    let keep = self.run.config.mode.keeps_partials();
                    let revealed = self.run.map.sense_with(&self.truth, cell, radius, keep)?.len();
                    SimEvent::Sensed { revealed }
                }
                None => self.transition(OpState::MapConversion),
            },
            OpState::MapConversion => {
                if self.run.config.mode == ScenarioMode::ThreeState {
                    self.run.map.collapse_partials();
                }
                self.transition(OpState::Covering)
            }
            OpState::Recovering => {
                let to = self.resume_to.take().unwrap_or(OpState::Covering);
                self.transition(to)
            }
            OpState::Covering => match self.run.step(&self.truth)? {
                CoverageEvent::Sensed { revealed } => SimEvent::Sensed { revealed },
                CoverageEvent::Moved { to } => SimEvent::Moved { to },
                CoverageEvent::Replanned { planner } => SimEvent::Replanned { planner },
                CoverageEvent::Completed => {
                    self.transition(OpState::Complete);
                    SimEvent::Completed
                }
            },
        };
        self.steps += 1;
        Ok(event)
    }

    /// Simulates a restart: the in-flight plan is lost, the belief map and
    /// mapping progress survive.
    pub fn restart(&mut self) {
        let resume = match self.op_state {
            OpState::Idle | OpState::MappingLocalization | OpState::MapConversion => OpState::MappingLocalization,
            OpState::Recovering => self.resume_to.unwrap_or(OpState::Covering),
            OpState::Covering | OpState::Complete => OpState::Covering,
        };
        if self.op_state != OpState::Complete {
            self.run.route.clear();
            self.run.target = None;
            self.run.needs_replan = false;
        }
        self.resume_to = Some(resume);
        self.transition(OpState::Recovering);
    }

    pub fn run_to_completion(&mut self) -> Result<CoverageReport> {
        while self.op_state != OpState::Complete {
            self.step()?;
        }
        self.report()
    }

    pub fn checkpoint(&self) -> SimCheckpoint {
        let run = &self.run;
        SimCheckpoint {
            format_version: CHECKPOINT_VERSION,
            op_state: self.op_state,
            resume_to: self.resume_to,
            config_digest: config_digest(&run.config),
            field_digest: field_digest(&self.truth),
            mapping_cursor: self.mapping_cursor,
            mapping_ticks: self.mapping_ticks,
            steps: self.steps,
            pose: run.pose,
            started: run.started,
            finished: run.finished,
            incomplete: run.incomplete,
            ticks: run.ticks,
            path_length: run.path_length,
            turns: run.turns,
            replans: run.replans,
            planner_switches: run.switches,
            revisits: run.revisits,
            planner: run.planner,
            target: run.target,
            route: run.route.iter().copied().collect(),
            needs_replan: run.needs_replan,
            trajectory: run.trajectory.clone(),
            map: run.map.clone(),
        }
    }

    /// Rebuilds a simulator from a checkpoint taken with the same field and
    /// configuration.
    pub fn restore(cp: &SimCheckpoint, truth: GroundTruthField, config: CoverageConfig) -> Result<Self> {
        if cp.format_version != CHECKPOINT_VERSION {
            return Err(Error::IncompatibleCheckpoint(format!(
                "format version {} (expected {CHECKPOINT_VERSION})",
                cp.format_version
            )));
        }
        if cp.config_digest != config_digest(&config) {
            return Err(Error::IncompatibleCheckpoint("config digest mismatch".into()));
        }
        if cp.field_digest != field_digest(&truth) {
            return Err(Error::IncompatibleCheckpoint("field digest mismatch".into()));
        }
        let start = *cp.trajectory.first().ok_or_else(|| Error::IncompatibleCheckpoint("empty trajectory".into()))?;
        let mut run = CoverageRun::with_map(&truth, start, config, cp.map.clone())
            .map_err(|e| Error::IncompatibleCheckpoint(e.to_string()))?;
        let bounded = |p: GridPos| truth.contains(p);
        if !cp.trajectory.iter().chain(&cp.route).chain(cp.target.iter()).copied().all(bounded)
            || cp.trajectory.last() != Some(&cp.pose)
        {
            return Err(Error::IncompatibleCheckpoint("positions inconsistent with the field".into()));
        }
        run.visits = vec![0; run.map.len()];
        for &p in &cp.trajectory {
            let i = run.map.index(p);
            run.visits[i] += 1;
        }
        run.pose = cp.pose;
        run.started = cp.started;
        run.finished = cp.finished;
        run.incomplete = cp.incomplete;
        run.ticks = cp.ticks;
        run.path_length = cp.path_length;
        run.turns = cp.turns;
        run.replans = cp.replans;
        run.switches = cp.planner_switches;
        run.revisits = cp.revisits;
        run.planner = cp.planner;
        run.target = cp.target;
        run.route = cp.route.iter().copied().collect::<VecDeque<_>>();
        run.needs_replan = cp.needs_replan;
        run.trajectory = cp.trajectory.clone();

        let perimeter = perimeter(truth.rows(), truth.cols());
        if cp.mapping_cursor > perimeter.len() {
            return Err(Error::IncompatibleCheckpoint("mapping cursor past the perimeter".into()));
        }
        Ok(Self {
            truth,
            op_state: cp.op_state,
            resume_to: cp.resume_to,
            run,
            perimeter,
            mapping_cursor: cp.mapping_cursor,
            mapping_ticks: cp.mapping_ticks,
            steps: cp.steps,
            transitions: Vec::new(),
        })
    }
}

/// Serializable snapshot of a [`Simulator`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimCheckpoint {
    pub format_version: u32,
    pub op_state: OpState,
    pub resume_to: Option<OpState>,
    pub config_digest: String,
    pub field_digest: String,
    pub mapping_cursor: usize,
    pub mapping_ticks: u64,
    pub steps: u64,
    pub pose: GridPos,
    pub started: bool,
    pub finished: bool,
    pub incomplete: bool,
    pub ticks: u64,
    pub path_length: f64,
    pub turns: u64,
    pub replans: u64,
    pub planner_switches: u64,
    pub revisits: u64,
    pub planner: PlannerKind,
    pub target: Option<GridPos>,
    pub route: Vec<GridPos>,
    pub needs_replan: bool,
    pub trajectory: Vec<GridPos>,
    pub map: GridMap,
}

const MAP_SENTINEL: &str = "---map---";
const MASK_SENTINEL: &str = "---masks---";

fn fmt_pos(p: GridPos) -> String {
    format!("{},{}", p.row, p.col)
}

fn fmt_positions(cells: &[GridPos]) -> String {
    cells.iter().map(|&p| fmt_pos(p)).collect::<Vec<_>>().join(";")
}

fn parse_pos(s: &str) -> Option<GridPos> {
    let (r, c) = s.split_once(',')?;
    Some(GridPos::new(r.parse().ok()?, c.parse().ok()?))
}

fn parse_positions(s: &str) -> Option<Vec<GridPos>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(';').map(parse_pos).collect()
}

fn state_char(map: &GridMap, p: GridPos) -> char {
    match (map.state(p), map.is_sensed(p)) {
        (CellState::Unexplored, false) => '?',
        (CellState::Unexplored, true) => '.',
        (CellState::Covered, _) => 'o',
        (CellState::Obstacle, _) => '#',
        (CellState::PartialObstacle, _) => 'p',
    }
}

impl SimCheckpoint {
    /// Line-oriented text form: `key=value` lines, then the belief map after
    /// `---map---` (`?` unsensed, `.` sensed free, `o` covered, `#` obstacle,
    /// `p` partial), then one line per partial cell after `---masks---`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let opt_pos = |p: Option<GridPos>| p.map_or_else(|| "none".to_string(), fmt_pos);
        writeln!(out, "format_version={}", self.format_version).unwrap();
        writeln!(out, "op_state={}", self.op_state).unwrap();
        writeln!(out, "resume_to={}", self.resume_to.map_or("none", OpState::name)).unwrap();
        writeln!(out, "config_digest={}", self.config_digest).unwrap();
        writeln!(out, "field_digest={}", self.field_digest).unwrap();
        writeln!(out, "mapping_cursor={}", self.mapping_cursor).unwrap();
        writeln!(out, "mapping_ticks={}", self.mapping_ticks).unwrap();
        writeln!(out, "steps={}", self.steps).unwrap();
        writeln!(out, "pose={}", fmt_pos(self.pose)).unwrap();
        writeln!(out, "started={}", self.started).unwrap();
        writeln!(out, "finished={}", self.finished).unwrap();
        writeln!(out, "incomplete={}", self.incomplete).unwrap();
        writeln!(out, "ticks={}", self.ticks).unwrap();
        writeln!(out, "path_length={}", self.path_length).unwrap();
        writeln!(out, "turns={}", self.turns).unwrap();
        writeln!(out, "replans={}", self.replans).unwrap();
        writeln!(out, "planner_switches={}", self.planner_switches).unwrap();
        writeln!(out, "revisits={}", self.revisits).unwrap();
        writeln!(out, "planner={}", self.planner).unwrap();
        writeln!(out, "target={}", opt_pos(self.target)).unwrap();
        writeln!(out, "route={}", fmt_positions(&self.route)).unwrap();
        writeln!(out, "needs_replan={}", self.needs_replan).unwrap();
        writeln!(out, "trajectory={}", fmt_positions(&self.trajectory)).unwrap();
        writeln!(out, "{MAP_SENTINEL}").unwrap();
        let map = &self.map;
        writeln!(out, "map {} {} {}", map.k(), map.rows(), map.cols()).unwrap();
        for r in 0..map.rows() {
            let line: String = (0..map.cols()).map(|c| state_char(map, GridPos::new(r, c))).collect();
            writeln!(out, "{line}").unwrap();
        }
        writeln!(out, "{MASK_SENTINEL}").unwrap();
        for (p, mask) in map.partial_masks() {
            let covered = map.covered_sub(*p).map_or_else(|| "-".to_string(), SubMask::to_hex_rows);
            writeln!(out, "{} {} {}", fmt_pos(*p), mask.to_hex_rows(), covered).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.split('\n').collect();
        if lines.last() != Some(&"") {
            return Err(parse_err(lines.len(), "missing final newline"));
        }
        let lines = &lines[..lines.len() - 1];
        let map_at = lines
            .iter()
            .position(|l| *l == MAP_SENTINEL)
            .ok_or_else(|| parse_err(lines.len(), "missing ---map--- section"))?;

        let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, line) in lines[..map_at].iter().enumerate() {
            let (key, value) = line.split_once('=').ok_or_else(|| parse_err(i + 1, "expected key=value"))?;
            if kv.insert(key, (i + 1, value)).is_some() {
                return Err(parse_err(i + 1, format!("duplicate key {key:?}")));
            }
        }
        let version_line = lines.first().copied().unwrap_or_default();
        if !version_line.starts_with("format_version=") {
            return Err(parse_err(1, "format_version must be the first line"));
        }
        let get = |key: &str| -> Result<(usize, &str)> {
            kv.get(key).copied().ok_or_else(|| parse_err(map_at + 1, format!("missing key {key:?}")))
        };
        fn field<T: FromStr>(entry: (usize, &str), key: &str) -> Result<T> {
            entry.1.parse().map_err(|_| parse_err(entry.0, format!("bad {key} {:?}", entry.1)))
        }
        macro_rules! value {
            ($key:literal) => {
                field(get($key)?, $key)?
            };
        }
        let pos = |key: &str| -> Result<GridPos> {
            let (line, v) = get(key)?;
            parse_pos(v).ok_or_else(|| parse_err(line, format!("bad {key} {v:?}")))
        };
        let positions = |key: &str| -> Result<Vec<GridPos>> {
            let (line, v) = get(key)?;
            parse_positions(v).ok_or_else(|| parse_err(line, format!("bad {key} list")))
        };
        let opt = |key: &str| -> Result<Option<(usize, &str)>> {
            let (line, v) = get(key)?;
            Ok((v != "none").then_some((line, v)))
        };
        let state = |entry: (usize, &str)| -> Result<OpState> {
            OpState::from_str(entry.1).map_err(|e| parse_err(entry.0, e.to_string()))
        };

        let format_version: u32 = value!("format_version");
        if format_version != CHECKPOINT_VERSION {
            return Err(Error::IncompatibleCheckpoint(format!("unsupported format version {format_version}")));
        }
        let planner_entry = get("planner")?;
        let planner = PlannerKind::from_str(planner_entry.1).map_err(|e| parse_err(planner_entry.0, e.to_string()))?;
        let target = match opt("target")? {
            Some((line, v)) => Some(parse_pos(v).ok_or_else(|| parse_err(line, "bad target"))?),
            None => None,
        };
        let map = parse_map_section(lines, map_at)?;
        let cp = SimCheckpoint {
            format_version,
            op_state: state(get("op_state")?)?,
            resume_to: opt("resume_to")?.map(state).transpose()?,
            config_digest: get("config_digest")?.1.to_string(),
            field_digest: get("field_digest")?.1.to_string(),
            mapping_cursor: value!("mapping_cursor"),
            mapping_ticks: value!("mapping_ticks"),
            steps: value!("steps"),
            pose: pos("pose")?,
            started: value!("started"),
            finished: value!("finished"),
            incomplete: value!("incomplete"),
            ticks: value!("ticks"),
            path_length: value!("path_length"),
            turns: value!("turns"),
            replans: value!("replans"),
            planner_switches: value!("planner_switches"),
            revisits: value!("revisits"),
            planner,
            target,
            route: positions("route")?,
            needs_replan: value!("needs_replan"),
            trajectory: positions("trajectory")?,
            map,
        };
        if kv.len() != 23 {
            return Err(parse_err(map_at, format!("expected 23 keys, found {}", kv.len())));
        }
        Ok(cp)
    }
}

fn parse_map_section(lines: &[&str], map_at: usize) -> Result<GridMap> {
    let header_no = map_at + 2;
    let header = lines.get(map_at + 1).ok_or_else(|| parse_err(header_no, "missing map header"))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 4 || parts[0] != "map" {
        return Err(parse_err(header_no, "expected `map <k> <rows> <cols>`"));
    }
    let dims: Vec<usize> = parts[1..]
        .iter()
        .map(|s| s.parse().map_err(|_| parse_err(header_no, format!("bad dimension {s:?}"))))
        .collect::<Result<_>>()?;
    let (k, rows, cols) = (dims[0], dims[1], dims[2]);
    if k == 0 || rows == 0 || cols == 0 {
        return Err(parse_err(header_no, "zero map dimension"));
    }

    let mut state = Vec::with_capacity(rows * cols);
    let mut sensed = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let idx = map_at + 2 + r;
        let line = lines.get(idx).ok_or_else(|| parse_err(idx + 1, "missing map row"))?;
        if line.chars().count() != cols {
            return Err(parse_err(idx + 1, format!("expected {cols} cells")));
        }
        for ch in line.chars() {
            let (s, seen) = match ch {
                '?' => (CellState::Unexplored, false),
                '.' => (CellState::Unexplored, true),
                'o' => (CellState::Covered, true),
                '#' => (CellState::Obstacle, true),
                'p' => (CellState::PartialObstacle, true),
                other => return Err(parse_err(idx + 1, format!("illegal map character {other:?}"))),
            };
            state.push(s);
            sensed.push(seen);
        }
    }
    let masks_at = map_at + 2 + rows;
    if lines.get(masks_at) != Some(&MASK_SENTINEL) {
        return Err(parse_err(masks_at + 1, "expected ---masks---"));
    }
    let mut partial_masks = BTreeMap::new();
    let mut covered_sub = BTreeMap::new();
    for (i, line) in lines.iter().enumerate().skip(masks_at + 1) {
        let bad = |m: &str| parse_err(i + 1, m.to_string());
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 {
            return Err(bad("expected `<row>,<col> <blocked> <covered>`"));
        }
        let p = parse_pos(parts[0]).ok_or_else(|| bad("bad mask position"))?;
        let mask = SubMask::from_hex_rows(k, parts[1]).map_err(|e| bad(&e.to_string()))?;
        if partial_masks.insert(p, mask).is_some() {
            return Err(bad("duplicate mask entry"));
        }
        if parts[2] != "-" {
            covered_sub.insert(p, SubMask::from_hex_rows(k, parts[2]).map_err(|e| bad(&e.to_string()))?);
        }
    }
    GridMap::from_parts(rows, cols, k, state, sensed, partial_masks, covered_sub)
        .map_err(|e| parse_err(masks_at + 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::run_coverage;
    use crate::field_gen::gen_irregular;

    fn sim(known: bool) -> Simulator {
        let truth = gen_irregular(8, 8, 1, 3, 3).unwrap();
        let known_map = known.then(|| GridMap::fully_known(&truth, true));
        Simulator::new(truth, GridPos::new(0, 0), CoverageConfig::default(), known_map).unwrap()
    }

    #[test]
    fn perimeter_sizes() {
        assert_eq!(perimeter(1, 1), vec![GridPos::new(0, 0)]);
        assert_eq!(perimeter(1, 4).len(), 4);
        assert_eq!(perimeter(4, 1).len(), 4);
        assert_eq!(perimeter(5, 7).len(), 2 * (5 + 7) - 4);
        let p = perimeter(3, 3);
        let mut uniq = p.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), p.len());
    }

    #[test]
    fn entry_states() {
        assert_eq!(sim(false).op_state(), OpState::MappingLocalization);
        let mut known = sim(true);
        assert_eq!(known.op_state(), OpState::Covering);
        assert_eq!(known.mapping_ticks(), 0);
        assert!(matches!(known.step().unwrap(), SimEvent::Sensed { .. } | SimEvent::Moved { .. }));
    }

    #[test]
    fn blocked_start_rejected() {
        let mut truth = GroundTruthField::free(3, 3, 1).unwrap();
        truth.set_blocked(0, 0, true);
        assert!(Simulator::new(truth.clone(), GridPos::new(0, 0), CoverageConfig::default(), None).is_err());
        let wrong = GridMap::new(2, 3, 1).unwrap();
        assert!(Simulator::new(truth, GridPos::new(1, 1), CoverageConfig::default(), Some(wrong)).is_err());
    }

    #[test]
    fn full_lifecycle_is_legal_and_matches_direct_run() {
        let mut s = sim(false);
        let mut events = vec![];
        while s.op_state() != OpState::Complete {
            events.push(s.step().unwrap());
        }
        assert_eq!(events.last(), Some(&SimEvent::Completed));
        assert!(s.mapping_ticks() <= 2 * (8 + 8));
        validate_transitions(s.transitions()).unwrap();
        assert_eq!(
            s.transitions().iter().map(|t| t.1).collect::<Vec<_>>(),
            [OpState::MappingLocalization, OpState::MapConversion, OpState::Covering, OpState::Complete]
        );
        assert!(matches!(s.step(), Err(Error::InvalidState(_))));

        // same final coverage as a direct run; the perimeter pass only changes prior knowledge
        let direct = run_coverage(s.truth(), GridPos::new(0, 0), s.config()).unwrap();
        assert_eq!(s.report().unwrap().coverage_percent, direct.coverage_percent);
    }

    #[test]
    fn restart_recovers() {
        let mut s = sim(false);
        for _ in 0..5 {
            s.step().unwrap();
        }
        s.restart();
        assert_eq!(s.op_state(), OpState::Recovering);
        assert_eq!(
            s.step().unwrap(),
            SimEvent::StateChanged { from: OpState::Recovering, to: OpState::MappingLocalization }
        );
        while s.op_state() != OpState::Covering {
            s.step().unwrap();
        }
        for _ in 0..10 {
            s.step().unwrap();
        }
        s.restart();
        assert_eq!(s.step().unwrap(), SimEvent::StateChanged { from: OpState::Recovering, to: OpState::Covering });
        let report = s.run_to_completion().unwrap();
        validate_transitions(s.transitions()).unwrap();
        assert!(!report.incomplete);
    }

    #[test]
    fn illegal_transitions_detected() {
        assert!(validate_transitions(&[(OpState::Idle, OpState::Complete)]).is_err());
        assert!(validate_transitions(&[(OpState::Covering, OpState::MappingLocalization)]).is_err());
        assert!(validate_transitions(&[(OpState::Complete, OpState::Recovering)]).is_ok());
    }

    #[test]
    fn checkpoint_text_round_trip() {
        let mut s = sim(false);
        for _ in 0..40 {
            s.step().unwrap();
        }
        let cp = s.checkpoint();
        let text = cp.to_text();
        let back = SimCheckpoint::from_text(&text).unwrap();
        assert_eq!(back, cp);
        assert_eq!(back.to_text(), text);
        assert!(text.starts_with("format_version=1\n"));
    }

    #[test]
    fn restore_rejects_mismatches() {
        let s = sim(false);
        let mut cp = s.checkpoint();
        let truth = s.truth().clone();
        let other = CoverageConfig { sensor_radius: 3, ..CoverageConfig::default() };
        assert!(matches!(
            Simulator::restore(&cp, truth.clone(), other),
            Err(Error::IncompatibleCheckpoint(_))
        ));
        cp.config_digest.replace_range(0..1, if cp.config_digest.starts_with('0') { "1" } else { "0" });
        assert!(matches!(
            Simulator::restore(&cp, truth.clone(), CoverageConfig::default()),
            Err(Error::IncompatibleCheckpoint(_))
        ));
        let mut cp = s.checkpoint();
        cp.format_version = 2;
        assert!(matches!(
            Simulator::restore(&cp, truth, CoverageConfig::default()),
            Err(Error::IncompatibleCheckpoint(_))
        ));
    }

    #[test]
    fn checkpoint_parse_errors() {
        let text = sim(false).checkpoint().to_text();
        assert!(SimCheckpoint::from_text(&text.replacen("format_version=1", "format_version=9", 1)).is_err());
        assert!(matches!(
            SimCheckpoint::from_text(&text.replacen("steps=", "stepz=", 1)),
            Err(Error::Parse { .. })
        ));
        assert!(SimCheckpoint::from_text(&text.replacen("---map---", "---nap---", 1)).is_err());
        assert!(SimCheckpoint::from_text(text.trim_end()).is_err());
    }
}
