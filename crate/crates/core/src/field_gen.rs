//! Ground-truth field generators and the ASCII / PGM field formats.
//!
//! Every generator is a pure function of its parameters and seed. The start
//! cell `(0, 0)` is always left free.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{parse_err, Error, Result};
use crate::grid_map::{classify_coarse_cell, CellClass, GridPos, GroundTruthField};

pub type Seed = u64;

/// Smallest and largest blob produced by [`gen_irregular`], in fine sub-cells.
pub const BLOB_MIN: usize = 20;
pub const BLOB_MAX: usize = 60;

const START: GridPos = GridPos::new(0, 0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKind {
    Vertical,
    Horizontal,
    Diagonal,
    Spiral,
}

impl FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vertical" => Ok(Self::Vertical),
            "horizontal" => Ok(Self::Horizontal),
            "diagonal" => Ok(Self::Diagonal),
            "spiral" => Ok(Self::Spiral),
            other => Err(Error::InvalidArgument(format!("unknown pattern kind {other:?}"))),
        }
    }
}

fn rng(seed: Seed) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_dims(rows: usize, cols: usize, k: usize) -> Result<()> {
    if rows == 0 || cols == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "field dimensions must be positive, got {rows}x{cols} k={k}"
        )));
    }
    Ok(())
}

/// Blocks each coarse cell independently with probability `threshold`.
pub fn gen_random(rows: usize, cols: usize, threshold: f64, seed: Seed, k: usize) -> Result<GroundTruthField> {
    check_dims(rows, cols, k)?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    let mut rng = rng(seed);
    let mut field = GroundTruthField::free(rows, cols, k)?;
    for row in 0..rows {
        for col in 0..cols {
            // draw for every cell, including the start, so the stream layout is fixed
            let blocked = rng.gen::<f64>() < threshold;
            let p = GridPos::new(row, col);
            if blocked && p != START {
                field.fill_cell(p, true);
            }
        }
    }
    Ok(field)
}

/// Places `n_obstacles` random-walk blobs of fine sub-cells.
///
/// Blobs ignore coarse-cell boundaries, so for `k > 1` they produce partial
/// cells; the generator retries (deterministically) until at least one
/// partial cell exists.
pub fn gen_irregular(rows: usize, cols: usize, n_obstacles: usize, seed: Seed, k: usize) -> Result<GroundTruthField> {
    check_dims(rows, cols, k)?;
    if n_obstacles == 0 {
        return Err(Error::InvalidArgument("at least one obstacle is required".into()));
    }
    let rows_fine = rows * k;
    let cols_fine = cols * k;
    let placeable = rows_fine * cols_fine - k * k;
    if placeable < n_obstacles * BLOB_MAX {
        return Err(Error::Generation(format!(
            "{rows}x{cols} field (k={k}) is too small for {n_obstacles} blobs of up to {BLOB_MAX} sub-cells"
        )));
    }

    let mut rng = rng(seed);
    const ATTEMPTS: usize = 64;
    for _ in 0..ATTEMPTS {
        let mut field = GroundTruthField::free(rows, cols, k)?;
        for _ in 0..n_obstacles {
            place_blob(&mut field, &mut rng)?;
        }
        let has_partial = k == 1
            || (0..rows).any(|r| {
                (0..cols).any(|c| {
                    matches!(classify_coarse_cell(&field, GridPos::new(r, c)), Ok(CellClass::Partial(_)))
                })
            });
        if has_partial {
            return Ok(field);
        }
    }
    Err(Error::Generation(format!("no partial cell after {ATTEMPTS} attempts")))
}

fn place_blob(field: &mut GroundTruthField, rng: &mut ChaCha8Rng) -> Result<()> {
    const STEPS: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];
    let k = field.k();
    let (rows_fine, cols_fine) = (field.rows_fine(), field.cols_fine());
    let in_start = |r: usize, c: usize| r < k && c < k;

    let target = rng.gen_range(BLOB_MIN..=BLOB_MAX);
    let (mut r, mut c) = loop {
        let r = rng.gen_range(0..rows_fine);
        let c = rng.gen_range(0..cols_fine);
        if !in_start(r, c) && !field.is_blocked(r, c) {
            break (r, c);
        }
    };
    field.set_blocked(r, c, true);
    let mut placed = 1;
    let max_steps = target * 200;
    for _ in 0..max_steps {
        if placed == target {
            return Ok(());
        }
        let (dr, dc) = STEPS[rng.gen_range(0..4)];
        let Some(p) = GridPos::new(r, c).offset(dr, dc, rows_fine, cols_fine) else {
            continue;
        };
        if in_start(p.row, p.col) {
            continue;
        }
        (r, c) = (p.row, p.col);
        if !field.is_blocked(r, c) {
            field.set_blocked(r, c, true);
            placed += 1;
        }
    }
    if placed == target {
        Ok(())
    } else {
        Err(Error::Generation(format!("blob walk stalled at {placed} of {target} sub-cells")))
    }
}

type Node = (usize, usize);

/// Maze lattice: corridor nodes sit on even coordinates, walls in between.
struct Lattice {
    rows: usize,
    cols: usize,
    node_rows: usize,
    node_cols: usize,
}

impl Lattice {
    fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidArgument(format!("maze needs at least 2x2 cells, got {rows}x{cols}")));
        }
        Ok(Self { rows, cols, node_rows: rows.div_ceil(2), node_cols: cols.div_ceil(2) })
    }

    fn neighbors(&self, node: (usize, usize)) -> Vec<(usize, usize)> {
        let (r, c) = node;
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push((r - 1, c));
        }
        if c + 1 < self.node_cols {
            out.push((r, c + 1));
        }
        if r + 1 < self.node_rows {
            out.push((r + 1, c));
        }
        if c > 0 {
            out.push((r, c - 1));
        }
        out
    }

    fn blank(&self) -> (Vec<bool>, Vec<bool>) {
        (vec![true; self.rows * self.cols], vec![false; self.node_rows * self.node_cols])
    }

    fn carve(&self, blocked: &mut [bool], a: (usize, usize), b: (usize, usize)) {
        blocked[(a.0 + b.0) * self.cols + (a.1 + b.1)] = false;
        blocked[2 * b.0 * self.cols + 2 * b.1] = false;
    }

    fn finish(&self, blocked: Vec<bool>) -> Result<GroundTruthField> {
        GroundTruthField::new(1, self.rows, self.cols, blocked)
    }
}

/// Recursive-backtracker maze: from the top of the path stack, step to one
/// uniformly chosen unvisited neighbour, or backtrack when there is none.
pub fn gen_maze_backtracker(rows: usize, cols: usize, seed: Seed) -> Result<GroundTruthField> {
    let lat = Lattice::new(rows, cols)?;
    let mut rng = rng(seed);
    let (mut blocked, mut visited) = lat.blank();
    blocked[0] = false;
    visited[0] = true;
    let mut stack = vec![(0usize, 0usize)];
    while let Some(&top) = stack.last() {
        let open: Vec<_> = lat
            .neighbors(top)
            .into_iter()
            .filter(|n| !visited[n.0 * lat.node_cols + n.1])
            .collect();
        if open.is_empty() {
            stack.pop();
            continue;
        }
        let next = open[rng.gen_range(0..open.len())];
        visited[next.0 * lat.node_cols + next.1] = true;
        lat.carve(&mut blocked, top, next);
        stack.push(next);
    }
    lat.finish(blocked)
}

/// Explicit-stack DFS maze: each expanded node pushes all of its neighbours
/// in a freshly shuffled order; the last pushed edge is carved first.
pub fn gen_maze_dfs(rows: usize, cols: usize, seed: Seed) -> Result<GroundTruthField> {
    let lat = Lattice::new(rows, cols)?;
    let mut rng = rng(seed);
    let (mut blocked, mut visited) = lat.blank();
    let mut stack: Vec<(Node, Option<Node>)> = vec![((0, 0), None)];
    while let Some((node, from)) = stack.pop() {
        let i = node.0 * lat.node_cols + node.1;
        if visited[i] {
            continue;
        }
        visited[i] = true;
        match from {
            Some(from) => lat.carve(&mut blocked, from, node),
            None => blocked[0] = false,
        }
        let mut next = lat.neighbors(node);
        next.shuffle(&mut rng);
        for n in next {
            if !visited[n.0 * lat.node_cols + n.1] {
                stack.push((n, Some(node)));
            }
        }
    }
    lat.finish(blocked)
}

/// Seedless geometric obstacle patterns (k = 1).
pub fn gen_pattern(kind: PatternKind, rows: usize, cols: usize) -> Result<GroundTruthField> {
    if rows < 3 || cols < 3 {
        return Err(Error::InvalidArgument(format!("pattern needs at least 3x3 cells, got {rows}x{cols}")));
    }
    let blocked = match kind {
        PatternKind::Vertical => vertical_walls(rows, cols),
        PatternKind::Horizontal => {
            let t = vertical_walls(cols, rows);
            let mut out = vec![false; rows * cols];
            for r in 0..rows {
                for c in 0..cols {
                    out[r * cols + c] = t[c * rows + r];
                }
            }
            out
        }
        PatternKind::Diagonal => diagonal_walls(rows, cols),
        PatternKind::Spiral => spiral(rows, cols),
    };
    GroundTruthField::new(1, rows, cols, blocked)
}

/// Walls on odd columns (never the last column), gaps alternating bottom/top.
fn vertical_walls(rows: usize, cols: usize) -> Vec<bool> {
    let mut blocked = vec![false; rows * cols];
    for (n, c) in (1..cols - 1).step_by(2).enumerate() {
        let gap = if n % 2 == 0 { rows - 1 } else { 0 };
        for r in (0..rows).filter(|&r| r != gap) {
            blocked[r * cols + c] = true;
        }
    }
    blocked
}

/// Walls on every third anti-diagonal, each with a single gap alternating
/// between its upper-right and lower-left end.
fn diagonal_walls(rows: usize, cols: usize) -> Vec<bool> {
    let mut blocked = vec![false; rows * cols];
    let last = rows + cols - 2;
    // the final diagonal would wall off only the far corner
    for (n, s) in (3..last).step_by(3).enumerate() {
        let r_min = s.saturating_sub(cols - 1);
        let r_max = s.min(rows - 1);
        let gap = if n % 2 == 0 { r_min } else { r_max };
        for r in (r_min..=r_max).filter(|&r| r != gap) {
            blocked[r * cols + (s - r)] = true;
        }
    }
    blocked
}

/// Carves a width-one corridor spiralling inward from `(0, 0)`; what remains
/// is a single spiral wall.
fn spiral(rows: usize, cols: usize) -> Vec<bool> {
    const DIRS: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
    let mut blocked = vec![true; rows * cols];
    let carved = |b: &[bool], p: GridPos| !b[p.row * cols + p.col];
    let mut pos = GridPos::new(0, 0);
    blocked[0] = false;
    let mut dir = 0;
    let mut turns = 0;
    while turns < 2 {
        let (dr, dc) = DIRS[dir];
        let step = pos.offset(dr, dc, rows, cols);
        let beyond = pos.offset(2 * dr, 2 * dc, rows, cols);
        let can_step = match step {
            Some(s) => !carved(&blocked, s) && beyond.is_none_or(|b| !carved(&blocked, b)),
            None => false,
        };
        if can_step {
            pos = step.expect("checked above");
            blocked[pos.row * cols + pos.col] = false;
            turns = 0;
        } else {
            dir = (dir + 1) % 4;
            turns += 1;
        }
    }
    blocked
}

/// Serializes a field in the ASCII format: header `field <k> <rows> <cols>`,
/// then one line per fine row of `.` (free) and `#` (blocked).
pub fn serialize_field(field: &GroundTruthField) -> String {
    let mut out = String::with_capacity((field.cols_fine() + 1) * (field.rows_fine() + 1) + 32);
    writeln!(out, "field {} {} {}", field.k(), field.rows_fine(), field.cols_fine()).unwrap();
    for r in 0..field.rows_fine() {
        for c in 0..field.cols_fine() {
            out.push(if field.is_blocked(r, c) { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

/// Parses the ASCII field format. Errors carry 1-based line numbers.
pub fn parse_field(text: &str) -> Result<GroundTruthField> {
    let mut lines = text.split('\n');
    let header = lines.next().filter(|l| !l.is_empty()).ok_or_else(|| parse_err(1, "missing header"))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 4 || parts[0] != "field" {
        return Err(parse_err(1, format!("expected `field <k> <rows> <cols>`, got {header:?}")));
    }
    let num = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| parse_err(1, format!("bad {what} {s:?}")))
    };
    let k = num(parts[1], "k")?;
    let rows = num(parts[2], "row count")?;
    let cols = num(parts[3], "column count")?;
    if k == 0 || rows == 0 || cols == 0 || rows % k != 0 || cols % k != 0 {
        return Err(parse_err(1, format!("dimensions {rows}x{cols} incompatible with k={k}")));
    }

    let mut blocked = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line_no = r + 2;
        let line = lines.next().ok_or_else(|| parse_err(line_no, "missing row"))?;
        if line.chars().count() != cols {
            return Err(parse_err(line_no, format!("expected {cols} cells, found {}", line.chars().count())));
        }
        for ch in line.chars() {
            match ch {
                '.' => blocked.push(false),
                '#' => blocked.push(true),
                other => return Err(parse_err(line_no, format!("illegal character {other:?}"))),
            }
        }
    }
    match (lines.next(), lines.next()) {
        (Some(""), None) => {}
        (None, _) => return Err(parse_err(rows + 1, "missing final newline")),
        _ => return Err(parse_err(rows + 2, "unexpected content after last row")),
    }
    GroundTruthField::new(k, rows, cols, blocked)
}

/// Plain PGM (P2, maxval 255): 0 = blocked, 255 = free, `k` in a `# k=<n>` comment.
pub fn serialize_pgm(field: &GroundTruthField) -> String {
    let mut out = String::new();
    writeln!(out, "P2").unwrap();
    writeln!(out, "# k={}", field.k()).unwrap();
    writeln!(out, "{} {}", field.cols_fine(), field.rows_fine()).unwrap();
    writeln!(out, "255").unwrap();
    for r in 0..field.rows_fine() {
        let row: Vec<&str> = (0..field.cols_fine())
            .map(|c| if field.is_blocked(r, c) { "0" } else { "255" })
            .collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

/// Parses plain PGM. Pixels below half of maxval are blocked; `k` defaults to 1
/// when no `# k=` comment is present.
pub fn parse_pgm(text: &str) -> Result<GroundTruthField> {
    let mut k = 1usize;
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let (content, comment) = match line.find('#') {
            Some(at) => (&line[..at], Some(&line[at + 1..])),
            None => (line, None),
        };
        if let Some(value) = comment.and_then(|c| c.trim().strip_prefix("k=")) {
            k = value.trim().parse().map_err(|_| parse_err(line_no, format!("bad k comment {value:?}")))?;
        }
        tokens.extend(content.split_whitespace().map(|t| (line_no, t)));
    }
    let mut it = tokens.into_iter();
    match it.next() {
        Some((_, "P2")) => {}
        Some((line, magic)) => return Err(parse_err(line, format!("expected P2, got {magic:?}"))),
        None => return Err(parse_err(1, "empty PGM")),
    }
    let mut next_num = |what: &str| -> Result<usize> {
        let (line, tok) = it.next().ok_or_else(|| parse_err(0, format!("missing {what}")))?;
        tok.parse().map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
    };
    let cols = next_num("width")?;
    let rows = next_num("height")?;
    let maxval = next_num("maxval")?;
    if maxval == 0 {
        return Err(parse_err(0, "maxval must be positive"));
    }
    let mut blocked = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let v = next_num("pixel")?;
        if v > maxval {
            return Err(parse_err(0, format!("pixel {v} exceeds maxval {maxval}")));
        }
        blocked.push(v * 2 < maxval);
    }
    GroundTruthField::new(k, rows, cols, blocked)
}
