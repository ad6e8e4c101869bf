//! Point-to-point planners over the belief map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid_map::{CellState, GridMap, GridPos};

/// Neighbour offsets in the fixed expansion order N, E, S, W, NE, SE, SW, NW.
pub const NEIGHBOR_ORDER: [(isize, isize); 8] =
    [(-1, 0), (0, 1), (1, 0), (0, -1), (-1, 1), (1, 1), (1, -1), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &NEIGHBOR_ORDER[..4],
            Connectivity::Eight => &NEIGHBOR_ORDER[..],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    Euclidean,
    Manhattan,
    Chebyshev,
    /// Always zero; turns A* into Dijkstra.
    Zero,
}

impl Heuristic {
    pub fn estimate(self, from: GridPos, to: GridPos) -> f64 {
        let dr = from.row.abs_diff(to.row) as f64;
        let dc = from.col.abs_diff(to.col) as f64;
        match self {
            Heuristic::Euclidean => dr.hypot(dc),
            Heuristic::Manhattan => dr + dc,
            Heuristic::Chebyshev => dr.max(dc),
            Heuristic::Zero => 0.0,
        }
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Self::Euclidean),
            "manhattan" => Ok(Self::Manhattan),
            "chebyshev" => Ok(Self::Chebyshev),
            "zero" => Ok(Self::Zero),
            other => Err(Error::InvalidArgument(format!("unknown heuristic {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversalPolicy {
    pub connectivity: Connectivity,
    /// Treat never-sensed cells as traversable (optimistic online planning).
    pub unknown_passable: bool,
    /// Multiplier applied to steps that enter a partial-obstacle cell.
    pub partial_cost_factor: f64,
    pub heuristic: Heuristic,
}

impl Default for TraversalPolicy {
    fn default() -> Self {
        Self {
            connectivity: Connectivity::Eight,
            unknown_passable: true,
            partial_cost_factor: 1.5,
            heuristic: Heuristic::Euclidean,
        }
    }
}

impl TraversalPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.partial_cost_factor >= 1.0 && self.partial_cost_factor.is_finite()) {
            return Err(Error::Config(format!(
                "partial_cost_factor must be a finite value >= 1, got {}",
                self.partial_cost_factor
            )));
        }
        if self.connectivity == Connectivity::Eight && self.heuristic == Heuristic::Manhattan {
            return Err(Error::Config("Manhattan heuristic is inadmissible under 8-connectivity".into()));
        }
        Ok(())
    }

    pub fn is_passable(&self, map: &GridMap, p: GridPos) -> bool {
        match map.state(p) {
            CellState::Obstacle => false,
            CellState::Unexplored => self.unknown_passable || map.is_sensed(p),
            CellState::Covered | CellState::PartialObstacle => true,
        }
    }

    /// Cost of stepping from `from` into the adjacent cell `to`, or `None`
    /// when the move is not allowed.
    pub fn step_cost(&self, map: &GridMap, from: GridPos, to: GridPos) -> Option<f64> {
        let dr = from.row.abs_diff(to.row);
        let dc = from.col.abs_diff(to.col);
        let diagonal = match (dr, dc) {
            (1, 0) | (0, 1) => false,
            (1, 1) if self.connectivity == Connectivity::Eight => true,
            _ => return None,
        };
        if !map.contains(to) || !self.is_passable(map, to) {
            return None;
        }
        if diagonal
            && map.state(GridPos::new(from.row, to.col)) == CellState::Obstacle
            && map.state(GridPos::new(to.row, from.col)) == CellState::Obstacle
        {
            return None;
        }
        let base = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
        let factor = if map.state(to) == CellState::PartialObstacle { self.partial_cost_factor } else { 1.0 };
        Some(base * factor)
    }

    /// Allowed moves out of `p`, in [`NEIGHBOR_ORDER`].
    pub fn moves<'a>(&'a self, map: &'a GridMap, p: GridPos) -> impl Iterator<Item = (GridPos, f64)> + 'a {
        self.connectivity.offsets().iter().filter_map(move |&(dr, dc)| {
            let q = p.offset(dr, dc, map.rows(), map.cols())?;
            self.step_cost(map, p, q).map(|cost| (q, cost))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    Dijkstra,
    AStar,
    Dfs,
}

impl PlannerKind {
    /// Next planner in the replanning rotation A* -> Dijkstra -> DFS -> A*.
    pub fn next_in_cycle(self) -> Self {
        match self {
            PlannerKind::AStar => PlannerKind::Dijkstra,
            PlannerKind::Dijkstra => PlannerKind::Dfs,
            PlannerKind::Dfs => PlannerKind::AStar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Dijkstra => "dijkstra",
            PlannerKind::AStar => "astar",
            PlannerKind::Dfs => "dfs",
        }
    }

    pub fn plan(self, map: &GridMap, start: GridPos, goal: GridPos, policy: &TraversalPolicy) -> Result<SearchResult> {
        match self {
            PlannerKind::Dijkstra => plan_dijkstra(map, start, goal, policy),
            PlannerKind::AStar => plan_astar(map, start, goal, policy),
            PlannerKind::Dfs => plan_dfs(map, start, goal, policy),
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dijkstra" => Ok(Self::Dijkstra),
            "astar" | "a*" => Ok(Self::AStar),
            "dfs" => Ok(Self::Dfs),
            other => Err(Error::InvalidArgument(format!("unknown planner {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub cells: Vec<GridPos>,
    pub cost: f64,
}

impl Path {
    pub fn start(&self) -> GridPos {
        self.cells[0]
    }

    pub fn goal(&self) -> GridPos {
        *self.cells.last().expect("paths are never empty")
    }

    /// Number of moves.
    pub fn steps(&self) -> usize {
        self.cells.len() - 1
    }
}

/// Planner output: the path (if any) and the number of expanded nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub path: Option<Path>,
    pub expanded: usize,
}

fn check_endpoints(map: &GridMap, start: GridPos, goal: GridPos, policy: &TraversalPolicy) -> Result<()> {
    policy.validate()?;
    map.check_bounds(start)?;
    map.check_bounds(goal)?;
    if map.state(start) == CellState::Obstacle {
        return Err(Error::InvalidArgument(format!("start {start} is an obstacle")));
    }
    Ok(())
}

fn reconstruct(map: &GridMap, parent: &[usize], goal: usize, cost: f64) -> Path {
    let mut cells = vec![map.pos(goal)];
    let mut at = goal;
    while parent[at] != usize::MAX {
        at = parent[at];
        cells.push(map.pos(at));
    }
    cells.reverse();
    Path { cells, cost }
}

/// Min-heap entry ordered by (priority, tie, row-major index).
#[derive(Debug, Clone, Copy)]
struct Entry {
    priority: f64,
    tie: f64,
    index: usize,
    g: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.tie.total_cmp(&self.tie))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn plan_dijkstra(map: &GridMap, start: GridPos, goal: GridPos, policy: &TraversalPolicy) -> Result<SearchResult> {
    check_endpoints(map, start, goal, policy)?;
    let n = map.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let (s, g) = (map.index(start), map.index(goal));
    dist[s] = 0.0;
    heap.push(Entry { priority: 0.0, tie: 0.0, index: s, g: 0.0 });
    let mut expanded = 0;
    while let Some(Entry { index, g: cost, .. }) = heap.pop() {
        if done[index] {
            continue;
        }
        done[index] = true;
        expanded += 1;
        if index == g {
            return Ok(SearchResult { path: Some(reconstruct(map, &parent, g, cost)), expanded });
        }
        for (q, step) in policy.moves(map, map.pos(index)) {
            let j = map.index(q);
            let next = cost + step;
            if !done[j] && next < dist[j] {
                dist[j] = next;
                parent[j] = index;
                heap.push(Entry { priority: next, tie: 0.0, index: j, g: next });
            }
        }
    }
    Ok(SearchResult { path: None, expanded })
}

/// A* with the policy's heuristic. Queue order is (f, h, row-major index).
pub fn plan_astar(map: &GridMap, start: GridPos, goal: GridPos, policy: &TraversalPolicy) -> Result<SearchResult> {
    check_endpoints(map, start, goal, policy)?;
    let h = |p: GridPos| policy.heuristic.estimate(p, goal);
    let n = map.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let (s, g) = (map.index(start), map.index(goal));
    dist[s] = 0.0;
    heap.push(Entry { priority: h(start), tie: h(start), index: s, g: 0.0 });
    let mut expanded = 0;
    while let Some(Entry { index, g: cost, .. }) = heap.pop() {
        if closed[index] || cost > dist[index] {
            continue;
        }
        closed[index] = true;
        expanded += 1;
        if index == g {
            return Ok(SearchResult { path: Some(reconstruct(map, &parent, g, cost)), expanded });
        }
        for (q, step) in policy.moves(map, map.pos(index)) {
            let j = map.index(q);
            let next = cost + step;
            if next < dist[j] {
                dist[j] = next;
                parent[j] = index;
                closed[j] = false;
                let hq = h(q);
                heap.push(Entry { priority: next + hq, tie: hq, index: j, g: next });
            }
        }
    }
    Ok(SearchResult { path: None, expanded })
}

/// Depth-first search with a fixed neighbour order; each cell is visited at
/// most once and the first path found is returned.
pub fn plan_dfs(map: &GridMap, start: GridPos, goal: GridPos, policy: &TraversalPolicy) -> Result<SearchResult> {
    check_endpoints(map, start, goal, policy)?;
    let n = map.len();
    let mut visited = vec![false; n];
    let mut parent = vec![usize::MAX; n];
    let (s, g) = (map.index(start), map.index(goal));
    let mut stack = vec![(s, usize::MAX)];
    let mut expanded = 0;
    while let Some((index, from)) = stack.pop() {
        if visited[index] {
            continue;
        }
        visited[index] = true;
        parent[index] = from;
        expanded += 1;
        if index == g {
            let mut path = reconstruct(map, &parent, g, 0.0);
            path.cost = path_cost(&path, map, policy)?;
            return Ok(SearchResult { path: Some(path), expanded });
        }
        let moves: Vec<_> = policy.moves(map, map.pos(index)).collect();
        // reversed so the first neighbour in the fixed order is explored first
        for (q, _) in moves.into_iter().rev() {
            let j = map.index(q);
            if !visited[j] {
                stack.push((j, index));
            }
        }
    }
    Ok(SearchResult { path: None, expanded })
}

/// Recomputes a path's cost from its steps.
pub fn path_cost(path: &Path, map: &GridMap, policy: &TraversalPolicy) -> Result<f64> {
    let Some(&first) = path.cells.first() else {
        return Err(Error::InvalidPath("path has no cells".into()));
    };
    map.check_bounds(first)?;
    if map.state(first) == CellState::Obstacle {
        return Err(Error::InvalidPath(format!("path starts on obstacle {first}")));
    }
    let mut total = 0.0;
    for w in path.cells.windows(2) {
        map.check_bounds(w[1])?;
        total += policy
            .step_cost(map, w[0], w[1])
            .ok_or_else(|| Error::InvalidPath(format!("illegal step {} -> {}", w[0], w[1])))?;
    }
    Ok(total)
}

/// Single-source cost sweep: the policy cost from `source` to every cell,
/// `f64::INFINITY` where unreachable.
pub fn cost_sweep(map: &GridMap, source: GridPos, policy: &TraversalPolicy) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; map.len()];
    let mut heap = BinaryHeap::new();
    let s = map.index(source);
    dist[s] = 0.0;
    heap.push(Entry { priority: 0.0, tie: 0.0, index: s, g: 0.0 });
    while let Some(Entry { index, g: cost, .. }) = heap.pop() {
        if cost > dist[index] {
            continue;
        }
        for (q, step) in policy.moves(map, map.pos(index)) {
            let j = map.index(q);
            let next = cost + step;
            if next < dist[j] {
                dist[j] = next;
                heap.push(Entry { priority: next, tie: 0.0, index: j, g: next });
            }
        }
    }
    dist
}

/// The cheapest cell from `source` satisfying `accept`, ties broken
/// row-major, with its cost. Stops as soon as that cell is settled.
pub fn nearest_matching(
    map: &GridMap,
    source: GridPos,
    policy: &TraversalPolicy,
    mut accept: impl FnMut(GridPos) -> bool,
) -> Option<(GridPos, f64)> {
    let mut dist = vec![f64::INFINITY; map.len()];
    let mut heap = BinaryHeap::new();
    let s = map.index(source);
    dist[s] = 0.0;
    heap.push(Entry { priority: 0.0, tie: 0.0, index: s, g: 0.0 });
    while let Some(Entry { index, g: cost, .. }) = heap.pop() {
        if cost > dist[index] {
            continue;
        }
        let p = map.pos(index);
        if accept(p) {
            return Some((p, cost));
        }
        for (q, step) in policy.moves(map, p) {
            let j = map.index(q);
            let next = cost + step;
            if next < dist[j] {
                dist[j] = next;
                heap.push(Entry { priority: next, tie: 0.0, index: j, g: next });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_map::GroundTruthField;
    use std::collections::VecDeque;

    fn known(rows: &[&str]) -> GridMap {
        let blocked = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        let truth = GroundTruthField::new(1, rows.len(), rows[0].len(), blocked).unwrap();
        GridMap::fully_known(&truth, true)
    }

    fn four() -> TraversalPolicy {
        TraversalPolicy { connectivity: Connectivity::Four, heuristic: Heuristic::Manhattan, ..Default::default() }
    }

    /// Breadth-first reachability oracle honouring the same move rules.
    fn reachable(map: &GridMap, start: GridPos, goal: GridPos, policy: &TraversalPolicy) -> bool {
        let mut seen = vec![false; map.len()];
        let mut queue = VecDeque::from([start]);
        seen[map.index(start)] = true;
        while let Some(p) = queue.pop_front() {
            if p == goal {
                return true;
            }
            for &(dr, dc) in &NEIGHBOR_ORDER {
                let Some(q) = p.offset(dr, dc, map.rows(), map.cols()) else { continue };
                if policy.step_cost(map, p, q).is_some() && !seen[map.index(q)] {
                    seen[map.index(q)] = true;
                    queue.push_back(q);
                }
            }
        }
        false
    }

    #[test]
    fn empty_map_costs() {
        let map = known(&["....."; 5]);
        let (a, b) = (GridPos::new(0, 0), GridPos::new(4, 4));
        for kind in [PlannerKind::Dijkstra, PlannerKind::AStar] {
            let p4 = kind.plan(&map, a, b, &four()).unwrap().path.unwrap();
            assert_eq!(p4.cost, 8.0);
            let p8 = kind.plan(&map, a, b, &TraversalPolicy::default()).unwrap().path.unwrap();
            assert!((p8.cost - 4.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
            assert_eq!(p8.steps(), 4);
        }
        let dfs = plan_dfs(&map, a, b, &four()).unwrap().path.unwrap();
        assert!(dfs.cost >= 8.0);
        assert_eq!((dfs.start(), dfs.goal()), (a, b));
    }

    #[test]
    fn walled_goal_is_unreachable() {
        let map = known(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        let goal = GridPos::new(2, 2);
        for policy in [four(), TraversalPolicy::default()] {
            for kind in [PlannerKind::Dijkstra, PlannerKind::AStar, PlannerKind::Dfs] {
                let res = kind.plan(&map, GridPos::new(0, 0), goal, &policy).unwrap();
                assert!(res.path.is_none(), "{kind}");
            }
            assert!(!reachable(&map, GridPos::new(0, 0), goal, &policy));
        }
    }

    #[test]
    fn no_corner_cutting_between_two_obstacles() {
        let map = known(&[".#", "#."]);
        let res = plan_dijkstra(&map, GridPos::new(0, 0), GridPos::new(1, 1), &TraversalPolicy::default()).unwrap();
        assert!(res.path.is_none());
        let map = known(&[".#", ".."]);
        let path = plan_astar(&map, GridPos::new(0, 0), GridPos::new(1, 1), &TraversalPolicy::default())
            .unwrap()
            .path
            .unwrap();
        assert_eq!(path.cells, vec![GridPos::new(0, 0), GridPos::new(1, 1)]);
    }

    #[test]
    fn corridor_dfs_matches_dijkstra() {
        let map = known(&["#.###", "#...#", "###.#", "###.."]);
        let (a, b) = (GridPos::new(0, 1), GridPos::new(3, 4));
        let d = plan_dijkstra(&map, a, b, &four()).unwrap().path.unwrap();
        let f = plan_dfs(&map, a, b, &four()).unwrap().path.unwrap();
        assert_eq!(d.cells, f.cells);
        assert_eq!(d.cost, f.cost);
        assert_eq!(d.cost, 6.0);
    }

    #[test]
    fn start_equals_goal() {
        let map = known(&["..", ".."]);
        let p = GridPos::new(1, 0);
        for kind in [PlannerKind::Dijkstra, PlannerKind::AStar, PlannerKind::Dfs] {
            let path = kind.plan(&map, p, p, &four()).unwrap().path.unwrap();
            assert_eq!(path.cells, vec![p]);
            assert_eq!(path.cost, 0.0);
            assert_eq!(path_cost(&path, &map, &four()).unwrap(), 0.0);
        }
    }

    #[test]
    fn errors() {
        let map = known(&["#.", ".."]);
        let pol = TraversalPolicy::default();
        assert!(matches!(
            plan_dijkstra(&map, GridPos::new(0, 0), GridPos::new(1, 1), &pol),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            plan_dfs(&map, GridPos::new(1, 1), GridPos::new(5, 1), &pol),
            Err(Error::OutOfBounds { .. })
        ));
        let bad = TraversalPolicy { heuristic: Heuristic::Manhattan, ..pol };
        assert!(matches!(plan_astar(&map, GridPos::new(1, 1), GridPos::new(0, 1), &bad), Err(Error::Config(_))));
        let bad = TraversalPolicy { partial_cost_factor: 0.5, ..pol };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn path_cost_checks_steps() {
        let map = known(&["...", "...", "..."]);
        let straight = Path {
            cells: vec![GridPos::new(0, 0), GridPos::new(0, 1), GridPos::new(0, 2), GridPos::new(1, 2)],
            cost: 3.0,
        };
        assert_eq!(path_cost(&straight, &map, &four()).unwrap(), 3.0);
        let jump = Path { cells: vec![GridPos::new(0, 0), GridPos::new(2, 2)], cost: 0.0 };
        assert!(matches!(path_cost(&jump, &map, &four()), Err(Error::InvalidPath(_))));
        let diag = Path { cells: vec![GridPos::new(0, 0), GridPos::new(1, 1)], cost: 0.0 };
        assert!(path_cost(&diag, &map, &four()).is_err());
        assert!(path_cost(&Path { cells: vec![], cost: 0.0 }, &map, &four()).is_err());
    }

    #[test]
    fn partial_step_cost() {
        let truth = GroundTruthField::new(
            2,
            2,
            4,
            vec![false, false, true, false, false, false, false, false],
        )
        .unwrap();
        let map = GridMap::fully_known(&truth, true);
        assert_eq!(map.state(GridPos::new(0, 1)), CellState::PartialObstacle);
        let path = Path { cells: vec![GridPos::new(0, 0), GridPos::new(0, 1)], cost: 1.5 };
        assert_eq!(path_cost(&path, &map, &TraversalPolicy::default()).unwrap(), 1.5);
    }

    #[test]
    fn zero_heuristic_matches_dijkstra_exactly() {
        let map = known(&["......", ".##.#.", "...#..", ".#....", "...##."]);
        let pol = TraversalPolicy { heuristic: Heuristic::Zero, ..Default::default() };
        for goal in map.positions() {
            let a = plan_astar(&map, GridPos::new(0, 0), goal, &pol).unwrap();
            let d = plan_dijkstra(&map, GridPos::new(0, 0), goal, &pol).unwrap();
            assert_eq!(a, d);
        }
    }

    #[test]
    fn unknown_cells_respect_policy() {
        let truth = GroundTruthField::free(1, 5, 1).unwrap();
        let mut map = GridMap::for_field(&truth);
        map.sense(&truth, GridPos::new(0, 0), 1).unwrap();
        let closed = TraversalPolicy { unknown_passable: false, ..Default::default() };
        let goal = GridPos::new(0, 4);
        assert!(plan_dijkstra(&map, GridPos::new(0, 0), goal, &closed).unwrap().path.is_none());
        assert!(plan_dijkstra(&map, GridPos::new(0, 0), goal, &TraversalPolicy::default())
            .unwrap()
            .path
            .is_some());
    }

    #[test]
    fn dfs_follows_fixed_order() {
        let map = known(&["...", "...", "..."]);
        let path = plan_dfs(&map, GridPos::new(1, 1), GridPos::new(2, 0), &four()).unwrap().path.unwrap();
        // N first, then E along the top row, down the right column, and back west
        assert_eq!(path.cells[1], GridPos::new(0, 1));
        assert_eq!(path.goal(), GridPos::new(2, 0));
        assert_eq!(path, plan_dfs(&map, GridPos::new(1, 1), GridPos::new(2, 0), &four()).unwrap().path.unwrap());
    }

    #[test]
    fn cycle_order() {
        let mut k = PlannerKind::AStar;
        let mut seen = vec![];
        for _ in 0..3 {
            k = k.next_in_cycle();
            seen.push(k);
        }
        assert_eq!(seen, [PlannerKind::Dijkstra, PlannerKind::Dfs, PlannerKind::AStar]);
    }

    proptest::proptest! {
        #[test]
        fn planners_agree_on_reachability(seed in 0u64..5000, eight in proptest::bool::ANY) {
            let truth = crate::field_gen::gen_random(8, 9, 0.35, seed, 1).unwrap();
            let map = GridMap::fully_known(&truth, true);
            let policy = if eight { TraversalPolicy::default() } else { four() };
            let start = GridPos::new(0, 0);
            for goal in map.positions() {
                let oracle = reachable(&map, start, goal, &policy);
                let d = plan_dijkstra(&map, start, goal, &policy).unwrap();
                let a = plan_astar(&map, start, goal, &policy).unwrap();
                let f = plan_dfs(&map, start, goal, &policy).unwrap();
                proptest::prop_assert_eq!(d.path.is_some(), oracle);
                proptest::prop_assert_eq!(a.path.is_some(), oracle);
                proptest::prop_assert_eq!(f.path.is_some(), oracle);
                if let (Some(dp), Some(ap), Some(fp)) = (d.path, a.path, f.path) {
                    proptest::prop_assert!((dp.cost - ap.cost).abs() < 1e-9);
                    proptest::prop_assert!(fp.cost >= dp.cost - 1e-9);
                    for p in [&dp, &ap, &fp] {
                        proptest::prop_assert_eq!(p.start(), start);
                        proptest::prop_assert_eq!(p.goal(), goal);
                        proptest::prop_assert!((path_cost(p, &map, &policy).unwrap() - p.cost).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn nearest_matching_agrees_with_full_sweep(seed in 0u64..5000, stride in 2usize..7) {
            let truth = crate::field_gen::gen_random(9, 11, 0.3, seed, 1).unwrap();
            let map = GridMap::fully_known(&truth, true);
            let policy = TraversalPolicy::default();
            let accept = |p: GridPos| p.row + p.col > 0 && (p.row * 11 + p.col).is_multiple_of(stride);
            let dist = cost_sweep(&map, GridPos::new(0, 0), &policy);
            let mut expected: Option<(GridPos, f64)> = None;
            for (i, &d) in dist.iter().enumerate() {
                let p = map.pos(i);
                if d.is_finite() && accept(p) && expected.is_none_or(|(_, best)| d < best) {
                    expected = Some((p, d));
                }
            }
            proptest::prop_assert_eq!(nearest_matching(&map, GridPos::new(0, 0), &policy, accept), expected);
        }
    }
}
