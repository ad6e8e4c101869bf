//! The online coverage loop: sense, mark, pick the nearest uncovered target,
//! plan, walk one cell per tick while sensing, and replan when new obstacles
//! invalidate the remaining route.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid_map::{classify_coarse_cell, CellClass, CellState, GridMap, GridPos, GroundTruthField};
use crate::planners::{nearest_matching, PlannerKind, TraversalPolicy};

/// Three states with partial cells treated as obstacles, or the full
/// four-state taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioMode {
    ThreeState,
    FourState,
}

impl ScenarioMode {
    pub fn keeps_partials(self) -> bool {
        self == ScenarioMode::FourState
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioMode::ThreeState => "three-state",
            ScenarioMode::FourState => "four-state",
        }
    }
}

impl fmt::Display for ScenarioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "three-state" | "three" | "3" => Ok(Self::ThreeState),
            "four-state" | "four" | "4" => Ok(Self::FourState),
            other => Err(Error::InvalidArgument(format!("unknown scenario mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub mode: ScenarioMode,
    pub planner: PlannerKind,
    pub policy: TraversalPolicy,
    /// Chebyshev sensing radius in coarse cells.
    pub sensor_radius: usize,
    /// Rotate A* -> Dijkstra -> DFS on every replan.
    pub switch_on_replan: bool,
    pub max_ticks: u64,
    pub minutes_per_tick: f64,
    /// Extra ticks charged for each change of heading.
    pub turn_penalty_ticks: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            mode: ScenarioMode::FourState,
            planner: PlannerKind::AStar,
            policy: TraversalPolicy::default(),
            sensor_radius: 2,
            switch_on_replan: true,
            max_ticks: 1_000_000,
            minutes_per_tick: 0.05,
            turn_penalty_ticks: 0,
        }
    }
}

impl CoverageConfig {
    pub fn with_mode(mode: ScenarioMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        self.policy.validate()?;
        if self.max_ticks < (rows * cols) as u64 {
            return Err(Error::Config(format!(
                "max_ticks {} is below the cell count {}",
                self.max_ticks,
                rows * cols
            )));
        }
        if !(self.minutes_per_tick > 0.0 && self.minutes_per_tick.is_finite()) {
            return Err(Error::Config("minutes_per_tick must be positive".into()));
        }
        Ok(())
    }

    /// Canonical text form, used for checkpoint digests.
    pub fn canonical(&self) -> String {
        format!(
            "mode={};planner={};connectivity={:?};unknown_passable={};partial_cost_factor={:?};heuristic={:?};\
             sensor_radius={};switch_on_replan={};max_ticks={};minutes_per_tick={:?};turn_penalty_ticks={}",
            self.mode,
            self.planner,
            self.policy.connectivity,
            self.policy.unknown_passable,
            self.policy.partial_cost_factor,
            self.policy.heuristic,
            self.sensor_radius,
            self.switch_on_replan,
            self.max_ticks,
            self.minutes_per_tick,
            self.turn_penalty_ticks,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub coverage_percent: f64,
    pub ticks: u64,
    /// `ticks * minutes_per_tick`.
    pub minutes: f64,
    /// Geometric length walked, in coarse cells.
    pub path_length: f64,
    pub turns: u64,
    pub replans: u64,
    pub planner_switches: u64,
    pub partial_cells_identified: u64,
    /// Distinct cells entered more than once.
    pub revisits: u64,
    pub trajectory: Vec<GridPos>,
    /// The run stopped on `max_ticks` before coverage finished.
    pub incomplete: bool,
}

/// Whether `p` is still a coverage target under `mode`.
pub fn is_candidate(map: &GridMap, p: GridPos, mode: ScenarioMode) -> bool {
    match map.state(p) {
        CellState::Unexplored => true,
        CellState::PartialObstacle => mode.keeps_partials() && map.is_uncovered_partial(p),
        _ => false,
    }
}

/// Nearest candidate by policy path cost from `pose`, ties broken row-major.
pub fn next_target(map: &GridMap, pose: GridPos, mode: ScenarioMode, policy: &TraversalPolicy) -> Option<GridPos> {
    nearest_matching(map, pose, policy, |p| is_candidate(map, p, mode)).map(|(p, _)| p)
}

fn direction(a: GridPos, b: GridPos) -> (isize, isize) {
    (b.row as isize - a.row as isize, b.col as isize - a.col as isize)
}

/// Number of interior trajectory points where the heading changes.
pub fn count_turns(trajectory: &[GridPos]) -> u64 {
    trajectory
        .windows(3)
        .filter(|w| direction(w[0], w[1]) != direction(w[1], w[2]))
        .count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageEvent {
    /// Initial sensing sweep at the start pose.
    Sensed { revealed: usize },
    Moved { to: GridPos },
    Replanned { planner: PlannerKind },
    Completed,
}

/// Checks that the start cell can be occupied under `mode`.
pub fn check_start(truth: &GroundTruthField, start: GridPos, mode: ScenarioMode) -> Result<()> {
    match classify_coarse_cell(truth, start)? {
        CellClass::Free => Ok(()),
        CellClass::Partial(_) if mode.keeps_partials() => Ok(()),
        _ => Err(Error::InvalidArgument(format!("start {start} is blocked"))),
    }
}

/// Resumable coverage loop. Each [`CoverageRun::step`] performs one unit of
/// work and reports it as a [`CoverageEvent`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRun {
    pub(crate) config: CoverageConfig,
    pub(crate) map: GridMap,
    pub(crate) pose: GridPos,
    pub(crate) started: bool,
    pub(crate) finished: bool,
    pub(crate) incomplete: bool,
    pub(crate) ticks: u64,
    pub(crate) path_length: f64,
    pub(crate) turns: u64,
    pub(crate) replans: u64,
    pub(crate) switches: u64,
    pub(crate) revisits: u64,
    pub(crate) trajectory: Vec<GridPos>,
    /// Times each cell has been entered, the start counting as one.
    pub(crate) visits: Vec<u32>,
    pub(crate) planner: PlannerKind,
    pub(crate) target: Option<GridPos>,
    pub(crate) route: VecDeque<GridPos>,
    pub(crate) needs_replan: bool,
}

impl CoverageRun {
    pub fn new(truth: &GroundTruthField, start: GridPos, config: CoverageConfig) -> Result<Self> {
        Self::with_map(truth, start, config, GridMap::for_field(truth))
    }

    /// Starts from an existing belief map instead of a blank one.
    pub fn with_map(truth: &GroundTruthField, start: GridPos, config: CoverageConfig, map: GridMap) -> Result<Self> {
        config.validate(truth.rows(), truth.cols())?;
        check_start(truth, start, config.mode)?;
        if (map.rows(), map.cols(), map.k()) != (truth.rows(), truth.cols(), truth.k()) {
            return Err(Error::InvalidArgument("belief map does not match the field".into()));
        }
        let mut visits = vec![0; map.len()];
        visits[map.index(start)] = 1;
        Ok(Self {
            planner: config.planner,
            config,
            map,
            pose: start,
            started: false,
            finished: false,
            incomplete: false,
            ticks: 0,
            path_length: 0.0,
            turns: 0,
            replans: 0,
            switches: 0,
            revisits: 0,
            trajectory: vec![start],
            visits,
            target: None,
            route: VecDeque::new(),
            needs_replan: false,
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn pose(&self) -> GridPos {
        self.pose
    }

    pub fn config(&self) -> &CoverageConfig {
        &self.config
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn target(&self) -> Option<GridPos> {
        self.target
    }

    pub fn current_planner(&self) -> PlannerKind {
        self.planner
    }

    fn sense(&mut self, truth: &GroundTruthField, at: GridPos, radius: usize) -> Result<usize> {
        Ok(self.map.sense_with(truth, at, radius, self.config.mode.keeps_partials())?.len())
    }

    pub fn step(&mut self, truth: &GroundTruthField) -> Result<CoverageEvent> {
        if self.finished {
            return Err(Error::InvalidState("coverage run already finished".into()));
        }
        if !self.started {
            self.started = true;
            let revealed = self.sense(truth, self.pose, self.config.sensor_radius)?;
            self.map.mark_covered(self.pose)?;
            return Ok(CoverageEvent::Sensed { revealed });
        }
        if self.needs_replan {
            return self.replan();
        }
        if self.ticks >= self.config.max_ticks {
            self.incomplete = true;
            return Ok(self.finish());
        }
        if self.route.is_empty() {
            let Some(target) = next_target(&self.map, self.pose, self.config.mode, &self.config.policy) else {
                return Ok(self.finish());
            };
            self.target = Some(target);
            self.route = self.plan_to(target)?.ok_or_else(|| {
                Error::InvalidState(format!("{} found no path to reachable target {target}", self.planner))
            })?;
        }
        let next = *self.route.front().expect("route is non-empty");

        // bump-probe the cells the move depends on when the sensor has not seen them
        let mut probes = vec![next];
        if next.row != self.pose.row && next.col != self.pose.col {
            probes.push(GridPos::new(self.pose.row, next.col));
            probes.push(GridPos::new(next.row, self.pose.col));
        }
        for p in probes {
            if !self.map.is_sensed(p) {
                self.sense(truth, p, 0)?;
            }
        }
        if self.config.policy.step_cost(&self.map, self.pose, next).is_none() {
            return self.replan();
        }

        self.route.pop_front();
        let heading = direction(self.pose, next);
        if let [.., before, last] = self.trajectory[..] {
            if direction(before, last) != heading {
                self.turns += 1;
                self.ticks += self.config.turn_penalty_ticks;
            }
        }
        self.ticks += 1;
        self.path_length += if heading.0 != 0 && heading.1 != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
        let i = self.map.index(next);
        self.visits[i] += 1;
        if self.visits[i] == 2 {
            self.revisits += 1;
        }
        self.pose = next;
        self.trajectory.push(next);
        self.map.mark_covered(next)?;
        self.sense(truth, next, self.config.sensor_radius)?;
        if !self.route_is_valid() {
            self.needs_replan = true;
        }
        Ok(CoverageEvent::Moved { to: next })
    }

    fn finish(&mut self) -> CoverageEvent {
        self.finished = true;
        self.route.clear();
        self.target = None;
        CoverageEvent::Completed
    }

    fn plan_to(&self, target: GridPos) -> Result<Option<VecDeque<GridPos>>> {
        let result = self.planner.plan(&self.map, self.pose, target, &self.config.policy)?;
        Ok(result.path.map(|p| p.cells.into_iter().skip(1).collect()))
    }

    fn route_is_valid(&self) -> bool {
        let mut at = self.pose;
        for &next in &self.route {
            if self.config.policy.step_cost(&self.map, at, next).is_none() {
                return false;
            }
            at = next;
        }
        true
    }

    fn replan(&mut self) -> Result<CoverageEvent> {
        self.needs_replan = false;
        self.replans += 1;
        if self.config.switch_on_replan {
            self.planner = self.planner.next_in_cycle();
            self.switches += 1;
        }
        self.route.clear();
        if let Some(target) = self.target.filter(|&t| is_candidate(&self.map, t, self.config.mode)) {
            if let Some(route) = self.plan_to(target)? {
                self.route = route;
                return Ok(CoverageEvent::Replanned { planner: self.planner });
            }
        }
        self.target = next_target(&self.map, self.pose, self.config.mode, &self.config.policy);
        if let Some(target) = self.target {
            self.route = self.plan_to(target)?.ok_or_else(|| {
                Error::InvalidState(format!("{} found no path to reachable target {target}", self.planner))
            })?;
        }
        Ok(CoverageEvent::Replanned { planner: self.planner })
    }

    /// Report for the run so far.
    pub fn report(&self, truth: &GroundTruthField) -> Result<CoverageReport> {
        let partial_cells_identified = match self.config.mode {
            ScenarioMode::FourState => self.map.state_counts().partial as u64,
            ScenarioMode::ThreeState => 0,
        };
        Ok(CoverageReport {
            coverage_percent: self.map.coverage_percent(truth)?,
            ticks: self.ticks,
            minutes: self.ticks as f64 * self.config.minutes_per_tick,
            path_length: self.path_length,
            turns: self.turns,
            replans: self.replans,
            planner_switches: self.switches,
            partial_cells_identified,
            revisits: self.revisits,
            trajectory: self.trajectory.clone(),
            incomplete: self.incomplete,
        })
    }
}

/// Runs the coverage loop to completion.
pub fn run_coverage(truth: &GroundTruthField, start: GridPos, config: &CoverageConfig) -> Result<CoverageReport> {
    let mut run = CoverageRun::new(truth, start, config.clone())?;
    while !run.is_finished() {
        run.step(truth)?;
    }
    run.report(truth)
}
