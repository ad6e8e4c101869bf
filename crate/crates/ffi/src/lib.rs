//! C ABI over `cover_forge`.
//!
//! Every fallible function returns a [`CfStatus`]; on failure the message is
//! available from [`cf_last_error_message`] on the same thread. Fields and
//! simulators are opaque handles released with their `_free` function.
//! Strings returned through `out_text` parameters are owned by the caller and
//! released with [`cf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cover_forge::{
    Connectivity, CoverageConfig, CoverageReport, Error, GridMap, GridPos, GroundTruthField, Heuristic, OpState,
    PatternKind, PlannerKind, ScenarioMode, SimCheckpoint, SimEvent, Simulator, TraversalPolicy,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfBounds = 3,
    InvalidTransition = 4,
    InvalidPath = 5,
    Config = 6,
    Parse = 7,
    Generation = 8,
    InvalidState = 9,
    IncompatibleCheckpoint = 10,
    InvalidUtf8 = 11,
    NoPath = 12,
    Panic = 13,
}

/// Values for [`CfConfig::mode`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMode {
    ThreeState = 0,
    FourState = 1,
}

/// Values for [`CfConfig::planner`] and [`CfEvent::planner`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfPlanner {
    AStar = 0,
    Dijkstra = 1,
    Dfs = 2,
}

/// Values for [`CfConfig::heuristic`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfHeuristic {
    Euclidean = 0,
    Manhattan = 1,
    Chebyshev = 2,
    Zero = 3,
}

/// Values for the `kind` argument of [`cf_field_pattern`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfPattern {
    Vertical = 0,
    Horizontal = 1,
    Diagonal = 2,
    Spiral = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfOpState {
    Idle = 0,
    MappingLocalization = 1,
    MapConversion = 2,
    Covering = 3,
    Recovering = 4,
    Complete = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfEventKind {
    StateChanged = 0,
    Moved = 1,
    Sensed = 2,
    Replanned = 3,
    Completed = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CfCell {
    pub row: usize,
    pub col: usize,
}

/// Coverage and planning settings. Enum-valued fields hold the numeric
/// values of [`CfMode`], [`CfPlanner`] and [`CfHeuristic`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfConfig {
    pub mode: u32,
    pub planner: u32,
    pub heuristic: u32,
    /// 4 or 8.
    pub connectivity: u32,
    pub unknown_passable: bool,
    pub partial_cost_factor: f64,
    pub sensor_radius: usize,
    pub switch_on_replan: bool,
    pub max_ticks: u64,
    pub minutes_per_tick: f64,
    pub turn_penalty_ticks: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CfFieldInfo {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub obstacle_fraction: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CfPlanResult {
    pub found: bool,
    pub cost: f64,
    pub expanded: usize,
    /// Number of cells on the path, including both endpoints.
    pub length: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CfReport {
    pub coverage_percent: f64,
    pub ticks: u64,
    pub minutes: f64,
    pub path_length: f64,
    pub turns: u64,
    pub replans: u64,
    pub planner_switches: u64,
    pub partial_cells_identified: u64,
    pub revisits: u64,
    pub trajectory_len: usize,
    pub incomplete: bool,
}

/// One simulator event. Only the fields relevant to `kind` are meaningful.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfEvent {
    pub kind: CfEventKind,
    pub from: CfOpState,
    pub to: CfOpState,
    pub cell: CfCell,
    pub revealed: usize,
    pub planner: CfPlanner,
}

/// Opaque ground-truth field.
pub struct CfField(GroundTruthField);

/// Opaque simulator.
pub struct CfSimulator(Simulator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => CfStatus::InvalidArgument,
            Error::OutOfBounds { .. } => CfStatus::OutOfBounds,
            Error::InvalidTransition { .. } => CfStatus::InvalidTransition,
            Error::InvalidPath(_) => CfStatus::InvalidPath,
            Error::Config(_) => CfStatus::Config,
            Error::Parse { .. } => CfStatus::Parse,
            Error::Generation(_) => CfStatus::Generation,
            Error::InvalidState(_) => CfStatus::InvalidState,
            Error::IncompatibleCheckpoint(_) => CfStatus::IncompatibleCheckpoint,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', "\\0")).expect("interior NULs escaped");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CfStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CfStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(CfStatus::NullPointer, "null pointer argument".into())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn borrow_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(CfStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(CfStatus::InvalidArgument, e.to_string()))?;
    put(out, c.into_raw())
}

fn invalid(message: String) -> Failure {
    Failure(CfStatus::InvalidArgument, message)
}

fn cell(c: CfCell) -> GridPos {
    GridPos::new(c.row, c.col)
}

fn cf_cell(p: GridPos) -> CfCell {
    CfCell { row: p.row, col: p.col }
}

fn planner_kind(v: u32) -> Result<PlannerKind, Failure> {
    match v {
        0 => Ok(PlannerKind::AStar),
        1 => Ok(PlannerKind::Dijkstra),
        2 => Ok(PlannerKind::Dfs),
        _ => Err(invalid(format!("unknown planner {v}"))),
    }
}

fn cf_planner(p: PlannerKind) -> CfPlanner {
    match p {
        PlannerKind::AStar => CfPlanner::AStar,
        PlannerKind::Dijkstra => CfPlanner::Dijkstra,
        PlannerKind::Dfs => CfPlanner::Dfs,
    }
}

fn cf_op_state(s: OpState) -> CfOpState {
    match s {
        OpState::Idle => CfOpState::Idle,
        OpState::MappingLocalization => CfOpState::MappingLocalization,
        OpState::MapConversion => CfOpState::MapConversion,
        OpState::Covering => CfOpState::Covering,
        OpState::Recovering => CfOpState::Recovering,
        OpState::Complete => CfOpState::Complete,
    }
}

impl CfConfig {
    fn to_core(self) -> Result<CoverageConfig, Failure> {
        let mode = match self.mode {
            0 => ScenarioMode::ThreeState,
            1 => ScenarioMode::FourState,
            v => return Err(invalid(format!("unknown mode {v}"))),
        };
        let heuristic = match self.heuristic {
            0 => Heuristic::Euclidean,
            1 => Heuristic::Manhattan,
            2 => Heuristic::Chebyshev,
            3 => Heuristic::Zero,
            v => return Err(invalid(format!("unknown heuristic {v}"))),
        };
        let connectivity = match self.connectivity {
            4 => Connectivity::Four,
            8 => Connectivity::Eight,
            v => return Err(invalid(format!("connectivity must be 4 or 8, got {v}"))),
        };
        Ok(CoverageConfig {
            mode,
            planner: planner_kind(self.planner)?,
            policy: TraversalPolicy {
                connectivity,
                unknown_passable: self.unknown_passable,
                partial_cost_factor: self.partial_cost_factor,
                heuristic,
            },
            sensor_radius: self.sensor_radius,
            switch_on_replan: self.switch_on_replan,
            max_ticks: self.max_ticks,
            minutes_per_tick: self.minutes_per_tick,
            turn_penalty_ticks: self.turn_penalty_ticks,
        })
    }
}

impl Default for CfConfig {
    fn default() -> Self {
        let c = CoverageConfig::default();
        CfConfig {
            mode: match c.mode {
                ScenarioMode::ThreeState => CfMode::ThreeState as u32,
                ScenarioMode::FourState => CfMode::FourState as u32,
            },
            planner: cf_planner(c.planner) as u32,
            heuristic: match c.policy.heuristic {
                Heuristic::Euclidean => CfHeuristic::Euclidean,
                Heuristic::Manhattan => CfHeuristic::Manhattan,
                Heuristic::Chebyshev => CfHeuristic::Chebyshev,
                Heuristic::Zero => CfHeuristic::Zero,
            } as u32,
            connectivity: match c.policy.connectivity {
                Connectivity::Four => 4,
                Connectivity::Eight => 8,
            },
            unknown_passable: c.policy.unknown_passable,
            partial_cost_factor: c.policy.partial_cost_factor,
            sensor_radius: c.sensor_radius,
            switch_on_replan: c.switch_on_replan,
            max_ticks: c.max_ticks,
            minutes_per_tick: c.minutes_per_tick,
            turn_penalty_ticks: c.turn_penalty_ticks,
        }
    }
}

fn cf_report(r: &CoverageReport) -> CfReport {
    CfReport {
        coverage_percent: r.coverage_percent,
        ticks: r.ticks,
        minutes: r.minutes,
        path_length: r.path_length,
        turns: r.turns,
        replans: r.replans,
        planner_switches: r.planner_switches,
        partial_cells_identified: r.partial_cells_identified,
        revisits: r.revisits,
        trajectory_len: r.trajectory.len(),
        incomplete: r.incomplete,
    }
}

fn cf_event(e: SimEvent) -> CfEvent {
    let mut out = CfEvent {
        kind: CfEventKind::Completed,
        from: CfOpState::Idle,
        to: CfOpState::Idle,
        cell: CfCell::default(),
        revealed: 0,
        planner: CfPlanner::AStar,
    };
    match e {
        SimEvent::StateChanged { from, to } => {
            out.kind = CfEventKind::StateChanged;
            out.from = cf_op_state(from);
            out.to = cf_op_state(to);
        }
        SimEvent::Moved { to } => {
            out.kind = CfEventKind::Moved;
            out.cell = cf_cell(to);
        }
        SimEvent::Sensed { revealed } => {
            out.kind = CfEventKind::Sensed;
            out.revealed = revealed;
        }
        SimEvent::Replanned { planner } => {
            out.kind = CfEventKind::Replanned;
            out.planner = cf_planner(planner);
        }
        SimEvent::Completed => {}
    }
    out
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the library's default settings to `out`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_config_default(out: *mut CfConfig) -> CfStatus {
    guard(|| put(out, CfConfig::default()))
}

/// Parses the ASCII field format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_parse(text: *const c_char, out_field: *mut *mut CfField) -> CfStatus {
    guard(|| {
        let field = cover_forge::parse_field(c_str(text)?)?;
        put(out_field, into_handle(CfField(field)))
    })
}

/// # Safety
/// `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_random(
    rows: usize,
    cols: usize,
    threshold: f64,
    seed: u64,
    k: usize,
    out_field: *mut *mut CfField,
) -> CfStatus {
    guard(|| {
        let field = cover_forge::gen_random(rows, cols, threshold, seed, k)?;
        put(out_field, into_handle(CfField(field)))
    })
}

/// # Safety
/// `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_irregular(
    rows: usize,
    cols: usize,
    obstacles: usize,
    seed: u64,
    k: usize,
    out_field: *mut *mut CfField,
) -> CfStatus {
    guard(|| {
        let field = cover_forge::gen_irregular(rows, cols, obstacles, seed, k)?;
        put(out_field, into_handle(CfField(field)))
    })
}

/// # Safety
/// `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_maze_backtracker(
    rows: usize,
    cols: usize,
    seed: u64,
    out_field: *mut *mut CfField,
) -> CfStatus {
    guard(|| {
        let field = cover_forge::gen_maze_backtracker(rows, cols, seed)?;
        put(out_field, into_handle(CfField(field)))
    })
}

/// # Safety
/// `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_maze_dfs(rows: usize, cols: usize, seed: u64, out_field: *mut *mut CfField) -> CfStatus {
    guard(|| {
        let field = cover_forge::gen_maze_dfs(rows, cols, seed)?;
        put(out_field, into_handle(CfField(field)))
    })
}

/// `kind` is a [`CfPattern`] value.
///
/// # Safety
/// `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_pattern(kind: u32, rows: usize, cols: usize, out_field: *mut *mut CfField) -> CfStatus {
    guard(|| {
        let kind = match kind {
            0 => PatternKind::Vertical,
            1 => PatternKind::Horizontal,
            2 => PatternKind::Diagonal,
            3 => PatternKind::Spiral,
            v => return Err(invalid(format!("unknown pattern {v}"))),
        };
        let field = cover_forge::gen_pattern(kind, rows, cols)?;
        put(out_field, into_handle(CfField(field)))
    })
}

/// # Safety
/// `field` must be a live field handle; `out_text` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_serialize(field: *const CfField, out_text: *mut *mut c_char) -> CfStatus {
    guard(|| put_string(out_text, cover_forge::serialize_field(&borrow(field)?.0)))
}

/// # Safety
/// `field` must be a live field handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_field_info(field: *const CfField, out: *mut CfFieldInfo) -> CfStatus {
    guard(|| {
        let f = &borrow(field)?.0;
        put(out, CfFieldInfo { rows: f.rows(), cols: f.cols(), k: f.k(), obstacle_fraction: f.obstacle_fraction() })
    })
}

/// # Safety
/// `field` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_field_free(field: *mut CfField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Plans from `start` to `goal` on the fully known field with the config's
/// planner and traversal settings. Up to `cells_capacity` path cells are
/// copied to `out_cells` (which may be NULL when the capacity is 0).
/// Returns `NoPath` when the goal is unreachable.
///
/// # Safety
/// Handles and out pointers must be valid; `out_cells` must hold
/// `cells_capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn cf_plan(
    field: *const CfField,
    config: *const CfConfig,
    start: CfCell,
    goal: CfCell,
    out: *mut CfPlanResult,
    out_cells: *mut CfCell,
    cells_capacity: usize,
) -> CfStatus {
    guard(|| {
        let truth = &borrow(field)?.0;
        let config = borrow(config)?.to_core()?;
        let map = GridMap::fully_known(truth, true);
        let result = config.planner.plan(&map, cell(start), cell(goal), &config.policy)?;
        let mut summary = CfPlanResult { expanded: result.expanded, ..CfPlanResult::default() };
        let Some(path) = result.path else {
            put(out, summary)?;
            return Err(Failure(CfStatus::NoPath, format!("no path from {} to {}", cell(start), cell(goal))));
        };
        summary.found = true;
        summary.cost = path.cost;
        summary.length = path.cells.len();
        if cells_capacity > 0 {
            if out_cells.is_null() {
                return Err(null());
            }
            let dest = std::slice::from_raw_parts_mut(out_cells, cells_capacity);
            for (slot, &p) in dest.iter_mut().zip(&path.cells) {
                *slot = cf_cell(p);
            }
        }
        put(out, summary)
    })
}

/// Runs the coverage loop to completion without the simulator's mapping pass.
///
/// # Safety
/// Handles and out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_run_coverage(
    field: *const CfField,
    start: CfCell,
    config: *const CfConfig,
    out: *mut CfReport,
) -> CfStatus {
    guard(|| {
        let config = borrow(config)?.to_core()?;
        let report = cover_forge::run_coverage(&borrow(field)?.0, cell(start), &config)?;
        put(out, cf_report(&report))
    })
}

/// Creates a simulator over a copy of `field`. With `known_field` set the
/// robot starts from a fully sensed map and skips mapping.
///
/// # Safety
/// Handles and out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_new(
    field: *const CfField,
    start: CfCell,
    config: *const CfConfig,
    known_field: bool,
    out_sim: *mut *mut CfSimulator,
) -> CfStatus {
    guard(|| {
        let truth = borrow(field)?.0.clone();
        let config = borrow(config)?.to_core()?;
        let known = known_field.then(|| GridMap::fully_known(&truth, config.mode.keeps_partials()));
        let sim = Simulator::new(truth, cell(start), config, known)?;
        put(out_sim, into_handle(CfSimulator(sim)))
    })
}

/// Advances one step. Fails with `InvalidState` once the run is complete.
///
/// # Safety
/// `sim` must be a live handle; `out_event` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_step(sim: *mut CfSimulator, out_event: *mut CfEvent) -> CfStatus {
    guard(|| {
        let event = borrow_mut(sim)?.0.step()?;
        if !out_event.is_null() {
            out_event.write(cf_event(event));
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_state(sim: *const CfSimulator, out: *mut CfOpState) -> CfStatus {
    guard(|| put(out, cf_op_state(borrow(sim)?.0.op_state())))
}

/// Injects a restart; the next step resumes mapping or coverage.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_restart(sim: *mut CfSimulator) -> CfStatus {
    guard(|| {
        borrow_mut(sim)?.0.restart();
        Ok(())
    })
}

/// Steps until complete and writes the final report.
///
/// # Safety
/// `sim` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_run(sim: *mut CfSimulator, out: *mut CfReport) -> CfStatus {
    guard(|| {
        let report = borrow_mut(sim)?.0.run_to_completion()?;
        put(out, cf_report(&report))
    })
}

/// Report for the run so far.
///
/// # Safety
/// `sim` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_report(sim: *const CfSimulator, out: *mut CfReport) -> CfStatus {
    guard(|| put(out, cf_report(&borrow(sim)?.0.report()?)))
}

/// Copies up to `capacity` trajectory cells and writes the full length to
/// `out_len`.
///
/// # Safety
/// `sim` must be a live handle; `out_cells` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_trajectory(
    sim: *const CfSimulator,
    out_cells: *mut CfCell,
    capacity: usize,
    out_len: *mut usize,
) -> CfStatus {
    guard(|| {
        let trajectory = borrow(sim)?.0.report()?.trajectory;
        if capacity > 0 {
            if out_cells.is_null() {
                return Err(null());
            }
            let dest = std::slice::from_raw_parts_mut(out_cells, capacity);
            for (slot, &p) in dest.iter_mut().zip(&trajectory) {
                *slot = cf_cell(p);
            }
        }
        put(out_len, trajectory.len())
    })
}

/// Serializes the full simulator state to checkpoint text.
///
/// # Safety
/// `sim` must be a live handle; `out_text` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_checkpoint(sim: *const CfSimulator, out_text: *mut *mut c_char) -> CfStatus {
    guard(|| put_string(out_text, borrow(sim)?.0.checkpoint().to_text()))
}

/// Rebuilds a simulator from checkpoint text. The field and config must be
/// the ones the checkpoint was taken with.
///
/// # Safety
/// `checkpoint` must be a NUL-terminated string; handles and out pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_restore(
    checkpoint: *const c_char,
    field: *const CfField,
    config: *const CfConfig,
    out_sim: *mut *mut CfSimulator,
) -> CfStatus {
    guard(|| {
        let cp = SimCheckpoint::from_text(c_str(checkpoint)?)?;
        let config = borrow(config)?.to_core()?;
        let sim = Simulator::restore(&cp, borrow(field)?.0.clone(), config)?;
        put(out_sim, into_handle(CfSimulator(sim)))
    })
}

/// # Safety
/// `sim` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_sim_free(sim: *mut CfSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
