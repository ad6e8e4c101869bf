//! Coverage path planning on grid-decomposed fields.
//!
//! The belief map classifies coarse cells as unexplored, covered, obstacle or
//! partial obstacle; partial cells let the robot cover the free space next to
//! obstacles. A greedy loop repeatedly drives to the nearest uncovered cell
//! with a pluggable point-to-point planner (Dijkstra, A*, DFS), sensing as it
//! goes and replanning when new obstacles block the route.

pub mod bench;
pub mod coverage;
pub mod error;
pub mod field_gen;
pub mod grid_map;
pub mod planners;
pub mod render;
pub mod robot_sim;

pub use coverage::{
    count_turns, next_target, run_coverage, CoverageConfig, CoverageEvent, CoverageReport, CoverageRun,
    ScenarioMode,
};
pub use error::{Error, Result};
pub use field_gen::{
    gen_irregular, gen_maze_backtracker, gen_maze_dfs, gen_pattern, gen_random, parse_field, serialize_field,
    PatternKind, Seed,
};
pub use grid_map::{classify_coarse_cell, CellClass, CellState, GridMap, GridPos, GroundTruthField, StateCounts, SubMask};
pub use planners::{
    path_cost, plan_astar, plan_dfs, plan_dijkstra, Connectivity, Heuristic, Path, PlannerKind, SearchResult,
    TraversalPolicy,
};
pub use robot_sim::{OpState, SimCheckpoint, SimEvent, Simulator};
