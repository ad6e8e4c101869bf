use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cover_forge::bench::{self, BenchSpec, FieldGenerator, FieldSource, OutputFormat};
use cover_forge::field_gen::{parse_pgm, serialize_pgm};
use cover_forge::render::{parse_trajectory, render_ascii, render_pgm, render_svg, serialize_trajectory};
use cover_forge::{
    parse_field, serialize_field, Connectivity, CoverageConfig, Error, GridMap, GridPos, GroundTruthField, Heuristic,
    PatternKind, PlannerKind, ScenarioMode, SimCheckpoint, Simulator, TraversalPolicy,
};

const EXIT_USAGE: u8 = 2;
const EXIT_NO_PATH: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "cover-forge", version, about = "Grid coverage path planning and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth field file.
    Generate {
        #[command(subcommand)]
        generator: GenerateCmd,
    },
    /// Plan a single point-to-point path on a fully known field.
    Plan(PlanArgs),
    /// Run the coverage simulator on a field.
    Cover(CoverArgs),
    /// Run the scenario benchmark matrix.
    Bench(BenchArgs),
    /// Render a field, belief map and trajectory.
    Render(RenderArgs),
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file; the field goes to stdout when omitted.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FieldFormat::Ascii)]
    format: FieldFormat,
}

#[derive(Copy, Clone, ValueEnum)]
enum FieldFormat {
    Ascii,
    Pgm,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Whole coarse cells blocked independently with probability `threshold`.
    Random {
        #[arg(long, default_value_t = 25)]
        rows: usize,
        #[arg(long, default_value_t = 50)]
        cols: usize,
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Random-walk blobs of fine sub-cells that straddle coarse cells.
    Irregular {
        #[arg(long, default_value_t = 20)]
        rows: usize,
        #[arg(long, default_value_t = 20)]
        cols: usize,
        #[arg(long, default_value_t = 2)]
        obstacles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recursive-backtracker maze.
    MazeBacktracker {
        #[arg(long, default_value_t = 25)]
        rows: usize,
        #[arg(long, default_value_t = 50)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Explicit-stack DFS maze.
    MazeDfs {
        #[arg(long, default_value_t = 25)]
        rows: usize,
        #[arg(long, default_value_t = 50)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Seedless geometric pattern.
    Pattern {
        #[arg(long, value_enum)]
        kind: PatternArg,
        #[arg(long, default_value_t = 25)]
        rows: usize,
        #[arg(long, default_value_t = 50)]
        cols: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum PatternArg {
    Vertical,
    Horizontal,
    Diagonal,
    Spiral,
}

impl From<PatternArg> for PatternKind {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Vertical => PatternKind::Vertical,
            PatternArg::Horizontal => PatternKind::Horizontal,
            PatternArg::Diagonal => PatternKind::Diagonal,
            PatternArg::Spiral => PatternKind::Spiral,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PlannerArg {
    Astar,
    Dijkstra,
    Dfs,
}

impl From<PlannerArg> for PlannerKind {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Astar => PlannerKind::AStar,
            PlannerArg::Dijkstra => PlannerKind::Dijkstra,
            PlannerArg::Dfs => PlannerKind::Dfs,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum HeuristicArg {
    Euclidean,
    Manhattan,
    Chebyshev,
    Zero,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Euclidean => Heuristic::Euclidean,
            HeuristicArg::Manhattan => Heuristic::Manhattan,
            HeuristicArg::Chebyshev => Heuristic::Chebyshev,
            HeuristicArg::Zero => Heuristic::Zero,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Three,
    Four,
}

impl From<ModeArg> for ScenarioMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Three => ScenarioMode::ThreeState,
            ModeArg::Four => ScenarioMode::FourState,
        }
    }
}

#[derive(Args, Clone)]
struct PolicyArgs {
    /// 4 or 8.
    #[arg(long, default_value_t = 8, value_parser = parse_connectivity)]
    connectivity: u8,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Euclidean)]
    heuristic: HeuristicArg,
    #[arg(long, default_value_t = 1.5)]
    partial_cost: f64,
}

impl PolicyArgs {
    fn policy(&self, unknown_passable: bool) -> TraversalPolicy {
        TraversalPolicy {
            connectivity: if self.connectivity == 4 { Connectivity::Four } else { Connectivity::Eight },
            unknown_passable,
            partial_cost_factor: self.partial_cost,
            heuristic: self.heuristic.into(),
        }
    }
}

fn parse_connectivity(s: &str) -> Result<u8, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err(format!("connectivity must be 4 or 8, got {s:?}")),
    }
}

fn parse_cell(s: &str) -> Result<GridPos, String> {
    let (r, c) = s.split_once(',').ok_or_else(|| format!("expected row,col, got {s:?}"))?;
    let row = r.trim().parse().map_err(|_| format!("bad row in {s:?}"))?;
    let col = c.trim().parse().map_err(|_| format!("bad column in {s:?}"))?;
    Ok(GridPos::new(row, col))
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_enum, default_value_t = PlannerArg::Astar)]
    planner: PlannerArg,
    #[arg(long, value_parser = parse_cell)]
    start: GridPos,
    #[arg(long, value_parser = parse_cell)]
    goal: GridPos,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Print every path cell.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Args, Clone)]
struct CoverageArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Four)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = PlannerArg::Astar)]
    planner: PlannerArg,
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 2)]
    radius: usize,
    /// Keep the same planner on every replan.
    #[arg(long)]
    no_switch: bool,
    /// Never plan through unsensed cells.
    #[arg(long)]
    pessimistic: bool,
    #[arg(long, default_value_t = 1_000_000)]
    max_ticks: u64,
    #[arg(long, default_value_t = 0.05)]
    minutes_per_tick: f64,
    #[arg(long, default_value_t = 0)]
    turn_penalty: u64,
}

impl CoverageArgs {
    fn config(&self, mode: ScenarioMode, planner: PlannerKind) -> CoverageConfig {
        CoverageConfig {
            mode,
            planner,
            policy: self.policy.policy(!self.pessimistic),
            sensor_radius: self.radius,
            switch_on_replan: !self.no_switch,
            max_ticks: self.max_ticks,
            minutes_per_tick: self.minutes_per_tick,
            turn_penalty_ticks: self.turn_penalty,
        }
    }
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_parser = parse_cell, default_value = "0,0")]
    start: GridPos,
    #[command(flatten)]
    coverage: CoverageArgs,
    /// Skip the mapping pass and start from a fully sensed map.
    #[arg(long)]
    known: bool,
    /// Write a checkpoint every N simulator steps (requires --checkpoint-dir).
    #[arg(long, requires = "checkpoint_dir")]
    checkpoint_every: Option<u64>,
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Write the final simulator state as a checkpoint file.
    #[arg(long)]
    final_checkpoint: Option<PathBuf>,
    /// Resume from a checkpoint file.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Field file used for every run (instead of a generator).
    #[arg(long, conflicts_with = "generator")]
    field: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GeneratorArg::Irregular)]
    generator: GeneratorArg,
    #[arg(long, default_value_t = 20)]
    rows: usize,
    #[arg(long, default_value_t = 20)]
    cols: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    obstacles: usize,
    #[arg(long, default_value_t = 0.2)]
    threshold: f64,
    #[arg(long, value_enum)]
    kind: Option<PatternArg>,
    /// Comma-separated seeds; run i uses seed i modulo the list length.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3])]
    seeds: Vec<u64>,
    /// Runs per variant (defaults to the number of seeds).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Three, ModeArg::Four])]
    modes: Vec<ModeArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PlannerArg::Astar])]
    planners: Vec<PlannerArg>,
    #[arg(long, value_parser = parse_cell, default_value = "0,0")]
    start: GridPos,
    #[command(flatten)]
    coverage: CoverageArgs,
    #[arg(long, value_enum, default_value_t = TableFormat::Markdown)]
    format: TableFormat,
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Thread cap; overrides COVER_FORGE_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum GeneratorArg {
    Random,
    Irregular,
    MazeBacktracker,
    MazeDfs,
    Pattern,
}

#[derive(Copy, Clone, ValueEnum)]
enum TableFormat {
    Csv,
    Markdown,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Checkpoint whose belief map is drawn instead of the ground truth.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RenderFormat::Ascii)]
    format: RenderFormat,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum RenderFormat {
    Ascii,
    Pgm,
    Svg,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::OutOfBounds { .. } | Error::Config(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &FsPath) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &FsPath, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))
}

/// Loads a field file, accepting the ASCII format or plain PGM.
fn load_field(path: &FsPath) -> Result<GroundTruthField, Failure> {
    let text = read(path)?;
    let parsed = if text.starts_with("P2") { parse_pgm(&text) } else { parse_field(&text) };
    parsed.map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn cmd_generate(generator: GenerateCmd) -> CmdResult {
    let (field, out) = match generator {
        GenerateCmd::Random { rows, cols, threshold, seed, k, out } => {
            (cover_forge::gen_random(rows, cols, threshold, seed, k), out)
        }
        GenerateCmd::Irregular { rows, cols, obstacles, seed, k, out } => {
            (cover_forge::gen_irregular(rows, cols, obstacles, seed, k), out)
        }
        GenerateCmd::MazeBacktracker { rows, cols, seed, out } => {
            (cover_forge::gen_maze_backtracker(rows, cols, seed), out)
        }
        GenerateCmd::MazeDfs { rows, cols, seed, out } => (cover_forge::gen_maze_dfs(rows, cols, seed), out),
        GenerateCmd::Pattern { kind, rows, cols, out } => (cover_forge::gen_pattern(kind.into(), rows, cols), out),
    };
    let field = field.map_err(|e| Failure::usage(e.to_string()))?;
    let text = match out.format {
        FieldFormat::Ascii => serialize_field(&field),
        FieldFormat::Pgm => serialize_pgm(&field),
    };
    let summary = format!(
        "rows={} cols={} k={} obstacle_fraction={:.4}",
        field.rows(),
        field.cols(),
        field.k(),
        field.obstacle_fraction()
    );
    match out.output {
        Some(path) => {
            write(&path, &text)?;
            println!("{summary}");
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> CmdResult {
    let truth = load_field(&args.field)?;
    let map = GridMap::fully_known(&truth, true);
    let planner: PlannerKind = args.planner.into();
    let policy = args.policy.policy(false);
    let result = planner.plan(&map, args.start, args.goal, &policy)?;
    println!("planner: {planner}");
    println!("expanded: {}", result.expanded);
    match result.path {
        Some(path) => {
            println!("cost: {:.6}", path.cost);
            println!("length: {}", path.steps());
            if args.trajectory {
                print!("{}", serialize_trajectory(&path.cells));
            }
            Ok(())
        }
        None => {
            println!("cost: none");
            Err(Failure { code: EXIT_NO_PATH, message: format!("no path from {} to {}", args.start, args.goal) })
        }
    }
}

fn cmd_cover(args: CoverArgs) -> CmdResult {
    let truth = load_field(&args.field)?;
    let cov = &args.coverage;
    let config = cov.config(cov.mode.into(), cov.planner.into());
    let mut sim = match &args.resume {
        Some(path) => {
            let cp = SimCheckpoint::from_text(&read(path)?)?;
            Simulator::restore(&cp, truth, config)?
        }
        None => {
            let known = args.known.then(|| GridMap::fully_known(&truth, config.mode == ScenarioMode::FourState));
            Simulator::new(truth, args.start, config, known)?
        }
    };
    if let Some(dir) = &args.checkpoint_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    while sim.op_state() != cover_forge::OpState::Complete {
        sim.step()?;
        if let (Some(every), Some(dir)) = (args.checkpoint_every, &args.checkpoint_dir) {
            if every > 0 && sim.steps() % every == 0 {
                let path = dir.join(format!("checkpoint-{:08}.txt", sim.steps()));
                write(&path, &sim.checkpoint().to_text())?;
            }
        }
    }
    let report = sim.report()?;
    let counts = sim.map().state_counts();
    println!("coverage_percent: {:.4}", report.coverage_percent);
    println!("ticks: {}", report.ticks);
    println!("minutes: {:.4}", report.minutes);
    println!("path_length: {:.4}", report.path_length);
    println!("turns: {}", report.turns);
    println!("replans: {}", report.replans);
    println!("planner_switches: {}", report.planner_switches);
    println!("partial_cells_identified: {}", report.partial_cells_identified);
    println!("revisits: {}", report.revisits);
    println!("mapping_ticks: {}", sim.mapping_ticks());
    println!(
        "cells: unexplored={} covered={} obstacle={} partial={}",
        counts.unexplored, counts.covered, counts.obstacle, counts.partial
    );
    println!("incomplete: {}", report.incomplete);
    if let Some(path) = &args.trajectory_out {
        write(path, &serialize_trajectory(&report.trajectory))?;
    }
    if let Some(path) = &args.final_checkpoint {
        write(path, &sim.checkpoint().to_text())?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let runs = args.runs.unwrap_or(args.seeds.len());
    let source = match &args.field {
        Some(path) => FieldSource::Fixed(load_field(path)?),
        None => {
            let (rows, cols) = (args.rows, args.cols);
            let generator = match args.generator {
                GeneratorArg::Random => FieldGenerator::Random { rows, cols, threshold: args.threshold, k: args.k },
                GeneratorArg::Irregular => FieldGenerator::Irregular { rows, cols, obstacles: args.obstacles, k: args.k },
                GeneratorArg::MazeBacktracker => FieldGenerator::MazeBacktracker { rows, cols },
                GeneratorArg::MazeDfs => FieldGenerator::MazeDfs { rows, cols },
                GeneratorArg::Pattern => {
                    let kind = args.kind.ok_or_else(|| Failure::usage("--kind is required for the pattern generator"))?;
                    FieldGenerator::Pattern { kind: kind.into(), rows, cols }
                }
            };
            FieldSource::Generated { generator, seeds: args.seeds.clone() }
        }
    };
    let mut variants = Vec::new();
    for &mode in &args.modes {
        for &planner in &args.planners {
            variants.push(args.coverage.config(mode.into(), planner.into()));
        }
    }
    let spec = BenchSpec { source, variants, runs, start: args.start };
    spec.validate()?;
    let threads = args.threads.or_else(bench::threads_from_env);
    let rows = bench::run_bench(&spec, threads).map_err(|e| Failure::runtime(e.to_string()))?;
    match args.format {
        TableFormat::Csv => {
            print!("{}", bench::render_rows(&rows, OutputFormat::Csv));
            eprint!("{}", bench::summary_block(&rows));
        }
        TableFormat::Markdown => print!("{}", bench::render_rows(&rows, OutputFormat::Markdown)),
    }
    if let Some(path) = &args.csv_out {
        write(path, &bench::to_csv(&rows))?;
    }
    Ok(())
}

fn cmd_render(args: RenderArgs) -> CmdResult {
    let truth = load_field(&args.field)?;
    let trajectory = match &args.trajectory {
        Some(path) => parse_trajectory(&read(path)?)?,
        None => Vec::new(),
    };
    if let Some(p) = trajectory.iter().find(|p| !truth.contains(**p)) {
        return Err(Failure::usage(format!("trajectory cell {p} is outside the field")));
    }
    let belief = match &args.checkpoint {
        Some(path) => {
            let map = SimCheckpoint::from_text(&read(path)?)?.map;
            if (map.rows(), map.cols()) != (truth.rows(), truth.cols()) {
                return Err(Failure::usage("checkpoint map does not match the field"));
            }
            Some(map)
        }
        None => None,
    };
    let text = match args.format {
        RenderFormat::Ascii => render_ascii(&truth, belief.as_ref(), &trajectory),
        RenderFormat::Pgm => render_pgm(&truth, belief.as_ref(), &trajectory),
        RenderFormat::Svg => render_svg(&truth, belief.as_ref(), &trajectory),
    }?;
    match &args.output {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { generator } => cmd_generate(generator),
        Command::Plan(args) => cmd_plan(args),
        Command::Cover(args) => cmd_cover(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
