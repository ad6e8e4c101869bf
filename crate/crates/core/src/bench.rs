//! Scenario benchmark matrix: runs x coverage variants, rendered as CSV or a
//! Markdown table with per-variant means.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::coverage::{run_coverage, CoverageConfig, CoverageReport, ScenarioMode};
use crate::error::{Error, Result};
use crate::field_gen::{gen_irregular, gen_maze_backtracker, gen_maze_dfs, gen_pattern, gen_random, PatternKind, Seed};
use crate::grid_map::{GridPos, GroundTruthField};
use crate::planners::PlannerKind;

/// Environment variable capping bench parallelism.
pub const THREADS_ENV: &str = "COVER_FORGE_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum FieldGenerator {
    Random { rows: usize, cols: usize, threshold: f64, k: usize },
    Irregular { rows: usize, cols: usize, obstacles: usize, k: usize },
    MazeBacktracker { rows: usize, cols: usize },
    MazeDfs { rows: usize, cols: usize },
    Pattern { kind: PatternKind, rows: usize, cols: usize },
}

impl FieldGenerator {
    pub fn generate(&self, seed: Seed) -> Result<GroundTruthField> {
        match *self {
            FieldGenerator::Random { rows, cols, threshold, k } => gen_random(rows, cols, threshold, seed, k),
            FieldGenerator::Irregular { rows, cols, obstacles, k } => gen_irregular(rows, cols, obstacles, seed, k),
            FieldGenerator::MazeBacktracker { rows, cols } => gen_maze_backtracker(rows, cols, seed),
            FieldGenerator::MazeDfs { rows, cols } => gen_maze_dfs(rows, cols, seed),
            FieldGenerator::Pattern { kind, rows, cols } => gen_pattern(kind, rows, cols),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    /// Run `i` uses `seeds[i % seeds.len()]`.
    Generated { generator: FieldGenerator, seeds: Vec<Seed> },
    Fixed(GroundTruthField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub source: FieldSource,
    pub variants: Vec<CoverageConfig>,
    pub runs: usize,
    pub start: GridPos,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument("bench needs at least one variant".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidArgument("bench needs at least one run".into()));
        }
        if let FieldSource::Generated { seeds, .. } = &self.source {
            if seeds.is_empty() {
                return Err(Error::InvalidArgument("bench needs at least one seed".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// 1-based run number.
    pub run: usize,
    pub mode: ScenarioMode,
    pub planner: PlannerKind,
    pub report: CoverageReport,
}

/// Reads the thread cap from [`THREADS_ENV`]; unset or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every (run, variant) cell. Rows come back in spec order regardless
/// of how many threads executed them.
pub fn run_bench(spec: &BenchSpec, threads: Option<usize>) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let fields: Vec<GroundTruthField> = (0..spec.runs)
        .map(|i| match &spec.source {
            FieldSource::Generated { generator, seeds } => generator.generate(seeds[i % seeds.len()]),
            FieldSource::Fixed(field) => Ok(field.clone()),
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, &CoverageConfig)> =
        (0..spec.runs).flat_map(|run| spec.variants.iter().map(move |v| (run, v))).collect();

    let execute = || {
        jobs.par_iter()
            .map(|&(run, config)| {
                let report = run_coverage(&fields[run], spec.start, config)?;
                Ok(BenchRow { run: run + 1, mode: config.mode, planner: config.planner, report })
            })
            .collect::<Result<Vec<_>>>()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidState(format!("thread pool: {e}")))?;
    pool.install(execute)
}

pub const CSV_HEADER: [&str; 10] = [
    "run",
    "mode",
    "planner",
    "ticks",
    "minutes",
    "coverage_percent",
    "partial_cells",
    "replans",
    "switches",
    "turns",
];

fn row_fields(row: &BenchRow) -> [String; 10] {
    let r = &row.report;
    [
        row.run.to_string(),
        row.mode.to_string(),
        row.planner.to_string(),
        r.ticks.to_string(),
        format!("{:.2}", r.minutes),
        format!("{:.2}", r.coverage_percent),
        r.partial_cells_identified.to_string(),
        r.replans.to_string(),
        r.planner_switches.to_string(),
        r.turns.to_string(),
    ]
}

/// Comma-separated, header row, LF line endings.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        writer.write_record(row_fields(row)).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub mode: ScenarioMode,
    pub planner: PlannerKind,
    pub runs: usize,
    pub mean_ticks: f64,
    pub mean_minutes: f64,
    pub mean_coverage: f64,
    pub mean_partial_cells: f64,
    pub mean_replans: f64,
    pub mean_switches: f64,
    pub mean_turns: f64,
}

/// Per-variant means, in order of first appearance.
pub fn summarize(rows: &[BenchRow]) -> Vec<VariantSummary> {
    let mut keys: Vec<(ScenarioMode, PlannerKind)> = Vec::new();
    for row in rows {
        if !keys.contains(&(row.mode, row.planner)) {
            keys.push((row.mode, row.planner));
        }
    }
    keys.into_iter()
        .map(|(mode, planner)| {
            let group: Vec<&CoverageReport> =
                rows.iter().filter(|r| r.mode == mode && r.planner == planner).map(|r| &r.report).collect();
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&CoverageReport) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            VariantSummary {
                mode,
                planner,
                runs: group.len(),
                mean_ticks: mean(&|r| r.ticks as f64),
                mean_minutes: mean(&|r| r.minutes),
                mean_coverage: mean(&|r| r.coverage_percent),
                mean_partial_cells: mean(&|r| r.partial_cells_identified as f64),
                mean_replans: mean(&|r| r.replans as f64),
                mean_switches: mean(&|r| r.planner_switches as f64),
                mean_turns: mean(&|r| r.turns as f64),
            }
        })
        .collect()
}

pub fn to_markdown(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    writeln!(out, "| {} |", CSV_HEADER.join(" | ")).unwrap();
    writeln!(out, "|{}", "---|".repeat(CSV_HEADER.len())).unwrap();
    for row in rows {
        writeln!(out, "| {} |", row_fields(row).join(" | ")).unwrap();
    }
    out.push('\n');
    out.push_str(&summary_block(rows));
    out
}

pub fn summary_block(rows: &[BenchRow]) -> String {
    let mut out = String::from("summary (per-variant means)\n");
    for s in summarize(rows) {
        writeln!(
            out,
            "  {} {}: runs={} ticks={:.2} minutes={:.2} coverage={:.2}% partial_cells={:.2} replans={:.2} switches={:.2} turns={:.2}",
            s.mode,
            s.planner,
            s.runs,
            s.mean_ticks,
            s.mean_minutes,
            s.mean_coverage,
            s.mean_partial_cells,
            s.mean_replans,
            s.mean_switches,
            s.mean_turns
        )
        .unwrap();
    }
    out
}

pub fn render_rows(rows: &[BenchRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Markdown => to_markdown(rows),
    }
}
