//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line under `cargo test`.

use std::collections::VecDeque;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cover_forge::{
    gen_irregular, gen_maze_backtracker, gen_maze_dfs, gen_pattern, gen_random, parse_field, plan_astar, plan_dijkstra,
    serialize_field, CellState, Connectivity, CoverageConfig, CoverageRun, GridMap, GridPos, GroundTruthField,
    Heuristic, OpState, PatternKind, ScenarioMode, SimCheckpoint, Simulator, TraversalPolicy,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn coarse_blocked(truth: &GroundTruthField) -> Vec<bool> {
    assert_eq!(truth.k(), 1, "oracles work on k=1 fields");
    truth.blocked().to_vec()
}

/// Unit-cost 4-connected BFS distance.
fn bfs_distance(blocked: &[bool], rows: usize, cols: usize, start: GridPos, goal: GridPos) -> Option<usize> {
    let mut dist = vec![usize::MAX; rows * cols];
    let mut queue = VecDeque::from([start]);
    dist[start.row * cols + start.col] = 0;
    while let Some(p) = queue.pop_front() {
        let d = dist[p.row * cols + p.col];
        if p == goal {
            return Some(d);
        }
        let around = [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)];
        for (dr, dc) in around {
            let (r, c) = (p.row as isize + dr, p.col as isize + dc);
            if r < 0 || c < 0 || r >= rows as isize || c >= cols as isize {
                continue;
            }
            let i = r as usize * cols + c as usize;
            if !blocked[i] && dist[i] == usize::MAX {
                dist[i] = d + 1;
                queue.push_back(GridPos::new(r as usize, c as usize));
            }
        }
    }
    None
}

/// Free cells reachable from `start` under 8-connectivity, where a diagonal
/// step is refused only when both orthogonal cells it passes are blocked.
fn reachable_8(blocked: &[bool], rows: usize, cols: usize, start: GridPos) -> Vec<bool> {
    let at = |r: isize, c: isize| -> Option<usize> {
        (r >= 0 && c >= 0 && r < rows as isize && c < cols as isize).then(|| r as usize * cols + c as usize)
    };
    let mut seen = vec![false; rows * cols];
    let mut stack = vec![start];
    seen[start.row * cols + start.col] = true;
    while let Some(p) = stack.pop() {
        let (pr, pc) = (p.row as isize, p.col as isize);
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let Some(i) = at(pr + dr, pc + dc) else { continue };
                if blocked[i] || seen[i] {
                    continue;
                }
                if dr != 0 && dc != 0 {
                    let a = at(pr + dr, pc).is_none_or(|j| blocked[j]);
                    let b = at(pr, pc + dc).is_none_or(|j| blocked[j]);
                    if a && b {
                        continue;
                    }
                }
                seen[i] = true;
                stack.push(GridPos::new(i / cols, i % cols));
            }
        }
    }
    seen
}

/// A perfect maze: the 4-connected free-cell graph is connected and has
/// exactly `nodes - 1` edges.
fn is_perfect_maze(truth: &GroundTruthField) -> bool {
    let (rows, cols) = (truth.rows(), truth.cols());
    let blocked = coarse_blocked(truth);
    let nodes = blocked.iter().filter(|b| !**b).count();
    let mut edges = 0;
    for r in 0..rows {
        for c in 0..cols {
            if blocked[r * cols + c] {
                continue;
            }
            if c + 1 < cols && !blocked[r * cols + c + 1] {
                edges += 1;
            }
            if r + 1 < rows && !blocked[(r + 1) * cols + c] {
                edges += 1;
            }
        }
    }
    let Some(first) = blocked.iter().position(|b| !*b) else { return false };
    let mut seen = vec![false; rows * cols];
    let mut stack = vec![first];
    seen[first] = true;
    let mut count = 0;
    while let Some(i) = stack.pop() {
        count += 1;
        let (r, c) = (i / cols, i % cols);
        let mut around = Vec::new();
        if r > 0 {
            around.push(i - cols);
        }
        if r + 1 < rows {
            around.push(i + cols);
        }
        if c > 0 {
            around.push(i - 1);
        }
        if c + 1 < cols {
            around.push(i + 1);
        }
        for j in around {
            if !blocked[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    count == nodes && edges + 1 == nodes
}

fn random_free(rng: &mut ChaCha8Rng, blocked: &[bool], cols: usize) -> GridPos {
    loop {
        let i = rng.gen_range(0..blocked.len());
        if !blocked[i] {
            return GridPos::new(i / cols, i % cols);
        }
    }
}

fn planner_optimality() -> Outcome {
    let started = Instant::now();
    let policy = TraversalPolicy {
        connectivity: Connectivity::Four,
        heuristic: Heuristic::Manhattan,
        ..TraversalPolicy::default()
    };
    let mut mismatches = 0;
    let mut solvable = 0;
    for seed in 0..200u64 {
        let truth = gen_random(15, 15, 0.3, seed, 1).map_err(|e| e.to_string())?;
        let blocked = coarse_blocked(&truth);
        let map = GridMap::fully_known(&truth, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xACCE);
        let start = random_free(&mut rng, &blocked, 15);
        let goal = random_free(&mut rng, &blocked, 15);
        let oracle = bfs_distance(&blocked, 15, 15, start, goal).map(|d| d as f64);
        let dij = plan_dijkstra(&map, start, goal, &policy).map_err(|e| e.to_string())?;
        let ast = plan_astar(&map, start, goal, &policy).map_err(|e| e.to_string())?;
        solvable += usize::from(oracle.is_some());
        for found in [dij.path.map(|p| p.cost), ast.path.map(|p| p.cost)] {
            if found != oracle {
                mismatches += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    let detail = format!("200 instances ({solvable} solvable), {mismatches} mismatches, {elapsed:.2?}");
    if mismatches == 0 && elapsed < Duration::from_secs(5) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn astar_dijkstra_equivalence() -> Outcome {
    let policy = TraversalPolicy::default();
    let (mut pairs, mut cost_mismatches, mut fewer_or_equal) = (0usize, 0usize, 0usize);
    for seed in 0..100u64 {
        let truth = gen_random(25, 50, 0.2, seed, 1).map_err(|e| e.to_string())?;
        let blocked = coarse_blocked(&truth);
        let map = GridMap::fully_known(&truth, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919));
        for _ in 0..5 {
            let start = random_free(&mut rng, &blocked, 50);
            let goal = random_free(&mut rng, &blocked, 50);
            let dij = plan_dijkstra(&map, start, goal, &policy).map_err(|e| e.to_string())?;
            let ast = plan_astar(&map, start, goal, &policy).map_err(|e| e.to_string())?;
            match (&dij.path, &ast.path) {
                (Some(d), Some(a)) => {
                    pairs += 1;
                    if (d.cost - a.cost).abs() > 1e-9 {
                        cost_mismatches += 1;
                    }
                    if ast.expanded <= dij.expanded {
                        fewer_or_equal += 1;
                    }
                }
                (None, None) => {}
                _ => cost_mismatches += 1,
            }
        }
    }
    let share = fewer_or_equal as f64 / pairs as f64;
    let detail = format!("{pairs} solvable pairs, {cost_mismatches} cost mismatches, A* expands <= Dijkstra on {:.1}%", share * 100.0);
    if pairs > 0 && cost_mismatches == 0 && share >= 0.95 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_to_end(truth: &GroundTruthField, config: CoverageConfig) -> Result<(CoverageRun, f64), String> {
    let start = GridPos::new(0, 0);
    let mut run = CoverageRun::new(truth, start, config).map_err(|e| e.to_string())?;
    while !run.is_finished() {
        run.step(truth).map_err(|e| e.to_string())?;
    }
    let pct = run.report(truth).map_err(|e| e.to_string())?.coverage_percent;
    Ok((run, pct))
}

fn coverage_completeness() -> Outcome {
    let mut fields = Vec::new();
    for seed in 0..15u64 {
        fields.push(gen_maze_backtracker(15 + seed as usize % 7, 21, seed).map_err(|e| e.to_string())?);
        fields.push(gen_maze_dfs(17, 13 + seed as usize % 9, seed).map_err(|e| e.to_string())?);
    }
    let kinds = [PatternKind::Vertical, PatternKind::Horizontal, PatternKind::Diagonal, PatternKind::Spiral];
    for i in 0..20usize {
        fields.push(gen_pattern(kinds[i % 4], 9 + i, 12 + 2 * i).map_err(|e| e.to_string())?);
    }
    let mut failures = Vec::new();
    for (i, truth) in fields.iter().enumerate() {
        let (rows, cols) = (truth.rows(), truth.cols());
        let blocked = coarse_blocked(truth);
        let reach = reachable_8(&blocked, rows, cols, GridPos::new(0, 0));
        let (run, pct) = run_to_end(truth, CoverageConfig::default())?;
        let uncovered = (0..rows * cols)
            .filter(|&j| reach[j] && run.map().state(GridPos::new(j / cols, j % cols)) != CellState::Covered)
            .count();
        let expected = 100.0 * reach.iter().filter(|r| **r).count() as f64 / blocked.iter().filter(|b| !**b).count() as f64;
        if uncovered > 0 || (pct - expected).abs() > 1e-9 {
            failures.push(format!("field {i}: {uncovered} reachable cells uncovered, {pct:.3}% vs {expected:.3}%"));
        }
    }
    let mut free_ok = 0;
    for (rows, cols, k) in [(1, 1, 1), (5, 5, 3), (10, 20, 2), (25, 50, 3)] {
        let truth = GroundTruthField::free(rows, cols, k).map_err(|e| e.to_string())?;
        for mode in [ScenarioMode::ThreeState, ScenarioMode::FourState] {
            let (_, pct) = run_to_end(&truth, CoverageConfig::with_mode(mode))?;
            if pct == 100.0 {
                free_ok += 1;
            } else {
                failures.push(format!("free {rows}x{cols} k={k} {mode}: {pct}%"));
            }
        }
    }
    let detail = format!("{} maze/pattern fields checked against flood fill, {free_ok}/8 free-field runs at 100.0%", fields.len());
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn scenario_trend() -> Outcome {
    let started = Instant::now();
    let (mut dominated, mut strictly, mut with_partials) = (0, 0, 0);
    let (mut ticks_three, mut ticks_four) = (0u64, 0u64);
    let n = 100;
    for seed in 0..n as u64 {
        let truth = gen_irregular(20, 20, 2, seed, 3).map_err(|e| e.to_string())?;
        let start = GridPos::new(0, 0);
        let three = cover_forge::run_coverage(&truth, start, &CoverageConfig::with_mode(ScenarioMode::ThreeState))
            .map_err(|e| e.to_string())?;
        let four = cover_forge::run_coverage(&truth, start, &CoverageConfig::with_mode(ScenarioMode::FourState))
            .map_err(|e| e.to_string())?;
        dominated += usize::from(four.coverage_percent >= three.coverage_percent);
        strictly += usize::from(four.coverage_percent > three.coverage_percent);
        with_partials += usize::from(four.partial_cells_identified > 0);
        ticks_three += three.ticks;
        ticks_four += four.ticks;
    }
    let elapsed = started.elapsed();
    let (mean3, mean4) = (ticks_three as f64 / n as f64, ticks_four as f64 / n as f64);
    let detail = format!(
        "four >= three on {dominated}/{n}, strictly on {strictly}/{n}, partials found on {with_partials}/{n}, mean ticks {mean4:.1} vs {mean3:.1}, {elapsed:.2?}"
    );
    let ok = dominated == n
        && strictly * 100 >= 80 * n
        && with_partials * 100 >= 95 * n
        && mean4 > mean3
        && elapsed < Duration::from_secs(30);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn crash_resume() -> Outcome {
    let truth = gen_irregular(10, 10, 1, 11, 3).map_err(|e| e.to_string())?;
    let config = CoverageConfig::default();
    let start = GridPos::new(0, 0);
    let mut reference = Simulator::new(truth.clone(), start, config.clone(), None).map_err(|e| e.to_string())?;
    let expected = reference.run_to_completion().map_err(|e| e.to_string())?;
    let total = reference.steps();

    let mut live = Simulator::new(truth.clone(), start, config.clone(), None).map_err(|e| e.to_string())?;
    let mut mismatched = Vec::new();
    for t in 0..=total {
        let text = live.checkpoint().to_text();
        let cp = SimCheckpoint::from_text(&text).map_err(|e| e.to_string())?;
        let mut resumed = Simulator::restore(&cp, truth.clone(), config.clone()).map_err(|e| e.to_string())?;
        let report = resumed.run_to_completion().map_err(|e| e.to_string())?;
        if report != expected {
            mismatched.push(t);
        }
        if live.op_state() != OpState::Complete {
            live.step().map_err(|e| e.to_string())?;
        }
    }
    let detail = format!("{} checkpoints over {total} steps ({} coverage ticks), {} mismatches", total + 1, expected.ticks, mismatched.len());
    if mismatched.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail} at steps {mismatched:?}"))
    }
}

fn bench_csv(threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cover-forge"))
        .args(["bench", "--generator", "irregular", "--rows", "12", "--cols", "12", "--seeds", "1,2,3,4"])
        .args(["--modes", "three,four", "--planners", "astar,dijkstra", "--format", "csv"])
        .env("COVER_FORGE_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn bench_determinism() -> Outcome {
    let baseline = bench_csv("1")?;
    let mut identical = 0;
    let attempts = ["1", "1", "8", "8", "8"];
    for threads in attempts {
        identical += usize::from(bench_csv(threads)? == baseline);
    }
    let rows = baseline.iter().filter(|b| **b == b'\n').count() - 1;
    let detail = format!("{rows}-row CSV, {identical}/{} re-executions byte-identical across thread caps 1 and 8", attempts.len());
    if identical == attempts.len() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn format_round_trips() -> Outcome {
    let mut field_failures = 0;
    let mut checkpoint_failures = 0;
    for seed in 0..100u64 {
        let truth = match seed % 4 {
            0 => gen_random(12, 17, 0.2, seed, 1 + (seed as usize % 3)),
            1 => gen_irregular(10, 12, 2, seed, 3),
            2 => gen_maze_backtracker(9, 14, seed),
            _ => gen_maze_dfs(11, 10, seed),
        }
        .map_err(|e| e.to_string())?;
        let text = serialize_field(&truth);
        match parse_field(&text) {
            Ok(back) if back == truth && serialize_field(&back) == text => {}
            _ => field_failures += 1,
        }

        let config = CoverageConfig::with_mode(if seed % 2 == 0 { ScenarioMode::FourState } else { ScenarioMode::ThreeState });
        let mut sim = Simulator::new(truth, GridPos::new(0, 0), config, None).map_err(|e| e.to_string())?;
        for _ in 0..(seed * 3) {
            if sim.op_state() == OpState::Complete {
                break;
            }
            sim.step().map_err(|e| e.to_string())?;
        }
        let cp = sim.checkpoint();
        let text = cp.to_text();
        match SimCheckpoint::from_text(&text) {
            Ok(back) if back == cp && back.to_text() == text => {}
            _ => checkpoint_failures += 1,
        }
    }
    let detail = format!("100 fields ({field_failures} failures), 100 checkpoints ({checkpoint_failures} failures)");
    if field_failures == 0 && checkpoint_failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn generator_statistics() -> Outcome {
    let mean = (0..100u64)
        .map(|seed| gen_random(25, 50, 0.2, seed, 3).map(|f| f.obstacle_fraction()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .iter()
        .sum::<f64>()
        / 100.0;
    let mut imperfect = 0;
    for seed in 0..50u64 {
        let a = gen_maze_backtracker(25, 50, seed).map_err(|e| e.to_string())?;
        let b = gen_maze_dfs(25, 50, seed).map_err(|e| e.to_string())?;
        imperfect += usize::from(!is_perfect_maze(&a)) + usize::from(!is_perfect_maze(&b));
    }
    let detail = format!("mean obstacle fraction {mean:.4}, {imperfect} imperfect mazes out of 100");
    if (0.17..=0.23).contains(&mean) && imperfect == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("planner optimality vs BFS oracle", planner_optimality),
        ("A*/Dijkstra equivalence on 25x50 fields", astar_dijkstra_equivalence),
        ("coverage completeness", coverage_completeness),
        ("four-state vs three-state trend", scenario_trend),
        ("crash-resume equivalence", crash_resume),
        ("bench CSV determinism", bench_determinism),
        ("format round-trips", format_round_trips),
        ("generator statistics", generator_statistics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
