//! Coarse-resolution renderings of fields, belief maps and trajectories.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{parse_err, Result};
use crate::grid_map::{classify_coarse_cell, CellClass, CellState, GridMap, GridPos, GroundTruthField};

const CELL_PX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Glyph {
    Free,
    Obstacle,
    Partial,
    Covered,
    Trajectory,
}

impl Glyph {
    fn ascii(self) -> char {
        match self {
            Glyph::Free => '.',
            Glyph::Obstacle => '#',
            Glyph::Partial => 'p',
            Glyph::Covered => 'o',
            Glyph::Trajectory => '*',
        }
    }

    fn gray(self) -> u8 {
        match self {
            Glyph::Free => 255,
            Glyph::Obstacle => 0,
            Glyph::Partial => 128,
            Glyph::Covered => 200,
            Glyph::Trajectory => 64,
        }
    }

    fn fill(self) -> &'static str {
        match self {
            Glyph::Free => "#ffffff",
            Glyph::Obstacle => "#000000",
            Glyph::Partial => "#808080",
            Glyph::Covered => "#a8d8a8",
            Glyph::Trajectory => "#ffffff",
        }
    }
}

fn glyphs(truth: &GroundTruthField, belief: Option<&GridMap>, trajectory: &[GridPos]) -> Result<Vec<Vec<Glyph>>> {
    let on_path: BTreeSet<GridPos> = trajectory.iter().copied().collect();
    let mut out = Vec::with_capacity(truth.rows());
    for row in 0..truth.rows() {
        let mut line = Vec::with_capacity(truth.cols());
        for col in 0..truth.cols() {
            let p = GridPos::new(row, col);
            let glyph = if on_path.contains(&p) {
                Glyph::Trajectory
            } else if let Some(map) = belief {
                match map.state(p) {
                    CellState::Unexplored => Glyph::Free,
                    CellState::Covered => Glyph::Covered,
                    CellState::Obstacle => Glyph::Obstacle,
                    CellState::PartialObstacle => Glyph::Partial,
                }
            } else {
                match classify_coarse_cell(truth, p)? {
                    CellClass::Free => Glyph::Free,
                    CellClass::Obstacle => Glyph::Obstacle,
                    CellClass::Partial(_) => Glyph::Partial,
                }
            };
            line.push(glyph);
        }
        out.push(line);
    }
    Ok(out)
}

/// One character per coarse cell: `.` free, `#` obstacle, `p` partial,
/// `o` covered, `*` trajectory. With a belief map the cell states come from
/// the map, otherwise from the ground truth.
pub fn render_ascii(truth: &GroundTruthField, belief: Option<&GridMap>, trajectory: &[GridPos]) -> Result<String> {
    let mut out = String::new();
    for line in glyphs(truth, belief, trajectory)? {
        out.extend(line.into_iter().map(Glyph::ascii));
        out.push('\n');
    }
    Ok(out)
}

pub fn render_pgm(truth: &GroundTruthField, belief: Option<&GridMap>, trajectory: &[GridPos]) -> Result<String> {
    let cells = glyphs(truth, belief, trajectory)?;
    let mut out = format!("P2\n{} {}\n255\n", truth.cols(), truth.rows());
    for line in cells {
        let values: Vec<String> = line.into_iter().map(|g| g.gray().to_string()).collect();
        writeln!(out, "{}", values.join(" ")).unwrap();
    }
    Ok(out)
}

/// Cells as squares, the trajectory as a polyline through cell centres.
pub fn render_svg(truth: &GroundTruthField, belief: Option<&GridMap>, trajectory: &[GridPos]) -> Result<String> {
    let cells = glyphs(truth, belief, &[])?;
    let (w, h) = (truth.cols() * CELL_PX, truth.rows() * CELL_PX);
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    for (r, line) in cells.iter().enumerate() {
        for (c, glyph) in line.iter().enumerate() {
            writeln!(
                out,
                r##"<rect x="{}" y="{}" width="{CELL_PX}" height="{CELL_PX}" fill="{}" stroke="#cccccc" stroke-width="0.5"/>"##,
                c * CELL_PX,
                r * CELL_PX,
                glyph.fill()
            )
            .unwrap();
        }
    }
    if !trajectory.is_empty() {
        let points: Vec<String> = trajectory
            .iter()
            .map(|p| format!("{},{}", p.col * CELL_PX + CELL_PX / 2, p.row * CELL_PX + CELL_PX / 2))
            .collect();
        writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
            points.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One `row,col` line per trajectory cell.
pub fn serialize_trajectory(trajectory: &[GridPos]) -> String {
    trajectory.iter().map(|p| format!("{},{}\n", p.row, p.col)).collect()
}

pub fn parse_trajectory(text: &str) -> Result<Vec<GridPos>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (r, c) = line.trim().split_once(',').ok_or_else(|| parse_err(i + 1, "expected `row,col`"))?;
            let row = r.trim().parse().map_err(|_| parse_err(i + 1, format!("bad row {r:?}")))?;
            let col = c.trim().parse().map_err(|_| parse_err(i + 1, format!("bad column {c:?}")))?;
            Ok(GridPos::new(row, col))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_gen::parse_field;

    #[test]
    fn empty_field_ascii() {
        let truth = GroundTruthField::free(3, 3, 1).unwrap();
        assert_eq!(render_ascii(&truth, None, &[]).unwrap(), "...\n...\n...\n");
    }

    #[test]
    fn overlay_marks_every_trajectory_cell() {
        let truth = parse_field("field 1 3 3\n...\n.#.\n...\n").unwrap();
        let traj = [GridPos::new(0, 0), GridPos::new(0, 1), GridPos::new(1, 2)];
        assert_eq!(render_ascii(&truth, None, &traj).unwrap(), "**.\n.#*\n...\n");
    }

    #[test]
    fn partial_and_belief_glyphs() {
        let truth = parse_field("field 2 2 4\n#...\n....\n").unwrap();
        assert_eq!(render_ascii(&truth, None, &[]).unwrap(), "p.\n");
        let mut map = GridMap::fully_known(&truth, true);
        map.mark_covered(GridPos::new(0, 1)).unwrap();
        assert_eq!(render_ascii(&truth, Some(&map), &[]).unwrap(), "po\n");
        let pgm = render_pgm(&truth, Some(&map), &[]).unwrap();
        assert_eq!(pgm, "P2\n2 1\n255\n128 200\n");
    }

    #[test]
    fn svg_is_stable() {
        let truth = parse_field("field 1 2 2\n.#\n..\n").unwrap();
        let traj = [GridPos::new(0, 0), GridPos::new(1, 1)];
        let a = render_svg(&truth, None, &traj).unwrap();
        assert_eq!(a, render_svg(&truth, None, &traj).unwrap());
        assert!(a.contains(r#"<polyline points="5,5 15,15""#));
        assert_eq!(a.matches("<rect").count(), 4);
    }

    #[test]
    fn trajectory_text_round_trip() {
        let traj = vec![GridPos::new(0, 0), GridPos::new(3, 14)];
        assert_eq!(parse_trajectory(&serialize_trajectory(&traj)).unwrap(), traj);
        assert!(parse_trajectory("1;2\n").is_err());
    }
}
