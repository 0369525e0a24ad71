//! Marching-squares contour extraction and SVG output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::solution::FieldGrid;
use crate::stokes_system::Functional;
use crate::C64;

/// Scalar samples on a lattice; `None` marks nodes outside the fluid.
#[derive(Debug, Clone)]
pub struct ScalarGrid<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    /// Row-major with `y` outer, like [`FieldGrid::samples`].
    pub values: Vec<Option<f64>>,
}

impl<'a> ScalarGrid<'a> {
    pub fn from_fields(grid: &'a FieldGrid, fun: Functional) -> Self {
        Self { xs: &grid.xs, ys: &grid.ys, values: grid.samples.iter().map(|s| s.map(|s| s.get(fun))).collect() }
    }

    fn at(&self, i: usize, j: usize) -> Option<f64> {
        self.values[j * self.xs.len() + i]
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.values.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

/// Lattice edge: `(vertical, i, j)` starting at node `(i, j)`.
type EdgeKey = (bool, usize, usize);

/// Polylines of `{value = level}`; cells with a masked corner are skipped.
pub fn contour_lines(grid: &ScalarGrid<'_>, level: f64) -> Vec<Vec<(f64, f64)>> {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [grid.at(i, j), grid.at(i + 1, j), grid.at(i + 1, j + 1), grid.at(i, j + 1)];
            let Some(vals) = corners.into_iter().collect::<Option<Vec<f64>>>() else {
                continue;
            };
            let above: Vec<bool> = vals.iter().map(|&v| v >= level).collect();
            let edges: [EdgeKey; 4] = [(false, i, j), (true, i + 1, j), (false, i, j + 1), (true, i, j)];
            let crossed: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            match crossed.len() {
                2 => segments.push((edges[crossed[0]], edges[crossed[1]])),
                4 => {
                    let center = vals.iter().sum::<f64>() / 4.0 >= level;
                    if center == above[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[0], edges[3]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    let crossing = |(vertical, i, j): EdgeKey| -> (f64, f64) {
        let (i2, j2) = if vertical { (i, j + 1) } else { (i + 1, j) };
        let (a, b) = (grid.at(i, j).unwrap_or(level), grid.at(i2, j2).unwrap_or(level));
        let t = if b == a { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
        let (x0, y0, x1, y1) = (grid.xs[i], grid.ys[j], grid.xs[i2], grid.ys[j2]);
        (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    };
    join_segments(&segments).into_iter().map(|keys| keys.into_iter().map(crossing).collect()).collect()
}

fn join_segments(segments: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<EdgeKey>> {
    let mut incident: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let open_ends: Vec<EdgeKey> = incident.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    let all: Vec<EdgeKey> = incident.keys().copied().collect();
    for start in open_ends.into_iter().chain(all) {
        while let Some(&first) = incident[&start].iter().find(|&&s| !used[s]) {
            let mut line = vec![start];
            let mut at = start;
            let mut seg = Some(first);
            while let Some(s) = seg {
                used[s] = true;
                let (a, b) = segments[s];
                at = if a == at { b } else { a };
                line.push(at);
                seg = incident[&at].iter().copied().find(|&t| !used[t]);
            }
            lines.push(line);
        }
    }
    lines
}

/// Levels at `min + r·(max − min)` for `count` fractions spread over
/// `[0.1, 0.9]` plus the near-extremum fractions 0.96, 0.99 and 0.999.
pub fn default_levels(range: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let mut fractions: Vec<f64> = match count {
        0 => vec![],
        1 => vec![0.5],
        n => (0..n).map(|k| 0.1 + 0.8 * k as f64 / (n - 1) as f64).collect(),
    };
    fractions.extend([0.96, 0.99, 0.999]);
    fractions.into_iter().map(|r| lo + r * (hi - lo)).collect()
}

const SVG_WIDTH: f64 = 800.0;

/// SVG with boundary outlines and one path per contour polyline.
pub fn render_svg(grid: &ScalarGrid<'_>, bbox: (f64, f64, f64, f64), levels: &[f64], outlines: &[Vec<C64>]) -> String {
    let (x0, x1, y0, y1) = bbox;
    let (w, h) = ((x1 - x0).max(1e-300), (y1 - y0).max(1e-300));
    let height = (SVG_WIDTH * h / w).clamp(50.0, 4000.0);
    let sx = SVG_WIDTH / w;
    let sy = height / h;
    let map = |x: f64, y: f64| ((x - x0) * sx, (y1 - y) * sy);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH:.0}" height="{height:.0}" viewBox="0 0 {SVG_WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let path_of = |pts: &mut dyn Iterator<Item = (f64, f64)>, close: bool| {
        let mut d = String::new();
        for (k, (x, y)) in pts.enumerate() {
            let (px, py) = map(x, y);
            let _ = write!(d, "{}{px:.3},{py:.3} ", if k == 0 { "M" } else { "L" });
        }
        if close {
            d.push('Z');
        }
        d.trim_end().to_string()
    };
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="0.8">"#);
    for poly in levels.iter().flat_map(|&l| contour_lines(grid, l)) {
        if poly.len() >= 2 {
            let d = path_of(&mut poly.iter().copied(), false);
            let _ = writeln!(out, r#"<path d="{d}" stroke-width="0.6"/>"#);
        }
    }
    for outline in outlines.iter().filter(|o| !o.is_empty()) {
        let d = path_of(&mut outline.iter().map(|z| (z.re, z.im)), true);
        let _ = writeln!(out, r#"<path d="{d}" stroke-width="1.2"/>"#);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Writes the contour plot of `fun` to `path`.
pub fn contour_svg(
    grid: &FieldGrid,
    fun: Functional,
    levels: &[f64],
    outlines: &[Vec<C64>],
    path: &Path,
) -> std::io::Result<()> {
    let scalar = ScalarGrid::from_fields(grid, fun);
    std::fs::write(path, render_svg(&scalar, grid.bbox, levels, outlines))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn sample(xs: &[f64], ys: &[f64], f: impl Fn(f64, f64) -> Option<f64>) -> Vec<Option<f64>> {
        ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).map(|(x, y)| f(x, y)).collect()
    }

    #[test]
    fn linear_field_gives_one_horizontal_line() {
        let xs = lattice(11, 0.0, 1.0);
        let ys = lattice(11, 0.0, 1.0);
        let grid = ScalarGrid { values: sample(&xs, &ys, |_, y| Some(y)), xs: &xs, ys: &ys };
        let lines = contour_lines(&grid, 0.5);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 11);
        assert!(lines[0].iter().all(|&(_, y)| (y - 0.5).abs() < 1e-14));
        let xs_line: Vec<f64> = lines[0].iter().map(|p| p.0).collect();
        assert!(xs_line.first().unwrap().min(*xs_line.last().unwrap()) == 0.0);
    }

    #[test]
    fn circle_level_is_closed_and_close_to_radius() {
        let xs = lattice(61, -1.5, 1.5);
        let ys = lattice(61, -1.5, 1.5);
        let grid = ScalarGrid { values: sample(&xs, &ys, |x, y| Some(x * x + y * y)), xs: &xs, ys: &ys };
        let lines = contour_lines(&grid, 1.0);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        let diag = (0.05f64 * 0.05 * 2.0).sqrt();
        for &(x, y) in line {
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < diag);
        }
    }

    #[test]
    fn masked_cells_are_skipped() {
        let xs = lattice(21, -1.0, 1.0);
        let ys = lattice(21, -1.0, 1.0);
        let grid = ScalarGrid { values: sample(&xs, &ys, |x, y| (x < 0.0).then_some(y)), xs: &xs, ys: &ys };
        for line in contour_lines(&grid, 0.05) {
            assert!(line.iter().all(|&(x, _)| x < 0.0));
        }
    }

    #[test]
    fn empty_grid_gives_outline_only() {
        let xs = lattice(5, 0.0, 1.0);
        let grid = ScalarGrid { values: vec![None; 25], xs: &xs, ys: &xs };
        let outline = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 1.0)];
        let svg = render_svg(&grid, (0.0, 1.0, 0.0, 1.0), &[0.5], &[outline]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains('Z'));
        assert_eq!(grid.range(), None);
    }

    #[test]
    fn level_rule() {
        let l = default_levels((0.0, 1.0), 13);
        assert_eq!(l.len(), 16);
        assert!((l[0] - 0.1).abs() < 1e-15 && (l[12] - 0.9).abs() < 1e-15);
        assert_eq!(&l[13..], &[0.96, 0.99, 0.999]);
    }
}
