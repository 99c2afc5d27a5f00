//! Level-set extraction from sweep grids by marching squares with linear
//! interpolation on cell edges. Ambiguous saddle cells are resolved by the
//! sign of the cell-average value, and cells touching NaN values produce no
//! segments. The traversal order is fixed, so output is deterministic.

use std::collections::HashMap;

use crate::sweep::SweepGrid;

/// One extracted polyline in axis coordinates `(delta_b, omega_b1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    /// True when the line closes on itself (the first point is not
    /// repeated at the end).
    pub closed: bool,
}

/// Identity of a grid edge; used to stitch cell segments into polylines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    /// Edge between nodes (r, c) and (r, c+1).
    AlongOmega(usize, usize),
    /// Edge between nodes (r, c) and (r+1, c).
    AlongDelta(usize, usize),
}

struct Segment {
    a: EdgeKey,
    b: EdgeKey,
    pa: (f64, f64),
    pb: (f64, f64),
}

/// Extract the `level` contour of a sweep grid.
///
/// Returns an empty list when the level is never crossed. The grid must
/// have at least 2x2 nodes for any segment to exist.
pub fn contour_level(grid: &SweepGrid, level: f64) -> Vec<Polyline> {
    let rows = grid.rows();
    let cols = grid.columns();
    if rows < 2 || cols < 2 {
        return Vec::new();
    }
    let val = |r: usize, c: usize| grid.value(r, c);
    let coord = |r: usize, c: usize| (grid.delta_values[r], grid.omega_b1_values[c]);
    let inside = |v: f64| v < level;

    // Interpolated crossing point on the edge from node (r0,c0) to (r1,c1).
    let cross = |r0: usize, c0: usize, r1: usize, c1: usize| -> (f64, f64) {
        let (va, vb) = (val(r0, c0), val(r1, c1));
        let t = ((level - va) / (vb - va)).clamp(0.0, 1.0);
        let (xa, ya) = coord(r0, c0);
        let (xb, yb) = coord(r1, c1);
        (xa + t * (xb - xa), ya + t * (yb - ya))
    };

    let mut segments: Vec<Segment> = Vec::new();
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            let corners = [val(r, c), val(r, c + 1), val(r + 1, c + 1), val(r + 1, c)];
            if corners.iter().any(|v| v.is_nan()) {
                continue;
            }
            let flags = [
                inside(corners[0]),
                inside(corners[1]),
                inside(corners[2]),
                inside(corners[3]),
            ];
            // Crossed edges in cycle order: top (AB), right (BC),
            // bottom (CD), left (DA) with A=(r,c), B=(r,c+1), C=(r+1,c+1),
            // D=(r+1,c).
            let mut crossed: Vec<(EdgeKey, (f64, f64))> = Vec::with_capacity(4);
            if flags[0] != flags[1] {
                crossed.push((EdgeKey::AlongOmega(r, c), cross(r, c, r, c + 1)));
            }
            if flags[1] != flags[2] {
                crossed.push((EdgeKey::AlongDelta(r, c + 1), cross(r, c + 1, r + 1, c + 1)));
            }
            if flags[2] != flags[3] {
                crossed.push((EdgeKey::AlongOmega(r + 1, c), cross(r + 1, c + 1, r + 1, c)));
            }
            if flags[3] != flags[0] {
                crossed.push((EdgeKey::AlongDelta(r, c), cross(r + 1, c, r, c)));
            }
            match crossed.len() {
                0 => {}
                2 => segments.push(Segment {
                    a: crossed[0].0,
                    b: crossed[1].0,
                    pa: crossed[0].1,
                    pb: crossed[1].1,
                }),
                4 => {
                    // Saddle: pair the crossings so the region containing
                    // the cell average stays connected. Crossings appear in
                    // cycle order (top, right, bottom, left).
                    let avg = corners.iter().sum::<f64>() / 4.0;
                    let pairs: [(usize, usize); 2] = if inside(avg) == flags[0] {
                        // The diagonal through corner A stays connected:
                        // separate B with (top,right) and D with (bottom,left).
                        [(0, 1), (2, 3)]
                    } else {
                        [(3, 0), (1, 2)]
                    };
                    for (i, j) in pairs {
                        segments.push(Segment {
                            a: crossed[i].0,
                            b: crossed[j].0,
                            pa: crossed[i].1,
                            pb: crossed[j].1,
                        });
                    }
                }
                _ => unreachable!("marching squares yields 0, 2 or 4 crossings"),
            }
        }
    }

    stitch(segments)
}

fn stitch(segments: Vec<Segment>) -> Vec<Polyline> {
    let mut incident: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (idx, s) in segments.iter().enumerate() {
        incident.entry(s.a).or_default().push(idx);
        incident.entry(s.b).or_default().push(idx);
    }
    let next_unused = |key: EdgeKey, used: &[bool]| -> Option<usize> {
        incident
            .get(&key)
            .and_then(|v| v.iter().copied().find(|&i| !used[i]))
    };

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut points = std::collections::VecDeque::new();
        points.push_back(segments[start].pa);
        points.push_back(segments[start].pb);
        let mut head = segments[start].a;
        let mut tail = segments[start].b;
        let mut closed = false;
        while let Some(i) = next_unused(tail, &used) {
            used[i] = true;
            let s = &segments[i];
            let (key, point) = if s.a == tail { (s.b, s.pb) } else { (s.a, s.pa) };
            tail = key;
            if tail == head {
                closed = true;
                break;
            }
            points.push_back(point);
        }
        if !closed {
            while let Some(i) = next_unused(head, &used) {
                used[i] = true;
                let s = &segments[i];
                let (key, point) = if s.a == head { (s.b, s.pb) } else { (s.a, s.pa) };
                head = key;
                points.push_front(point);
            }
        }
        polylines.push(Polyline {
            points: points.into_iter().collect(),
            closed,
        });
    }
    polylines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SweepGrid;

    fn synthetic_grid(
        delta: Vec<f64>,
        omega: Vec<f64>,
        f: impl Fn(f64, f64) -> f64,
    ) -> SweepGrid {
        let mut values = Vec::with_capacity(delta.len() * omega.len());
        for &d in &delta {
            for &w in &omega {
                values.push(f(d, w));
            }
        }
        SweepGrid {
            delta_values: delta,
            omega_b1_values: omega,
            values,
            nan_cells: 0,
            quantity: "test",
        }
    }

    #[test]
    fn linear_field_produces_single_straight_line() {
        // alpha(x, y) = -x crosses level -1 at x = 1.
        let delta: Vec<f64> = (0..9).map(|k| k as f64 * 0.25).collect();
        let omega: Vec<f64> = (0..5).map(|k| k as f64 * 0.25).collect();
        let grid = synthetic_grid(delta, omega, |d, _| -d);
        let lines = contour_level(&grid, -1.0);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert!(!line.closed);
        assert_eq!(line.points.len(), 5);
        for &(x, _) in &line.points {
            assert!((x - 1.0).abs() < 0.25, "crossing at {x}");
        }
    }

    #[test]
    fn level_below_minimum_yields_nothing() {
        let grid = synthetic_grid(vec![0.0, 1.0], vec![0.0, 1.0], |_, _| 0.5);
        assert!(contour_level(&grid, -1.0).is_empty());
    }

    #[test]
    fn radial_bump_gives_closed_loop() {
        let n = 21;
        let ax: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
        let grid = synthetic_grid(ax.clone(), ax, |x, y| -(2.0 - 4.0 * (x * x + y * y)));
        // value < -1 inside the circle x^2 + y^2 < 1/4
        let lines = contour_level(&grid, -1.0);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert!(line.closed, "expected a closed loop");
        for &(x, y) in &line.points {
            let r = (x * x + y * y).sqrt();
            assert!((r - 0.5).abs() < 0.06, "contour point at radius {r}");
        }
        assert!(line.points.len() > 10);
    }

    #[test]
    fn nan_cells_are_skipped() {
        let grid = synthetic_grid(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], |d, w| {
            if d == 1.0 && w == 1.0 {
                f64::NAN
            } else {
                -d
            }
        });
        // Does not panic; produces whatever crossings remain.
        let _ = contour_level(&grid, -0.5);
    }
}
