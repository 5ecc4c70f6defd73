//! Zero contours of 2-D fields (marching squares) and distances between them.

use serde::{Deserialize, Serialize};

use crate::pointwise_solver::Grid2DField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn midpoint(&self) -> [f64; 2] {
        [0.5 * (self.a[0] + self.b[0]), 0.5 * (self.a[1] + self.b[1])]
    }

    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    /// Euclidean distance from `q` to the closed segment.
    pub fn distance(&self, q: [f64; 2]) -> f64 {
        let (dx, dy) = (self.b[0] - self.a[0], self.b[1] - self.a[1]);
        let len2 = dx * dx + dy * dy;
        let s = if len2 > 0.0 {
            (((q[0] - self.a[0]) * dx + (q[1] - self.a[1]) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (q[0] - self.a[0] - s * dx).hypot(q[1] - self.a[1] - s * dy)
    }
}

fn crossing(pa: [f64; 2], fa: f64, pb: [f64; 2], fb: f64) -> [f64; 2] {
    let s = fa / (fa - fb);
    [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
}

/// Marching-squares segments of `{φ = 0}` with linear interpolation along
/// cell edges. Cells touching a NaN value are skipped; exact zeros count as
/// positive. Saddle cells are resolved with the cell-centre average.
pub fn extract_zero_levelset(field: &Grid2DField) -> Vec<Segment> {
    let g = &field.grid;
    let mut out = Vec::new();
    for j in 0..g.n2 - 1 {
        for i in 0..g.n1 - 1 {
            // corners counter-clockwise from the lower left
            let p = [
                [g.coord1(i), g.coord2(j)],
                [g.coord1(i + 1), g.coord2(j)],
                [g.coord1(i + 1), g.coord2(j + 1)],
                [g.coord1(i), g.coord2(j + 1)],
            ];
            let f = [field.value(i, j), field.value(i + 1, j), field.value(i + 1, j + 1), field.value(i, j + 1)];
            if f.iter().any(|v| v.is_nan()) {
                continue;
            }
            let inside = f.map(|v| v < 0.0);
            let case = inside.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b as u8) << k));
            if case == 0 || case == 15 {
                continue;
            }
            // edge e joins corner e and corner e+1
            let edge = |e: usize| crossing(p[e], f[e], p[(e + 1) % 4], f[(e + 1) % 4]);
            let crossed: Vec<usize> = (0..4).filter(|&e| inside[e] != inside[(e + 1) % 4]).collect();
            if crossed.len() == 2 {
                out.push(Segment { a: edge(crossed[0]), b: edge(crossed[1]) });
            } else {
                // saddle: corners 0 and 2 share a sign
                let centre_inside = 0.25 * f.iter().sum::<f64>() < 0.0;
                if centre_inside == inside[0] {
                    // the diagonal through corners 0 and 2 is connected
                    out.push(Segment { a: edge(0), b: edge(1) });
                    out.push(Segment { a: edge(2), b: edge(3) });
                } else {
                    out.push(Segment { a: edge(3), b: edge(0) });
                    out.push(Segment { a: edge(1), b: edge(2) });
                }
            }
        }
    }
    out
}

/// Distance from `q` to the nearest segment (infinite when there is none).
pub fn distance_to_segments(q: [f64; 2], segments: &[Segment]) -> f64 {
    segments.iter().map(|s| s.distance(q)).fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two polylines, sampled at segment
/// endpoints and midpoints and measured exactly to the other set. Sample
/// points for which `exclude` returns true are ignored. Two empty sets are
/// at distance zero; one empty set is infinitely far from a non-empty one.
pub fn hausdorff_distance(a: &[Segment], b: &[Segment], exclude: Option<&dyn Fn([f64; 2]) -> bool>) -> f64 {
    let one_sided = |from: &[Segment], to: &[Segment]| {
        let mut worst = 0.0f64;
        for s in from {
            for q in [s.a, s.b, s.midpoint()] {
                if exclude.is_some_and(|ex| ex(q)) {
                    continue;
                }
                worst = worst.max(distance_to_segments(q, to));
            }
        }
        worst
    };
    let keep = |s: &[Segment]| s.iter().filter(|seg| !exclude.is_some_and(|ex| ex(seg.a) && ex(seg.b))).count();
    match (keep(a), keep(b)) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => f64::INFINITY,
        _ => one_sided(a, b).max(one_sided(b, a)),
    }
}

/// Bilinear interpolation of a field at `(x1, x2)`; NaN outside the grid.
pub fn sample_bilinear(field: &Grid2DField, x1: f64, x2: f64) -> f64 {
    let g = &field.grid;
    let u = (x1 - g.x1.0) / g.h1();
    let w = (x2 - g.x2.0) / g.h2();
    let tol = 1e-9;
    if !(u >= -tol && w >= -tol && u <= (g.n1 - 1) as f64 + tol && w <= (g.n2 - 1) as f64 + tol) {
        return f64::NAN;
    }
    let i = (u.floor().max(0.0) as usize).min(g.n1 - 2);
    let j = (w.floor().max(0.0) as usize).min(g.n2 - 2);
    let (fu, fw) = ((u - i as f64).clamp(0.0, 1.0), (w - j as f64).clamp(0.0, 1.0));
    let f00 = field.value(i, j);
    let f10 = field.value(i + 1, j);
    let f01 = field.value(i, j + 1);
    let f11 = field.value(i + 1, j + 1);
    // exact node values when a weight vanishes, so coinciding grids agree bit for bit
    let lerp = |a: f64, b: f64, s: f64| if s == 0.0 { a } else if s == 1.0 { b } else { a + s * (b - a) };
    lerp(lerp(f00, f10, fu), lerp(f01, f11, fu), fw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{EllipseQuadratic, InitialData};
    use crate::pointwise_solver::{FieldSource, GridSpec};

    fn field_from(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Grid2DField {
        let values = (0..grid.len())
            .map(|k| {
                let x = grid.point(k);
                f(x[0], x[1])
            })
            .collect();
        Grid2DField::from_values(grid, 0.0, FieldSource::Char, values).unwrap()
    }

    #[test]
    fn constant_sign_has_no_contour() {
        let f = field_from(GridSpec::cross_section(2, 11), |_, _| 1.0);
        assert!(extract_zero_levelset(&f).is_empty());
    }

    #[test]
    fn single_edge_crossing() {
        let grid = GridSpec { dim: 2, x1: (0.0, 1.0), x2: (0.0, 1.0), n1: 2, n2: 2 };
        // negative only at the lower-left corner
        let f = Grid2DField::from_values(grid, 0.0, FieldSource::Char, vec![-1.0, 3.0, 1.0, 1.0]).unwrap();
        let segs = extract_zero_levelset(&f);
        assert_eq!(segs.len(), 1);
        let ends = [segs[0].a, segs[0].b];
        assert!(ends.contains(&[0.25, 0.0]), "{ends:?}");
        assert!(ends.contains(&[0.0, 0.5]), "{ends:?}");
    }

    #[test]
    fn ellipse_contour() {
        let data = EllipseQuadratic::standard(2).unwrap();
        let grid = GridSpec::cross_section(2, 121);
        let f = field_from(grid, |a, b| data.value(&[a, b]));
        let segs = extract_zero_levelset(&f);
        assert!(segs.len() > 50);
        let diag = grid.h1().hypot(grid.h2());
        // radial deviation along the ray through each endpoint
        for s in &segs {
            for q in [s.a, s.b] {
                let r = q[0].hypot(q[1]);
                let (c, sn) = (q[0] / r, q[1] / r);
                let exact = 1.0 / (c * c + 0.16 * sn * sn).sqrt();
                assert!((r - exact).abs() <= diag, "{q:?}: {r} vs {exact}");
            }
        }
    }

    #[test]
    fn saddle_cells_give_two_segments() {
        let grid = GridSpec { dim: 2, x1: (0.0, 1.0), x2: (0.0, 1.0), n1: 2, n2: 2 };
        let f = Grid2DField::from_values(grid, 0.0, FieldSource::Char, vec![-1.0, 1.0, 1.0, -1.0]).unwrap();
        assert_eq!(extract_zero_levelset(&f).len(), 2);
    }

    #[test]
    fn hausdorff_of_shifted_circles() {
        let grid = GridSpec::cross_section(2, 201);
        let a = extract_zero_levelset(&field_from(grid, |x, y| x * x + y * y - 1.0));
        let b = extract_zero_levelset(&field_from(grid, |x, y| x * x + y * y - 1.21));
        let d = hausdorff_distance(&a, &b, None);
        assert!((d - 0.1).abs() < 2e-3, "{d}");
        assert!(hausdorff_distance(&a, &a, None) < 1e-12);
        assert_eq!(hausdorff_distance(&[], &[], None), 0.0);
        assert!(hausdorff_distance(&a, &[], None).is_infinite());
        // masking the right half of the plane leaves the left halves, still 0.1 apart
        let right = |q: [f64; 2]| q[0] > 0.0;
        assert!((hausdorff_distance(&a, &b, Some(&right)) - 0.1).abs() < 2e-3);
    }

    #[test]
    fn bilinear_is_exact_on_bilinear_fields() {
        let grid = GridSpec::cross_section(2, 7);
        let f = field_from(grid, |x, y| 1.0 + 2.0 * x - y + 0.5 * x * y);
        for (x, y) in [(0.3, -1.7), (-3.0, 3.0), (2.99, 0.01)] {
            let exact = 1.0 + 2.0 * x - y + 0.5 * x * y;
            assert!((sample_bilinear(&f, x, y) - exact).abs() < 1e-12);
        }
        assert!(sample_bilinear(&f, 3.5, 0.0).is_nan());
        assert_eq!(sample_bilinear(&f, grid.coord1(2), grid.coord2(4)), f.value(2, 4));
    }
}
