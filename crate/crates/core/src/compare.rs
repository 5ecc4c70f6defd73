//! Discrepancy between a characteristic field and a grid reference.

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::levelset::{extract_zero_levelset, hausdorff_distance, sample_bilinear};
use crate::pointwise_solver::Grid2DField;

/// Disk excluded from a comparison, e.g. around a known optimizer defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskMask {
    pub center: [f64; 2],
    pub radius: f64,
}

impl DiskMask {
    pub fn contains(&self, q: [f64; 2]) -> bool {
        (q[0] - self.center[0]).hypot(q[1] - self.center[1]) <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsDiffStats {
    pub count: usize,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl AbsDiffStats {
    fn from(mut diffs: Vec<f64>) -> Self {
        if diffs.is_empty() {
            return Self { count: 0, median: f64::NAN, max: f64::NAN, mean: f64::NAN };
        }
        diffs.sort_by(f64::total_cmp);
        let n = diffs.len();
        let median = if n % 2 == 1 { diffs[n / 2] } else { 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]) };
        Self { count: n, median, max: diffs[n - 1], mean: diffs.iter().sum::<f64>() / n as f64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub t: f64,
    /// `|φ_char - φ_ref|` over unmasked nodes of the characteristic grid.
    pub outside_mask: AbsDiffStats,
    /// Same, restricted to the mask (empty without one).
    pub inside_mask: AbsDiffStats,
    /// Nodes whose characteristic value is NaN (failed solves).
    pub failed_nodes: usize,
    /// Hausdorff distance between the zero level sets, each extracted on its
    /// own grid, ignoring sample points inside the mask.
    pub hausdorff: f64,
    /// Reference grid spacing, the natural unit for `hausdorff`.
    pub reference_cell: f64,
    pub mask: Option<DiskMask>,
}

/// Compares `field` with `reference` (sampled bilinearly at the nodes of
/// `field`) at matching times.
pub fn compare_fields(field: &Grid2DField, reference: &Grid2DField, mask: Option<DiskMask>) -> Result<Discrepancy> {
    if (field.t - reference.t).abs() > 1e-9 * field.t.abs().max(1.0) {
        return Err(HjError::config(format!("comparing fields at t = {} and t = {}", field.t, reference.t)));
    }
    let mut outside = Vec::with_capacity(field.values.len());
    let mut inside = Vec::new();
    let mut failed = 0;
    for (k, &v) in field.values.iter().enumerate() {
        let x = field.grid.point(k);
        let q = [x[0], x[1]];
        if v.is_nan() {
            failed += 1;
            continue;
        }
        let r = sample_bilinear(reference, q[0], q[1]);
        if r.is_nan() {
            continue;
        }
        if mask.is_some_and(|m| m.contains(q)) {
            inside.push((v - r).abs());
        } else {
            outside.push((v - r).abs());
        }
    }
    let a = extract_zero_levelset(field);
    let b = extract_zero_levelset(reference);
    // only the part of the reference contour inside the characteristic window counts
    let (lo1, hi1, lo2, hi2) = (field.grid.x1.0, field.grid.x1.1, field.grid.x2.0, field.grid.x2.1);
    let b: Vec<_> = b
        .into_iter()
        .filter(|s| [s.a, s.b].iter().all(|p| p[0] >= lo1 && p[0] <= hi1 && p[1] >= lo2 && p[1] <= hi2))
        .collect();
    let exclude = mask.map(|m| move |q: [f64; 2]| m.contains(q));
    let hausdorff = match &exclude {
        Some(f) => hausdorff_distance(&a, &b, Some(f)),
        None => hausdorff_distance(&a, &b, None),
    };
    Ok(Discrepancy {
        t: field.t,
        outside_mask: AbsDiffStats::from(outside),
        inside_mask: AbsDiffStats::from(inside),
        failed_nodes: failed,
        hausdorff,
        reference_cell: reference.grid.h1(),
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise_solver::{FieldSource, GridSpec};

    fn field(grid: GridSpec, t: f64, f: impl Fn(f64, f64) -> f64) -> Grid2DField {
        let values = (0..grid.len()).map(|k| { let x = grid.point(k); f(x[0], x[1]) }).collect();
        Grid2DField::from_values(grid, t, FieldSource::Char, values).unwrap()
    }

    #[test]
    fn shifted_fields() {
        let coarse = GridSpec::cross_section(2, 31);
        let fine = GridSpec { dim: 2, x1: (-4.0, 4.0), x2: (-4.0, 4.0), n1: 161, n2: 161 };
        let a = field(coarse, 0.3, |x, y| x * x + y * y - 1.0);
        let b = field(fine, 0.3, |x, y| x * x + y * y - 1.0 + 0.01);
        let d = compare_fields(&a, &b, None).unwrap();
        assert_eq!(d.outside_mask.count, 31 * 31);
        assert!((d.outside_mask.median - 0.01).abs() < 1e-9 && (d.outside_mask.max - 0.01).abs() < 1e-9);
        // radius shrinks from 1 to sqrt(0.99)
        assert!((d.hausdorff - (1.0 - 0.99f64.sqrt())).abs() < 2e-3, "{}", d.hausdorff);
        assert!((d.reference_cell - 0.05).abs() < 1e-15);

        let mask = DiskMask { center: [0.0, 0.0], radius: 0.5 };
        let d = compare_fields(&a, &b, Some(mask)).unwrap();
        assert!(d.inside_mask.count > 0 && d.inside_mask.count + d.outside_mask.count == 31 * 31);
        assert!(compare_fields(&a, &field(fine, 0.2, |_, _| 0.0), None).is_err());
    }

    #[test]
    fn failed_nodes_are_counted() {
        let g = GridSpec::cross_section(2, 5);
        let mut a = field(g, 0.1, |x, _| x);
        a.values[3] = f64::NAN;
        let d = compare_fields(&a, &field(g, 0.1, |x, _| x), None).unwrap();
        assert_eq!(d.failed_nodes, 1);
        assert_eq!(d.outside_mask.count, 24);
        assert_eq!(d.outside_mask.max, 0.0);
    }
}
