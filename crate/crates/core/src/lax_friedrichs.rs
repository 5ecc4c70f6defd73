//! First-order Lax–Friedrichs scheme for `φ_t + H(x, ∇φ, t) = 0` on a
//! uniform 2-D grid, used as a reference for the characteristic solver.
//!
//! ```text
//! φⁿ⁺¹ = φⁿ - Δt [ H(x, (p⁻ + p⁺)/2, t) - ½α₁(p₁⁺ - p₁⁻) - ½α₂(p₂⁺ - p₂⁻) ]
//! ```
//!
//! with one-sided differences `p⁻`, `p⁺` on interior nodes. Boundary nodes
//! follow the interior by linear extrapolation of the increment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pointwise_solver::{FieldSource, Grid2DField, GridSpec};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LFConfig {
    pub dx: f64,
    pub dt: f64,
    /// The grid covers `[-3 - pad, 3 + pad]²`.
    pub pad: f64,
    /// Dissipation coefficients; estimated from the model when unset.
    pub alpha: Option<(f64, f64)>,
    /// Costate box sampled by the estimate.
    pub p_box: (f64, f64),
    /// Multiplier on sampled coefficients, which undershoot the true maxima
    /// between lattice points.
    pub alpha_safety: f64,
}

impl Default for LFConfig {
    fn default() -> Self {
        Self { dx: 0.005, dt: 0.001, pad: 1.0, alpha: None, p_box: (-5.0, 5.0), alpha_safety: 1.3 }
    }
}

impl LFConfig {
    pub fn domain(&self) -> (f64, f64) {
        (-3.0 - self.pad, 3.0 + self.pad)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        if !(self.dx > 0.0 && self.pad >= 0.0) {
            return Err(HjError::config(format!("invalid grid: dx = {}, pad = {}", self.dx, self.pad)));
        }
        let (lo, hi) = self.domain();
        let cells = (hi - lo) / self.dx;
        let n = cells.round();
        if (cells - n).abs() > 1e-6 * n.max(1.0) {
            return Err(HjError::config(format!("dx = {} does not divide the domain [{lo}, {hi}]", self.dx)));
        }
        let n = n as usize + 1;
        Ok(GridSpec { dim: 2, x1: (lo, hi), x2: (lo, hi), n1: n, n2: n })
    }

    /// Dissipation in use: explicit, or estimated and scaled by `alpha_safety`.
    pub fn resolve_alpha(&self, model: &dyn Hamiltonian) -> (f64, f64) {
        self.alpha.unwrap_or_else(|| {
            let (a1, a2) = estimate_dissipation(model, self.domain(), self.p_box);
            (a1 * self.alpha_safety, a2 * self.alpha_safety)
        })
    }

    /// `Δt (α₁ + α₂) / Δx`; the scheme is monotone when this is at most one.
    pub fn cfl(&self, alpha: (f64, f64)) -> f64 {
        self.dt * (alpha.0 + alpha.1) / self.dx
    }

    /// Largest stable step for `alpha`, scaled by `fraction`.
    pub fn stable_dt(&self, alpha: (f64, f64), fraction: f64) -> f64 {
        fraction * self.dx / (alpha.0 + alpha.1)
    }
}

const LATTICE: usize = 21;

/// `αᵢ = max |∂H/∂pᵢ|` over a 21⁴ lattice on `domain² × p_box²`, at `t = 0`.
/// Lattice points where the gradient is undefined are skipped.
pub fn estimate_dissipation(model: &dyn Hamiltonian, domain: (f64, f64), p_box: (f64, f64)) -> (f64, f64) {
    let at = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (LATTICE - 1) as f64;
    let mut alpha = (0.0f64, 0.0f64);
    let mut gp = [0.0; 2];
    for i1 in 0..LATTICE {
        for i2 in 0..LATTICE {
            let x = [at(domain, i1), at(domain, i2)];
            for j1 in 0..LATTICE {
                for j2 in 0..LATTICE {
                    let p = [at(p_box, j1), at(p_box, j2)];
                    if model.grad_p(&x, &p, 0.0, &mut gp).is_ok() {
                        alpha.0 = alpha.0.max(gp[0].abs());
                        alpha.1 = alpha.1.max(gp[1].abs());
                    }
                }
            }
        }
    }
    alpha
}

/// Lax–Friedrichs numerical Hamiltonian.
#[inline]
pub fn numerical_hamiltonian(
    model: &dyn Hamiltonian,
    x: &[f64; 2],
    p_minus: [f64; 2],
    p_plus: [f64; 2],
    t: f64,
    alpha: (f64, f64),
) -> f64 {
    let p = [0.5 * (p_minus[0] + p_plus[0]), 0.5 * (p_minus[1] + p_plus[1])];
    model.eval(x, &p, t) - 0.5 * alpha.0 * (p_plus[0] - p_minus[0]) - 0.5 * alpha.1 * (p_plus[1] - p_minus[1])
}

/// One explicit step `φⁿ → φⁿ⁺¹` on `grid`, written into `next`.
///
/// Interior nodes use the Lax–Friedrichs update. Boundary nodes have no
/// two-sided stencil; they take the increment `φⁿ⁺¹ - φⁿ` extrapolated
/// linearly from the two nearest interior nodes, which stays stable whether
/// characteristics enter or leave the grid and leaves `φ` untouched wherever
/// the interior does not move.
pub fn lf_step(
    model: &dyn Hamiltonian,
    grid: &GridSpec,
    phi: &[f64],
    next: &mut [f64],
    t: f64,
    dt: f64,
    alpha: (f64, f64),
) {
    let (n1, n2) = (grid.n1, grid.n2);
    assert!(n1 >= 4 && n2 >= 4, "Lax-Friedrichs grid needs at least 4 nodes per axis");
    let (h1, h2) = (grid.h1(), grid.h2());
    next.par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
        if j == 0 || j + 1 == n2 {
            return;
        }
        let x2 = grid.coord2(j);
        let at = |i: usize, j: usize| phi[j * n1 + i];
        for i in 1..n1 - 1 {
            let c = at(i, j);
            let p_plus = [(at(i + 1, j) - c) / h1, (at(i, j + 1) - c) / h2];
            let p_minus = [(c - at(i - 1, j)) / h1, (c - at(i, j - 1)) / h2];
            let x = [grid.coord1(i), x2];
            row[i] = c - dt * numerical_hamiltonian(model, &x, p_minus, p_plus, t, alpha);
        }
    });
    let inc = |next: &[f64], k: usize| next[k] - phi[k];
    // left and right columns from the interior rows
    for j in 1..n2 - 1 {
        let r = j * n1;
        next[r] = phi[r] + 2.0 * inc(next, r + 1) - inc(next, r + 2);
        let e = r + n1 - 1;
        next[e] = phi[e] + 2.0 * inc(next, e - 1) - inc(next, e - 2);
    }
    // bottom and top rows, corners included, from the completed columns
    for i in 0..n1 {
        let (b, b1, b2) = (i, n1 + i, 2 * n1 + i);
        next[b] = phi[b] + 2.0 * inc(next, b1) - inc(next, b2);
        let (top, t1, t2) = ((n2 - 1) * n1 + i, (n2 - 2) * n1 + i, (n2 - 3) * n1 + i);
        next[top] = phi[top] + 2.0 * inc(next, t1) - inc(next, t2);
    }
}

/// Marches from `g` to `t_final` and returns fields at the requested times.
///
/// The run uses `N = ⌈t_final / Δt⌉` equal steps of `t_final / N ≤ Δt`;
/// each snapshot is the state at the nearest step.
pub fn lf_solve(spec: &ProblemSpec, cfg: &LFConfig, t_final: f64, snapshot_times: &[f64]) -> Result<Vec<Grid2DField>> {
    if spec.dim() != 2 {
        return Err(HjError::config(format!("Lax-Friedrichs reference needs d = 2, got {}", spec.dim())));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(HjError::config(format!("final time must be positive, got {t_final}")));
    }
    if let Some(s) = snapshot_times.iter().find(|s| !(**s >= 0.0 && **s <= t_final * (1.0 + 1e-12))) {
        return Err(HjError::config(format!("snapshot time {s} outside [0, {t_final}]")));
    }
    if !(cfg.dt > 0.0) {
        return Err(HjError::config(format!("dt must be positive, got {}", cfg.dt)));
    }
    let grid = cfg.grid()?;
    let model = spec.model.as_ref();
    let alpha = cfg.resolve_alpha(model);
    let cfl = cfg.cfl(alpha);
    if cfl > 1.0 {
        return Err(HjError::config(format!(
            "CFL violated: dt (a1 + a2) / dx = {cfl:.4} > 1 with a = ({:.4}, {:.4}); use dt <= {:.3e}",
            alpha.0,
            alpha.1,
            cfg.stable_dt(alpha, 1.0)
        )));
    }

    let steps = ((t_final / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let snap_steps: Vec<usize> = snapshot_times.iter().map(|s| ((s / dt).round() as usize).min(steps)).collect();

    let mut phi: Vec<f64> = (0..grid.len()).map(|k| spec.data.value(&grid.point(k))).collect();
    let mut next = vec![0.0; phi.len()];
    let mut out: Vec<Option<Grid2DField>> = vec![None; snapshot_times.len()];
    let record = |n: usize, phi: &[f64], out: &mut Vec<Option<Grid2DField>>| -> Result<()> {
        for (k, &s) in snap_steps.iter().enumerate() {
            if s == n {
                out[k] = Some(Grid2DField::from_values(grid, snapshot_times[k], FieldSource::Lf, phi.to_vec())?);
            }
        }
        Ok(())
    };
    record(0, &phi, &mut out)?;
    for n in 0..steps {
        lf_step(model, &grid, &phi, &mut next, n as f64 * dt, dt, alpha);
        std::mem::swap(&mut phi, &mut next);
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(HjError::NonFinite { node: n + 1 });
        }
        record(n + 1, &phi, &mut out)?;
    }
    Ok(out.into_iter().map(|f| f.expect("every snapshot step is visited")).collect())
}
