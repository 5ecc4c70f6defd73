//! The three objective functionals of the terminal costate `v`, evaluated
//! with the rectangular rule on the stored Euler trajectory:
//!
//! * Lax: `g(x₀) + Σ_{n=0}^{N-1} [⟨p_n, ∂ₚH⟩ - H]_n h_{n+1}` (left endpoints)
//! * Hopf: `g*(p₀) + Σ_{n=1}^{N} [H - ⟨∂ₓH, x_n⟩]_n h_n - ⟨x, v⟩` (right endpoints)
//! * min-over-time: `min_n g(x_n)` over every node of the trajectory
//!
//! and the forward-difference partial derivative shared by all three.

use serde::{Deserialize, Serialize};

use crate::characteristics::{integrate_backward_into, Trajectory};
use crate::error::{HjError, Result};
use crate::linalg::dot;
use crate::problem::{ProblemSpec, SolveMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    Lax,
    MinOverTime,
    Hopf,
}

impl ObjectiveKind {
    pub fn for_mode(mode: SolveMode) -> Option<Self> {
        match mode {
            SolveMode::Lax => Some(ObjectiveKind::Lax),
            SolveMode::Hopf => Some(ObjectiveKind::Hopf),
            SolveMode::MinOverTime => Some(ObjectiveKind::MinOverTime),
            SolveMode::LinearDirect => None,
        }
    }
}

/// Minimum of `g` along a trajectory and the node where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinOverTime {
    pub value: f64,
    /// Trajectory node index; the elapsed backward time is `t - s_node`.
    pub node: usize,
}

/// A functional `F_{x,t}(v)` at a fixed query point.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    problem: &'a ProblemSpec,
    x: Vec<f64>,
    t: f64,
    kind: ObjectiveKind,
    ds: f64,
    sigma: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        problem: &'a ProblemSpec,
        x: &[f64],
        t: f64,
        kind: ObjectiveKind,
        ds: f64,
        sigma: f64,
    ) -> Result<Self> {
        if x.len() != problem.dim() {
            return Err(HjError::config(format!(
                "query point has {} components, problem dimension is {}",
                x.len(),
                problem.dim()
            )));
        }
        if !(sigma > 0.0) {
            return Err(HjError::config(format!("finite-difference step must be positive, got {sigma}")));
        }
        match kind {
            ObjectiveKind::Hopf if !problem.data.has_conjugate() => {
                return Err(HjError::Unsupported(format!(
                    "hopf functional needs g*, '{}' has no conjugate",
                    problem.data.name()
                )))
            }
            ObjectiveKind::MinOverTime if !problem.model.time_independent() => {
                return Err(HjError::config("min-over-time functional needs a time-independent Hamiltonian"))
            }
            _ => {}
        }
        Ok(Self { problem, x: x.to_vec(), t, kind, ds, sigma })
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn query(&self) -> (&[f64], f64) {
        (&self.x, self.t)
    }

    /// Integrates the characteristic ending at `(x, v)` into `traj`.
    pub fn trajectory_into(&self, v: &[f64], traj: &mut Trajectory) -> Result<()> {
        integrate_backward_into(self.problem.model.as_ref(), &self.x, v, self.t, self.ds, traj)
    }

    /// Value of the functional selected by `kind`, reusing `traj` as scratch.
    pub fn value_with(&self, v: &[f64], traj: &mut Trajectory) -> Result<f64> {
        self.trajectory_into(v, traj)?;
        let value = match self.kind {
            ObjectiveKind::Lax => lax_quadrature(self.problem, traj),
            ObjectiveKind::Hopf => hopf_quadrature(self.problem, traj, &self.x, v)?,
            ObjectiveKind::MinOverTime => min_over_nodes(self.problem, traj).value,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(HjError::NonFinite { node: 0 })
        }
    }

    pub fn value(&self, v: &[f64]) -> Result<f64> {
        self.value_with(v, &mut Trajectory::default())
    }

    pub fn lax_value(&self, v: &[f64]) -> Result<f64> {
        self.expect(ObjectiveKind::Lax)?;
        self.value(v)
    }

    /// `𝓖_{x,t}(v)`; the viscosity solution is minus its minimum.
    pub fn hopf_value(&self, v: &[f64]) -> Result<f64> {
        self.expect(ObjectiveKind::Hopf)?;
        self.value(v)
    }

    pub fn min_over_time_value(&self, v: &[f64]) -> Result<MinOverTime> {
        self.expect(ObjectiveKind::MinOverTime)?;
        let mut traj = Trajectory::default();
        self.trajectory_into(v, &mut traj)?;
        Ok(min_over_nodes(self.problem, &traj))
    }

    /// `(F(v + σeᵢ) - F(v)) / σ`. Pass the already known `F(v)` as `base`
    /// to save one evaluation.
    pub fn partial_derivative(&self, v: &[f64], i: usize, base: Option<f64>) -> Result<f64> {
        let mut traj = Trajectory::default();
        self.partial_derivative_with(v, i, base, &mut traj)
    }

    pub fn partial_derivative_with(
        &self,
        v: &[f64],
        i: usize,
        base: Option<f64>,
        traj: &mut Trajectory,
    ) -> Result<f64> {
        let base = match base {
            Some(b) => b,
            None => self.value_with(v, traj)?,
        };
        let mut probe = v.to_vec();
        probe[i] += self.sigma;
        let shifted = self.value_with(&probe, traj)?;
        Ok(forward_difference(base, shifted, self.sigma))
    }

    fn expect(&self, kind: ObjectiveKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(HjError::config(format!("objective is {:?}, not {:?}", self.kind, kind)))
        }
    }
}

#[inline]
pub fn forward_difference(base: f64, shifted: f64, sigma: f64) -> f64 {
    (shifted - base) / sigma
}

/// `g(x₀) + Σ_{n=0}^{N-1} (⟨p_n, ∂ₚH⟩ - H)_n · (s_{n+1} - s_n)`.
pub fn lax_quadrature(problem: &ProblemSpec, traj: &Trajectory) -> f64 {
    let mut sum = 0.0;
    for n in 0..traj.steps() {
        let terms = traj.terms(n);
        sum += (terms.p_dot_hp - terms.hamiltonian) * traj.step_len(n + 1);
    }
    problem.data.value(traj.state(0)) + sum
}

/// `g*(p₀) + Σ_{n=1}^{N} (H - ⟨∂ₓH, x_n⟩)_n · (s_n - s_{n-1}) - ⟨x, v⟩`.
pub fn hopf_quadrature(problem: &ProblemSpec, traj: &Trajectory, x: &[f64], v: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for n in 1..=traj.steps() {
        let terms = traj.terms(n);
        sum += (terms.hamiltonian - terms.x_dot_hx) * traj.step_len(n);
    }
    Ok(problem.data.conjugate(traj.costate(0))? + sum - dot(x, v))
}

/// `min_n g(x_n)`; ties resolve to the node closest to the query point.
pub fn min_over_nodes(problem: &ProblemSpec, traj: &Trajectory) -> MinOverTime {
    let mut best = MinOverTime { value: f64::INFINITY, node: traj.steps() };
    for n in (0..=traj.steps()).rev() {
        let g = problem.data.value(traj.state(n));
        if g < best.value {
            best = MinOverTime { value: g, node: n };
        }
    }
    best
}
