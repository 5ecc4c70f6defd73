use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::hamiltonian::{
    make_example, make_initial_data, Example, HamiltonianModel, InitialKind, SharedInitialData,
};

/// Which representation formula a point solve optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Minimise the action functional over the terminal costate.
    Lax,
    /// Minimise the conjugate (Hopf-type) functional, report minus the minimum.
    Hopf,
    /// Minimise `g` over the states visited by one characteristic.
    MinOverTime,
    /// `H` affine in `p`: one characteristic, nothing to optimise.
    LinearDirect,
}

impl SolveMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "lax" => Ok(SolveMode::Lax),
            "hopf" => Ok(SolveMode::Hopf),
            "min-over-time" | "minovertime" | "huygens" => Ok(SolveMode::MinOverTime),
            "linear-direct" | "lineardirect" | "linear" => Ok(SolveMode::LinearDirect),
            other => Err(HjError::config(format!("unknown mode '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveMode::Lax => "lax",
            SolveMode::Hopf => "hopf",
            SolveMode::MinOverTime => "min-over-time",
            SolveMode::LinearDirect => "linear-direct",
        }
    }
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Hamilton–Jacobi problem `φ_t + H(x, ∇φ, t) = 0`, `φ(·, 0) = g`, plus the
/// formula used to evaluate it.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub model: HamiltonianModel,
    pub data: SharedInitialData,
    pub mode: SolveMode,
}

impl ProblemSpec {
    /// With `mode = None` the formula is picked from the model: a single
    /// characteristic for `p`-affine models, the Lax functional for convex
    /// ones and the Hopf functional otherwise.
    pub fn new(
        model: HamiltonianModel,
        data: SharedInitialData,
        mode: Option<SolveMode>,
    ) -> Result<Self> {
        if model.dim() != data.dim() {
            return Err(HjError::config(format!(
                "Hamiltonian dimension {} differs from initial data dimension {}",
                model.dim(),
                data.dim()
            )));
        }
        let mode = mode.unwrap_or_else(|| Self::auto_mode(&model));
        let spec = Self { model, data, mode };
        spec.validate()?;
        Ok(spec)
    }

    pub fn auto_mode(model: &HamiltonianModel) -> SolveMode {
        if model.linear_in_p() {
            SolveMode::LinearDirect
        } else if model.convex_in_p() {
            SolveMode::Lax
        } else {
            SolveMode::Hopf
        }
    }

    /// Builds a benchmark problem.
    pub fn example(
        example: Example,
        d: usize,
        initial: InitialKind,
        mode: Option<SolveMode>,
    ) -> Result<Self> {
        Self::new(make_example(example, d)?, make_initial_data(initial, d)?, mode)
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn with_mode(&self, mode: SolveMode) -> Result<Self> {
        Self::new(Arc::clone(&self.model), Arc::clone(&self.data), Some(mode))
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            SolveMode::Hopf if !(self.data.is_convex() && self.data.has_conjugate()) => {
                Err(HjError::config(format!(
                    "hopf mode needs convex initial data with a conjugate; '{}' has none",
                    self.data.name()
                )))
            }
            SolveMode::MinOverTime if !self.model.time_independent() => Err(HjError::config(
                "min-over-time mode needs a time-independent Hamiltonian",
            )),
            SolveMode::LinearDirect if !self.model.linear_in_p() => Err(HjError::config(format!(
                "linear-direct mode needs a Hamiltonian affine in p; '{}' is not",
                self.model.name()
            ))),
            _ => Ok(()),
        }
    }
}
