//! Hamiltonians `H(x, p, t)` and initial data `g(x)`.
//!
//! The built-in families are the five benchmark problems (linear transport,
//! harmonic oscillator, variable-speed eikonal, a non-convex Evans-type
//! Hamiltonian and a split convex/concave eikonal), plus a few state-free
//! reference models used as closed-form oracles.
//!
//! Every model is immutable after construction and is shared across
//! threads behind an [`Arc`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};
use crate::linalg::{dot, norm2};

/// Threshold on `|p|` below which degree-one homogeneous models refuse to
/// return a gradient.
pub const SINGULAR_P_NORM: f64 = 1e-12;

/// A Hamiltonian together with its partial gradients.
///
/// Gradients are written into caller-provided buffers of length `dim()`.
pub trait Hamiltonian: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], p: &[f64], t: f64) -> f64;

    /// `∂H/∂p`. Nonsmooth models return [`HjError::SingularPoint`] at `p ≈ 0`.
    fn grad_p(&self, x: &[f64], p: &[f64], t: f64, out: &mut [f64]) -> Result<()>;

    /// `∂H/∂x`.
    fn grad_x(&self, x: &[f64], p: &[f64], t: f64, out: &mut [f64]) -> Result<()>;

    /// Value and both gradients in one call. Built-ins override this to
    /// share the expensive parts (exponentials, norms).
    fn eval_with_grads(
        &self,
        x: &[f64],
        p: &[f64],
        t: f64,
        gp: &mut [f64],
        gx: &mut [f64],
    ) -> Result<f64> {
        self.grad_p(x, p, t, gp)?;
        self.grad_x(x, p, t, gx)?;
        Ok(self.eval(x, p, t))
    }

    fn convex_in_p(&self) -> bool;

    /// False for models with a kink at `p = 0`.
    fn smooth_at_p0(&self) -> bool;

    /// `H(x, λp, t) = λ H(x, p, t)` for `λ > 0`.
    fn homogeneous_degree_one(&self) -> bool {
        false
    }

    /// `H` affine in `p`; the `x` characteristics then do not depend on the costate.
    fn linear_in_p(&self) -> bool {
        false
    }

    fn time_independent(&self) -> bool {
        true
    }

    fn name(&self) -> String;
}

pub type HamiltonianModel = Arc<dyn Hamiltonian>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "p" | "1" | "+1" => Ok(Sign::Plus),
            "-" | "minus" | "m" | "-1" => Ok(Sign::Minus),
            other => Err(HjError::config(format!("invalid sign '{other}', expected + or -"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// The built-in benchmark families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum Example {
    /// `H = -0.2 c(x) - ∇c(x)·p`
    #[serde(rename = "ex1")]
    Ex1Linear,
    /// `H± = ±½(|p|² + |x|²)`
    #[serde(rename = "ex2")]
    Ex2Harmonic { sign: Sign },
    /// `H± = ±c(x)|p|`
    #[serde(rename = "ex3")]
    Ex3Eikonal { sign: Sign },
    /// `H = -c(x)p₁ + 2|p₂| - |p| - 1`
    #[serde(rename = "ex4")]
    Ex4Evans,
    /// `H = c(x)|p_{1..k}| - c(-x)|p_{k+1..d}|`
    #[serde(rename = "ex5")]
    Ex5Split { k: usize },
}

impl Example {
    /// Parses the CLI id (`ex1`..`ex5`) with its numeric parameters.
    pub fn parse(id: &str, sign: Option<Sign>, k: Option<usize>) -> Result<Self> {
        let sign = sign.unwrap_or(Sign::Plus);
        match id.trim().to_ascii_lowercase().as_str() {
            "ex1" | "1" => Ok(Example::Ex1Linear),
            "ex2" | "2" => Ok(Example::Ex2Harmonic { sign }),
            "ex3" | "3" => Ok(Example::Ex3Eikonal { sign }),
            "ex4" | "4" => Ok(Example::Ex4Evans),
            "ex5" | "5" => Ok(Example::Ex5Split { k: k.unwrap_or(1) }),
            other => Err(HjError::config(format!("unknown example '{other}'"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Example::Ex1Linear => "ex1",
            Example::Ex2Harmonic { .. } => "ex2",
            Example::Ex3Eikonal { .. } => "ex3",
            Example::Ex4Evans => "ex4",
            Example::Ex5Split { .. } => "ex5",
        }
    }

    pub fn all_ids() -> &'static [(&'static str, &'static str)] {
        &[
            ("ex1", "linear transport  H = -0.2c(x) - ∇c(x)·p"),
            ("ex2", "harmonic oscillator  H = ±½(|p|² + |x|²)   [--sign]"),
            ("ex3", "variable-speed eikonal  H = ±c(x)|p|   [--sign]"),
            ("ex4", "non-convex  H = -c(x)p₁ + 2|p₂| - |p| - 1"),
            ("ex5", "split eikonal  H = c(x)|p_1..k| - c(-x)|p_k+1..d|   [--k]"),
        ]
    }
}

/// Builds one of the benchmark Hamiltonians in dimension `d`.
pub fn make_example(example: Example, d: usize) -> Result<HamiltonianModel> {
    if d < 2 {
        return Err(HjError::config(format!("dimension must be at least 2, got {d}")));
    }
    Ok(match example {
        Example::Ex1Linear => Arc::new(LinearTransport::new(d)),
        Example::Ex2Harmonic { sign } => Arc::new(HarmonicOscillator::new(d, sign)),
        Example::Ex3Eikonal { sign } => Arc::new(VariableSpeedEikonal::new(d, sign)),
        Example::Ex4Evans => Arc::new(NonConvexEvans::new(d)),
        Example::Ex5Split { k } => Arc::new(SplitEikonal::new(d, k)?),
    })
}

/// `scale · (1 + 3 exp(-4 |x - center|²))`.
#[derive(Debug, Clone)]
pub struct GaussianBump {
    center: Vec<f64>,
    scale: f64,
}

impl GaussianBump {
    /// Bump centred at `(1, 1, 0, ..., 0)`.
    pub fn standard(d: usize, scale: f64) -> Self {
        let mut center = vec![0.0; d];
        center[0] = 1.0;
        center[1] = 1.0;
        Self { center, scale }
    }

    /// The reflected bump `x ↦ c(-x)`, i.e. centred at `-(1, 1, 0, ..., 0)`.
    pub fn reflected(&self) -> Self {
        Self {
            center: self.center.iter().map(|c| -c).collect(),
            scale: self.scale,
        }
    }

    fn exp_term(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        (-4.0 * r2).exp()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.scale * (1.0 + 3.0 * self.exp_term(x))
    }

    /// Writes `∇c(x)` and returns `c(x)`.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let e = self.exp_term(x);
        let k = -24.0 * self.scale * e;
        for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&self.center) {
            *g = k * (xi - ci);
        }
        self.scale * (1.0 + 3.0 * e)
    }

    /// Adds `w · ∇²c(x) v` to `out`.
    fn add_hessian_vec(&self, x: &[f64], v: &[f64], w: f64, out: &mut [f64]) {
        let e = self.exp_term(x);
        let k = -24.0 * self.scale * e * w;
        let rv: f64 = x
            .iter()
            .zip(&self.center)
            .zip(v)
            .map(|((xi, ci), vi)| (xi - ci) * vi)
            .sum();
        for (((o, xi), ci), vi) in out.iter_mut().zip(x).zip(&self.center).zip(v) {
            *o += k * (vi - 8.0 * (xi - ci) * rv);
        }
    }
}

fn singular(norm: f64) -> HjError {
    HjError::SingularPoint { node: 0, norm }
}

/// Example 1: `H = -0.2 c(x) - ∇c(x)·p`.
#[derive(Debug, Clone)]
pub struct LinearTransport {
    bump: GaussianBump,
}

impl LinearTransport {
    pub fn new(d: usize) -> Self {
        Self { bump: GaussianBump::standard(d, 1.0) }
    }
}

impl Hamiltonian for LinearTransport {
    fn dim(&self) -> usize {
        self.bump.center.len()
    }

    fn eval(&self, x: &[f64], p: &[f64], _t: f64) -> f64 {
        let mut g = vec![0.0; x.len()];
        let c = self.bump.value_grad(x, &mut g);
        -0.2 * c - dot(&g, p)
    }

    fn grad_p(&self, x: &[f64], _p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        self.bump.value_grad(x, out);
        out.iter_mut().for_each(|g| *g = -*g);
        Ok(())
    }

    fn grad_x(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        self.bump.value_grad(x, out);
        out.iter_mut().for_each(|g| *g *= -0.2);
        self.bump.add_hessian_vec(x, p, -1.0, out);
        Ok(())
    }

    fn eval_with_grads(
        &self,
        x: &[f64],
        p: &[f64],
        _t: f64,
        gp: &mut [f64],
        gx: &mut [f64],
    ) -> Result<f64> {
        let c = self.bump.value_grad(x, gp);
        let h = -0.2 * c - dot(gp, p);
        for (a, b) in gx.iter_mut().zip(gp.iter()) {
            *a = -0.2 * b;
        }
        self.bump.add_hessian_vec(x, p, -1.0, gx);
        gp.iter_mut().for_each(|g| *g = -*g);
        Ok(h)
    }

    fn convex_in_p(&self) -> bool {
        true
    }
    fn smooth_at_p0(&self) -> bool {
        true
    }
    fn linear_in_p(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "ex1".into()
    }
}

/// Example 2: `H± = ±½(|p|² + |x|²)`.
#[derive(Debug, Clone)]
pub struct HarmonicOscillator {
    d: usize,
    sign: Sign,
}

impl HarmonicOscillator {
    pub fn new(d: usize, sign: Sign) -> Self {
        Self { d, sign }
    }
}

impl Hamiltonian for HarmonicOscillator {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64], p: &[f64], _t: f64) -> f64 {
        self.sign.factor() * 0.5 * (dot(p, p) + dot(x, x))
    }

    fn grad_p(&self, _x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let s = self.sign.factor();
        out.iter_mut().zip(p).for_each(|(o, pi)| *o = s * pi);
        Ok(())
    }

    fn grad_x(&self, x: &[f64], _p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let s = self.sign.factor();
        out.iter_mut().zip(x).for_each(|(o, xi)| *o = s * xi);
        Ok(())
    }

    fn convex_in_p(&self) -> bool {
        self.sign == Sign::Plus
    }
    fn smooth_at_p0(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("ex2{}", self.sign)
    }
}

/// Example 3: `H± = ±c(x)|p|`.
#[derive(Debug, Clone)]
pub struct VariableSpeedEikonal {
    bump: GaussianBump,
    sign: Sign,
}

impl VariableSpeedEikonal {
    pub fn new(d: usize, sign: Sign) -> Self {
        Self { bump: GaussianBump::standard(d, 1.0), sign }
    }

    pub fn speed(&self, x: &[f64]) -> f64 {
        self.bump.value(x)
    }
}

impl Hamiltonian for VariableSpeedEikonal {
    fn dim(&self) -> usize {
        self.bump.center.len()
    }

    fn eval(&self, x: &[f64], p: &[f64], _t: f64) -> f64 {
        self.sign.factor() * self.bump.value(x) * norm2(p)
    }

    fn grad_p(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let np = norm2(p);
        if np <= SINGULAR_P_NORM {
            return Err(singular(np));
        }
        let k = self.sign.factor() * self.bump.value(x) / np;
        out.iter_mut().zip(p).for_each(|(o, pi)| *o = k * pi);
        Ok(())
    }

    fn grad_x(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        self.bump.value_grad(x, out);
        let k = self.sign.factor() * norm2(p);
        out.iter_mut().for_each(|g| *g *= k);
        Ok(())
    }

    fn eval_with_grads(
        &self,
        x: &[f64],
        p: &[f64],
        _t: f64,
        gp: &mut [f64],
        gx: &mut [f64],
    ) -> Result<f64> {
        let np = norm2(p);
        if np <= SINGULAR_P_NORM {
            return Err(singular(np));
        }
        let s = self.sign.factor();
        let c = self.bump.value_grad(x, gx);
        gx.iter_mut().for_each(|g| *g *= s * np);
        let k = s * c / np;
        gp.iter_mut().zip(p).for_each(|(o, pi)| *o = k * pi);
        Ok(s * c * np)
    }

    fn convex_in_p(&self) -> bool {
        self.sign == Sign::Plus
    }
    fn smooth_at_p0(&self) -> bool {
        false
    }
    fn homogeneous_degree_one(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("ex3{}", self.sign)
    }
}

/// Example 4: `H = -c(x)p₁ + 2|p₂| - |p| - 1`, `c = 2(1 + 3exp(-4|x - (1,1)|²))`.
///
/// The `|p₂|` kink uses `sign(0) = 0`.
#[derive(Debug, Clone)]
pub struct NonConvexEvans {
    bump: GaussianBump,
}

impl NonConvexEvans {
    pub fn new(d: usize) -> Self {
        Self { bump: GaussianBump::standard(d, 2.0) }
    }
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Hamiltonian for NonConvexEvans {
    fn dim(&self) -> usize {
        self.bump.center.len()
    }

    fn eval(&self, x: &[f64], p: &[f64], _t: f64) -> f64 {
        -self.bump.value(x) * p[0] + 2.0 * p[1].abs() - norm2(p) - 1.0
    }

    fn grad_p(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let np = norm2(p);
        if np <= SINGULAR_P_NORM {
            return Err(singular(np));
        }
        out.iter_mut().zip(p).for_each(|(o, pi)| *o = -pi / np);
        out[0] -= self.bump.value(x);
        out[1] += 2.0 * sign0(p[1]);
        Ok(())
    }

    fn grad_x(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        self.bump.value_grad(x, out);
        out.iter_mut().for_each(|g| *g *= -p[0]);
        Ok(())
    }

    fn eval_with_grads(
        &self,
        x: &[f64],
        p: &[f64],
        _t: f64,
        gp: &mut [f64],
        gx: &mut [f64],
    ) -> Result<f64> {
        let np = norm2(p);
        if np <= SINGULAR_P_NORM {
            return Err(singular(np));
        }
        let c = self.bump.value_grad(x, gx);
        gx.iter_mut().for_each(|g| *g *= -p[0]);
        gp.iter_mut().zip(p).for_each(|(o, pi)| *o = -pi / np);
        gp[0] -= c;
        gp[1] += 2.0 * sign0(p[1]);
        Ok(-c * p[0] + 2.0 * p[1].abs() - np - 1.0)
    }

    fn convex_in_p(&self) -> bool {
        false
    }
    fn smooth_at_p0(&self) -> bool {
        false
    }
    fn name(&self) -> String {
        "ex4".into()
    }
}

/// Example 5: `H = c₁(x)|p_{1..k}| - c₂(x)|p_{k+1..d}|` with `c₁ = c`, `c₂ = c(-·)`.
#[derive(Debug, Clone)]
pub struct SplitEikonal {
    k: usize,
    c1: GaussianBump,
    c2: GaussianBump,
}

impl SplitEikonal {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= d {
            return Err(HjError::config(format!(
                "split index k must satisfy 1 <= k < d (k = {k}, d = {d})"
            )));
        }
        let c1 = GaussianBump::standard(d, 2.0);
        let c2 = c1.reflected();
        Ok(Self { k, c1, c2 })
    }

    pub fn split(&self) -> usize {
        self.k
    }

    fn block_norms(&self, p: &[f64]) -> (f64, f64) {
        (norm2(&p[..self.k]), norm2(&p[self.k..]))
    }
}

impl Hamiltonian for SplitEikonal {
    fn dim(&self) -> usize {
        self.c1.center.len()
    }

    fn eval(&self, x: &[f64], p: &[f64], _t: f64) -> f64 {
        let (na, nb) = self.block_norms(p);
        self.c1.value(x) * na - self.c2.value(x) * nb
    }

    fn grad_p(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let (na, nb) = self.block_norms(p);
        if na <= SINGULAR_P_NORM || nb <= SINGULAR_P_NORM {
            return Err(singular(na.min(nb)));
        }
        let ka = self.c1.value(x) / na;
        let kb = -self.c2.value(x) / nb;
        let (oa, ob) = out.split_at_mut(self.k);
        oa.iter_mut().zip(&p[..self.k]).for_each(|(o, pi)| *o = ka * pi);
        ob.iter_mut().zip(&p[self.k..]).for_each(|(o, pi)| *o = kb * pi);
        Ok(())
    }

    fn grad_x(&self, x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let (na, nb) = self.block_norms(p);
        let mut tmp = vec![0.0; x.len()];
        self.c1.value_grad(x, out);
        self.c2.value_grad(x, &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o = *o * na - t * nb);
        Ok(())
    }

    fn eval_with_grads(
        &self,
        x: &[f64],
        p: &[f64],
        _t: f64,
        gp: &mut [f64],
        gx: &mut [f64],
    ) -> Result<f64> {
        let (na, nb) = self.block_norms(p);
        if na <= SINGULAR_P_NORM || nb <= SINGULAR_P_NORM {
            return Err(singular(na.min(nb)));
        }
        // gp is free scratch until the end.
        let c2 = self.c2.value_grad(x, gp);
        let c1 = self.c1.value_grad(x, gx);
        gx.iter_mut().zip(gp.iter()).for_each(|(o, t)| *o = *o * na - t * nb);
        let ka = c1 / na;
        let kb = -c2 / nb;
        let (oa, ob) = gp.split_at_mut(self.k);
        oa.iter_mut().zip(&p[..self.k]).for_each(|(o, pi)| *o = ka * pi);
        ob.iter_mut().zip(&p[self.k..]).for_each(|(o, pi)| *o = kb * pi);
        Ok(c1 * na - c2 * nb)
    }

    fn convex_in_p(&self) -> bool {
        false
    }
    fn smooth_at_p0(&self) -> bool {
        false
    }
    fn homogeneous_degree_one(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("ex5(k={})", self.k)
    }
}

/// `H ≡ 0`.
#[derive(Debug, Clone)]
pub struct ZeroHamiltonian {
    pub d: usize,
}

impl Hamiltonian for ZeroHamiltonian {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, _x: &[f64], _p: &[f64], _t: f64) -> f64 {
        0.0
    }
    fn grad_p(&self, _x: &[f64], _p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
    fn grad_x(&self, _x: &[f64], _p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
    fn convex_in_p(&self) -> bool {
        true
    }
    fn smooth_at_p0(&self) -> bool {
        true
    }
    fn linear_in_p(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "zero".into()
    }
}

/// `H(p) = ½|p|²`.
#[derive(Debug, Clone)]
pub struct KineticHamiltonian {
    pub d: usize,
}

impl Hamiltonian for KineticHamiltonian {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, _x: &[f64], p: &[f64], _t: f64) -> f64 {
        0.5 * dot(p, p)
    }
    fn grad_p(&self, _x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(p);
        Ok(())
    }
    fn grad_x(&self, _x: &[f64], _p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
    fn convex_in_p(&self) -> bool {
        true
    }
    fn smooth_at_p0(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "kinetic".into()
    }
}

/// `H(p) = speed · |p|` with a constant speed.
#[derive(Debug, Clone)]
pub struct ConstantSpeedEikonal {
    pub d: usize,
    pub speed: f64,
}

impl Hamiltonian for ConstantSpeedEikonal {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, _x: &[f64], p: &[f64], _t: f64) -> f64 {
        self.speed * norm2(p)
    }
    fn grad_p(&self, _x: &[f64], p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        let np = norm2(p);
        if np <= SINGULAR_P_NORM {
            return Err(singular(np));
        }
        out.iter_mut().zip(p).for_each(|(o, pi)| *o = self.speed * pi / np);
        Ok(())
    }
    fn grad_x(&self, _x: &[f64], _p: &[f64], _t: f64, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
    fn convex_in_p(&self) -> bool {
        self.speed >= 0.0
    }
    fn smooth_at_p0(&self) -> bool {
        false
    }
    fn homogeneous_degree_one(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("eikonal(c={})", self.speed)
    }
}

/// Initial data `g` with optional convex conjugate `g*`.
pub trait InitialData: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Fenchel–Legendre transform `g*(v) = sup_x {⟨x, v⟩ - g(x)}`.
    fn conjugate(&self, _v: &[f64]) -> Result<f64> {
        Err(HjError::Unsupported(format!(
            "{} has no closed-form convex conjugate",
            self.name()
        )))
    }

    fn conjugate_gradient(&self, _v: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(HjError::Unsupported(format!(
            "{} has no closed-form convex conjugate",
            self.name()
        )))
    }

    fn has_conjugate(&self) -> bool {
        false
    }

    fn is_convex(&self) -> bool;

    fn name(&self) -> String;
}

pub type SharedInitialData = Arc<dyn InitialData>;

/// `g(x) = ½(⟨x, Ax⟩ - 1)` with diagonal positive-definite `A`.
#[derive(Debug, Clone)]
pub struct EllipseQuadratic {
    diag: Vec<f64>,
}

impl EllipseQuadratic {
    pub fn from_diag(diag: Vec<f64>) -> Result<Self> {
        if diag.len() < 2 {
            return Err(HjError::config("ellipse data needs dimension >= 2"));
        }
        if diag.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(HjError::config("ellipse matrix must be positive definite"));
        }
        Ok(Self { diag })
    }

    /// `A⁻¹ = diag(1, 25/4, 1/4, ..., 1/4)`.
    pub fn standard(d: usize) -> Result<Self> {
        let mut diag = vec![4.0; d];
        if d >= 1 {
            diag[0] = 1.0;
        }
        if d >= 2 {
            diag[1] = 4.0 / 25.0;
        }
        Self::from_diag(diag)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::from_diag(vec![1.0; d])
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
}

impl InitialData for EllipseQuadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let q: f64 = x.iter().zip(&self.diag).map(|(xi, a)| a * xi * xi).sum();
        0.5 * (q - 1.0)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut()
            .zip(x.iter().zip(&self.diag))
            .for_each(|(o, (xi, a))| *o = a * xi);
    }

    fn conjugate(&self, v: &[f64]) -> Result<f64> {
        let q: f64 = v.iter().zip(&self.diag).map(|(vi, a)| vi * vi / a).sum();
        Ok(0.5 * q + 0.5)
    }

    fn conjugate_gradient(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut()
            .zip(v.iter().zip(&self.diag))
            .for_each(|(o, (vi, a))| *o = vi / a);
        Ok(())
    }

    fn has_conjugate(&self) -> bool {
        true
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "ellipse".into()
    }
}

/// The scaled, shifted Rosenbrock function in `(x₁, x₂)`; other coordinates are ignored.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    d: usize,
}

impl Rosenbrock {
    const SCALE: f64 = 0.4e-3;

    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(HjError::config("rosenbrock data needs dimension >= 2"));
        }
        Ok(Self { d })
    }
}

impl InitialData for Rosenbrock {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let r = 1.0 + x2 - x1 * x1;
        Self::SCALE * (-100.0 + (1.0 - x1).powi(2) + 100.0 * r * r)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (x1, x2) = (x[0], x[1]);
        let r = 1.0 + x2 - x1 * x1;
        out.fill(0.0);
        out[0] = Self::SCALE * (-2.0 * (1.0 - x1) - 400.0 * x1 * r);
        out[1] = Self::SCALE * 200.0 * r;
    }

    fn is_convex(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "rosenbrock".into()
    }
}

/// `g ≡ value`.
#[derive(Debug, Clone)]
pub struct ConstantData {
    pub d: usize,
    pub value: f64,
}

impl InitialData for ConstantData {
    fn dim(&self) -> usize {
        self.d
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn is_convex(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "constant".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    #[serde(alias = "ellipsequadratic")]
    Ellipse,
    Rosenbrock,
}

impl InitialKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ellipse" | "quadratic" | "ellipsequadratic" => Ok(InitialKind::Ellipse),
            "rosenbrock" => Ok(InitialKind::Rosenbrock),
            other => Err(HjError::config(format!("unknown initial data '{other}'"))),
        }
    }
}

pub fn make_initial_data(kind: InitialKind, d: usize) -> Result<SharedInitialData> {
    if d < 2 {
        return Err(HjError::config(format!("dimension must be at least 2, got {d}")));
    }
    Ok(match kind {
        InitialKind::Ellipse => Arc::new(EllipseQuadratic::standard(d)?),
        InitialKind::Rosenbrock => Arc::new(Rosenbrock::new(d)?),
    })
}
