//! Cyclic coordinate descent with Lipschitz backoff, random multi-start and
//! the optimality certificate `p(0) = ∇g(γ(0))`.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characteristics::Trajectory;
use crate::error::{HjError, Result};
use crate::hamiltonian::InitialData;
use crate::linalg::{dot, norm_inf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescentConfig {
    /// Initial Lipschitz guess `L`; the step is `α = 1/L`.
    pub lipschitz: f64,
    /// Iterations per step-size level (`M`).
    pub max_iters: usize,
    /// Per-coordinate stopping tolerance.
    pub eps: f64,
    /// Number of `α ← α/2` halvings before giving up.
    pub max_backoffs: usize,
    pub seed: u64,
    pub trials: usize,
    /// Initial guesses are drawn uniformly from `[lo, hi]^d`.
    pub init_box: (f64, f64),
    /// Fresh draws allowed per trial after a singular or non-finite start.
    pub max_resamples: usize,
    /// Skip remaining trials once one passes the certificate.
    pub stop_at_first_certified: bool,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            lipschitz: 1.0,
            max_iters: 500,
            eps: 0.5e-7,
            max_backoffs: 12,
            seed: 42,
            trials: 1,
            init_box: (-2.0, 2.0),
            max_resamples: 10,
            stop_at_first_certified: false,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(HjError::config(format!("lipschitz must be positive, got {}", self.lipschitz)));
        }
        if !(self.eps > 0.0) {
            return Err(HjError::config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iters < d {
            return Err(HjError::config(format!(
                "max_iters ({}) must be at least the dimension ({d})",
                self.max_iters
            )));
        }
        if self.trials == 0 {
            return Err(HjError::config("trials must be at least 1"));
        }
        let (lo, hi) = self.init_box;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(HjError::config(format!("invalid init box [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Step size after `backoffs` halvings.
    pub fn alpha_after(&self, backoffs: usize) -> f64 {
        1.0 / self.lipschitz / 2f64.powi(backoffs as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentResult {
    pub v_star: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub backoffs: usize,
    /// Step size in use when the run ended.
    pub alpha: f64,
    /// Functional evaluations, including finite-difference probes.
    pub evaluations: usize,
    pub converged: bool,
    pub certificate_ok: bool,
    pub certificate_residual: f64,
    pub trial_index: usize,
}

/// Outcome of checking `p(0) = ∇g(γ(0))` for a candidate `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub ok: bool,
    /// `|λp₀ - ∇g(x₀)|_∞ / (1 + |∇g(x₀)|_∞)`
    pub residual: f64,
    /// Positive scale `λ` applied to `v` (1 unless the check is up to scale).
    pub scale: f64,
}

impl Certificate {
    pub fn unchecked() -> Self {
        Self { ok: true, residual: 0.0, scale: 1.0 }
    }
}

/// A functional of `v` as seen by the descent loop.
pub trait CoordinateObjective {
    fn dim(&self) -> usize;

    fn value(&mut self, v: &[f64]) -> Result<f64>;

    /// Approximate `∂ᵢF(v)`, given `base = F(v)`.
    fn partial(&mut self, v: &[f64], i: usize, base: f64) -> Result<f64>;

    fn certify(&mut self, _v: &[f64]) -> Result<Certificate> {
        Ok(Certificate::unchecked())
    }
}

/// Closure-backed objective. Without an explicit gradient the partials are
/// forward differences with step `sigma`.
pub struct FnObjective<F, G = fn(&[f64], usize) -> f64> {
    d: usize,
    f: F,
    grad: Option<G>,
    sigma: f64,
}

impl<F> FnObjective<F>
where
    F: FnMut(&[f64]) -> f64,
{
    pub fn finite_difference(d: usize, f: F, sigma: f64) -> Self {
        Self { d, f, grad: None, sigma }
    }
}

impl<F, G> FnObjective<F, G>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], usize) -> f64,
{
    pub fn with_gradient(d: usize, f: F, grad: G) -> Self {
        Self { d, f, grad: Some(grad), sigma: 0.0 }
    }
}

impl<F, G> CoordinateObjective for FnObjective<F, G>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], usize) -> f64,
{
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&mut self, v: &[f64]) -> Result<f64> {
        let y = (self.f)(v);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(HjError::NonFinite { node: 0 })
        }
    }

    fn partial(&mut self, v: &[f64], i: usize, base: f64) -> Result<f64> {
        if let Some(g) = self.grad.as_mut() {
            return Ok(g(v, i));
        }
        let mut probe = v.to_vec();
        probe[i] += self.sigma;
        let shifted = self.value(&probe)?;
        Ok((shifted - base) / self.sigma)
    }
}

/// Cyclic coordinate descent from `v0`.
///
/// One coordinate moves per iteration by `-α ∂ⱼF`. A move larger than `eps`
/// resets the quiet-move counter, a smaller one increments it, and the run
/// stops once `d` consecutive moves were quiet. Every `max_iters`
/// iterations the step is halved; after `max_backoffs` halvings the run ends
/// unconverged. Evaluation errors abort the run and are returned as is.
pub fn coordinate_descent<O: CoordinateObjective + ?Sized>(
    obj: &mut O,
    v0: &[f64],
    cfg: &DescentConfig,
) -> Result<DescentResult> {
    let d = obj.dim();
    cfg.validate(d)?;
    if v0.len() != d {
        return Err(HjError::config(format!("initial guess has {} components, expected {d}", v0.len())));
    }
    let mut v = v0.to_vec();
    let mut f = obj.value(&v)?;
    let mut evaluations = 1;
    let mut alpha = 1.0 / cfg.lipschitz;
    let (mut k, mut count, mut j, mut backoffs, mut iterations) = (0usize, 0usize, 0usize, 0usize, 0usize);

    let converged = loop {
        let g = obj.partial(&v, j, f)?;
        evaluations += 1;
        let old = v[j];
        let new = old - alpha * g;
        if !new.is_finite() {
            return Err(HjError::NonFinite { node: 0 });
        }
        let moved = (new - old).abs();
        if new != old {
            v[j] = new;
            f = obj.value(&v)?;
            evaluations += 1;
        }
        iterations += 1;
        k += 1;

        if moved > cfg.eps {
            count = 0;
        } else if moved < cfg.eps {
            count += 1;
        }
        if count >= d {
            break true;
        }
        j = (j + 1) % d;
        if k == cfg.max_iters {
            k = 0;
            if backoffs == cfg.max_backoffs {
                break false;
            }
            backoffs += 1;
            alpha *= 0.5;
        }
    };

    Ok(DescentResult {
        v_star: v,
        value: f,
        iterations,
        backoffs,
        alpha,
        evaluations,
        converged,
        certificate_ok: false,
        certificate_residual: f64::NAN,
        trial_index: 0,
    })
}

/// What happened to one multi-start trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub v0: Vec<f64>,
    /// Draws discarded because the start (or the run) hit a singular or
    /// non-finite trajectory.
    pub resamples: usize,
    pub result: Option<DescentResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartResult {
    /// Best certified trial, or the best uncertified one when none passed;
    /// `None` when every trial failed.
    pub best: Option<DescentResult>,
    pub trials: Vec<TrialRecord>,
}

impl MultiStartResult {
    pub fn trials_used(&self) -> usize {
        self.trials.len()
    }

    pub fn evaluations(&self) -> usize {
        self.trials.iter().filter_map(|t| t.result.as_ref()).map(|r| r.evaluations).sum()
    }
}

/// The random stream for trial `trial`; independent of how many trials run.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn sample_box(rng: &mut ChaCha8Rng, d: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}

/// Runs up to `cfg.trials` descents from uniform random starts and keeps the
/// lowest value among trials whose certificate passes (lowest index on ties).
pub fn multi_start<O: CoordinateObjective + ?Sized>(obj: &mut O, cfg: &DescentConfig) -> Result<MultiStartResult> {
    let d = obj.dim();
    cfg.validate(d)?;
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut best: Option<DescentResult> = None;

    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let mut record = TrialRecord { trial_index: trial, v0: Vec::new(), resamples: 0, result: None, error: None };
        loop {
            record.v0 = sample_box(&mut rng, d, cfg.init_box);
            let outcome = coordinate_descent(obj, &record.v0, cfg).and_then(|mut r| {
                let cert = obj.certify(&r.v_star)?;
                r.certificate_ok = cert.ok;
                r.certificate_residual = cert.residual;
                if cert.scale != 1.0 {
                    r.v_star.iter_mut().for_each(|c| *c *= cert.scale);
                }
                r.trial_index = trial;
                Ok(r)
            });
            match outcome {
                Ok(r) => {
                    record.result = Some(r);
                    break;
                }
                Err(e) if e.is_resample() && record.resamples < cfg.max_resamples => record.resamples += 1,
                Err(e) if e.is_resample() => {
                    record.error = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(r) = &record.result {
            if better(r, best.as_ref()) {
                best = Some(r.clone());
            }
        }
        trials.push(record);
        if cfg.stop_at_first_certified && best.as_ref().is_some_and(|b| b.certificate_ok) {
            break;
        }
    }
    Ok(MultiStartResult { best, trials })
}

fn better(candidate: &DescentResult, incumbent: Option<&DescentResult>) -> bool {
    match incumbent {
        None => true,
        Some(b) if candidate.certificate_ok != b.certificate_ok => candidate.certificate_ok,
        // strict comparison keeps the lower trial index on ties
        Some(b) => candidate.value < b.value,
    }
}

/// `|p₀ - ∇g(x₀)|_∞ / (1 + |∇g(x₀)|_∞)` for the trajectory's initial node.
pub fn certificate_residual(traj: &Trajectory, data: &dyn InitialData) -> f64 {
    certificate_at_node(traj, data, 0, f64::INFINITY, false).residual
}

pub fn check_certificate(traj: &Trajectory, data: &dyn InitialData, tol: f64) -> bool {
    certificate_residual(traj, data) <= tol
}

/// Certificate up to a positive scale, for Hamiltonians positively
/// homogeneous of degree one in `p`, whose characteristics only see the
/// direction of `v`. The scale is the least-squares `λ = ⟨p₀,∇g⟩ / |p₀|²`.
pub fn check_certificate_scaled(traj: &Trajectory, data: &dyn InitialData, tol: f64) -> Certificate {
    certificate_at_node(traj, data, 0, tol, true)
}

/// Checks `λ p_n = ∇g(x_n)` at trajectory node `n`, with `λ = 1` unless
/// `scaled`.
pub fn certificate_at_node(
    traj: &Trajectory,
    data: &dyn InitialData,
    node: usize,
    tol: f64,
    scaled: bool,
) -> Certificate {
    let p = traj.costate(node);
    let mut grad = vec![0.0; p.len()];
    data.gradient(traj.state(node), &mut grad);
    let scale = if scaled {
        let pp = dot(p, p);
        let lambda = if pp > 0.0 { dot(p, &grad) / pp } else { 0.0 };
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Certificate { ok: false, residual: f64::INFINITY, scale: 1.0 };
        }
        lambda
    } else {
        1.0
    };
    let gap = p.iter().zip(&grad).map(|(p, g)| (scale * p - g).abs()).fold(0.0, f64::max);
    let residual = gap / (1.0 + norm_inf(&grad));
    Certificate { ok: residual <= tol, residual, scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::integrate_backward;
    use crate::hamiltonian::{EllipseQuadratic, ZeroHamiltonian};
    use proptest::prelude::*;

    fn quadratic_1m2(v: &[f64]) -> f64 {
        (v[0] - 1.0).powi(2) + (v[1] + 2.0).powi(2)
    }

    #[test]
    fn separable_quadratic_converges() {
        let mut obj = FnObjective::with_gradient(2, quadratic_1m2, |v: &[f64], i| {
            if i == 0 { 2.0 * (v[0] - 1.0) } else { 2.0 * (v[1] + 2.0) }
        });
        let cfg = DescentConfig { lipschitz: 4.0, ..Default::default() };
        let r = coordinate_descent(&mut obj, &[0.0, 0.0], &cfg).unwrap();
        assert!(r.converged);
        assert!((r.v_star[0] - 1.0).abs() < 1e-7 && (r.v_star[1] + 2.0).abs() < 1e-7, "{:?}", r.v_star);
        assert_eq!(r.backoffs, 0);
    }

    #[test]
    fn constant_objective_stops_after_one_sweep() {
        let mut obj = FnObjective::finite_difference(3, |_: &[f64]| 2.5, 1e-3);
        let r = coordinate_descent(&mut obj, &[0.1, 0.2, 0.3], &DescentConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.v_star, vec![0.1, 0.2, 0.3]);
        // base value once, then one probe per coordinate and no re-evaluation
        assert_eq!(r.evaluations, 4);
    }

    #[test]
    fn l1_descent_is_monotone() {
        let mut history = Vec::new();
        let f = |v: &[f64]| v[0].abs() + v[1].abs();
        let mut obj = FnObjective::with_gradient(2, f, |v: &[f64], i| v[i].signum());
        let cfg = DescentConfig { lipschitz: 100.0, max_iters: 50, max_backoffs: 20, ..Default::default() };
        let mut v = vec![0.3, -0.2];
        history.push(f(&v));
        // single iterations via a budget of one step per level are awkward;
        // replay the recorded path instead
        let r = coordinate_descent(&mut obj, &v, &cfg).unwrap();
        let mut alpha = 1.0 / cfg.lipschitz;
        let mut j = 0;
        for k in 0..r.iterations {
            let g = v[j].signum();
            v[j] -= alpha * g;
            let fv = f(&v);
            let prev = *history.last().unwrap();
            // sub-gradient steps may overshoot by at most α
            assert!(fv <= prev + alpha + 1e-15, "k={k}: {fv} > {prev}");
            history.push(fv);
            j = (j + 1) % 2;
            if (k + 1) % cfg.max_iters == 0 {
                alpha *= 0.5;
            }
        }
        assert_eq!(v, r.v_star);
        assert!(f(&r.v_star) < 1e-4, "{}", f(&r.v_star));
        assert!(history[history.len() - 1] < history[0]);
    }

    #[test]
    fn backoff_arithmetic_is_exact() {
        let cfg = DescentConfig { lipschitz: 3.0, max_iters: 4, max_backoffs: 5, ..Default::default() };
        for j in 0..=12 {
            assert_eq!(cfg.alpha_after(j), 1.0 / (2f64.powi(j as i32) * 3.0));
        }
        // an objective whose partial never vanishes exhausts every level
        let mut obj = FnObjective::with_gradient(2, |v: &[f64]| v[0] + v[1], |_: &[f64], _| 1.0);
        let r = coordinate_descent(&mut obj, &[0.0, 0.0], &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.backoffs, 5);
        assert_eq!(r.iterations, 4 * 6);
        assert_eq!(r.alpha, cfg.alpha_after(5));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut obj = FnObjective::finite_difference(2, quadratic_1m2, 1e-3);
        for cfg in [
            DescentConfig { trials: 0, ..Default::default() },
            DescentConfig { lipschitz: 0.0, ..Default::default() },
            DescentConfig { eps: 0.0, ..Default::default() },
            DescentConfig { max_iters: 1, ..Default::default() },
            DescentConfig { init_box: (1.0, 1.0), ..Default::default() },
        ] {
            assert!(matches!(multi_start(&mut obj, &cfg), Err(HjError::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn strictly_convex_independent_of_trials() {
        let run = |trials| {
            let mut obj = FnObjective::finite_difference(2, quadratic_1m2, 1e-6);
            let cfg = DescentConfig { lipschitz: 4.0, trials, ..Default::default() };
            multi_start(&mut obj, &cfg).unwrap().best.unwrap()
        };
        let one = run(1);
        let many = run(6);
        assert!((one.value - many.value).abs() < 1e-10);
        assert!((one.v_star[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn double_well_finds_global_minimum() {
        let mut obj = FnObjective::with_gradient(
            2,
            |v: &[f64]| (v[0] * v[0] - 1.0).powi(2) + v[1] * v[1],
            |v: &[f64], i| if i == 0 { 4.0 * v[0] * (v[0] * v[0] - 1.0) } else { 2.0 * v[1] },
        );
        let cfg = DescentConfig { lipschitz: 50.0, trials: 20, ..Default::default() };
        let out = multi_start(&mut obj, &cfg).unwrap();
        let best = out.best.unwrap();
        assert!(best.value < 1e-6, "{}", best.value);
        let basins: Vec<bool> = out.trials.iter().map(|t| t.result.as_ref().unwrap().v_star[0] > 0.0).collect();
        assert!(basins.contains(&true) && basins.contains(&false));
    }

    #[test]
    fn multi_start_is_deterministic() {
        let run = || {
            let mut obj = FnObjective::finite_difference(
                2,
                |v: &[f64]| (v[0] * v[0] - 1.0).powi(2) + (v[1] - 0.3).powi(2) + 0.1 * v[0],
                1e-4,
            );
            let cfg = DescentConfig { lipschitz: 40.0, trials: 7, seed: 9, ..Default::default() };
            multi_start(&mut obj, &cfg).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn trial_streams_do_not_depend_on_trial_count() {
        let a: f64 = trial_rng(42, 3).random();
        let _ = trial_rng(42, 0).random::<f64>();
        let b: f64 = trial_rng(42, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, trial_rng(42, 2).random::<f64>());
    }

    /// Singular whenever the first coordinate is negative; descent from a
    /// start with `v0[0] >= 0` toward `v = (1, -2)` never goes there.
    struct Flaky;

    impl CoordinateObjective for Flaky {
        fn dim(&self) -> usize {
            2
        }
        fn value(&mut self, v: &[f64]) -> Result<f64> {
            if v[0] < 0.0 {
                return Err(HjError::SingularPoint { node: 3, norm: 0.0 });
            }
            Ok(quadratic_1m2(v))
        }
        fn partial(&mut self, v: &[f64], i: usize, base: f64) -> Result<f64> {
            let mut probe = v.to_vec();
            probe[i] += 1e-6;
            Ok((self.value(&probe)? - base) / 1e-6)
        }
    }

    #[test]
    fn singular_starts_are_resampled() {
        let mut obj = Flaky;
        let cfg = DescentConfig { lipschitz: 4.0, trials: 8, ..Default::default() };
        let out = multi_start(&mut obj, &cfg).unwrap();
        assert_eq!(out.trials_used(), 8);
        assert!(out.trials.iter().any(|t| t.resamples > 0));
        for t in &out.trials {
            let r = t.result.as_ref().unwrap();
            assert!(t.v0[0] >= 0.0, "a poisoned start leaked into the result");
            assert!(r.converged && (r.v_star[0] - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn exhausted_resamples_are_recorded() {
        let mut obj = FnObjective::finite_difference(2, |_: &[f64]| f64::NAN, 1e-3);
        let cfg = DescentConfig { trials: 2, max_resamples: 3, ..Default::default() };
        let out = multi_start(&mut obj, &cfg).unwrap();
        assert!(out.best.is_none());
        assert!(out.trials.iter().all(|t| t.resamples == 3 && t.error.is_some()));
    }

    #[test]
    fn certificate_on_built_trajectories() {
        let data = EllipseQuadratic::standard(2).unwrap();
        let model = ZeroHamiltonian { d: 2 };
        let x = [0.7, -1.3];
        let mut grad = [0.0; 2];
        data.gradient(&x, &mut grad);
        // H ≡ 0 keeps (x, p) fixed, so p₀ = v and x₀ = x
        let traj = integrate_backward(&model, &x, &grad, 0.1, 0.05).unwrap();
        assert!(check_certificate(&traj, &data, 1e-3));
        let tol = 1e-3;
        let bumped = [grad[0] + 10.0 * tol * (1.0 + norm_inf(&grad)), grad[1]];
        let traj = integrate_backward(&model, &x, &bumped, 0.1, 0.05).unwrap();
        assert!(!check_certificate(&traj, &data, tol));

        let scaled = [3.0 * grad[0], 3.0 * grad[1]];
        let traj = integrate_backward(&model, &x, &scaled, 0.1, 0.05).unwrap();
        assert!(!check_certificate(&traj, &data, tol));
        let c = check_certificate_scaled(&traj, &data, tol);
        assert!(c.ok && (c.scale - 1.0 / 3.0).abs() < 1e-14);
        let flipped = [-grad[0], -grad[1]];
        let traj = integrate_backward(&model, &x, &flipped, 0.1, 0.05).unwrap();
        assert!(!check_certificate_scaled(&traj, &data, tol).ok);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_gradient_descent_on_convex_quadratic_is_monotone(
            diag in prop::collection::vec(0.2f64..5.0, 3),
            off in -0.3f64..0.3,
            b in prop::collection::vec(-2.0f64..2.0, 3),
            v0 in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            // Q = diag + off·(e₁e₂ᵀ + e₂e₁ᵀ) stays positive definite for these ranges
            let q = |i: usize, j: usize| -> f64 {
                if i == j { diag[i] } else if (i, j) == (0, 1) || (i, j) == (1, 0) { off } else { 0.0 }
            };
            let f = |v: &[f64]| -> f64 {
                let mut s = 0.0;
                for i in 0..3 { for j in 0..3 { s += 0.5 * v[i] * q(i, j) * v[j]; } s -= b[i] * v[i]; }
                s
            };
            let grad = |v: &[f64], i: usize| -> f64 {
                (0..3).map(|j| q(i, j) * v[j]).sum::<f64>() - b[i]
            };
            let lip = 5.0;
            let cfg = DescentConfig { lipschitz: lip, max_iters: 60, max_backoffs: 0, ..Default::default() };
            // replay the iteration and watch every value
            let mut v = v0.clone();
            let mut prev = f(&v);
            let mut obj = FnObjective::with_gradient(3, f, grad);
            let r = coordinate_descent(&mut obj, &v0, &cfg).unwrap();
            for k in 0..r.iterations {
                let j = k % 3;
                v[j] -= (1.0 / lip) * grad(&v, j);
                let now = f(&v);
                prop_assert!(now <= prev + 1e-12, "k={}: {} > {}", k, now, prev);
                prev = now;
            }
            prop_assert_eq!(v, r.v_star);
        }
    }
}
