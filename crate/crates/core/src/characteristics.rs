//! Backward integration of the bi-characteristic system
//!
//! ```text
//! γ'(s) = ∂ₚH(γ, p, s),   p'(s) = -∂ₓH(γ, p, s),   γ(t) = x,  p(t) = v
//! ```
//!
//! from the terminal time `s = t` down to `s = 0` with one explicit Euler
//! sweep. The time grid is `s_n = t - (N - n)Δs` for `n ≥ 1` and `s_0 = 0`,
//! so when `t/Δs` is not an integer only the first step is shortened.

use crate::error::{HjError, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{all_finite, dot, norm_inf};

/// Per-node quantities recorded during the sweep and reused by the quadratures.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeTerms {
    /// `H(x_n, p_n, s_n)`
    pub hamiltonian: f64,
    /// `⟨p_n, ∂ₚH(x_n, p_n, s_n)⟩`
    pub p_dot_hp: f64,
    /// `⟨x_n, ∂ₓH(x_n, p_n, s_n)⟩`
    pub x_dot_hx: f64,
}

/// A discretised bi-characteristic `(x_n, p_n)` on `s_0 = 0 < ... < s_N = t`.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    dim: usize,
    ds: f64,
    times: Vec<f64>,
    states: Vec<f64>,
    costates: Vec<f64>,
    terms: Vec<NodeTerms>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `N`; the trajectory has `N + 1` nodes.
    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// Nominal step `Δs`.
    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn costate(&self, n: usize) -> &[f64] {
        &self.costates[n * self.dim..(n + 1) * self.dim]
    }

    pub fn terms(&self, n: usize) -> &NodeTerms {
        &self.terms[n]
    }

    /// Length of the step ending at node `n` (`n ≥ 1`).
    pub fn step_len(&self, n: usize) -> f64 {
        self.times[n] - self.times[n - 1]
    }

    pub fn terminal_x(&self) -> &[f64] {
        self.state(self.steps())
    }

    pub fn terminal_v(&self) -> &[f64] {
        self.costate(self.steps())
    }

    fn reset(&mut self, dim: usize, t: f64, ds: f64) -> usize {
        let n_steps = step_count(t, ds);
        self.dim = dim;
        self.ds = ds;
        self.times.clear();
        self.times.push(0.0);
        for n in 1..=n_steps {
            self.times.push(t - (n_steps - n) as f64 * ds);
        }
        self.times[n_steps] = t;
        self.states.resize((n_steps + 1) * dim, 0.0);
        self.costates.resize((n_steps + 1) * dim, 0.0);
        self.terms.resize(n_steps + 1, NodeTerms::default());
        n_steps
    }

    /// Writes a debugging dump `s,x_1..x_d,p_1..p_d` per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for i in 1..=self.dim {
            out.push_str(&format!(",x{i}"));
        }
        for i in 1..=self.dim {
            out.push_str(&format!(",p{i}"));
        }
        out.push('\n');
        for n in 0..=self.steps() {
            out.push_str(&format!("{:.16e}", self.times[n]));
            for v in self.state(n).iter().chain(self.costate(n)) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `N = ceil(t/Δs)`, ignoring round-off just above an integer ratio.
pub fn step_count(t: f64, ds: f64) -> usize {
    let ratio = t / ds;
    let n = (ratio - 1e-9 * ratio.max(1.0)).ceil();
    (n as usize).max(1)
}

fn validate(model: &dyn Hamiltonian, x: &[f64], v: &[f64], t: f64, ds: f64) -> Result<()> {
    let d = model.dim();
    if x.len() != d || v.len() != d {
        return Err(HjError::config(format!(
            "dimension mismatch: model d = {d}, |x| = {}, |v| = {}",
            x.len(),
            v.len()
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(HjError::config(format!("time must be positive, got {t}")));
    }
    if !(ds > 0.0) || ds > t * (1.0 + 1e-12) {
        return Err(HjError::config(format!("step must satisfy 0 < ds <= t, got ds = {ds}, t = {t}")));
    }
    Ok(())
}

/// Integrates backward from `(x, v)` at `s = t` and returns the full trajectory.
pub fn integrate_backward(
    model: &dyn Hamiltonian,
    x: &[f64],
    v: &[f64],
    t: f64,
    ds: f64,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    integrate_backward_into(model, x, v, t, ds, &mut traj)?;
    Ok(traj)
}

/// Same as [`integrate_backward`] but reuses the buffers of `traj`.
pub fn integrate_backward_into(
    model: &dyn Hamiltonian,
    x: &[f64],
    v: &[f64],
    t: f64,
    ds: f64,
    traj: &mut Trajectory,
) -> Result<()> {
    validate(model, x, v, t, ds)?;
    let d = x.len();
    let n_steps = traj.reset(d, t, ds);
    traj.states[n_steps * d..].copy_from_slice(x);
    traj.costates[n_steps * d..].copy_from_slice(v);

    let mut gp = vec![0.0; d];
    let mut gx = vec![0.0; d];
    for n in (0..=n_steps).rev() {
        let s = traj.times[n];
        let (xs_lo, xs_hi) = traj.states.split_at_mut(n * d);
        let (ps_lo, ps_hi) = traj.costates.split_at_mut(n * d);
        let xn = &xs_hi[..d];
        let pn = &ps_hi[..d];
        let h = model
            .eval_with_grads(xn, pn, s, &mut gp, &mut gx)
            .map_err(|e| match e {
                HjError::SingularPoint { norm, .. } => HjError::SingularPoint { node: n, norm },
                other => other,
            })?;
        traj.terms[n] = NodeTerms {
            hamiltonian: h,
            p_dot_hp: dot(pn, &gp),
            x_dot_hx: dot(xn, &gx),
        };
        if n == 0 {
            break;
        }
        let step = s - traj.times[n - 1];
        let x_prev = &mut xs_lo[(n - 1) * d..];
        let p_prev = &mut ps_lo[(n - 1) * d..];
        for i in 0..d {
            x_prev[i] = xn[i] - step * gp[i];
            p_prev[i] = pn[i] + step * gx[i];
        }
        if !all_finite(x_prev) || !all_finite(p_prev) || !h.is_finite() {
            return Err(HjError::NonFinite { node: n - 1 });
        }
    }
    Ok(())
}

/// For Hamiltonians affine in `p` the state path does not depend on the
/// terminal costate. Given such a trajectory, finds the terminal costate `v`
/// whose backward sweep ends at `p_0 = target`, by inverting each costate
/// step `p_{n-1} = p_n + h ∂ₓH(x_n, p_n)` with a fixed-point iteration.
pub fn recover_terminal_costate(
    model: &dyn Hamiltonian,
    traj: &Trajectory,
    target: &[f64],
) -> Result<Vec<f64>> {
    const MAX_ITERS: usize = 500;
    let d = traj.dim();
    let mut p_prev = target.to_vec();
    let mut q = vec![0.0; d];
    let mut gx = vec![0.0; d];
    for n in 1..=traj.steps() {
        let h = traj.step_len(n);
        let xn = traj.state(n);
        let s = traj.times()[n];
        q.copy_from_slice(&p_prev);
        let mut converged = false;
        for _ in 0..MAX_ITERS {
            model.grad_x(xn, &q, s, &mut gx)?;
            let mut delta = 0.0f64;
            for i in 0..d {
                let next = p_prev[i] - h * gx[i];
                delta = delta.max((next - q[i]).abs());
                q[i] = next;
            }
            if !all_finite(&q) {
                return Err(HjError::NonFinite { node: n });
            }
            if delta <= 1e-15 * (1.0 + norm_inf(&q)) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(HjError::Unsupported(format!(
                "costate recovery did not converge at node {n}"
            )));
        }
        p_prev.copy_from_slice(&q);
    }
    Ok(p_prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{
        make_example, ConstantSpeedEikonal, Example, KineticHamiltonian, Sign,
    };
    use std::f64::consts::FRAC_PI_2;

    /// Exact flow of `x' = p, p' = -x`, integrated from `s = t` back to `s`.
    fn rotation(x: &[f64], p: &[f64], t: f64, s: f64) -> (Vec<f64>, Vec<f64>) {
        let (c, sn) = ((s - t).cos(), (s - t).sin());
        let xs = x.iter().zip(p).map(|(a, b)| c * a + sn * b).collect();
        let ps = x.iter().zip(p).map(|(a, b)| -sn * a + c * b).collect();
        (xs, ps)
    }

    fn rotation_error(ds: f64) -> f64 {
        let h = make_example(Example::Ex2Harmonic { sign: Sign::Plus }, 2).unwrap();
        let (x, v, t) = ([1.0, 0.0], [0.0, 0.0], FRAC_PI_2);
        let traj = integrate_backward(h.as_ref(), &x, &v, t, ds).unwrap();
        let (xe, pe) = rotation(&x, &v, t, 0.0);
        let dx: Vec<f64> = traj.state(0).iter().zip(&xe).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = traj.costate(0).iter().zip(&pe).map(|(a, b)| a - b).collect();
        norm_inf(&dx).max(norm_inf(&dp))
    }

    #[test]
    fn harmonic_quarter_turn() {
        let h = make_example(Example::Ex2Harmonic { sign: Sign::Plus }, 2).unwrap();
        let traj = integrate_backward(h.as_ref(), &[1.0, 0.0], &[0.0, 0.0], FRAC_PI_2, 1e-4).unwrap();
        assert!(traj.state(0)[0].abs() < 1e-3 && traj.state(0)[1].abs() < 1e-12);
        assert!((traj.costate(0)[0] - 1.0).abs() < 1e-3);
        assert!(rotation_error(0.01) < 0.02);
    }

    #[test]
    fn euler_is_first_order() {
        let e = [rotation_error(0.04), rotation_error(0.02), rotation_error(0.01)];
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.7..=2.3).contains(&ratio), "ratio {ratio} from {e:?}");
        }
    }

    #[test]
    fn terminal_conditions_and_grid() {
        let h = make_example(Example::Ex3Eikonal { sign: Sign::Plus }, 3).unwrap();
        let x = [0.3, -0.2, 0.1];
        let v = [1.0, 2.0, -0.5];
        let traj = integrate_backward(h.as_ref(), &x, &v, 0.3, 0.07).unwrap();
        assert_eq!(traj.steps(), 5);
        assert_eq!(traj.terminal_x(), &x);
        assert_eq!(traj.terminal_v(), &v);
        assert_eq!(traj.times()[0], 0.0);
        assert_eq!(*traj.times().last().unwrap(), 0.3);
        for n in 2..=traj.steps() {
            assert!((traj.step_len(n) - 0.07).abs() < 1e-12);
        }
        assert!(traj.step_len(1) > 0.0 && traj.step_len(1) < 0.07);

        // exactly divisible ratios are not split into an extra sliver step
        let traj = integrate_backward(h.as_ref(), &x, &v, 0.3, 0.01).unwrap();
        assert_eq!(traj.steps(), 30);
    }

    #[test]
    fn state_free_costate_is_constant() {
        let kin = KineticHamiltonian { d: 3 };
        let eik = ConstantSpeedEikonal { d: 3, speed: 1.5 };
        let v = [0.4, -1.0, 2.0];
        for model in [&kin as &dyn Hamiltonian, &eik] {
            let traj = integrate_backward(model, &[1.0, 2.0, 3.0], &v, 0.5, 0.02).unwrap();
            for n in 0..=traj.steps() {
                assert_eq!(traj.costate(n), &v);
            }
        }
    }

    #[test]
    fn linear_model_state_path_ignores_costate() {
        let h = make_example(Example::Ex1Linear, 2).unwrap();
        let x = [0.5, 0.2];
        let a = integrate_backward(h.as_ref(), &x, &[1.0, -3.0], 0.12, 0.02).unwrap();
        let b = integrate_backward(h.as_ref(), &x, &[-0.7, 0.1], 0.12, 0.02).unwrap();
        for n in 0..=a.steps() {
            assert_eq!(a.state(n), b.state(n));
        }
    }

    #[test]
    fn singular_terminal_costate() {
        let h = make_example(Example::Ex3Eikonal { sign: Sign::Minus }, 2).unwrap();
        let err = integrate_backward(h.as_ref(), &[0.0, 0.0], &[0.0, 0.0], 0.1, 0.02).unwrap_err();
        assert_eq!(err, HjError::SingularPoint { node: 5, norm: 0.0 });
    }

    #[test]
    fn rejects_bad_steps() {
        let h = KineticHamiltonian { d: 2 };
        assert!(integrate_backward(&h, &[0.0; 2], &[0.0; 2], 0.0, 0.01).is_err());
        assert!(integrate_backward(&h, &[0.0; 2], &[0.0; 2], 0.1, 0.2).is_err());
        assert!(integrate_backward(&h, &[0.0; 2], &[0.0; 2], 0.1, -0.01).is_err());
        assert!(integrate_backward(&h, &[0.0; 3], &[0.0; 2], 0.1, 0.01).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let h = make_example(Example::Ex2Harmonic { sign: Sign::Plus }, 2).unwrap();
        let err = integrate_backward(h.as_ref(), &[1e300, 1e300], &[1e300, 0.0], 1.0, 0.5).unwrap_err();
        assert!(matches!(err, HjError::NonFinite { .. }));
    }

    #[test]
    fn forward_replay_recovers_terminal_state() {
        let (t, ds) = (0.5, 0.01);
        for ex in [
            Example::Ex1Linear,
            Example::Ex2Harmonic { sign: Sign::Plus },
            Example::Ex2Harmonic { sign: Sign::Minus },
        ] {
            let h = make_example(ex, 2).unwrap();
            let x = [0.4, -0.6];
            let traj = integrate_backward(h.as_ref(), &x, &[0.8, 0.3], t, ds).unwrap();
            let mut xf = traj.state(0).to_vec();
            let mut pf = traj.costate(0).to_vec();
            let (mut gp, mut gx) = (vec![0.0; 2], vec![0.0; 2]);
            let mut max_grad = 0.0f64;
            for n in 1..=traj.steps() {
                let step = traj.step_len(n);
                h.grad_p(&xf, &pf, traj.times()[n - 1], &mut gp).unwrap();
                h.grad_x(&xf, &pf, traj.times()[n - 1], &mut gx).unwrap();
                max_grad = max_grad.max(norm_inf(&gp)).max(norm_inf(&gx));
                for i in 0..2 {
                    xf[i] += step * gp[i];
                    pf[i] -= step * gx[i];
                }
            }
            let err = (xf[0] - x[0]).abs().max((xf[1] - x[1]).abs());
            assert!(err <= 10.0 * ds * t * max_grad, "{}: {err}", h.name());
        }
    }

    #[test]
    fn costate_recovery_hits_target() {
        let h = make_example(Example::Ex1Linear, 2).unwrap();
        let x = [0.9, 0.4];
        let traj = integrate_backward(h.as_ref(), &x, &[0.0, 0.0], 0.12, 0.02).unwrap();
        let target = [0.7, -0.2];
        let v = recover_terminal_costate(h.as_ref(), &traj, &target).unwrap();
        let replay = integrate_backward(h.as_ref(), &x, &v, 0.12, 0.02).unwrap();
        assert!((replay.costate(0)[0] - target[0]).abs() < 1e-13);
        assert!((replay.costate(0)[1] - target[1]).abs() < 1e-13);
    }
}
