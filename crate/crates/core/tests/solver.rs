//! End-to-end point solves against closed forms.

use std::sync::Arc;

use hjsolve::hamiltonian::{ConstantSpeedEikonal, EllipseQuadratic};
use hjsolve::{
    make_example, solve_point, Example, InitialKind, ProblemSpec, Sign, SolveConfig, SolveMode,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn eikonal_unit_ball(mode: SolveMode) -> ProblemSpec {
    let model = Arc::new(ConstantSpeedEikonal { d: 2, speed: 1.0 });
    ProblemSpec::new(model, Arc::new(EllipseQuadratic::identity(2).unwrap()), Some(mode)).unwrap()
}

/// `½((|x| - t)₊² - 1)`: the unit ball shrinking at unit speed.
fn shrinking_ball(x: &[f64], t: f64) -> f64 {
    let r = (x[0].hypot(x[1]) - t).max(0.0);
    0.5 * (r * r - 1.0)
}

#[test]
fn hopf_on_shrinking_ball() {
    let spec = eikonal_unit_ball(SolveMode::Hopf);
    let cfg = SolveConfig { descent: hjsolve::DescentConfig { lipschitz: 2.0, trials: 3, ..Default::default() }, ..Default::default() };
    let sol = solve_point(&spec, &[2.0, 0.0], 0.5, &cfg).unwrap();
    assert!(sol.converged && sol.certificate_ok);
    assert!((sol.value - 0.625).abs() < 1e-4, "{}", sol.value);
}

#[test]
fn min_over_time_on_shrinking_ball() {
    // straight characteristics: the minimum over the ray is g at distance t towards the origin
    let spec = eikonal_unit_ball(SolveMode::MinOverTime);
    let cfg = SolveConfig { ds: 0.005, descent: hjsolve::DescentConfig { trials: 3, ..Default::default() }, ..Default::default() };
    for (x, t) in [([2.0, 0.0], 0.5), ([-1.0, 1.5], 0.3), ([0.3, -2.2], 0.8)] {
        let sol = solve_point(&spec, &x, t, &cfg).unwrap();
        assert!((sol.value - shrinking_ball(&x, t)).abs() < 5e-3, "{x:?}: {} vs {}", sol.value, shrinking_ball(&x, t));
    }
}

#[test]
fn lax_and_hopf_agree_on_convex_eikonal() {
    // away from the origin and the bump both formulas give the viscosity solution
    let ex = Example::Ex3Eikonal { sign: Sign::Plus };
    let lax = ProblemSpec::example(ex, 2, InitialKind::Ellipse, Some(SolveMode::Lax)).unwrap();
    let hopf = lax.with_mode(SolveMode::Hopf).unwrap();
    let cfg_lax = SolveConfig::for_example(ex);
    let mut cfg_hopf = cfg_lax.clone();
    cfg_hopf.descent.lipschitz = 8.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 20 {
        let x: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        if x[0].hypot(x[1]) < 1.0 || (x[0] - 1.0).hypot(x[1] - 1.0) < 1.0 {
            continue;
        }
        let a = solve_point(&lax, &x, 0.3, &cfg_lax).unwrap();
        let b = solve_point(&hopf, &x, 0.3, &cfg_hopf).unwrap();
        worst = worst.max((a.value - b.value).abs());
        n += 1;
    }
    assert!(worst < 5e-3, "max |lax - hopf| = {worst:.3e}");
}

#[test]
fn certificate_rate_on_convex_eikonal() {
    let ex = Example::Ex3Eikonal { sign: Sign::Plus };
    let spec = ProblemSpec::example(ex, 2, InitialKind::Ellipse, None).unwrap();
    let cfg = SolveConfig::for_example(ex);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut converged, mut certified) = (0, 0);
    for _ in 0..20 {
        let x: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let sol = solve_point(&spec, &x, 0.3, &cfg).unwrap();
        if sol.converged {
            converged += 1;
            certified += sol.certificate_ok as usize;
        }
    }
    assert!(converged >= 15, "only {converged}/20 converged");
    assert!(certified as f64 >= 0.99 * converged as f64, "{certified}/{converged} certified");
}

#[test]
fn every_mode_reaches_initial_data_as_t_vanishes() {
    let cases = [
        (Example::Ex1Linear, None, None),
        (Example::Ex2Harmonic { sign: Sign::Plus }, None, None),
        // the example's L is tuned for the Lax functional
        (Example::Ex3Eikonal { sign: Sign::Plus }, Some(SolveMode::Hopf), Some(8.0)),
        (Example::Ex3Eikonal { sign: Sign::Plus }, Some(SolveMode::MinOverTime), None),
        (Example::Ex4Evans, None, None),
    ];
    for (ex, mode, lipschitz) in cases {
        let spec = ProblemSpec::example(ex, 2, InitialKind::Ellipse, mode).unwrap();
        let mut cfg = SolveConfig::for_example(ex);
        if let Some(l) = lipschitz {
            cfg.descent.lipschitz = l;
        }
        let x = [0.7, -1.3];
        let sol = solve_point(&spec, &x, cfg.ds, &cfg).unwrap();
        let g = spec.data.value(&x);
        assert!((sol.value - g).abs() < 0.1, "{ex:?} {mode:?}: {} vs g = {g}", sol.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneous_models_scale_linearly(
        which in 0usize..3,
        x in prop::array::uniform3(-3.0f64..3.0),
        p in prop::array::uniform3(-3.0f64..3.0),
        lambda in 0.01f64..50.0,
    ) {
        let ex = [
            Example::Ex3Eikonal { sign: Sign::Plus },
            Example::Ex3Eikonal { sign: Sign::Minus },
            Example::Ex5Split { k: 1 },
        ][which];
        let model = make_example(ex, 3).unwrap();
        prop_assume!(model.homogeneous_degree_one());
        prop_assume!(p.iter().map(|v| v.abs()).sum::<f64>() > 1e-3);
        let scaled: Vec<f64> = p.iter().map(|v| lambda * v).collect();
        let a = model.eval(&x, &scaled, 0.0);
        let b = lambda * model.eval(&x, &p, 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }
}
