use snl_core::sde::{
    coupling_experiment, euler_maruyama, girsanov_weight, khasminskii_functional, krylov_mc, zvonkin_simulate,
    BrownianPath, Constant, EulerOptions, FnCoefficient, McConfig, MeanVar, Sequential,
};
use snl_core::zvonkin::{ZvonkinMap, ZvonkinOptions};
use snl_core::{Codomain, GridFunction, SpaceTimeField, TensorGrid};

/// `|x|^{-1/4}` on the unit ball.
fn singular_drift() -> FnCoefficient<impl Fn(f64, &[f64], &mut [f64]) + Sync> {
    FnCoefficient::new(1, |_t, x: &[f64], out: &mut [f64]| {
        let r = x[0].abs();
        out[0] = if r <= 1.0 { r.powf(-0.25) } else { 0.0 };
    })
}

#[test]
fn terminal_variance_matches_horizon() {
    let (horizon, n) = (2.0, 100_000u64);
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let p = BrownianPath::sample(11, i, 1, horizon, 0).unwrap();
            p.value(1)[0].powi(2)
        })
        .collect();
    assert!(BrownianPath::sample(11, 0, 1, horizon, 3).unwrap().value(0) == [0.0]);
    let mv = MeanVar::from_samples(&samples);
    let stderr = (mv.variance() / n as f64).sqrt();
    assert!((mv.mean - horizon).abs() < 3.0 * stderr, "{} +- {stderr}", mv.mean);
}

#[test]
fn increments_have_dyadic_variance() {
    let level = 6;
    let p = BrownianPath::sample(5, 0, 2, 1.0, level).unwrap();
    let mut sq = Vec::new();
    for i in 0..200u64 {
        let p = BrownianPath::sample(5, i, 2, 1.0, level).unwrap();
        let mut dw = [0.0; 2];
        for k in 0..p.steps() {
            p.increment(k, &mut dw);
            sq.extend(dw.iter().map(|w| w * w));
        }
    }
    let mv = MeanVar::from_samples(&sq);
    let stderr = (mv.variance() / mv.n as f64).sqrt();
    assert!((mv.mean - p.dt()).abs() < 5.0 * stderr);
}

#[test]
fn drift_only_matches_fine_ode_reference() {
    // dx = sin(x) + t, integrated with RK4 at 100x finer step
    let b = FnCoefficient::new(1, |t, x: &[f64], out: &mut [f64]| out[0] = x[0].sin() + t);
    let sigma = Constant::zero(1);
    let rhs = |t: f64, x: f64| x.sin() + t;
    let (x0, horizon) = (0.3, 1.0);
    let mut errors = Vec::new();
    for level in [6, 7, 8] {
        let path = BrownianPath::sample(1, 0, 1, horizon, level).unwrap();
        let tr = euler_maruyama(&b, &sigma, &[x0], &path, EulerOptions::default()).unwrap();
        let fine = 100 * path.steps();
        let h = horizon / fine as f64;
        let (mut x, mut err) = (x0, 0.0f64);
        for k in 0..fine {
            let t = k as f64 * h;
            let k1 = rhs(t, x);
            let k2 = rhs(t + h / 2.0, x + h / 2.0 * k1);
            let k3 = rhs(t + h / 2.0, x + h / 2.0 * k2);
            let k4 = rhs(t + h, x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (k + 1) % 100 == 0 {
                err = err.max((tr.state((k + 1) / 100)[0] - x).abs());
            }
        }
        assert!(err < 2.0 * path.dt(), "level {level}: {err}");
        errors.push(err);
    }
    assert!(errors[0] / errors[2] > 3.0, "{errors:?}");
}

#[test]
fn constant_drift_is_exact() {
    let c = 0.75;
    let path = BrownianPath::sample(2, 0, 1, 1.0, 8).unwrap();
    let tr = euler_maruyama(&Constant(vec![c]), &Constant::identity(1), &[0.5], &path, EulerOptions::default())
        .unwrap();
    for k in 0..path.nodes() {
        let exact = 0.5 + c * path.time(k) + path.value(k)[0];
        assert!((tr.state(k)[0] - exact).abs() < 1e-12);
    }
}

#[test]
fn trajectories_are_deterministic() {
    let path = BrownianPath::sample(9, 3, 1, 1.0, 10).unwrap();
    let again = BrownianPath::sample(9, 3, 1, 1.0, 10).unwrap();
    let opts = EulerOptions::default();
    let a = euler_maruyama(&singular_drift(), &Constant::identity(1), &[0.5], &path, opts).unwrap();
    let b = euler_maruyama(&singular_drift(), &Constant::identity(1), &[0.5], &again, opts).unwrap();
    assert_eq!(a.states(), b.states());
}

#[test]
fn pure_noise_coupling_is_exactly_zero() {
    let seeds: Vec<u64> = (0..20).collect();
    let table = coupling_experiment(
        &Constant::zero(1),
        &Constant::identity(1),
        &[0.0],
        1.0,
        &seeds,
        (8, 12),
        EulerOptions::default(),
        &Sequential,
    )
    .unwrap();
    assert!(table.rows.iter().all(|r| r.mean == 0.0 && r.excluded == 0));
    assert!(table.rate.is_none());
}

#[test]
fn singular_drift_coupling_decays() {
    let seeds: Vec<u64> = (0..200).collect();
    let table = coupling_experiment(
        &singular_drift(),
        &Constant::identity(1),
        &[0.5],
        1.0,
        &seeds,
        (8, 14),
        EulerOptions::default(),
        &Sequential,
    )
    .unwrap();
    assert!(table.strictly_decreasing(), "{table:?}");
    assert!(table.rate.unwrap() >= 0.2, "{table:?}");
}

/// `int_0^1 int |x|^{-1/2} 1_{|x|<=1} N(0, s)(dx) ds`. With `x = y^2` and
/// `s = r^2` this becomes `8/sqrt(2 pi) int_0^1 int_0^1 exp(-y^4 / 2r^2) dr dy`.
fn krylov_oracle() -> f64 {
    let n = 2000;
    let h = 1.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let y = (i as f64 + 0.5) * h;
        for j in 0..n {
            let r = (j as f64 + 0.5) * h;
            s += (-y.powi(4) / (2.0 * r * r)).exp();
        }
    }
    8.0 / (2.0 * std::f64::consts::PI).sqrt() * s * h * h
}

#[test]
fn krylov_matches_gaussian_quadrature() {
    let f = FnCoefficient::new(1, |_t, x: &[f64], out: &mut [f64]| {
        let r = x[0].abs();
        out[0] = if r <= 1.0 { r.powf(-0.5) } else { 0.0 };
    });
    let cfg = McConfig { horizon: 1.0, n: 10_000, level: 12, seed: 3 };
    let est = krylov_mc(&f, &Constant::zero(1), &Constant::identity(1), &[0.0], cfg, EulerOptions::default(), &Sequential)
        .unwrap();
    let oracle = krylov_oracle();
    assert!(est.within(oracle, 3.0), "{est:?} vs {oracle}");
}

#[test]
fn krylov_unit_integrand_is_exact() {
    let cfg = McConfig { horizon: 0.7, n: 100, level: 7, seed: 1 };
    let est = krylov_mc(
        &Constant(vec![1.0]),
        &singular_drift(),
        &Constant::identity(1),
        &[0.5],
        cfg,
        EulerOptions::default(),
        &Sequential,
    )
    .unwrap();
    assert_eq!((est.mean, est.stderr), (0.7, 0.0));
    let zero = krylov_mc(&Constant(vec![0.0]), &Constant::zero(1), &Constant::identity(1), &[0.0], cfg, EulerOptions::default(), &Sequential).unwrap();
    assert_eq!(zero.mean, 0.0);
    let small = McConfig { n: 99, ..cfg };
    assert!(krylov_mc(&Constant(vec![1.0]), &Constant::zero(1), &Constant::identity(1), &[0.0], small, EulerOptions::default(), &Sequential).is_err());
}

#[test]
fn girsanov_weight_has_unit_mean() {
    let cfg = McConfig { horizon: 1.0, n: 10_000, level: 8, seed: 17 };
    let opts = EulerOptions::default();
    let sigma = Constant::identity(1);
    let zero = girsanov_weight(&Constant::zero(1), &sigma, &[0.0], cfg, opts, &Sequential).unwrap();
    assert_eq!((zero.mean, zero.stderr), (1.0, 0.0));
    let constant = girsanov_weight(&Constant(vec![0.8]), &sigma, &[0.0], cfg, opts, &Sequential).unwrap();
    assert!(constant.within(1.0, 3.0), "{constant:?}");
    let singular = girsanov_weight(&singular_drift(), &sigma, &[0.5], cfg, opts, &Sequential).unwrap();
    assert!(singular.within(1.0, 3.0), "{singular:?}");
}

#[test]
fn girsanov_constant_drift_closed_form() {
    // rho_T = exp(-c W_T - c^2 T / 2) path by path
    let c = 0.8;
    let cfg = McConfig { horizon: 1.0, n: 100, level: 5, seed: 4 };
    let est = girsanov_weight(&Constant(vec![c]), &Constant::identity(1), &[0.0], cfg, EulerOptions::default(), &Sequential)
        .unwrap();
    let samples: Vec<f64> = (0..100u64)
        .map(|i| {
            let w = BrownianPath::sample(4, i, 1, 1.0, 5).unwrap().value(32)[0];
            (-c * w - 0.5 * c * c).exp()
        })
        .collect();
    let mv = MeanVar::from_samples(&samples);
    assert!((est.mean - mv.mean).abs() < 1e-12);
}

#[test]
fn singular_diffusion_is_reported() {
    let cfg = McConfig { horizon: 1.0, n: 100, level: 3, seed: 0 };
    let r = girsanov_weight(&Constant(vec![1.0]), &Constant::zero(1), &[0.0], cfg, EulerOptions::default(), &Sequential);
    assert!(r.is_err());
}

#[test]
fn khasminskii_bounds_and_cap_stability() {
    let cfg = McConfig { horizon: 1.0, n: 10_000, level: 10, seed: 23 };
    let sigma = Constant::identity(1);
    let opts = EulerOptions::default();
    let zero = khasminskii_functional(&Constant::zero(1), &sigma, &[0.0], 1.0, cfg, opts, &Sequential).unwrap();
    assert_eq!(zero.estimate.mean, 1.0);
    let small = McConfig { n: 200, ..cfg };
    let bounded = khasminskii_functional(&Constant(vec![1.5]), &sigma, &[0.0], 0.5, small, opts, &Sequential).unwrap();
    assert!(bounded.estimate.mean <= (0.5f64 * 2.25).exp() * (1.0 + 1e-12));
    let lo = khasminskii_functional(&singular_drift(), &sigma, &[0.5], 1.0, cfg, opts, &Sequential).unwrap();
    let hi = khasminskii_functional(&singular_drift(), &sigma, &[0.5], 1.0, cfg, EulerOptions { cap: 1e4, ..opts }, &Sequential)
        .unwrap();
    assert_eq!(lo.overflow + hi.overflow, 0);
    assert!(lo.estimate.mean.is_finite());
    assert!((hi.estimate.mean - lo.estimate.mean).abs() < 0.1 * lo.estimate.mean, "{lo:?} {hi:?}");
    assert!(khasminskii_functional(&Constant::zero(1), &sigma, &[0.0], 0.0, cfg, opts, &Sequential).is_err());
}

fn field(grid: &TensorGrid, value: &[f64], codomain: Codomain) -> SpaceTimeField {
    SpaceTimeField::constant(GridFunction::constant(grid, codomain, value).unwrap(), 1.0, 1).unwrap()
}

#[test]
fn transformed_simulation_without_drift_is_direct_euler() {
    let g = TensorGrid::cube(1, 4.0, 32).unwrap();
    let sigma = field(&g, &[1.0], Codomain::Matrix);
    let zero = field(&g, &[0.0], Codomain::Vector);
    let map = ZvonkinMap::build(&sigma, &zero, 0.5, ZvonkinOptions { steps: 8, ..Default::default() }).unwrap();
    let path = BrownianPath::sample(6, 0, 1, 0.5, 9).unwrap();
    let opts = EulerOptions::default();
    let x = zvonkin_simulate(&map, &sigma, &[1.0], &path, opts).unwrap();
    let direct = euler_maruyama(&Constant::zero(1), &sigma, &[1.0], &path, opts).unwrap();
    assert_eq!(x.states(), direct.states());
}

#[test]
fn transformed_simulation_constant_drift_is_affine() {
    let g = TensorGrid::cube(1, 4.0, 32).unwrap();
    let c = 0.6;
    let sigma = field(&g, &[1.0], Codomain::Matrix);
    let b = field(&g, &[c], Codomain::Vector);
    let horizon = 0.5;
    let map = ZvonkinMap::build(&sigma, &b, horizon, ZvonkinOptions { steps: 8, ..Default::default() }).unwrap();
    let path = BrownianPath::sample(6, 1, 1, horizon, 9).unwrap();
    let x = zvonkin_simulate(&map, &sigma, &[1.0], &path, EulerOptions::default()).unwrap();
    for k in 0..path.nodes() {
        let exact = 1.0 + c * path.time(k) + path.value(k)[0];
        assert!((x.state(k)[0] - exact).abs() < 1e-10, "{k}");
    }
    let wrong = BrownianPath::sample(6, 1, 1, 1.0, 9).unwrap();
    assert!(zvonkin_simulate(&map, &sigma, &[1.0], &wrong, EulerOptions::default()).is_err());
}

#[test]
fn transformed_and_direct_simulation_agree_under_refinement() {
    let extent = 4.0;
    let g = TensorGrid::cube(1, extent, 128).unwrap();
    let bump = GridFunction::from_fn(&g, Codomain::Vector, |x, out| {
        let r = x[0] - extent / 2.0;
        out[0] = 4.0 * (-r * r / (2.0 * 0.15f64.powi(2))).exp();
    });
    let b = SpaceTimeField::constant(bump, 1.0, 1).unwrap();
    let sigma = field(&g, &[1.0], Codomain::Matrix);
    let map = ZvonkinMap::shrink_horizon(&sigma, &b, 1.0, ZvonkinOptions::default()).unwrap();
    let horizon = map.horizon();
    let b = b.resample(horizon, 1).unwrap();
    let opts = EulerOptions::default();
    let means: Vec<f64> = [5, 7, 9, 11]
        .iter()
        .map(|&level| {
            let s: f64 = (0..20u64)
                .map(|i| {
                    let path = BrownianPath::sample(8, i, 1, horizon, level).unwrap();
                    let x0 = [extent / 2.0 - 0.1];
                    let y = zvonkin_simulate(&map, &sigma, &x0, &path, opts).unwrap();
                    let x = euler_maruyama(&b, &sigma, &x0, &path, opts).unwrap();
                    (0..path.nodes()).map(|k| (y.state(k)[0] - x.state(k)[0]).abs()).fold(0.0, f64::max)
                })
                .sum();
            s / 20.0
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}
