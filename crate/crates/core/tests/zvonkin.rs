use snl_core::linalg;
use snl_core::rng::Stream;
use snl_core::zvonkin::{ZvonkinMap, ZvonkinOptions};
use snl_core::{Codomain, GridFunction, SpaceTimeField, TensorGrid};

const EXTENT: f64 = 4.0;

fn bump_drift(grid: &TensorGrid, amplitude: f64) -> SpaceTimeField {
    let d = grid.dim();
    let b = GridFunction::from_fn(grid, Codomain::Vector, |x, out| {
        for i in 0..d {
            let r = x[i] - EXTENT / 2.0;
            out[i] = amplitude * (-r * r / (2.0 * 0.15f64.powi(2))).exp();
        }
    });
    SpaceTimeField::constant(b, 1.0, 1).unwrap()
}

fn unit_sigma(grid: &TensorGrid) -> SpaceTimeField {
    SpaceTimeField::constant(GridFunction::identity(grid), 1.0, 1).unwrap()
}

#[test]
fn shrink_horizon_certifies_bump_drift() {
    let g = TensorGrid::cube(1, EXTENT, 128).unwrap();
    let b = bump_drift(&g, 4.0);
    let sigma = unit_sigma(&g);
    let opts = ZvonkinOptions::default();
    let full = ZvonkinMap::build(&sigma, &b, 1.0, opts).unwrap();
    assert!(full.grad_sup() > 0.5);
    let map = ZvonkinMap::shrink_horizon(&sigma, &b, 1.0, opts).unwrap();
    assert!(map.horizon() < 1.0);
    assert!(map.certified() && map.grad_sup() <= 0.5);
    let bound = map.inverse_bound();
    assert!(bound.pass, "{bound:?}");
    assert_eq!(bound.nodes, 128 * (opts.steps + 1));
    // terminal condition and step defect
    assert_eq!(map.u().slice(map.steps()).max_abs(), 0.0);
    assert!(map.residual() < 10.0 * opts.solver.tol * map.u().max_abs().max(1.0));
}

#[test]
fn grad_sup_shrinks_with_horizon() {
    let g = TensorGrid::cube(1, EXTENT, 128).unwrap();
    let (b, sigma) = (bump_drift(&g, 4.0), unit_sigma(&g));
    let sups: Vec<f64> = [1.0, 0.5, 0.25, 0.125]
        .iter()
        .map(|&t| ZvonkinMap::build(&sigma, &b, t, ZvonkinOptions::default()).unwrap().grad_sup())
        .collect();
    assert!(sups.windows(2).all(|w| w[1] <= w[0] * 1.05), "{sups:?}");
}

#[test]
fn grad_sup_self_converges() {
    let coarse = TensorGrid::cube(1, EXTENT, 64).unwrap();
    let fine = TensorGrid::cube(1, EXTENT, 256).unwrap();
    let opts = ZvonkinOptions { steps: 128, ..Default::default() };
    let build = |g: &TensorGrid| ZvonkinMap::build(&unit_sigma(g), &bump_drift(g, 1.0), 0.25, opts).unwrap();
    let coarse_sup = build(&coarse).grad_sup();
    // maxima are taken over nodes, so compare on the nested coarse nodes
    let fine_map = build(&fine);
    let reference = fine_map
        .grad_u()
        .slices()
        .flat_map(|s| s.data().iter().step_by(4).map(|v| v.abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    assert!((coarse_sup - reference).abs() < 1e-4, "{coarse_sup} vs {reference}");
    assert!(fine_map.grad_sup() >= reference);
}

#[test]
fn round_trip_on_random_points_2d() {
    let g = TensorGrid::cube(2, EXTENT, 64).unwrap();
    let b = bump_drift(&g, 2.0);
    let sigma = unit_sigma(&g);
    let map = ZvonkinMap::shrink_horizon(&sigma, &b, 1.0, ZvonkinOptions::default()).unwrap();
    assert!(map.certified());
    assert!(map.inverse_bound().pass);
    let mut rng = Stream::new(5, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = rng.range(0.0, map.horizon());
        let x = [rng.range(0.0, EXTENT), rng.range(0.0, EXTENT)];
        let y = map.phi(t, &x);
        let back = map.phi_inv(t, &y).unwrap();
        let err = ((back[0] - x[0]).powi(2) + (back[1] - x[1]).powi(2)).sqrt();
        worst = worst.max(err / (1.0 + (x[0] * x[0] + x[1] * x[1]).sqrt()));
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn transformed_diffusion_norm_band() {
    let g = TensorGrid::cube(2, EXTENT, 32).unwrap();
    let s = GridFunction::from_fn(&g, Codomain::Matrix, |x, out| {
        out.copy_from_slice(&[1.0 + 0.2 * (x[0]).sin(), 0.1, 0.0, 1.0 + 0.1 * (x[1]).cos()]);
    });
    let sigma = SpaceTimeField::constant(s, 1.0, 1).unwrap();
    let map = ZvonkinMap::shrink_horizon(&sigma, &bump_drift(&g, 2.0), 1.0, ZvonkinOptions::default()).unwrap();
    let psi = map.transformed_diffusion(&sigma).unwrap();
    let (mut pm, mut sm) = ([0.0; 4], [0.0; 4]);
    for n in 0..=map.steps() {
        for k in 0..g.len() {
            psi.slice(n).node_values(k, &mut pm);
            sigma.slice(0).node_values(k, &mut sm);
            let (p, s) = (linalg::spectral_norm(&pm, 2), linalg::spectral_norm(&sm, 2));
            assert!(p >= 0.5 * s - 1e-12 && p <= 1.5 * s + 1e-12);
        }
    }
}

#[test]
fn unresolvable_mollifier_is_reported() {
    let g = TensorGrid::cube(1, EXTENT, 16).unwrap();
    let opts = ZvonkinOptions { mollify: Some(8), ..Default::default() };
    let r = ZvonkinMap::build(&unit_sigma(&g), &bump_drift(&g, 1.0), 1.0, opts);
    assert!(matches!(r, Err(snl_core::Error::Unresolvable { .. })));
}
