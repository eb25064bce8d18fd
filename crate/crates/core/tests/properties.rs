use proptest::prelude::*;

use starflow_core::analysis::{decay_fit, scale_function};
use starflow_core::graph::{lp_norm, mass, tail_mass};
use starflow_core::semigroup::{self_similar_profile, semigroup_apply};
use starflow_core::solver::{
    apply_laplacian, assemble_diffusion_solve, eo_flux, solve, DIVERGENCE_BOUND,
};
use starflow_core::{EdgeGrid, FluxFunction, GraphFunction, KernelQuadrature, SolverConfig, StarGraph};

/// Gaussian bump on `edge`, zero on the others and at the outer ends.
fn bump(
    graph: StarGraph,
    grid: EdgeGrid,
    edge: usize,
    center: f64,
    width: f64,
    amplitude: f64,
) -> GraphFunction {
    let shape = |s: f64| amplitude * (-((s - center) / width).powi(2)).exp();
    let mut u = GraphFunction::from_fn(graph, grid, |k, s| {
        if k == edge && s < grid.length() {
            shape(s)
        } else {
            0.0
        }
    });
    u.set_junction(shape(0.0));
    u
}

fn arb_star() -> impl Strategy<Value = StarGraph> {
    (1usize..4, 1usize..4).prop_map(|(n, m)| StarGraph::new(n, m).unwrap())
}

fn arb_field() -> impl Strategy<Value = GraphFunction> {
    (arb_star(), 4usize..40, 1.0f64..10.0).prop_flat_map(|(g, cells, length)| {
        let grid = EdgeGrid::new(length, cells).unwrap();
        let count = g.edge_count() * cells;
        (-5.0f64..5.0, prop::collection::vec(-5.0f64..5.0, count))
            .prop_map(move |(j, v)| GraphFunction::from_parts(g, grid, j, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_linear(u in arb_field(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let v = u.map(|x| (x * 0.7).sin());
        let w = GraphFunction::combine(alpha, &u, beta, &v).unwrap();
        let expected = alpha * mass(&u) + beta * mass(&v);
        let scale = alpha.abs() * lp_norm(&u, 1.0).unwrap() + beta.abs() * lp_norm(&v, 1.0).unwrap();
        prop_assert!((mass(&w) - expected).abs() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn norms_are_homogeneous(u in arb_field(), alpha in -4.0f64..4.0, p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY])) {
        let scaled = lp_norm(&u.scaled(alpha), p).unwrap();
        let expected = alpha.abs() * lp_norm(&u, p).unwrap();
        prop_assert!((scaled - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn tail_is_bounded_by_l1(u in arb_field(), fraction in 0.01f64..0.99) {
        let radius = fraction * u.grid().length();
        let tail = tail_mass(&u, radius).unwrap();
        prop_assert!(tail >= 0.0);
        prop_assert!(tail <= lp_norm(&u, 1.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn diffusion_solve_inverts_its_operator(
        u in arb_field(),
        dt in 1e-4f64..10.0,
        weight in prop::sample::select(vec![0.5, 1.0]),
    ) {
        let out = assemble_diffusion_solve(&u, dt, weight).unwrap();
        let back = GraphFunction::combine(1.0, &out, -weight * dt, &apply_laplacian(&out)).unwrap();
        let n = u.grid().cells();
        let scale = lp_norm(&u, f64::INFINITY).unwrap() + 1.0;
        prop_assert!((back.junction() - u.junction()).abs() <= 1e-10 * scale);
        for k in 0..u.graph().edge_count() {
            for i in 0..n - 1 {
                prop_assert!((back.edge(k)[i] - u.edge(k)[i]).abs() <= 1e-10 * scale);
            }
            prop_assert_eq!(out.edge(k)[n - 1], 0.0);
        }
    }

    #[test]
    fn eo_flux_is_consistent_and_monotone(
        q in 1.2f64..4.0,
        lower in -2.0f64..0.0,
        upper in 0.0f64..2.0,
        a in -3.5f64..3.5,
        b in -3.5f64..3.5,
        da in 0.0f64..0.5,
    ) {
        let f = FluxFunction::power_law(q).unwrap().truncate(lower, upper).unwrap();
        prop_assert!((eo_flux(&f, a, a) - f.eval(a)).abs() < 1e-12);
        prop_assert!(eo_flux(&f, a + da, b) >= eo_flux(&f, a, b) - 1e-12);
        prop_assert!(eo_flux(&f, a, b + da) <= eo_flux(&f, a, b) + 1e-12);
    }

    #[test]
    fn decay_fit_recovers_exponents(exponent in -2.0f64..1.0, c in 0.1f64..10.0) {
        let times: Vec<f64> = (1..=12).map(|i| i as f64 * 4.0).collect();
        let norms: Vec<f64> = times.iter().map(|t| c * t.powf(exponent)).collect();
        let fit = decay_fit(&times, &norms, (4.0, 48.0)).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-12);
    }

    #[test]
    fn scaling_preserves_mass(lambda in 1.0f64..4.0, t in 0.5f64..3.0) {
        let g = StarGraph::new(1, 2).unwrap();
        let grid = EdgeGrid::new(30.0, 600).unwrap();
        let u = self_similar_profile(1.0, g, grid, t).unwrap();
        let scaled = scale_function(&u, lambda).unwrap();
        prop_assert!((mass(&scaled) - mass(&u)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn semigroup_is_positive_and_conservative(
        g in arb_star(),
        edge_pick in 0usize..6,
        center in 1.0f64..5.0,
        width in 0.5f64..1.5,
        t in 0.1f64..2.0,
    ) {
        let grid = EdgeGrid::new(20.0, 400).unwrap();
        let u = bump(g, grid, edge_pick % g.edge_count(), center, width, 1.0);
        let out = semigroup_apply(&u, t, KernelQuadrature::default()).unwrap();
        prop_assert!(out.samples().all(|v| v >= -1e-15));
        // discrete trapezoid mass is kept up to the O(h²) kink error at the junction
        prop_assert!((mass(&out) - mass(&u)).abs() <= 1e-3 * mass(&u));
    }

    #[test]
    fn semigroup_composes(
        g in arb_star(),
        center in 1.0f64..4.0,
        s in 0.1f64..1.0,
        t in 0.1f64..1.0,
    ) {
        let grid = EdgeGrid::new(20.0, 400).unwrap();
        let u = bump(g, grid, g.edge_count() - 1, center, 1.0, 1.0);
        let quad = KernelQuadrature::default();
        let twice = semigroup_apply(&semigroup_apply(&u, s, quad).unwrap(), t, quad).unwrap();
        let once = semigroup_apply(&u, s + t, quad).unwrap();
        let gap = lp_norm(&twice.difference(&once).unwrap(), f64::INFINITY).unwrap();
        prop_assert!(gap <= 1e-3 * lp_norm(&once, f64::INFINITY).unwrap(), "gap {}", gap);
    }

    #[test]
    fn linear_flow_commutes_with_scaling(
        g in arb_star(),
        lambda in prop::sample::select(vec![2.0, 4.0]),
        center in 1.0f64..3.0,
        t in 0.05f64..0.5,
    ) {
        // S(t)(φ^λ) = (S(λ²t)φ)^λ
        let grid = EdgeGrid::new(40.0, 800).unwrap();
        let phi = bump(g, grid, 0, center, 1.0, 1.0);
        let quad = KernelQuadrature::default();
        let left = semigroup_apply(&scale_function(&phi, lambda).unwrap(), t, quad).unwrap();
        let right = scale_function(&semigroup_apply(&phi, lambda * lambda * t, quad).unwrap(), lambda).unwrap();
        let gap = lp_norm(&left.difference(&right).unwrap(), f64::INFINITY).unwrap();
        prop_assert!(gap <= 1e-6 * lp_norm(&right, f64::INFINITY).unwrap(), "gap {}", gap);
    }

    #[test]
    fn solver_mass_change_is_outer_leak(
        g in arb_star(),
        q in 1.5f64..4.0,
        amplitude in 0.1f64..1.5,
        center in 0.5f64..3.0,
    ) {
        let grid = EdgeGrid::new(4.0, 80).unwrap();
        let u = bump(g, grid, 0, center, 0.6, amplitude);
        let f = FluxFunction::power_law(q).unwrap();
        let traj = solve(&u, &f, &SolverConfig::new(0.01, 1.0), &[1.0]).unwrap();
        let leak: f64 = traj.records.iter().map(|r| r.outer_leak).sum();
        let change = mass(&u) - mass(&traj.snapshots[0].field);
        prop_assert!((change - leak).abs() <= 1e-12 * (1.0 + lp_norm(&u, 1.0).unwrap()));
    }

    #[test]
    fn solver_keeps_bounds_when_outflow_dominates(
        n in 1usize..3,
        extra in 0usize..2,
        q in 1.5f64..4.0,
        amplitude in 0.05f64..1.0,
        center in 0.5f64..3.0,
        edge_pick in 0usize..4,
    ) {
        let g = StarGraph::new(n, n + extra).unwrap();
        let grid = EdgeGrid::new(10.0, 200).unwrap();
        let u = bump(g, grid, edge_pick % g.edge_count(), center, 0.5, amplitude);
        let f = FluxFunction::power_law(q).unwrap();
        let traj = solve(&u, &f, &SolverConfig::new(0.01, 1.0), &[1.0]).unwrap();
        for r in &traj.records {
            prop_assert!(r.min >= -1e-12, "min {}", r.min);
            prop_assert!(r.max <= amplitude + 1e-12, "max {}", r.max);
            prop_assert!(r.max < DIVERGENCE_BOUND);
        }
    }
}
