//! Conservative Engquist–Osher discretisation of `-∂ₓ f(u)` on the star.
//!
//! Fluxes are measured in the physical coordinate `x`. On an outgoing edge the
//! face between samples `i` and `i+1` carries `F(u_i, u_{i+1})`; on an incoming
//! edge sample `i+1` lies to the left of sample `i`, so the face carries
//! `F(u_{i+1}, u_i)` and positive flux moves toward the junction. The junction
//! cell of measure `(n+m)h/2` gains the face fluxes of the incoming edges and
//! loses those of the outgoing edges.

use crate::flux::FluxFunction;
use crate::graph::GraphFunction;
use crate::math;

/// Panels used by the Engquist–Osher quadrature before adaptive refinement.
const EO_PANELS: usize = 64;
const EO_TOLERANCE: f64 = 1e-14;

/// Engquist–Osher numerical flux
/// `F(a, b) = f(0) + ∫_0^a max(f', 0) ds + ∫_0^b min(f', 0) ds`.
pub fn eo_flux(f: &FluxFunction, a: f64, b: f64) -> f64 {
    match f {
        FluxFunction::Zero => 0.0,
        // f' >= 0 everywhere: pure upwinding
        FluxFunction::PowerLaw { .. } => f.eval(a),
        FluxFunction::Truncated { .. } => {
            let lo = a.min(b).min(0.0);
            let hi = a.max(b).max(0.0);
            if f.nondecreasing_on(lo, hi) {
                return f.eval(a);
            }
            let positive = |s: f64| f.derivative(s).max(0.0);
            let negative = |s: f64| f.derivative(s).min(0.0);
            f.eval(0.0)
                + math::integrate(&positive, 0.0, a, EO_PANELS, EO_TOLERANCE)
                + math::integrate(&negative, 0.0, b, EO_PANELS, EO_TOLERANCE)
        }
    }
}

/// Result of evaluating the convective operator.
pub(crate) struct Convection {
    /// `-∂ₓ f(u)` per sample; zero on the outer samples.
    pub rate: GraphFunction,
    /// Net physical flux leaving through the outer faces of all edges.
    pub outer_outflow: f64,
}

pub(crate) fn convective_rate(u: &GraphFunction, f: &FluxFunction) -> Convection {
    let graph = u.graph();
    let grid = u.grid();
    let n = grid.cells();
    let h = grid.spacing();
    let mut rate = GraphFunction::zeros(graph, grid);
    if f.is_zero() {
        return Convection {
            rate,
            outer_outflow: 0.0,
        };
    }
    let j = u.junction();
    let mut junction_gain = 0.0;
    let mut outer_outflow = 0.0;
    for k in 0..graph.edge_count() {
        let v = u.edge(k);
        let incoming = graph.is_incoming(k);
        // face flux between sample i and i+1 (i = 0 is the junction), taken
        // in the outward direction s
        let face = |i: usize| -> f64 {
            let inner = if i == 0 { j } else { v[i - 1] };
            let outer = v[i];
            if incoming {
                -eo_flux(f, outer, inner)
            } else {
                eo_flux(f, inner, outer)
            }
        };
        let o = rate.edge_mut(k);
        let mut inner_face = face(0);
        junction_gain -= inner_face;
        for i in 1..n {
            let outer_face = face(i);
            o[i - 1] = -(outer_face - inner_face) / h;
            inner_face = outer_face;
        }
        outer_outflow += inner_face;
    }
    let cell = graph.edge_count() as f64 * h / 2.0;
    rate.set_junction(junction_gain / cell);
    Convection {
        rate,
        outer_outflow,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{mass, EdgeGrid, StarGraph};

    #[test]
    fn consistency_and_upwinding() {
        let f = FluxFunction::power_law(3.0).unwrap();
        for s in [-1.3, 0.0, 0.4, 2.0] {
            assert_eq!(eo_flux(&f, s, s), f.eval(s));
        }
        assert_eq!(eo_flux(&f, 1.0, -1.0), 1.0);
        let t = f.truncate(-1.0, 1.0).unwrap();
        for s in [-1.7, -0.2, 0.9, 1.4, 2.5] {
            assert!((eo_flux(&t, s, s) - t.eval(s)).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn truncated_flux_matches_riemann_sum() {
        let f = FluxFunction::power_law(3.0).unwrap().truncate(-1.0, 1.0).unwrap();
        // midpoint Riemann sums with 10^6 cells of the EO integrals
        let riemann = |g: &dyn Fn(f64) -> f64, a: f64| -> f64 {
            let cells = 1_000_000;
            let w = a / cells as f64;
            (0..cells).map(|i| g((i as f64 + 0.5) * w)).sum::<f64>() * w
        };
        let pos = |s: f64| f.derivative(s).max(0.0);
        let neg = |s: f64| f.derivative(s).min(0.0);
        for (a, b) in [(1.5, -1.5), (1.8, 0.3), (-1.2, 1.6), (0.5, 1.9)] {
            let oracle = riemann(&pos, a) + riemann(&neg, b);
            let value = eo_flux(&f, a, b);
            assert!((value - oracle).abs() < 1e-8, "({a},{b}): {value} vs {oracle}");
        }
    }

    #[test]
    fn eo_is_monotone() {
        let f = FluxFunction::power_law(3.0).unwrap().truncate(-1.0, 1.0).unwrap();
        let grid: alloc::vec::Vec<f64> = (0..30).map(|i| -2.2 + 0.15 * i as f64).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                // nonincreasing in the right state, nondecreasing in the left
                assert!(eo_flux(&f, a, w[1]) <= eo_flux(&f, a, w[0]) + 1e-12);
                assert!(eo_flux(&f, w[1], a) >= eo_flux(&f, w[0], a) - 1e-12);
            }
        }
    }

    #[test]
    fn rate_conserves_mass_up_to_outer_flux() {
        let g = StarGraph::new(2, 3).unwrap();
        let grid = EdgeGrid::new(4.0, 80).unwrap();
        let f = FluxFunction::power_law(3.0).unwrap();
        let mut u = GraphFunction::from_fn(g, grid, |k, s| {
            if s >= 4.0 {
                0.0
            } else {
                0.3 * (k as f64 + 1.0) * (-(s - 1.0) * (s - 1.0)).exp() + 0.05
            }
        });
        u.set_junction(0.4);
        let c = convective_rate(&u, &f);
        let change = mass(&c.rate);
        assert!((change + c.outer_outflow).abs() < 1e-12, "{change} vs {}", c.outer_outflow);
    }

    #[test]
    fn constant_state_is_steady_inside() {
        let g = StarGraph::new(1, 1).unwrap();
        let grid = EdgeGrid::new(1.0, 10).unwrap();
        let f = FluxFunction::power_law(2.0).unwrap();
        let u = GraphFunction::from_fn(g, grid, |_, _| 0.5);
        let c = convective_rate(&u, &f);
        // equal numbers of incoming and outgoing edges: the junction is steady
        assert!(c.rate.junction().abs() < 1e-15);
        assert!(c.rate.edge(0)[..9].iter().all(|v| v.abs() < 1e-12));
    }
}
