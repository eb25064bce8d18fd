//! Diagnostics evaluated on solver trajectories: entropy and energy balances,
//! maximum-principle reports, decay-exponent fits, the scaling family and the
//! scaled distance to the self-similar profile.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::graph::{self, EdgeGrid, GraphFunction, StarGraph};
use crate::math;
use crate::semigroup;
use crate::solver::Snapshot;

/// Slack applied to the bounds in [`max_principle_report`].
pub const BOUND_SLACK: f64 = 1e-12;

const PANELS: usize = 16;
const QUAD_TOL: f64 = 1e-13;

/// `ρ(u) = ∫₀^u (u - s) ρ''(s) ds`, the entropy with `ρ(0) = ρ'(0) = 0`.
pub fn entropy_from_second<R: Fn(f64) -> f64>(rho_second: &R, u: f64) -> f64 {
    math::integrate(&|s| (u - s) * rho_second(s), 0.0, u, PANELS, QUAD_TOL)
}

/// `(n - m) ∫₀^{u(0)} f(s) ρ''(s) ds`, the junction source of the entropy
/// balance.
pub fn entropy_junction_term<R: Fn(f64) -> f64>(
    f: &FluxFunction,
    rho_second: &R,
    graph: StarGraph,
    junction: f64,
) -> f64 {
    let imbalance = graph.n_in() as f64 - graph.m_out() as f64;
    if imbalance == 0.0 || f.is_zero() {
        return 0.0;
    }
    imbalance * math::integrate(&|s| f.eval(s) * rho_second(s), 0.0, junction, PANELS, QUAD_TOL)
}

/// Defect of `d/dt ∫ρ(u) + ∫ρ''(u)(∂ₓu)² = (n-m)∫₀^{u(0)} f ρ''` for each
/// consecutive pair of snapshots. The time derivative is the difference
/// quotient across the pair and the other two terms are averaged over its
/// ends.
pub fn entropy_residual<R: Fn(f64) -> f64>(
    snapshots: &[Snapshot],
    f: &FluxFunction,
    rho_second: R,
    graph: StarGraph,
) -> Result<Vec<f64>> {
    if snapshots.len() < 2 {
        return Err(Error::TooFewSnapshots {
            needed: 2,
            got: snapshots.len(),
        });
    }
    let terms: Vec<(f64, f64, f64)> = snapshots
        .iter()
        .map(|s| {
            let u = &s.field;
            let entropy = u.integrate(|v| entropy_from_second(&rho_second, v));
            let production = graph::gradient_energy_weighted(u, &rho_second);
            let source = entropy_junction_term(f, &rho_second, graph, u.junction());
            (entropy, production, source)
        })
        .collect();
    let mut out = Vec::with_capacity(snapshots.len() - 1);
    for (pair, t) in terms.windows(2).zip(snapshots.windows(2)) {
        let dt = t[1].time - t[0].time;
        if !(dt > 0.0) {
            return Err(Error::SampleTimes("snapshot times must increase"));
        }
        let rate = (pair[1].0 - pair[0].0) / dt;
        let production = 0.5 * (pair[0].1 + pair[1].1);
        let source = 0.5 * (pair[0].2 + pair[1].2);
        out.push(rate + production - source);
    }
    Ok(out)
}

/// A sample outside the admissible band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub time: f64,
    pub edge: usize,
    /// Physical coordinate `x`; the junction is reported once, on edge 0.
    pub position: f64,
    pub value: f64,
}

/// Every sample below `lower - BOUND_SLACK` or above `upper + BOUND_SLACK`.
pub fn max_principle_report(snapshots: &[Snapshot], lower: f64, upper: f64) -> Vec<Violation> {
    let outside = |v: f64| v < lower - BOUND_SLACK || v > upper + BOUND_SLACK;
    let mut out = Vec::new();
    for snap in snapshots {
        let u = &snap.field;
        let g = u.graph();
        let grid = u.grid();
        if outside(u.junction()) {
            out.push(Violation {
                time: snap.time,
                edge: 0,
                position: 0.0,
                value: u.junction(),
            });
        }
        for k in 0..g.edge_count() {
            for (i, &v) in u.edge(k).iter().enumerate() {
                if outside(v) {
                    out.push(Violation {
                        time: snap.time,
                        edge: k,
                        position: g.orientation(k) * grid.node(i + 1),
                        value: v,
                    });
                }
            }
        }
    }
    out
}

/// Least-squares fit `log ‖u(t)‖ ≈ intercept + exponent · log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Largest absolute residual of the log data against the fit.
    pub max_residual: f64,
}

/// Fits the decay exponent over the points with `t` in `window` (inclusive).
pub fn decay_fit(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::SampleCount {
            expected: times.len(),
            got: norms.len(),
        });
    }
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(&t, &v)| (t, v))
        .collect();
    if points.len() < 4 {
        return Err(Error::SparseWindow { got: points.len() });
    }
    if points.iter().any(|(t, v)| !(*v > 0.0) || !(*t > 0.0)) {
        return Err(Error::NonPositiveNorm);
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, v)| (math::ln(t), math::ln(v))).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if !(sxx > 0.0) {
        return Err(Error::SparseWindow { got: points.len() });
    }
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let max_residual = logs
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        exponent,
        intercept,
        max_residual,
    })
}

/// `t^{(1-1/p)/2} ‖u(t) - u_M(t)‖_p`.
pub fn scaled_profile_error(u: &GraphFunction, t: f64, mass: f64, p: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let profile = semigroup::self_similar_profile(mass, u.graph(), u.grid(), t)?;
    let distance = graph::lp_norm(&u.difference(&profile)?, p)?;
    let exponent = if p.is_infinite() { 0.5 } else { 0.5 * (1.0 - 1.0 / p) };
    Ok(math::powf(t, exponent) * distance)
}

/// `u^λ(x) = λ·u(λx)` sampled on the grid of extent `L/λ` with the same
/// number of cells, so every `λx` is a node of the source grid.
pub fn scale_function(u: &GraphFunction, lambda: f64) -> Result<GraphFunction> {
    let grid = u.grid();
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::ScaleOutOfRange { lambda });
    }
    let target = EdgeGrid::new(grid.length() / lambda, grid.cells())?;
    scale_function_on(u, lambda, target)
}

/// `u^λ(x) = λ·u(λx)` on an arbitrary target grid, interpolating `u`
/// linearly between its nodes.
pub fn scale_function_on(u: &GraphFunction, lambda: f64, target: EdgeGrid) -> Result<GraphFunction> {
    let grid = u.grid();
    if !(lambda >= 1.0 && lambda.is_finite()) || lambda * target.length() > grid.length() * (1.0 + 1e-12) {
        return Err(Error::ScaleOutOfRange { lambda });
    }
    let h = grid.spacing();
    let n = grid.cells();
    let sample = |k: usize, s: f64| -> f64 {
        let x = (lambda * s).min(grid.length());
        let pos = x / h;
        let nearest = libm::round(pos);
        // nodes that coincide up to round-off are read without interpolation
        if (pos - nearest).abs() < 1e-9 {
            return u.at(k, (nearest as usize).min(n));
        }
        let i = (pos as usize).min(n - 1);
        let theta = pos - i as f64;
        (1.0 - theta) * u.at(k, i) + theta * u.at(k, i + 1)
    };
    let mut out = GraphFunction::from_fn(u.graph(), target, |k, s| lambda * sample(k, s));
    out.set_junction(lambda * u.junction());
    Ok(out)
}

/// One entry of [`energy_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub time: f64,
    pub l2_squared: f64,
    /// `‖∂ₓu‖₂²`.
    pub dissipation: f64,
}

pub fn energy_series(snapshots: &[Snapshot]) -> Vec<EnergySample> {
    snapshots
        .iter()
        .map(|s| EnergySample {
            time: s.time,
            l2_squared: s.field.integrate(|v| v * v),
            dissipation: graph::gradient_energy(&s.field),
        })
        .collect()
}

/// Defect of the energy balance `‖u(t₂)‖² + 2∫‖∂ₓu‖² - ‖u(t₁)‖²` between
/// consecutive snapshots, read from the solver's accumulated energy.
pub fn energy_balance_defects(snapshots: &[Snapshot]) -> Vec<f64> {
    snapshots
        .windows(2)
        .map(|w| w[1].energy_lhs - w[0].energy_lhs)
        .collect()
}

/// `(n - m) ∫₀^{u(t,0)} f(s)|s|^{p-2} ds` per snapshot; the `L^p` stability
/// estimate needs this to be non-positive along the run.
pub fn lp_sign_condition(snapshots: &[Snapshot], f: &FluxFunction, p: f64) -> Result<Vec<(f64, f64)>> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent { p });
    }
    let weight = |s: f64| {
        if p == 2.0 {
            1.0
        } else if s == 0.0 {
            0.0
        } else {
            math::powf(s.abs(), p - 2.0)
        }
    };
    Ok(snapshots
        .iter()
        .map(|s| {
            let g = s.field.graph();
            (s.time, entropy_junction_term(f, &weight, g, s.field.junction()))
        })
        .collect())
}

/// `true` when every consecutive value is at most the previous one plus
/// `slack·|previous|`.
pub fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack * w[0].abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(time: f64, field: GraphFunction) -> Snapshot {
        Snapshot {
            time,
            field,
            energy_lhs: 0.0,
            step_count: 0,
        }
    }

    fn star() -> (StarGraph, EdgeGrid) {
        (StarGraph::new(1, 2).unwrap(), EdgeGrid::new(10.0, 200).unwrap())
    }

    #[test]
    fn decay_fit_recovers_power_laws() {
        let times: Vec<f64> = (1..=20).map(|i| i as f64 * 2.5).collect();
        let norms: Vec<f64> = times.iter().map(|t| 3.0 / t.sqrt()).collect();
        let fit = decay_fit(&times, &norms, (5.0, 50.0)).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        let flat = vec![2.0; times.len()];
        assert!(decay_fit(&times, &flat, (5.0, 50.0)).unwrap().exponent.abs() < 1e-14);
    }

    #[test]
    fn decay_fit_rejects_bad_input() {
        let times = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            decay_fit(&times, &[1.0; 5], (2.0, 4.0)),
            Err(Error::SparseWindow { got: 3 })
        ));
        assert!(matches!(
            decay_fit(&times, &[1.0, 0.0, 1.0, 1.0, 1.0], (0.0, 9.0)),
            Err(Error::NonPositiveNorm)
        ));
    }

    #[test]
    fn zero_trajectory_diagnostics_vanish() {
        let (g, grid) = star();
        let z = GraphFunction::zeros(g, grid);
        let traj = [snap(0.0, z.clone()), snap(1.0, z.clone()), snap(2.0, z)];
        let f = FluxFunction::power_law(3.0).unwrap();
        assert_eq!(entropy_residual(&traj, &f, |_| 2.0, g).unwrap(), [0.0, 0.0]);
        assert!(max_principle_report(&traj, -1.0, 1.0).is_empty());
        assert!(energy_series(&traj)
            .iter()
            .all(|e| e.l2_squared == 0.0 && e.dissipation == 0.0));
        assert!(entropy_residual(&traj[..1], &f, |_| 2.0, g).is_err());
    }

    #[test]
    fn constant_half_within_unit_band() {
        let (g, grid) = star();
        let u = GraphFunction::from_fn(g, grid, |_, _| 0.5);
        assert!(max_principle_report(&[snap(0.0, u)], 0.0, 1.0).is_empty());
    }

    #[test]
    fn violations_carry_location() {
        let (g, grid) = star();
        let mut u = GraphFunction::zeros(g, grid);
        u.edge_mut(0)[9] = -1e-9;
        u.edge_mut(2)[0] = 1.5;
        let v = max_principle_report(&[snap(3.0, u)], 0.0, 1.0);
        assert_eq!(v.len(), 2);
        assert_eq!((v[0].edge, v[0].position, v[0].value), (0, -0.5, -1e-9));
        assert_eq!((v[1].edge, v[1].position), (2, 0.05));
    }

    #[test]
    fn junction_term_matches_riemann_sum() {
        let g = StarGraph::new(1, 2).unwrap();
        let f = FluxFunction::power_law(3.0).unwrap();
        for u0 in [0.3, 0.9, -0.7] {
            let term = entropy_junction_term(&f, &|_| 2.0, g, u0);
            let cells = 200_000;
            let w = u0 / cells as f64;
            let riemann: f64 = -(0..cells)
                .map(|i| {
                    let s = (i as f64 + 0.5) * w;
                    2.0 * s * s * s
                })
                .sum::<f64>()
                * w;
            assert!((term - riemann).abs() < 1e-10, "{term} vs {riemann}");
            assert!((term + u0.powi(4) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn entropy_from_second_of_constant_is_square() {
        for u in [-1.5, 0.0, 0.25, 3.0] {
            assert!((entropy_from_second(&|_| 2.0, u) - u * u).abs() < 1e-13);
        }
        // ρ'' = 12 s² gives ρ = s⁴
        assert!((entropy_from_second(&|s| 12.0 * s * s, 1.3) - 1.3f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn scaled_error_of_profile_is_zero() {
        let (g, grid) = star();
        let u = semigroup::self_similar_profile(1.0, g, grid, 2.0).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(scaled_profile_error(&u, 2.0, 1.0, p).unwrap(), 0.0);
        }
        assert!(scaled_profile_error(&u, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn scaled_error_prefactor() {
        let (g, grid) = star();
        let u = GraphFunction::from_fn(g, grid, |_, s| if s < 10.0 { 0.01 } else { 0.0 });
        let profile = semigroup::self_similar_profile(1.0, g, grid, 4.0).unwrap();
        let plain1 = graph::lp_norm(&u.difference(&profile).unwrap(), 1.0).unwrap();
        assert_eq!(scaled_profile_error(&u, 4.0, 1.0, 1.0).unwrap(), plain1);
        let plain_inf = graph::lp_norm(&u.difference(&profile).unwrap(), f64::INFINITY).unwrap();
        let scaled = scaled_profile_error(&u, 4.0, 1.0, f64::INFINITY).unwrap();
        assert!((scaled - 2.0 * plain_inf).abs() < 1e-15);
    }

    #[test]
    fn scaling_identity_and_profile_invariance() {
        let (g, grid) = star();
        let u = semigroup::self_similar_profile(1.0, g, grid, 1.0).unwrap();
        assert_eq!(scale_function(&u, 1.0).unwrap(), u);
        assert!(scale_function(&u, 0.5).is_err());
        for lambda in [2.0, 4.0, 8.0] {
            let big = semigroup::self_similar_profile(1.0, g, grid, lambda * lambda).unwrap();
            let scaled = scale_function(&big, lambda).unwrap();
            let exact = semigroup::self_similar_profile(1.0, g, scaled.grid(), 1.0).unwrap();
            let peak = exact.junction();
            for (a, b) in scaled.samples().zip(exact.samples()) {
                assert!((a - b).abs() <= 1e-10 * peak);
            }
        }
    }

    #[test]
    fn scaling_interpolates_off_grid() {
        let (g, grid) = star();
        let u = GraphFunction::from_fn(g, grid, |_, s| 10.0 - s);
        let target = EdgeGrid::new(3.0, 7).unwrap();
        let scaled = scale_function_on(&u, 3.0, target).unwrap();
        for k in 0..3 {
            for i in 1..=7 {
                let s = target.node(i);
                assert!((scaled.at(k, i) - 3.0 * (10.0 - 3.0 * s)).abs() < 1e-12);
            }
        }
        assert!(scale_function_on(&u, 4.0, target).is_err());
    }
}
