//! Closed-form linear heat evolution on the star graph.
//!
//! With every edge in its outward coordinate, the Kirchhoff heat semigroup is
//!
//! ```text
//! (S(t)φ)_k(s) = ∫_0^∞ [G_t(s - y) - G_t(s + y)] φ_k(y) dy
//!              + 2/(n+m) ∫_0^∞ G_t(s + y) Σ_l φ_l(y) dy
//! ```
//!
//! which is the block form with `J_{n,n}`, `J_{m,m}` on the diagonal and the
//! reflected field on the off-diagonal blocks once incoming edges are mapped
//! back to `x = -s`. The integrals are evaluated by the composite trapezoid
//! rule on the field's own grid, so `s ± y` is always a multiple of `h` and
//! the kernel is tabulated once per call.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{EdgeGrid, EdgeSamples, GraphFunction, StarGraph};
use crate::math;

/// Trapezoid realisation of the kernel integrals on the field grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Target absolute error per evaluation point; also the threshold for the
    /// truncation-tail check.
    pub abs_tolerance: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        Self {
            abs_tolerance: 1e-8,
        }
    }
}

/// `G_t(x) = (4πt)^{-1/2} exp(-x²/4t)`.
pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    Ok(gaussian(t, x))
}

fn gaussian(t: f64, x: f64) -> f64 {
    math::exp(-x * x / (4.0 * t)) / math::sqrt(4.0 * math::PI * t)
}

/// Samples `u_M(t)`: `2M/(n+m) · G_t(|x|)` on every edge.
pub fn self_similar_profile(mass: f64, graph: StarGraph, grid: EdgeGrid, t: f64) -> Result<GraphFunction> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let amplitude = 2.0 * mass / graph.edge_count() as f64;
    Ok(GraphFunction::from_fn(graph, grid, |_, s| amplitude * gaussian(t, s)))
}

/// `G_t(i·h)` for `i = 0..=2N`, cut to zero once it drops below round-off
/// relative to the peak.
struct KernelTable {
    values: Vec<f64>,
}

impl KernelTable {
    fn new(t: f64, grid: EdgeGrid) -> Self {
        let h = grid.spacing();
        let len = 2 * grid.cells() + 1;
        let peak = gaussian(t, 0.0);
        let mut values = Vec::with_capacity(len);
        for i in 0..len {
            let g = gaussian(t, i as f64 * h);
            if g < peak * 1e-20 {
                break;
            }
            values.push(g);
        }
        Self { values }
    }

    #[inline]
    fn reach(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        if i < self.values.len() {
            self.values[i]
        } else {
            0.0
        }
    }
}

/// Direct and reflected trapezoid convolutions of one edge.
fn edge_integrals(phi: &[f64], grid: EdgeGrid, table: &KernelTable) -> (Vec<f64>, Vec<f64>) {
    let n = grid.cells();
    let weighted: Vec<f64> = (0..=n).map(|j| grid.weight(j) * phi[j]).collect();
    let reach = table.reach();
    let mut direct = vec![0.0; n + 1];
    let mut reflected = vec![0.0; n + 1];
    for i in 0..=n {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(n);
        let mut d = 0.0;
        for (j, w) in weighted.iter().enumerate().take(hi + 1).skip(lo) {
            d += w * table.get(i.abs_diff(j));
        }
        direct[i] = d;
        let mut r = 0.0;
        if i < reach {
            let top = (reach - i).min(n + 1);
            for (j, w) in weighted.iter().enumerate().take(top) {
                r += w * table.get(i + j);
            }
        }
        reflected[i] = r;
    }
    (direct, reflected)
}

/// Mass of `|φ|` that the heat flow would carry past `|x| = L` by time `t`.
fn tail_estimate(phi: &EdgeSamples, t: f64) -> f64 {
    let grid = phi.grid();
    let length = grid.length();
    let spread = 2.0 * math::sqrt(t);
    let mut total = 0.0;
    for k in 0..phi.graph().edge_count() {
        for (j, v) in phi.edge(k).iter().enumerate() {
            if *v != 0.0 {
                total += grid.weight(j) * v.abs() * math::erfc((length - grid.node(j)) / spread);
            }
        }
    }
    total
}

fn check_tail(phi: &EdgeSamples, t: f64, quad: KernelQuadrature) -> Result<()> {
    let estimate = tail_estimate(phi, t);
    if estimate > quad.abs_tolerance {
        return Err(Error::KernelTail {
            estimate,
            tolerance: quad.abs_tolerance,
        });
    }
    Ok(())
}

/// `S(t)φ` for per-edge samples, which may disagree at the junction.
pub fn semigroup_apply_samples(phi: &EdgeSamples, t: f64, quad: KernelQuadrature) -> Result<EdgeSamples> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    check_tail(phi, t, quad)?;
    let graph = phi.graph();
    let grid = phi.grid();
    let table = KernelTable::new(t, grid);
    let edges = graph.edge_count();
    let parts: Vec<(Vec<f64>, Vec<f64>)> =
        (0..edges).map(|k| edge_integrals(phi.edge(k), grid, &table)).collect();
    let coupling = 2.0 / edges as f64;
    let mut out = EdgeSamples::zeros(graph, grid);
    for i in 0..=grid.cells() {
        let reflected_sum: f64 = parts.iter().map(|(_, r)| r[i]).sum();
        for (k, (d, r)) in parts.iter().enumerate() {
            out.edge_mut(k)[i] = d[i] - r[i] + coupling * reflected_sum;
        }
    }
    Ok(out)
}

/// `S(t)φ` for a junction-continuous field.
pub fn semigroup_apply(phi: &GraphFunction, t: f64, quad: KernelQuadrature) -> Result<GraphFunction> {
    Ok(semigroup_apply_samples(&phi.to_samples(), t, quad)?.to_graph_function())
}

/// Physical derivative `∂ₓφ` per edge: centered differences inside, second
/// order one-sided differences at the junction and the outer end. The
/// junction entry of each edge is that edge's one-sided limit.
pub fn derivative_samples(phi: &EdgeSamples) -> EdgeSamples {
    let graph = phi.graph();
    let grid = phi.grid();
    let n = grid.cells();
    let h = grid.spacing();
    let mut out = EdgeSamples::zeros(graph, grid);
    for k in 0..graph.edge_count() {
        let v = phi.edge(k);
        let sign = graph.orientation(k);
        let d = out.edge_mut(k);
        d[0] = sign * (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        for i in 1..n {
            d[i] = sign * (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[n] = sign * (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    }
    out
}

/// `∂ₓ(S(t)φ)` through the commutator formula
///
/// ```text
/// ∂ₓS(t)φ = S(t)∂ₓφ + 2 K_t diag(-I_n, I_m) [I - J/(n+m)] φ(0)
///         + 2 S⁺(t) blockdiag(I_n - 2J_{n,n}/(n+m), I_m - 2J_{m,m}/(n+m)) ∂ₓφ
/// ```
///
/// `junction` holds `φ_k(0)` per edge and `slope` the physical derivative
/// samples. The `K_t` term is skipped when all junction values coincide.
pub fn semigroup_derivative_raw(
    junction: &[f64],
    slope: &EdgeSamples,
    t: f64,
    quad: KernelQuadrature,
) -> Result<EdgeSamples> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let graph = slope.graph();
    let grid = slope.grid();
    let edges = graph.edge_count();
    if junction.len() != edges {
        return Err(Error::SampleCount {
            expected: edges,
            got: junction.len(),
        });
    }
    let mut out = semigroup_apply_samples(slope, t, quad)?;

    // blockdiag(I - 2J/(n+m)) ∂ₓφ, acting separately on incoming and outgoing edges
    let n = grid.cells();
    let coupling = 2.0 / edges as f64;
    let mut mixed = EdgeSamples::zeros(graph, grid);
    for i in 0..=n {
        let incoming: f64 = (0..graph.n_in()).map(|k| slope.edge(k)[i]).sum();
        let outgoing: f64 = (graph.n_in()..edges).map(|k| slope.edge(k)[i]).sum();
        for k in 0..edges {
            let side = if graph.is_incoming(k) { incoming } else { outgoing };
            mixed.edge_mut(k)[i] = slope.edge(k)[i] - coupling * side;
        }
    }
    let table = KernelTable::new(t, grid);
    for k in 0..edges {
        let (_, reflected) = edge_integrals(mixed.edge(k), grid, &table);
        for (o, r) in out.edge_mut(k).iter_mut().zip(&reflected) {
            *o += 2.0 * r;
        }
    }

    let continuous = junction.iter().all(|v| *v == junction[0]);
    if !continuous {
        let mean = junction.iter().sum::<f64>() / edges as f64;
        for k in 0..edges {
            let jump = 2.0 * graph.orientation(k) * (junction[k] - mean);
            for (i, o) in out.edge_mut(k).iter_mut().enumerate() {
                *o += jump * table.get(i);
            }
        }
    }
    Ok(out)
}

/// `∂ₓ(S(t)φ)` for a junction-continuous field, with derivative samples from
/// [`derivative_samples`].
pub fn semigroup_derivative(phi: &GraphFunction, t: f64, quad: KernelQuadrature) -> Result<EdgeSamples> {
    let raw = phi.to_samples();
    let slope = derivative_samples(&raw);
    let junction = vec![phi.junction(); phi.graph().edge_count()];
    semigroup_derivative_raw(&junction, &slope, t, quad)
}
