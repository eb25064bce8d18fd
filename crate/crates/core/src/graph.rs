//! Star graph topology, the truncated edge grid and sampled fields.
//!
//! Every edge is stored in its outward coordinate `s ∈ [0, L]`, measured from
//! the junction. Incoming edges (indices `0..n`) sit at physical position
//! `x = -s`, outgoing edges (indices `n..n+m`) at `x = +s`. Sample `i` of an
//! edge lives at `s = i·h`; `GraphFunction` keeps one shared junction value and
//! samples `1..=N` per edge, so continuity at the vertex holds by layout.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Star-shaped graph with `n_in` incoming and `m_out` outgoing half-lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StarGraph {
    n_in: usize,
    m_out: usize,
}

impl StarGraph {
    pub fn new(n_in: usize, m_out: usize) -> Result<Self> {
        if n_in == 0 || m_out == 0 {
            return Err(Error::InvalidGraph { n_in, m_out });
        }
        Ok(Self { n_in, m_out })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn m_out(&self) -> usize {
        self.m_out
    }

    pub fn edge_count(&self) -> usize {
        self.n_in + self.m_out
    }

    pub fn is_incoming(&self, edge: usize) -> bool {
        edge < self.n_in
    }

    /// `-1` for incoming edges and `+1` for outgoing ones: `x = orientation · s`.
    pub fn orientation(&self, edge: usize) -> f64 {
        if self.is_incoming(edge) {
            -1.0
        } else {
            1.0
        }
    }
}

/// Uniform grid shared by every edge, truncated at distance `L` from the
/// junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGrid {
    length: f64,
    cells: usize,
}

impl EdgeGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) || cells < 2 {
            return Err(Error::InvalidGrid { length, cells });
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Outward coordinate of sample `i` (`0` is the junction, `N` the outer end).
    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.length
        } else {
            i as f64 * self.spacing()
        }
    }

    /// Trapezoid weight of sample `i` on a single edge.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i == self.cells {
            0.5 * h
        } else {
            h
        }
    }
}

/// A continuous sampled field on the truncated star graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    graph: StarGraph,
    grid: EdgeGrid,
    junction: f64,
    // edge k, sample i (1..=N) at values[k*N + i - 1]
    values: Vec<f64>,
}

impl GraphFunction {
    pub fn zeros(graph: StarGraph, grid: EdgeGrid) -> Self {
        Self {
            graph,
            grid,
            junction: 0.0,
            values: vec![0.0; graph.edge_count() * grid.cells()],
        }
    }

    /// Builds a field from the junction value and per-edge samples `1..=N`
    /// laid out edge after edge.
    pub fn from_parts(
        graph: StarGraph,
        grid: EdgeGrid,
        junction: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        let expected = graph.edge_count() * grid.cells();
        if values.len() != expected {
            return Err(Error::SampleCount {
                expected,
                got: values.len(),
            });
        }
        if !junction.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            graph,
            grid,
            junction,
            values,
        })
    }

    /// Samples `g(edge, s)` at every node; the junction takes `g(0, 0)`.
    pub fn from_fn<F: FnMut(usize, f64) -> f64>(graph: StarGraph, grid: EdgeGrid, mut g: F) -> Self {
        let n = grid.cells();
        let junction = g(0, 0.0);
        let mut values = Vec::with_capacity(graph.edge_count() * n);
        for k in 0..graph.edge_count() {
            for i in 1..=n {
                values.push(g(k, grid.node(i)));
            }
        }
        Self {
            graph,
            grid,
            junction,
            values,
        }
    }

    pub fn graph(&self) -> StarGraph {
        self.graph
    }

    pub fn grid(&self) -> EdgeGrid {
        self.grid
    }

    pub fn junction(&self) -> f64 {
        self.junction
    }

    pub fn set_junction(&mut self, value: f64) {
        self.junction = value;
    }

    /// Samples `1..=N` of `edge`.
    pub fn edge(&self, edge: usize) -> &[f64] {
        let n = self.grid.cells();
        &self.values[edge * n..(edge + 1) * n]
    }

    pub fn edge_mut(&mut self, edge: usize) -> &mut [f64] {
        let n = self.grid.cells();
        &mut self.values[edge * n..(edge + 1) * n]
    }

    /// Sample `i` (0 = junction) of `edge`.
    pub fn at(&self, edge: usize, i: usize) -> f64 {
        if i == 0 {
            self.junction
        } else {
            self.values[edge * self.grid.cells() + i - 1]
        }
    }

    /// All edge samples (junction excluded), edge after edge.
    pub fn edge_values(&self) -> &[f64] {
        &self.values
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        core::iter::once(self.junction).chain(self.values.iter().copied())
    }

    pub fn compatible(&self, other: &GraphFunction) -> bool {
        self.graph == other.graph && self.grid == other.grid
    }

    pub fn map<F: Fn(f64) -> f64>(&self, g: F) -> GraphFunction {
        GraphFunction {
            graph: self.graph,
            grid: self.grid,
            junction: g(self.junction),
            values: self.values.iter().map(|&v| g(v)).collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> GraphFunction {
        self.map(|v| alpha * v)
    }

    /// `alpha·u + beta·v`.
    pub fn combine(alpha: f64, u: &GraphFunction, beta: f64, v: &GraphFunction) -> Result<GraphFunction> {
        if !u.compatible(v) {
            return Err(Error::Incompatible);
        }
        Ok(GraphFunction {
            graph: u.graph,
            grid: u.grid,
            junction: alpha * u.junction + beta * v.junction,
            values: u
                .values
                .iter()
                .zip(&v.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    pub fn difference(&self, other: &GraphFunction) -> Result<GraphFunction> {
        GraphFunction::combine(1.0, self, -1.0, other)
    }

    /// Per-edge copy including the junction sample on every edge.
    pub fn to_samples(&self) -> EdgeSamples {
        let n = self.grid.cells();
        let mut values = Vec::with_capacity(self.graph.edge_count() * (n + 1));
        for k in 0..self.graph.edge_count() {
            values.push(self.junction);
            values.extend_from_slice(self.edge(k));
        }
        EdgeSamples {
            graph: self.graph,
            grid: self.grid,
            values,
        }
    }

    /// Trapezoid sum `Σ_k Σ_i w_i g(u_k(s_i))`, the junction counted once per
    /// edge with end weight `h/2`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let h = self.grid.spacing();
        let n = self.grid.cells();
        let mut total = 0.0;
        for k in 0..self.graph.edge_count() {
            let e = self.edge(k);
            let mut s = 0.5 * g(self.junction);
            for &v in &e[..n - 1] {
                s += g(v);
            }
            s += 0.5 * g(e[n - 1]);
            total += h * s;
        }
        total
    }
}

/// Shared junction sample `u(·, 0)`.
pub fn trace_at_junction(u: &GraphFunction) -> f64 {
    u.junction()
}

/// Trapezoid approximation of `Σ_k ∫_{I_k} u_k dx` on the truncated grid.
pub fn mass(u: &GraphFunction) -> f64 {
    u.integrate(|v| v)
}

/// Trapezoid `L^p` norm over all edges; `p = f64::INFINITY` gives the max.
pub fn lp_norm(u: &GraphFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent { p });
    }
    if p.is_infinite() {
        return Ok(u.samples().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(u.integrate(f64::abs));
    }
    if p == 2.0 {
        return Ok(math::sqrt(u.integrate(|v| v * v)));
    }
    // scale by the sup norm so |u|^p neither underflows nor overflows
    let sup = u.samples().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    let integral = u.integrate(|v| math::powf(v.abs() / sup, p));
    Ok(sup * math::powf(integral, 1.0 / p))
}

/// Trapezoid approximation of `Σ_k ∫_{R < |x| < L} |u_k| dx`; the partial
/// cell containing `R` is integrated with the linear interpolant.
pub fn tail_mass(u: &GraphFunction, radius: f64) -> Result<f64> {
    let grid = u.grid();
    let length = grid.length();
    if !(radius > 0.0 && radius < length) {
        return Err(Error::TailRadius { radius, length });
    }
    let h = grid.spacing();
    let n = grid.cells();
    // first node at or beyond R
    let mut first = math::ceil(radius / h) as usize;
    if first > n {
        first = n;
    }
    let mut total = 0.0;
    for k in 0..u.graph().edge_count() {
        let mut s = 0.0;
        let start = grid.node(first);
        if start > radius && first > 0 {
            let a = u.at(k, first - 1);
            let b = u.at(k, first);
            let theta = (radius - grid.node(first - 1)) / h;
            let at_r = a + theta * (b - a);
            s += 0.5 * (start - radius) * (at_r.abs() + b.abs());
        }
        for i in first..n {
            s += 0.5 * h * (u.at(k, i).abs() + u.at(k, i + 1).abs());
        }
        total += s;
    }
    Ok(total)
}

/// `(min, max)` over every stored sample, junction included.
pub fn pointwise_bounds(u: &GraphFunction) -> (f64, f64) {
    u.samples()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// `Σ_k ∫ (∂ₓu_k)² dx` with the gradient taken on the links between
/// neighbouring samples, `Σ_k Σ_i (u_{i+1} - u_i)² / h`. This is the
/// quadratic form of the discrete Laplacian: `⟨u, Δ_h u⟩ = -gradient_energy(u)`
/// under the trapezoid inner product when the outer samples vanish.
pub fn gradient_energy(u: &GraphFunction) -> f64 {
    gradient_energy_weighted(u, |_| 1.0)
}

/// `Σ_k ∫ w(u) (∂ₓu_k)² dx` with `w` evaluated at the link average.
pub fn gradient_energy_weighted<W: Fn(f64) -> f64>(u: &GraphFunction, weight: W) -> f64 {
    let h = u.grid().spacing();
    let mut total = 0.0;
    for k in 0..u.graph().edge_count() {
        let mut prev = u.junction();
        let mut s = 0.0;
        for &v in u.edge(k) {
            let d = v - prev;
            s += weight(0.5 * (v + prev)) * d * d;
            prev = v;
        }
        total += s / h;
    }
    total
}

/// Per-edge samples `0..=N` with an independent junction value on each edge.
///
/// Used for fields that are not continuous at the vertex, such as one-sided
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    graph: StarGraph,
    grid: EdgeGrid,
    values: Vec<f64>,
}

impl EdgeSamples {
    pub fn zeros(graph: StarGraph, grid: EdgeGrid) -> Self {
        Self {
            graph,
            grid,
            values: vec![0.0; graph.edge_count() * (grid.cells() + 1)],
        }
    }

    pub fn from_fn<F: FnMut(usize, f64) -> f64>(graph: StarGraph, grid: EdgeGrid, mut g: F) -> Self {
        let mut values = Vec::with_capacity(graph.edge_count() * (grid.cells() + 1));
        for k in 0..graph.edge_count() {
            for i in 0..=grid.cells() {
                values.push(g(k, grid.node(i)));
            }
        }
        Self {
            graph,
            grid,
            values,
        }
    }

    pub fn graph(&self) -> StarGraph {
        self.graph
    }

    pub fn grid(&self) -> EdgeGrid {
        self.grid
    }

    /// Samples `0..=N` of `edge`.
    pub fn edge(&self, edge: usize) -> &[f64] {
        let stride = self.grid.cells() + 1;
        &self.values[edge * stride..(edge + 1) * stride]
    }

    pub fn edge_mut(&mut self, edge: usize) -> &mut [f64] {
        let stride = self.grid.cells() + 1;
        &mut self.values[edge * stride..(edge + 1) * stride]
    }

    pub fn is_continuous(&self) -> bool {
        let j = self.edge(0)[0];
        (1..self.graph.edge_count()).all(|k| self.edge(k)[0] == j)
    }

    /// Collapses to a `GraphFunction`, taking the junction sample of edge 0.
    pub fn to_graph_function(&self) -> GraphFunction {
        let n = self.grid.cells();
        let mut values = Vec::with_capacity(self.graph.edge_count() * n);
        for k in 0..self.graph.edge_count() {
            values.extend_from_slice(&self.edge(k)[1..]);
        }
        GraphFunction {
            graph: self.graph,
            grid: self.grid,
            junction: self.edge(0)[0],
            values,
        }
    }

    pub fn sup_distance(&self, other: &EdgeSamples) -> Result<f64> {
        if self.graph != other.graph || self.grid != other.grid {
            return Err(Error::Incompatible);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }
}
