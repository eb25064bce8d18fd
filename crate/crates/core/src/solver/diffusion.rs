//! Implicit diffusion on the star: per-edge second differences, a finite
//! volume balance over the junction cell of measure `(n+m)h/2`, and a zero
//! value at the outer end of every edge.
//!
//! `(I - w·dt·Δ_h) u = rhs` has one tridiagonal block per edge coupled only
//! through the junction unknown. Each block is eliminated by the Thomas
//! algorithm, leaving a scalar Schur complement for the junction value.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::GraphFunction;

/// Discrete Laplacian `Δ_h u`; the outer-end entries are zero.
pub fn apply_laplacian(u: &GraphFunction) -> GraphFunction {
    let graph = u.graph();
    let grid = u.grid();
    let n = grid.cells();
    let h2 = grid.spacing() * grid.spacing();
    let edges = graph.edge_count();
    let mut out = GraphFunction::zeros(graph, grid);
    let j = u.junction();
    let mut junction_sum = 0.0;
    for k in 0..edges {
        let v = u.edge(k);
        junction_sum += v[0] - j;
        let o = out.edge_mut(k);
        // v[i-1] is the sample at s = i·h
        let mut left = j;
        for i in 0..n - 1 {
            let right = v[i + 1];
            o[i] = (left - 2.0 * v[i] + right) / h2;
            left = v[i];
        }
        o[n - 1] = 0.0;
    }
    out.set_junction(2.0 * junction_sum / (edges as f64 * h2));
    out
}

/// Factorisation of `tridiag(-r, 1 + 2r, -r)` of order `N - 1`, shared by
/// every edge.
struct Tridiagonal {
    r: f64,
    // modified super-diagonal and inverse pivots of the forward sweep
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(r: f64, order: usize) -> Self {
        let mut upper = vec![0.0; order];
        let mut inv_pivot = vec![0.0; order];
        let diag = 1.0 + 2.0 * r;
        let mut prev_upper = 0.0;
        for i in 0..order {
            let pivot = diag + r * prev_upper;
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = -r / pivot;
            prev_upper = upper[i];
        }
        Self {
            r,
            upper,
            inv_pivot,
        }
    }

    /// Solves in place.
    fn solve(&self, x: &mut [f64]) {
        let order = x.len();
        let mut prev = 0.0;
        for i in 0..order {
            x[i] = (x[i] + self.r * prev) * self.inv_pivot[i];
            prev = x[i];
        }
        for i in (0..order.saturating_sub(1)).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
    }
}

/// Solves `(I - weight·dt·Δ_h) u = rhs` exactly. `weight` is `1`
/// (backward Euler) or `1/2` (Crank–Nicolson); the outer samples of the
/// result are zero.
pub fn assemble_diffusion_solve(rhs: &GraphFunction, dt: f64, weight: f64) -> Result<GraphFunction> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveTime { t: dt });
    }
    if weight != 0.5 && weight != 1.0 {
        return Err(Error::InvalidWeight { weight });
    }
    let graph = rhs.graph();
    let grid = rhs.grid();
    let n = grid.cells();
    let h = grid.spacing();
    let edges = graph.edge_count();
    let r = weight * dt / (h * h);
    let order = n - 1;
    let tri = Tridiagonal::new(r, order);

    // response of an edge block to a unit junction value: A b = r e_1
    let mut response = vec![0.0; order];
    response[0] = r;
    tri.solve(&mut response);

    let mut out = GraphFunction::zeros(graph, grid);
    let mut first_sum = 0.0;
    for k in 0..edges {
        let o = &mut out.edge_mut(k)[..order];
        o.copy_from_slice(&rhs.edge(k)[..order]);
        tri.solve(o);
        first_sum += o[0];
    }

    // junction row: u0 (1 + cE) - c Σ_k v_k1 = rhs0, with c = 2 w dt / (E h²)
    let c = 2.0 * r / edges as f64;
    let schur = 1.0 + c * edges as f64 * (1.0 - response[0]);
    if !(schur.is_finite() && schur > 0.0) {
        return Err(Error::SingularSchur { value: schur });
    }
    let junction = (rhs.junction() + c * first_sum) / schur;
    out.set_junction(junction);
    for k in 0..edges {
        let o = out.edge_mut(k);
        for (v, b) in o[..order].iter_mut().zip(&response) {
            *v += junction * b;
        }
        o[n - 1] = 0.0;
    }
    Ok(out)
}
