//! Nonlinear convection-diffusion on a star-shaped metric graph.
//!
//! The graph has `n` incoming and `m` outgoing half-lines glued at a single
//! vertex. On every edge the field obeys `u_t + f(u)_x = u_xx`; at the vertex
//! the field is continuous and the total flux `f(u) - u_x` entering through the
//! incoming edges equals the flux leaving through the outgoing ones.
//!
//! The crate is `no_std` (with `alloc`) and contains only numerics:
//!
//! * [`graph`]: the star graph, its truncated uniform grid and sampled fields.
//! * [`flux`]: the convective nonlinearity, its C¹ truncation and the
//!   hypothesis screen.
//! * [`semigroup`]: the closed-form linear heat semigroup on the star, the
//!   self-similar Gaussian profile and the derivative commutator.
//! * [`solver`]: the conservative IMEX scheme (Engquist–Osher convection,
//!   Crank–Nicolson diffusion, arrowhead junction solve) and the Picard
//!   slab iteration.
//! * [`analysis`]: entropy and energy balances, maximum-principle reports,
//!   decay-exponent fits and the scaling family.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
mod error;
pub mod flux;
pub mod graph;
pub(crate) mod math;
pub mod semigroup;
pub mod solver;

pub use error::{Error, Result};
pub use flux::{FluxFunction, Hypothesis, HypothesisSet, Probe};
pub use graph::{EdgeGrid, EdgeSamples, GraphFunction, StarGraph};
pub use semigroup::KernelQuadrature;
pub use solver::{
    DiffusionRule, PicardReport, Scheme, SimulationState, Snapshot, SolverConfig, StepRecord,
    Trajectory,
};
