//! Steady-state two-mode Gaussian state of a nondegenerate three-level
//! cascade laser, its directional Gaussian steering and Rényi-2 entanglement.
//!
//! * [`gaussian`]: standard-form covariance algebra and the correlation measures.
//! * [`laser`]: closed-form stationary moments and covariance matrix.
//! * [`dynamics`]: RK4 integration of the moment equations and a linear-solve
//!   steady state, both independent of the closed forms.
//! * [`sweep`]: deterministic sweeps, grids and the one-way boundary search.
//! * [`output`]: CSV/JSON writers and readers.
//! * [`cli`]: the `cascade-steering` command.

pub mod cli;
mod double_double;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod laser;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
