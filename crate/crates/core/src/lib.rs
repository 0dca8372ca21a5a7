//! Doubly regularized entropic Wasserstein barycenters.
//!
//! The `(λ, τ)`-barycenter of marginals `ν_1..ν_K` with weights `w_k` is the
//! unique minimizer over probability measures `μ` of
//!
//! ```text
//! F(μ) = Σ_k w_k T_λ(μ, ν_k) + τ H(μ)
//! ```
//!
//! where `T_λ` is entropic optimal transport with reference measure `μ ⊗ ν`
//! and `H` is the negative differential entropy. The crate provides:
//!
//! - [`measures`]: boxes, grids, discrete measures, entropies, exact 1D
//!   Wasserstein utilities, sampling and CSV I/O.
//! - [`eot`]: log-domain Sinkhorn for the Schrödinger system, first variation
//!   of `G_λ`, Sinkhorn divergence and change of reference measure.
//! - [`barycenter_grid`]: the concave dual `E(ψ)`, preconditioned gradient
//!   ascent, the `τ = λ` alternating scheme and entropy-sandwich certificates.
//! - [`npgd`]: noisy particle gradient descent on a box.
//! - [`gaussian`]: closed forms for isotropic Gaussian marginals.

pub mod barycenter_grid;
pub mod eot;
mod error;
pub mod gaussian;
pub mod lse;
pub mod measures;
pub mod npgd;
pub mod problem;

pub use error::{Error, Result};
pub use measures::{BoxDomain, Cost, CostKind, DiscreteMeasure, Grid};
pub use problem::BarycenterProblem;
