//! Measure and domain types, entropy functionals, costs, exact 1D
//! Wasserstein utilities, sampling and file I/O.

mod cost;
mod domain;
mod entropy;
pub mod io;
mod measure;
mod onedim;
mod sample;

pub use cost::{Cost, CostKind};
pub use domain::{BoxDomain, Grid};
pub use entropy::{entropy, relative_entropy, relative_entropy_log};
pub use measure::{l1_distance, DiscreteMeasure};
pub use onedim::{quantile_barycenter_1d, wasserstein1_1d, wasserstein2_1d};
pub use sample::{perturb, sample, sample_with};
