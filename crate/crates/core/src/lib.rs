//! Numerics for sampling and interpolation in the Bargmann-Fock space.
//!
//! * [`space`]: the space `F^2_alpha`, its kernel, norms and translations.
//! * [`pointsets`]: lattices, perturbations, separation and uniform densities.
//! * [`canonical`]: the Weierstrass sigma function and canonical products.
//! * [`sampling`]: frame-bound estimation and the cell decomposition of the norm.
//! * [`interpolation`]: Lagrange-type reconstruction and explicit interpolation.
//! * [`io`]: JSON and CSV formats.

// Negated comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod complex;
pub mod error;
pub mod interpolation;
pub mod io;
pub mod pointsets;
pub mod quadrature;
pub mod sampling;
pub mod space;
pub mod spatial;

pub use canonical::{
    gfun_derivative_at_node, gfun_log, growth_check, quasi_period_constants, sigma_log, CanonicalProduct,
    GrowthBoundFit, SigmaFunction,
};
pub use complex::{Complex, LogComplex};
pub use error::{FockError, Result};
pub use interpolation::{
    build_interpolant, lagrange_reconstruct, norm_growth_report, residual_check, InterpolantEvaluator,
    InterpolationProblem,
};
pub use pointsets::{
    closeness, counts, density_estimate, perturb, scale_lattice_to_density, separation, square_lattice, DensityReport,
    PointSet, SquareLattice,
};
pub use sampling::{frame_bounds, frame_matrix, norm_decomposition_check, point_removal_experiment, FrameEstimate};
pub use space::{inner, kernel, kernel_log, FockFunction, FockParameter};

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
