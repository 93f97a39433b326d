//! The Weierstrass sigma function of a square lattice and the canonical
//! products of point sets uniformly close to it.

pub mod eisenstein;
mod growth;
mod product;
mod sigma;

pub use growth::{growth_check, GrowthBoundFit, LOG_TOLERANCE};
pub use product::{gfun_derivative_at_node, gfun_log, gfun_log_direct, CanonicalProduct};
pub use sigma::{
    direct_truncation_floor, direct_unit_log, quasi_period_constants, sigma_log, Reduced, SigmaFunction,
    DEFAULT_TRUNCATION, PROBES, PROBE_TOLERANCE,
};
