//! Shared numerical kernels: quadrature, root finding, random streams, optimisation and
//! summary statistics.

pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod roots;
pub mod special;
pub mod stats;

pub use optimize::{nelder_mead, SimplexOptions, SimplexResult};
pub use quadrature::{
    integrate_finite, integrate_finite_with_breaks, integrate_semi_infinite,
    integrate_semi_infinite_with_breaks, QuadratureSpec, SemiInfiniteNodes,
};
pub use rng::{sample_gamma, sample_standard_normal, RngStream};
pub use roots::{find_root_bracketed, DEFAULT_ROOT_TOL};
