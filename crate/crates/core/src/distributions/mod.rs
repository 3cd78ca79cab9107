//! Laplace, Gamma, symmetric VG and VG laws.

pub mod gamma;
pub mod laplace;
pub mod vg;

pub use gamma::{GammaParamsMeanVar, GammaParamsShapeRate};
pub use laplace::{laplace_cdf, laplace_cf, laplace_central_moment, laplace_kurtosis, laplace_pdf, LaplaceParams};
pub use vg::{svg_cf, vg_cdf, vg_cf, vg_pdf, vg_sf, SvgParams, VgDensity, VgParams};
