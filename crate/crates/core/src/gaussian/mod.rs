//! Gaussian primitives shared by every other module.

pub mod bivariate;
pub mod cdf;
pub mod model;
pub mod quadrature;
pub mod rng;

pub use bivariate::{bivariate_normal_cdf, bvn_lower, bvn_rectangle};
pub use cdf::{halfspace_volume, norm_cdf, norm_ppf, phi, std_normal_cdf};
pub use model::{sample_correlated_pair, CorrelatedGaussianModel};
pub use quadrature::{gauss_hermite_rule, QuadratureKind, QuadratureRule};
pub use rng::RngStream;
