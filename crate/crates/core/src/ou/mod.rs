//! The Ornstein–Uhlenbeck operator on half-planes and planar cells.

mod complex;
mod cone;
mod line;

pub use complex::{complex_line_eval, growth_bound, norm_cdf_complex, ComplexLineCell, MAX_IMAG};
pub(crate) use cone::phi_interval;
pub use cone::{
    cone_measure, t_rho_cone2d, t_rho_cone2d_tol, t_rho_halfspace, ConeCell2D, HalfPlane, CONE_TOL,
};
pub use line::{
    expected_plateaus, limit_at_infinity, limit_swapped, line_difference, LineRestriction,
};
