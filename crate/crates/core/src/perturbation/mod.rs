//! Volume-preserving boundary perturbations of shifted flat partitions that
//! move `S_ρ` in the direction of the sign of `ρ`.

mod build;
mod improve;
mod scan;

pub use build::{bump_half_width, build_perturbation, linear_matched_pair, DEFAULT_HALF_WIDTH, MIN_HALF_WIDTH};
pub use improve::{improve, ImproveOptions, ImprovementReport, Status, Trial, DELTA_MENU};
pub use scan::{find_improving_facet, FacetScan, FacetSpread, Witness, SCAN_POINTS, SCAN_RADIUS, SPREAD_TOL};
