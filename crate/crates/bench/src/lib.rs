//! Fixtures shared by the benchmarks.

use ns_lab_core::partition::{make_standard_simplex, StandardSimplexSpec};
use ns_lab_core::perturbation::build_perturbation;
use ns_lab_core::{FlatPartition, PerturbedPartition};

/// Planar standard simplex moved by `(shift, 0)`.
pub fn shifted_simplex(shift: f64) -> FlatPartition {
    make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![shift, 0.0] }).expect("valid simplex")
}

/// The shifted simplex with one balanced pair of bumps on facet (0, 1).
pub fn bumped_simplex(shift: f64, delta: f64) -> (FlatPartition, PerturbedPartition) {
    let p = shifted_simplex(shift);
    let lr = p.line_restriction(0, 1).expect("adjacent cells");
    let q = build_perturbation(&p, &lr, 1.5, 2.5, delta).expect("balanced bumps");
    (p, q)
}
