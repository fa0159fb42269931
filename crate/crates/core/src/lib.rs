//! Gaussian noise stability of partitions, boundary perturbations that
//! improve it, and the discrete plurality counterpart.

pub mod digest;
pub mod error;
pub mod gaussian;
pub mod geom;
pub mod mc;
pub mod ou;
pub mod partition;
pub mod perturbation;
pub mod stability;
pub mod voting;

pub use error::{Error, Result};
pub use gaussian::{CorrelatedGaussianModel, RngStream};
pub use partition::{Classify, FlatPartition, ParallelStrips, Partition, PerturbedPartition};
pub use stability::StabilityEstimate;
pub use voting::{BiasedMeasure, CorrelatedPairLaw, VotingFunction};
