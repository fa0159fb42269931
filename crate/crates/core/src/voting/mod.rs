//! Plurality on three candidates with biased, correlated votes, the count
//! statistic embedding into the plane, and rectangle-based competitors.
//!
//! Candidates are 0-based (`0, 1, 2`) everywhere except in vote words,
//! which use the symbols `1, 2, 3`.

pub mod competitor;
pub mod embedding;
pub mod energy;
pub mod function;
pub mod measure;
pub mod rectangles;
pub mod stability;
pub mod words;

pub use embedding::{multinomial_log_pmf, uniform_vote_covariance, StatisticEmbedding};
pub use measure::{BiasedMeasure, CorrelatedPairLaw, Counts, CANDIDATES};
pub use rectangles::{rectangle_approximate, symmetric_difference, GridPartition, Rect, RectangleSet, MIN_RESOLUTION};
pub use words::{counts, plurality, plurality_counts, read_words, write_words};
pub use function::{build_competitor, Evaluator, Fallback, VotingFunction};
pub use stability::{
    compare_discrete, compare_discrete_localized, discrete_stability, discrete_stability_exact, influence,
    label_frequencies, label_frequencies_exact, region_lattice, sample_pair, DiscreteEstimate, DiscreteMethod,
    InfluenceMethod, LabelFrequencies, PairedDiscrete, MAX_EXACT_VOTERS,
};
pub use competitor::{competitor_from_perturbation, plurality_competitor, Competitor, CompetitorOptions, DiscretePatch, DEFAULT_GRID_STEP};
pub use energy::{energy_critical_value, energy_normality, mean_distance, EnergyTest};
