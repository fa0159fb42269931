//! Noise stability `S_ρ = Σ_i P(X ∈ A_i, Y ∈ A_i)` and its bilinear form.

mod bilinear;
mod localized;
mod montecarlo;
mod quadrature;
mod variation;

use serde::{Deserialize, Serialize};

pub use bilinear::{challenger_pairs, optimal_pair, stability_bilinear, strips_bilinear_closed_form, BilinearMethod};
pub use localized::{compare_localized, DifferenceEstimate};
pub use montecarlo::{compare_mc, stability_mc, PairedEstimate};
pub use quadrature::{stability_quadrature, DEFAULT_ORDER};
pub use variation::first_variation;

use crate::gaussian::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    Quadrature,
    ClosedForm,
}

/// A stability value with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub samples_or_order: u64,
    pub seed: Option<RngStream>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_digest: Option<String>,
}

impl StabilityEstimate {
    /// Attaches the digest of the partition the estimate refers to.
    pub fn with_digest(mut self, digest: String) -> Self {
        self.partition_digest = Some(digest);
        self
    }
}
