use serde::{Deserialize, Serialize};

use super::build::build_perturbation;
use super::scan::{find_improving_facet, FacetSpread};
use crate::digest::json_digest;
use crate::error::{domain, Result};
use crate::gaussian::{CorrelatedGaussianModel, RngStream};
use crate::partition::{FlatPartition, Partition};
use crate::stability::{compare_localized, stability_mc, StabilityEstimate};

/// Bump heights tried on each facet, in order.
pub const DELTA_MENU: [f64; 5] = [0.005, 0.01, 0.02, 0.04, 0.08];

/// Margin, in standard errors, above which a trial counts as a success.
const SIGNIFICANCE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImproveOptions {
    /// Number of (facet, delta) trials.
    pub budget: usize,
    /// Samples for the baseline and for each trial.
    pub samples: u64,
    pub seed: RngStream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub facet: (usize, usize),
    pub t1: f64,
    pub t2: f64,
    pub delta: f64,
    /// Baseline plus the estimated change.
    pub value: f64,
    pub std_error: f64,
    /// Estimated `S_ρ(perturbed) − S_ρ(input)` from the localized estimator.
    pub improvement: f64,
    pub improvement_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The best trial moves `S_ρ` in the sign of `ρ` by more than five SE.
    Improved,
    /// Some direction exists but no trial clears five SE.
    NotSignificant,
    /// The facet scan found no facet with a non-constant line difference.
    NoImprovingDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub input_digest: String,
    pub rho: f64,
    pub spreads: Vec<FacetSpread>,
    pub baseline: StabilityEstimate,
    pub trials: Vec<Trial>,
    pub best_index: Option<usize>,
    pub seed: RngStream,
    pub status: Status,
}

impl ImprovementReport {
    pub fn best(&self) -> Option<&Trial> {
        self.best_index.map(|i| &self.trials[i])
    }
}

/// Tries bumps of every height in [`DELTA_MENU`] on the facets ranked by the
/// scan and keeps the one that moves `S_ρ` furthest in the direction of
/// `sgn ρ`. All trials share one random stream.
pub fn improve(p: &FlatPartition, rho: f64, opts: ImproveOptions) -> Result<(Partition, ImprovementReport)> {
    if opts.budget == 0 {
        return Err(domain("budget must be positive"));
    }
    let model = CorrelatedGaussianModel::new(2, rho)?;
    let scan = find_improving_facet(p, rho)?;
    let baseline = stability_mc(p, &model, opts.samples, opts.seed)?;
    let mut report = ImprovementReport {
        input_digest: json_digest(p)?,
        rho,
        spreads: scan.spreads.clone(),
        baseline: baseline.clone(),
        trials: Vec::new(),
        best_index: None,
        seed: opts.seed,
        status: Status::NoImprovingDirection,
    };
    if scan.witnesses.is_empty() {
        return Ok((p.clone().into(), report));
    }
    let base = Partition::from(p.clone());
    let mut candidates = Vec::new();
    'outer: for w in &scan.witnesses {
        for &delta in &DELTA_MENU {
            if candidates.len() == opts.budget {
                break 'outer;
            }
            let q = build_perturbation(p, &w.line, w.t1, w.t2, delta)?;
            let d = compare_localized(&base, &q.clone().into(), &model, opts.samples, opts.seed)?;
            report.trials.push(Trial {
                facet: w.line.pair,
                t1: w.t1,
                t2: w.t2,
                delta,
                value: baseline.value + d.difference,
                std_error: baseline.std_error.hypot(d.std_error),
                improvement: d.difference,
                improvement_se: d.std_error,
            });
            candidates.push(q);
        }
    }
    let sgn = rho.signum();
    let best = report
        .trials
        .iter()
        .enumerate()
        .max_by(|a, b| (sgn * a.1.improvement).total_cmp(&(sgn * b.1.improvement)))
        .map(|(i, _)| i)
        .expect("at least one trial");
    let t = &report.trials[best];
    report.best_index = Some(best);
    report.status = if sgn * t.improvement > SIGNIFICANCE * t.improvement_se {
        Status::Improved
    } else {
        Status::NotSignificant
    };
    Ok((candidates.swap_remove(best).into(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, StandardSimplexSpec};

    #[test]
    fn centered_simplex_is_returned_unchanged() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let opts = ImproveOptions { budget: 3, samples: 10_000, seed: RngStream::new(1, 0) };
        let (q, r) = improve(&p, 0.5, opts).unwrap();
        assert_eq!(q, Partition::Flat(p));
        assert_eq!(r.status, Status::NoImprovingDirection);
        assert!(r.trials.is_empty());
    }

    #[test]
    fn budget_limits_the_trials_and_reports_replay() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.5, 0.0] }).unwrap();
        let opts = ImproveOptions { budget: 3, samples: 20_000, seed: RngStream::new(2, 0) };
        let (_, a) = improve(&p, 0.5, opts).unwrap();
        let (_, b) = improve(&p, 0.5, opts).unwrap();
        assert_eq!(a.trials.len(), 3);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
