use serde::{Deserialize, Serialize};

use super::{Method, StabilityEstimate};
use crate::error::{domain, Result};
use crate::gaussian::{CorrelatedGaussianModel, RngStream};
use crate::mc::{map_blocks, proportion_se, reduce_moments, Moments};
use crate::partition::{Classify, MIN_SAMPLES};

fn check<P: Classify + ?Sized>(p: &P, model: &CorrelatedGaussianModel, samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!("need at least {MIN_SAMPLES} samples")));
    }
    if model.n() != p.dim() {
        return Err(domain("model and partition dimensions differ"));
    }
    Ok(())
}

/// Fraction of correlated pairs that land in the same cell.
pub fn stability_mc<P: Classify + ?Sized>(
    p: &P,
    model: &CorrelatedGaussianModel,
    samples: u64,
    rng: RngStream,
) -> Result<StabilityEstimate> {
    check(p, model, samples)?;
    let n = model.n();
    let hits: u64 = map_blocks(rng, samples, |r, count| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut hits = 0u64;
        for _ in 0..count {
            model.fill_pair(r, &mut x, &mut y);
            hits += u64::from(p.classify(&x) == p.classify(&y));
        }
        hits
    })
    .iter()
    .sum();
    let value = hits as f64 / samples as f64;
    Ok(StabilityEstimate {
        value,
        std_error: proportion_se(value, samples),
        method: Method::Mc,
        samples_or_order: samples,
        seed: Some(rng),
        partition_digest: None,
    })
}

/// Two stability estimates on identical pairs and their paired difference
/// `S(b) − S(a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedEstimate {
    pub a: StabilityEstimate,
    pub b: StabilityEstimate,
    pub difference: f64,
    pub difference_se: f64,
}

/// Common-random-number comparison of two partitions.
pub fn compare_mc<A: Classify + ?Sized, B: Classify + ?Sized>(
    a: &A,
    b: &B,
    model: &CorrelatedGaussianModel,
    samples: u64,
    rng: RngStream,
) -> Result<PairedEstimate> {
    check(a, model, samples)?;
    check(b, model, samples)?;
    let n = model.n();
    let parts = map_blocks(rng, samples, |r, count| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let (mut ha, mut hb) = (0u64, 0u64);
        let mut d = Moments::default();
        for _ in 0..count {
            model.fill_pair(r, &mut x, &mut y);
            let ia = a.classify(&x) == a.classify(&y);
            let ib = b.classify(&x) == b.classify(&y);
            ha += u64::from(ia);
            hb += u64::from(ib);
            d.push(f64::from(u8::from(ib)) - f64::from(u8::from(ia)));
        }
        (ha, hb, d)
    });
    let ha: u64 = parts.iter().map(|p| p.0).sum();
    let hb: u64 = parts.iter().map(|p| p.1).sum();
    let d = reduce_moments(&parts.iter().map(|p| p.2).collect::<Vec<_>>());
    let est = |hits: u64| {
        let v = hits as f64 / samples as f64;
        StabilityEstimate {
            value: v,
            std_error: proportion_se(v, samples),
            method: Method::Mc,
            samples_or_order: samples,
            seed: Some(rng),
            partition_digest: None,
        }
    };
    Ok(PairedEstimate {
        a: est(ha),
        b: est(hb),
        difference: (hb as f64 - ha as f64) / samples as f64,
        difference_se: d.std_error(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, FlatPartition, StandardSimplexSpec};

    fn simplex(shift: Vec<f64>) -> FlatPartition {
        make_standard_simplex(&StandardSimplexSpec { n: 2, shift }).unwrap()
    }

    #[test]
    fn independent_pairs_give_sum_of_squares() {
        let p = simplex(vec![0.0, 0.0]);
        let m = CorrelatedGaussianModel::new(2, 0.0).unwrap();
        let e = stability_mc(&p, &m, 300_000, RngStream::new(4, 0)).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 4.0 * e.std_error);
    }

    #[test]
    fn half_planes_at_one_half() {
        let p = FlatPartition::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let e = stability_mc(&p, &m, 300_000, RngStream::new(5, 0)).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 4.0 * e.std_error);
    }

    #[test]
    fn paired_comparison_of_identical_partitions_is_exactly_zero() {
        let p = simplex(vec![0.2, 0.0]);
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let c = compare_mc(&p, &p, &m, 50_000, RngStream::new(6, 0)).unwrap();
        assert_eq!(c.difference, 0.0);
        assert_eq!(c.difference_se, 0.0);
        let s = stability_mc(&p, &m, 50_000, RngStream::new(6, 0)).unwrap();
        assert_eq!(s.value, c.a.value);
    }

    #[test]
    fn relabeling_cells_leaves_counts_unchanged() {
        let p = simplex(vec![0.3, -0.1]);
        let mut dirs = p.directions().to_vec();
        dirs.rotate_left(1);
        let q = FlatPartition::new(p.shift().to_vec(), dirs).unwrap();
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let a = stability_mc(&p, &m, 20_000, RngStream::new(8, 0)).unwrap();
        let b = stability_mc(&q, &m, 20_000, RngStream::new(8, 0)).unwrap();
        assert_eq!(a.value, b.value);
    }
}
