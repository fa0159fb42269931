use serde::{Deserialize, Serialize};

use super::{Method, StabilityEstimate};
use crate::error::{domain, unsupported, Result};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::gaussian::{bvn_rectangle, norm_ppf, CorrelatedGaussianModel, RngStream};
use crate::geom::{dot, norm};
use crate::mc::{map_blocks, proportion_se};
use crate::partition::{Classify, FlatPartition, ParallelStrips, Partition, MIN_SAMPLES};

/// How to evaluate `Σ_i ∫ 1_{A_i} T_ρ 1_{B_i} dγ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BilinearMethod {
    /// Exact, for strips with parallel normals only.
    ClosedForm,
    Mc { samples: u64, seed: RngStream },
    /// Closed form when available, otherwise Monte Carlo.
    Auto { samples: u64, seed: RngStream },
}

/// Rewrites two-cell flat partitions (half-planes) as strips.
fn as_strips(p: &Partition) -> Option<ParallelStrips> {
    match p {
        Partition::Strips(s) => Some(s.clone()),
        Partition::Flat(f) if f.k() == 2 => {
            let d: Vec<f64> = f.directions()[1].iter().zip(&f.directions()[0]).map(|(a, b)| a - b).collect();
            let len = norm(&d);
            let u: Vec<f64> = d.iter().map(|v| v / len).collect();
            // Cell 0 is {⟨x − y, u⟩ ≤ 0}, ties included.
            let cut = dot(f.shift(), &u);
            ParallelStrips::new(2, u, vec![cut], vec![0, 1]).ok()
        }
        _ => None,
    }
}

/// Exact bilinear stability of two strip partitions with parallel normals,
/// or `None` if the normals are not parallel.
pub fn strips_bilinear_closed_form(a: &ParallelStrips, b: &ParallelStrips, rho: f64) -> Option<f64> {
    if a.n() != b.n() {
        return None;
    }
    let cos = dot(a.normal(), b.normal());
    if (cos.abs() - 1.0).abs() > 1e-12 {
        return None;
    }
    let b = if cos < 0.0 { b.flipped() } else { b.clone() };
    let mut total = 0.0;
    for (alo, ahi, la) in a.slabs() {
        for &(blo, bhi, lb) in &b.slabs() {
            if la == lb {
                total += bvn_rectangle(alo, ahi, blo, bhi, rho);
            }
        }
    }
    Some(total.clamp(0.0, 1.0))
}

fn bilinear_mc(a: &Partition, b: &Partition, model: &CorrelatedGaussianModel, samples: u64, seed: RngStream) -> Result<StabilityEstimate> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!("need at least {MIN_SAMPLES} samples")));
    }
    let n = model.n();
    let hits: u64 = map_blocks(seed, samples, |r, count| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut hits = 0u64;
        for _ in 0..count {
            model.fill_pair(r, &mut x, &mut y);
            hits += u64::from(a.classify(&x) == b.classify(&y));
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
        seed: Some(seed),
        partition_digest: None,
    })
}

/// The maximizing pair for volumes `(1/3, 1/3, 1/3)` and `(1/2, 0, 1/2)`:
/// three parallel strips against a half-plane split through the middle
/// strip, all sharing the normal `e_1`.
pub fn optimal_pair() -> Result<(Partition, Partition)> {
    let q = norm_ppf(1.0 / 3.0)?;
    let a = ParallelStrips::new(3, vec![1.0, 0.0], vec![q, -q], vec![0, 1, 2])?;
    let b = ParallelStrips::new(3, vec![1.0, 0.0], vec![0.0], vec![0, 2])?;
    Ok((a.into(), b.into()))
}

/// Random planar pairs with the same volumes as [`optimal_pair`]: strips or
/// a rotated centered simplex against a half-plane through the origin, with
/// random orientations and label orders.
pub fn challenger_pairs(count: usize, seed: RngStream) -> Result<Vec<(Partition, Partition)>> {
    let mut rng = seed.rng();
    let q = norm_ppf(1.0 / 3.0)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let unit = |t: f64| vec![t.cos(), t.sin()];
        let mut labels = vec![0, 1, 2];
        labels.shuffle(&mut rng);
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let a: Partition = if rng.gen_bool(0.5) {
            ParallelStrips::new(3, unit(theta), vec![q, -q], labels)?.into()
        } else {
            let dirs: Vec<Vec<f64>> = labels
                .iter()
                .map(|&l| unit(theta + l as f64 * std::f64::consts::TAU / 3.0))
                .collect();
            FlatPartition::new(vec![0.0, 0.0], dirs)?.into()
        };
        let sides = if rng.gen_bool(0.5) { vec![0, 2] } else { vec![2, 0] };
        let b = ParallelStrips::new(3, unit(rng.gen_range(0.0..std::f64::consts::TAU)), vec![0.0], sides)?;
        out.push((a, b.into()));
    }
    Ok(out)
}

/// `Σ_i P(X ∈ A_i, Y ∈ B_i)` for ρ-correlated `(X, Y)`.
pub fn stability_bilinear(
    a: &Partition,
    b: &Partition,
    model: &CorrelatedGaussianModel,
    method: BilinearMethod,
) -> Result<StabilityEstimate> {
    if a.dim() != b.dim() || a.dim() != model.n() {
        return Err(domain("partitions and model must share the dimension"));
    }
    let closed = || {
        let (sa, sb) = (as_strips(a)?, as_strips(b)?);
        strips_bilinear_closed_form(&sa, &sb, model.rho())
    };
    let exact = |value: f64| StabilityEstimate {
        value,
        std_error: 0.0,
        method: Method::ClosedForm,
        samples_or_order: 0,
        seed: None,
        partition_digest: None,
    };
    match method {
        BilinearMethod::ClosedForm => closed()
            .map(exact)
            .ok_or_else(|| unsupported("closed form needs parallel half-space cells")),
        BilinearMethod::Mc { samples, seed } => bilinear_mc(a, b, model, samples, seed),
        BilinearMethod::Auto { samples, seed } => match closed() {
            Some(v) => Ok(exact(v)),
            None => bilinear_mc(a, b, model, samples, seed),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::bvn_lower;
    use crate::partition::{make_standard_simplex, StandardSimplexSpec};
    use crate::stability::stability_mc;

    fn optimum_pair() -> (Partition, Partition) {
        optimal_pair().unwrap()
    }

    #[test]
    fn challengers_have_the_prescribed_volumes() {
        for (a, b) in challenger_pairs(10, RngStream::new(5, 0)).unwrap() {
            for (v, t) in crate::partition::partition_volumes(&a).unwrap().iter().zip([1.0 / 3.0; 3]) {
                assert!((v - t).abs() < 1e-12);
            }
            for (v, t) in crate::partition::partition_volumes(&b).unwrap().iter().zip([0.5, 0.0, 0.5]) {
                assert!((v - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn independent_case_is_the_volume_product() {
        let (a, b) = optimum_pair();
        let m = CorrelatedGaussianModel::new(2, 0.0).unwrap();
        let s = stability_bilinear(&a, &b, &m, BilinearMethod::ClosedForm).unwrap();
        assert!((s.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_matches_two_orthants() {
        let (a, b) = optimum_pair();
        let rho = 0.5;
        let m = CorrelatedGaussianModel::new(2, rho).unwrap();
        let s = stability_bilinear(&a, &b, &m, BilinearMethod::ClosedForm).unwrap();
        let q = norm_ppf(1.0 / 3.0).unwrap();
        assert!((s.value - 2.0 * bvn_lower(q, 0.0, rho)).abs() < 1e-12);
        let seed = RngStream::new(11, 0);
        let mc = stability_bilinear(&a, &b, &m, BilinearMethod::Mc { samples: 400_000, seed }).unwrap();
        assert!((mc.value - s.value).abs() < 4.0 * mc.std_error);
    }

    #[test]
    fn antiparallel_normals_are_flipped() {
        let (a, b) = optimum_pair();
        let Partition::Strips(bs) = &b else { unreachable!() };
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let s1 = stability_bilinear(&a, &b, &m, BilinearMethod::ClosedForm).unwrap();
        let s2 = stability_bilinear(&a, &bs.flipped().into(), &m, BilinearMethod::ClosedForm).unwrap();
        assert!((s1.value - s2.value).abs() < 1e-14);
    }

    #[test]
    fn diagonal_reproduces_stability_counts() {
        let p: Partition = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.2, 0.1] })
            .unwrap()
            .into();
        let m = CorrelatedGaussianModel::new(2, 0.5).unwrap();
        let seed = RngStream::new(12, 3);
        let bl = stability_bilinear(&p, &p, &m, BilinearMethod::Mc { samples: 50_000, seed }).unwrap();
        let st = stability_mc(&p, &m, 50_000, seed).unwrap();
        assert_eq!(bl.value, st.value);
    }

    #[test]
    fn half_plane_flat_partitions_use_the_closed_form() {
        let f = crate::partition::FlatPartition::new(vec![0.3, 0.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let p: Partition = f.into();
        let m = CorrelatedGaussianModel::new(2, 0.4).unwrap();
        let seed = RngStream::new(1, 1);
        let s = stability_bilinear(&p, &p, &m, BilinearMethod::Auto { samples: 1000, seed }).unwrap();
        assert_eq!(s.method, Method::ClosedForm);
        let expected = bvn_lower(0.3, 0.3, 0.4) + bvn_lower(-0.3, -0.3, 0.4);
        assert!((s.value - expected).abs() < 1e-12);
    }
}
