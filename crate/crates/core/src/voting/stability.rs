//! Stability, label frequencies and influences of voting functions, by
//! Monte Carlo and, for a handful of voters, by exact enumeration.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::embedding::multinomial_log_pmf;
use super::function::VotingFunction;
use super::measure::{BiasedMeasure, CorrelatedPairLaw, Counts, CANDIDATES};
use super::rectangles::RectangleSet;
use crate::error::{domain, unsupported, Result};
use crate::gaussian::RngStream;
use crate::mc::{map_blocks, reduce_moments, Moments};
use crate::partition::MIN_SAMPLES;
use crate::stability::DifferenceEstimate;

/// Largest number of voters handled by exact enumeration.
pub const MAX_EXACT_VOTERS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteMethod {
    Mc,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: DiscreteMethod,
    pub samples: u64,
    pub seed: Option<RngStream>,
}

impl DiscreteEstimate {
    fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0, method: DiscreteMethod::Exact, samples: 0, seed: None }
    }

    fn mc(m: &Moments, seed: RngStream) -> Self {
        Self { value: m.mean(), std_error: m.std_error(), method: DiscreteMethod::Mc, samples: m.count, seed: Some(seed) }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!("need at least {MIN_SAMPLES} samples")));
    }
    Ok(())
}

fn check_exact(n: u64) -> Result<()> {
    if n > MAX_EXACT_VOTERS {
        return Err(unsupported(format!("exact enumeration is limited to n <= {MAX_EXACT_VOTERS}")));
    }
    Ok(())
}

/// Calls `f(c, p)` for every composition `c` of `n` into `K` parts, with
/// `p` its multinomial probability under `probs`.
fn for_each_composition<const K: usize>(n: u64, probs: &[f64; K], mut f: impl FnMut(&[u64; K], f64)) {
    fn rec<const K: usize>(
        k: usize,
        left: u64,
        c: &mut [u64; K],
        probs: &[f64; K],
        f: &mut impl FnMut(&[u64; K], f64),
        n: u64,
    ) {
        if k == K - 1 {
            c[k] = left;
            let mut lp = libm::lgamma(n as f64 + 1.0);
            for j in 0..K {
                lp -= libm::lgamma(c[j] as f64 + 1.0);
                if c[j] > 0 {
                    if probs[j] == 0.0 {
                        return;
                    }
                    lp += c[j] as f64 * probs[j].ln();
                }
            }
            f(c, lp.exp());
            return;
        }
        for v in 0..=left {
            c[k] = v;
            rec(k + 1, left - v, c, probs, f, n);
        }
    }
    let mut c = [0u64; K];
    rec(0, n, &mut c, probs, &mut f, n);
}

/// `P[f(x) = f(y)]` for a correlated pair of words.
pub fn discrete_stability(f: &VotingFunction, law: &CorrelatedPairLaw, samples: u64, seed: RngStream) -> Result<DiscreteEstimate> {
    check_samples(samples)?;
    let ev = f.evaluator(law.n())?;
    let parts = map_blocks(seed, samples, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let (x, y) = law.sample_counts(rng);
            m.push(f64::from(u8::from(ev.eval(&x) == ev.eval(&y))));
        }
        m
    });
    Ok(DiscreteEstimate::mc(&reduce_moments(&parts), seed))
}

/// Exact stability by summing over the counts of the nine vote-pair types.
pub fn discrete_stability_exact(f: &VotingFunction, law: &CorrelatedPairLaw) -> Result<DiscreteEstimate> {
    check_exact(law.n())?;
    let ev = f.evaluator(law.n())?;
    let t = law.table();
    let probs: [f64; 9] = std::array::from_fn(|k| t[k / 3][k % 3]);
    let mut total = 0.0;
    for_each_composition(law.n(), &probs, |c, p| {
        let mut x = [0u64; CANDIDATES];
        let mut y = [0u64; CANDIDATES];
        for (k, &v) in c.iter().enumerate() {
            x[k / 3] += v;
            y[k % 3] += v;
        }
        if ev.eval(&x) == ev.eval(&y) {
            total += p;
        }
    });
    Ok(DiscreteEstimate::exact(total))
}

/// Stability of two functions on the same correlated pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedDiscrete {
    pub a: DiscreteEstimate,
    pub b: DiscreteEstimate,
    /// `S(b) − S(a)`.
    pub difference: f64,
    pub difference_se: f64,
}

pub fn compare_discrete(
    a: &VotingFunction,
    b: &VotingFunction,
    law: &CorrelatedPairLaw,
    samples: u64,
    seed: RngStream,
) -> Result<PairedDiscrete> {
    check_samples(samples)?;
    let (ea, eb) = (a.evaluator(law.n())?, b.evaluator(law.n())?);
    let parts = map_blocks(seed, samples, |rng, count| {
        let mut m = [Moments::default(); 3];
        for _ in 0..count {
            let (x, y) = law.sample_counts(rng);
            let sa = f64::from(u8::from(ea.eval(&x) == ea.eval(&y)));
            let sb = f64::from(u8::from(eb.eval(&x) == eb.eval(&y)));
            m[0].push(sa);
            m[1].push(sb);
            m[2].push(sb - sa);
        }
        m
    });
    let red: Vec<Moments> = (0..3).map(|k| reduce_moments(&parts.iter().map(|p| p[k]).collect::<Vec<_>>())).collect();
    Ok(PairedDiscrete {
        a: DiscreteEstimate::mc(&red[0], seed),
        b: DiscreteEstimate::mc(&red[1], seed),
        difference: red[2].mean(),
        difference_se: red[2].std_error(),
    })
}

/// Lattice points of `region` for `n` voters with their probabilities
/// under `measure`.
pub fn region_lattice(region: &RectangleSet, measure: &BiasedMeasure) -> Result<Vec<(Counts, f64)>> {
    let Some((lo, hi)) = region.bounding_box() else {
        return Ok(Vec::new());
    };
    let emb = super::StatisticEmbedding::new(measure.n())?;
    let q = measure.q();
    Ok(emb
        .lattice_in_box(lo, hi)
        .into_iter()
        .filter(|(_, z)| region.lookup(*z).is_some())
        .map(|(c, _)| (c, multinomial_log_pmf(&c, &q).exp()))
        .collect())
}

/// `S(b) − S(a)` for functions that agree outside `region`.
///
/// Exchangeability of the pair gives
/// `S(b) − S(a) = E[D·1{x∈R}·(2 − 1{y∈R})]` with
/// `D = 1[b(x)=b(y)] − 1[a(x)=a(y)]`, so `x` is drawn exactly from the
/// lattice points in `R` and only `y` is simulated.
pub fn compare_discrete_localized(
    a: &VotingFunction,
    b: &VotingFunction,
    law: &CorrelatedPairLaw,
    region: &RectangleSet,
    samples: u64,
    seed: RngStream,
) -> Result<DifferenceEstimate> {
    check_samples(samples)?;
    let (ea, eb) = (a.evaluator(law.n())?, b.evaluator(law.n())?);
    let points = region_lattice(region, law.base())?;
    let mass: f64 = points.iter().map(|p| p.1).sum();
    if points.is_empty() || mass == 0.0 {
        return Ok(DifferenceEstimate { difference: 0.0, std_error: 0.0, region_mass: 0.0, samples, seed });
    }
    let pick = WeightedIndex::new(points.iter().map(|p| p.1)).map_err(|e| domain(e.to_string()))?;
    let emb = *ea.embedding();
    let parts = map_blocks(seed, samples, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let x = points[pick.sample(rng)].0;
            let y = law.sample_partner(&x, rng);
            let (ay, by) = (ea.eval(&y), eb.eval(&y));
            let inside = region.lookup(emb.embed(&y)).is_some();
            if !inside && ay != by {
                return Err(domain("functions differ outside the comparison region"));
            }
            let d = f64::from(u8::from(eb.eval(&x) == by)) - f64::from(u8::from(ea.eval(&x) == ay));
            m.push(d * if inside { 1.0 } else { 2.0 });
        }
        Ok(m)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let m = reduce_moments(&parts);
    Ok(DifferenceEstimate {
        difference: mass * m.mean(),
        std_error: mass * m.std_error(),
        region_mass: mass,
        samples,
        seed,
    })
}

/// Output distribution of a voting function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelFrequencies {
    pub values: [f64; CANDIDATES],
    pub std_errors: [f64; CANDIDATES],
    pub method: DiscreteMethod,
    pub samples: u64,
}

pub fn label_frequencies(f: &VotingFunction, measure: &BiasedMeasure, samples: u64, seed: RngStream) -> Result<LabelFrequencies> {
    check_samples(samples)?;
    let ev = f.evaluator(measure.n())?;
    let n = measure.n();
    let parts = map_blocks(seed, samples, |rng, count| {
        let mut hits = [0u64; CANDIDATES];
        for _ in 0..count {
            hits[ev.eval(&measure.sample_counts(n, rng))] += 1;
        }
        hits
    });
    let mut hits = [0u64; CANDIDATES];
    for p in &parts {
        for a in 0..CANDIDATES {
            hits[a] += p[a];
        }
    }
    let values = hits.map(|h| h as f64 / samples as f64);
    Ok(LabelFrequencies {
        values,
        std_errors: values.map(|v| crate::mc::proportion_se(v, samples)),
        method: DiscreteMethod::Mc,
        samples,
    })
}

pub fn label_frequencies_exact(f: &VotingFunction, measure: &BiasedMeasure) -> Result<LabelFrequencies> {
    check_exact(measure.n())?;
    let ev = f.evaluator(measure.n())?;
    let mut values = [0.0; CANDIDATES];
    for_each_composition(measure.n(), &measure.q(), |c, p| values[ev.eval(c)] += p);
    Ok(LabelFrequencies { values, std_errors: [0.0; CANDIDATES], method: DiscreteMethod::Exact, samples: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InfluenceMethod {
    Exact,
    Mc { samples: u64, seed: RngStream },
}

/// Chance that one coordinate and an independent resample of it give
/// different outputs, averaged exactly over the pair of votes.
fn flip_probability(f: impl Fn(&Counts) -> usize, rest: &Counts, q: &[f64; CANDIDATES]) -> f64 {
    let out: [usize; CANDIDATES] = std::array::from_fn(|a| {
        let mut c = *rest;
        c[a] += 1;
        f(&c)
    });
    let mut p = 0.0;
    for a in 0..CANDIDATES {
        for b in 0..CANDIDATES {
            if out[a] != out[b] {
                p += q[a] * q[b];
            }
        }
    }
    p
}

/// Influence of voter `i` (0-based). Count-based functions treat every
/// voter alike, so the value does not depend on `i` beyond range checking.
pub fn influence(f: &VotingFunction, measure: &BiasedMeasure, i: u64, method: InfluenceMethod) -> Result<DiscreteEstimate> {
    let n = measure.n();
    if i >= n {
        return Err(domain(format!("voter {i} out of range for n = {n}")));
    }
    let ev = f.evaluator(n)?;
    let q = measure.q();
    match method {
        InfluenceMethod::Exact => {
            check_exact(n)?;
            let mut total = 0.0;
            for_each_composition(n - 1, &q, |c, p| total += p * flip_probability(|x| ev.eval(x), c, &q));
            Ok(DiscreteEstimate::exact(total))
        }
        InfluenceMethod::Mc { samples, seed } => {
            check_samples(samples)?;
            let parts = map_blocks(seed, samples, |rng, count| {
                let mut m = Moments::default();
                for _ in 0..count {
                    let rest = measure.sample_counts(n - 1, rng);
                    m.push(flip_probability(|x| ev.eval(x), &rest, &q));
                }
                m
            });
            Ok(DiscreteEstimate::mc(&reduce_moments(&parts), seed))
        }
    }
}

/// Draws a single correlated pair of words; exposed for replay tooling.
pub fn sample_pair<R: Rng + ?Sized>(law: &CorrelatedPairLaw, rng: &mut R) -> (Vec<u8>, Vec<u8>) {
    law.sample_words(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voting::{build_competitor, Fallback, Rect};

    fn uniform_law(n: u64, rho: f64) -> CorrelatedPairLaw {
        CorrelatedPairLaw::new(BiasedMeasure::uniform(n).unwrap(), rho).unwrap()
    }

    #[test]
    fn single_voter_closed_forms() {
        let law = uniform_law(1, 0.5);
        let s = discrete_stability_exact(&VotingFunction::Plurality, &law).unwrap();
        assert!((s.value - 2.0 / 3.0).abs() < 1e-15);
        let s0 = discrete_stability_exact(&VotingFunction::Plurality, &uniform_law(1, 0.0)).unwrap();
        assert!((s0.value - 1.0 / 3.0).abs() < 1e-15);
        let inf = influence(&VotingFunction::Plurality, law.base(), 0, InfluenceMethod::Exact).unwrap();
        assert!((inf.value - 2.0 / 3.0).abs() < 1e-15);
        let m = BiasedMeasure::new(1, 0.1, 0.05).unwrap();
        let fr = label_frequencies_exact(&VotingFunction::Plurality, &m).unwrap();
        for a in 0..3 {
            assert!((fr.values[a] - m.q()[a]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_paths_are_limited() {
        let law = uniform_law(9, 0.5);
        assert!(discrete_stability_exact(&VotingFunction::Plurality, &law).is_err());
        assert!(influence(&VotingFunction::Plurality, law.base(), 9, InfluenceMethod::Exact).is_err());
    }

    #[test]
    fn constant_function_has_no_influence() {
        let r = Rect { x0: -1e6, x1: 1e6, y0: -1e6, y1: 1e6, label: 1 };
        let f = build_competitor(RectangleSet::new(vec![r]).unwrap(), Fallback::Label(0)).unwrap();
        let m = BiasedMeasure::uniform(5).unwrap();
        assert_eq!(influence(&f, &m, 2, InfluenceMethod::Exact).unwrap().value, 0.0);
        let mc = InfluenceMethod::Mc { samples: 2_000, seed: RngStream::new(1, 0) };
        assert_eq!(influence(&f, &m, 2, mc).unwrap().value, 0.0);
    }

    #[test]
    fn monte_carlo_matches_enumeration() {
        let law = CorrelatedPairLaw::new(BiasedMeasure::new(6, 0.2, -0.1).unwrap(), 0.4).unwrap();
        let f = VotingFunction::Plurality;
        let exact = discrete_stability_exact(&f, &law).unwrap().value;
        let mc = discrete_stability(&f, &law, 200_000, RngStream::new(2, 0)).unwrap();
        assert!((mc.value - exact).abs() < 4.0 * mc.std_error);
    }

    #[test]
    fn localized_difference_matches_plain_comparison() {
        let law = uniform_law(30, 0.5);
        let r = Rect { x0: -0.3, x1: 0.4, y0: -0.2, y1: 0.5, label: 2 };
        let set = RectangleSet::new(vec![r]).unwrap();
        let g = build_competitor(set.clone(), Fallback::Plurality).unwrap();
        let f = VotingFunction::Plurality;
        let loc = compare_discrete_localized(&f, &g, &law, &set, 100_000, RngStream::new(3, 0)).unwrap();
        let plain = compare_discrete(&f, &g, &law, 400_000, RngStream::new(3, 1)).unwrap();
        let se = loc.std_error.hypot(plain.difference_se);
        assert!((loc.difference - plain.difference).abs() < 4.0 * se, "{loc:?} {plain:?}");
        assert!(loc.region_mass > 0.0);
        // A region missing part of where the functions differ is rejected.
        let tiny = RectangleSet::new(vec![Rect { x0: -0.3, x1: 0.05, y0: -0.2, y1: 0.5, label: 2 }]).unwrap();
        assert!(compare_discrete_localized(&f, &g, &law, &tiny, 100_000, RngStream::new(3, 0)).is_err());
    }
}
