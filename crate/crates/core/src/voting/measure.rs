//! Biased vote distributions and correlated vote pairs.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Number of candidates.
pub const CANDIDATES: usize = 3;

/// Vote counts `(N₁, N₂, N₃)`.
pub type Counts = [u64; CANDIDATES];

/// `Q̃ = (1/3 + α/√n, 1/3 + β/√n, 1/3 − (α+β)/√n)` on `n` voters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub struct BiasedMeasure {
    n: u64,
    alpha: f64,
    beta: f64,
    q: [f64; CANDIDATES],
}

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    n: u64,
    alpha: f64,
    beta: f64,
}

impl TryFrom<MeasureDoc> for BiasedMeasure {
    type Error = crate::Error;
    fn try_from(d: MeasureDoc) -> Result<Self> {
        BiasedMeasure::new(d.n, d.alpha, d.beta)
    }
}

impl From<BiasedMeasure> for MeasureDoc {
    fn from(m: BiasedMeasure) -> Self {
        MeasureDoc { n: m.n, alpha: m.alpha, beta: m.beta }
    }
}

impl BiasedMeasure {
    pub fn new(n: u64, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("need at least one voter"));
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(domain("bias parameters must be finite"));
        }
        let s = (n as f64).sqrt();
        let q1 = 1.0 / 3.0 + alpha / s;
        let q2 = 1.0 / 3.0 + beta / s;
        let q3 = 1.0 - q1 - q2;
        for q in [q1, q2, q3] {
            if !(q > 0.0 && q < 1.0) {
                return Err(domain(format!("bias ({alpha}, {beta}) leaves the simplex at n = {n}")));
            }
        }
        Ok(Self { n, alpha, beta, q: [q1, q2, q3] })
    }

    pub fn uniform(n: u64) -> Result<Self> {
        Self::new(n, 0.0, 0.0)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> [f64; CANDIDATES] {
        self.q
    }

    /// The same bias on a different number of voters.
    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(n, self.alpha, self.beta)
    }

    /// Asymptotic mean `(α, β)` of the first two count statistics.
    pub fn limit_mean(&self) -> [f64; 2] {
        [self.alpha, self.beta]
    }

    /// Counts of `m` independent votes.
    pub fn sample_counts<R: Rng + ?Sized>(&self, m: u64, rng: &mut R) -> Counts {
        multinomial(m, &self.q, rng)
    }

    pub fn sample_vote<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        if u < self.q[0] {
            0
        } else if u < self.q[0] + self.q[1] {
            1
        } else {
            2
        }
    }
}

/// Multinomial draw by sequential conditional binomials.
pub(crate) fn multinomial<R: Rng + ?Sized, const K: usize>(m: u64, p: &[f64; K], rng: &mut R) -> [u64; K] {
    let mut out = [0u64; K];
    let mut left = m;
    let mut mass = 1.0;
    for k in 0..K - 1 {
        if left == 0 {
            break;
        }
        let pk = (p[k] / mass).clamp(0.0, 1.0);
        let c = if pk >= 1.0 {
            left
        } else {
            Binomial::new(left, pk).expect("valid binomial").sample(rng)
        };
        out[k] = c;
        left -= c;
        mass -= p[k];
    }
    out[K - 1] += left;
    out
}

/// `P̃(x, y) = ρ·1[x=y]·Q̃(x) + (1−ρ)·Q̃(x)Q̃(y)`, applied independently to
/// every voter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawDoc", into = "LawDoc")]
pub struct CorrelatedPairLaw {
    base: BiasedMeasure,
    rho: f64,
    table: [[f64; CANDIDATES]; CANDIDATES],
}

#[derive(Serialize, Deserialize)]
struct LawDoc {
    base: BiasedMeasure,
    rho: f64,
}

impl TryFrom<LawDoc> for CorrelatedPairLaw {
    type Error = crate::Error;
    fn try_from(d: LawDoc) -> Result<Self> {
        CorrelatedPairLaw::new(d.base, d.rho)
    }
}

impl From<CorrelatedPairLaw> for LawDoc {
    fn from(l: CorrelatedPairLaw) -> Self {
        LawDoc { base: l.base, rho: l.rho }
    }
}

impl CorrelatedPairLaw {
    /// `rho` must lie in `[0, 1)`; zero gives independent pairs.
    pub fn new(base: BiasedMeasure, rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(domain("pair correlation must lie in [0, 1)"));
        }
        let q = base.q;
        let mut table = [[0.0; CANDIDATES]; CANDIDATES];
        for (x, row) in table.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                let same = if x == y { rho * q[x] } else { 0.0 };
                // Ordered product so the table is exactly symmetric.
                *cell = same + (1.0 - rho) * (q[x.min(y)] * q[x.max(y)]);
            }
        }
        Ok(Self { base, rho, table })
    }

    pub fn base(&self) -> &BiasedMeasure {
        &self.base
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> u64 {
        self.base.n
    }

    /// Probability of the vote pair `(x, y)`, 0-based.
    pub fn pair(&self, x: usize, y: usize) -> f64 {
        self.table[x][y]
    }

    pub fn table(&self) -> &[[f64; CANDIDATES]; CANDIDATES] {
        &self.table
    }

    /// Counts of both words of a correlated pair, via the nine pair types.
    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R) -> (Counts, Counts) {
        let flat: [f64; 9] = std::array::from_fn(|k| self.table[k / 3][k % 3]);
        let pairs = multinomial(self.base.n, &flat, rng);
        let mut x = [0u64; CANDIDATES];
        let mut y = [0u64; CANDIDATES];
        for (k, &c) in pairs.iter().enumerate() {
            x[k / 3] += c;
            y[k % 3] += c;
        }
        (x, y)
    }

    /// Counts of the second word given those of the first: each vote is
    /// kept with probability `ρ` and otherwise redrawn from `Q̃`.
    pub fn sample_partner<R: Rng + ?Sized>(&self, x: &Counts, rng: &mut R) -> Counts {
        let mut y = [0u64; CANDIDATES];
        let mut redraw = 0;
        for a in 0..CANDIDATES {
            let kept = if x[a] == 0 || self.rho == 0.0 {
                0
            } else {
                Binomial::new(x[a], self.rho).expect("valid binomial").sample(rng)
            };
            y[a] += kept;
            redraw += x[a] - kept;
        }
        let fresh = self.base.sample_counts(redraw, rng);
        for a in 0..CANDIDATES {
            y[a] += fresh[a];
        }
        y
    }

    /// One correlated pair of words over `{1, 2, 3}`.
    pub fn sample_words<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<u8>, Vec<u8>) {
        let n = self.base.n as usize;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let a = self.base.sample_vote(rng);
            let b = if rng.gen::<f64>() < self.rho { a } else { self.base.sample_vote(rng) };
            x.push(a as u8 + 1);
            y.push(b as u8 + 1);
        }
        (x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn measure_sums_to_one_and_validates() {
        let m = BiasedMeasure::new(10_000, 1.0, 0.0).unwrap();
        assert!((m.q().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((m.q()[0] - (1.0 / 3.0 + 0.01)).abs() < 1e-15);
        assert!(BiasedMeasure::new(4, 1.0, 0.0).is_err());
        assert!(BiasedMeasure::new(0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pair_table_is_symmetric_with_correct_marginals() {
        let m = BiasedMeasure::new(100, 0.7, -1.1).unwrap();
        let law = CorrelatedPairLaw::new(m, 0.4).unwrap();
        let mut total = 0.0;
        for x in 0..3 {
            let row: f64 = (0..3).map(|y| law.pair(x, y)).sum();
            assert!((row - m.q()[x]).abs() < 1e-14);
            for y in 0..3 {
                assert!((law.pair(x, y) - law.pair(y, x)).abs() < 1e-14);
                total += law.pair(x, y);
            }
        }
        assert!((total - 1.0).abs() < 1e-14);
        assert!(CorrelatedPairLaw::new(m, 1.0).is_err());
    }

    #[test]
    fn multinomial_conserves_counts() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let law = CorrelatedPairLaw::new(BiasedMeasure::uniform(57).unwrap(), 0.3).unwrap();
        for _ in 0..100 {
            let (x, y) = law.sample_counts(&mut r);
            assert_eq!(x.iter().sum::<u64>(), 57);
            assert_eq!(y.iter().sum::<u64>(), 57);
            let z = law.sample_partner(&x, &mut r);
            assert_eq!(z.iter().sum::<u64>(), 57);
        }
    }
}
