//! The correlated Gaussian pair `(X, Y)` with `E[X_i Y_j] = ρ·1{i=j}`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedGaussianModel {
    n: usize,
    rho: f64,
}

impl CorrelatedGaussianModel {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(domain(format!("correlation must lie in (-1,1), got {rho}")));
        }
        Ok(Self { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `√(1 − ρ²)`, the scale of the fresh noise in `Y`.
    pub fn sigma(&self) -> f64 {
        ((1.0 - self.rho) * (1.0 + self.rho)).sqrt()
    }

    /// Fills `x` and `y` with one correlated pair.
    #[inline]
    pub fn fill_pair<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [f64], y: &mut [f64]) {
        let s = self.sigma();
        for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
            let a: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            *xi = a;
            *yi = self.rho * a + s * z;
        }
    }
}

/// Draws one pair `(X, Y)` from the start of the given stream.
pub fn sample_correlated_pair(model: &CorrelatedGaussianModel, rng: RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; model.n];
    let mut y = vec![0.0; model.n];
    model.fill_pair(&mut rng.rng(), &mut x, &mut y);
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(rho: f64, samples: usize) -> (f64, f64, f64) {
        let m = CorrelatedGaussianModel::new(2, rho).unwrap();
        let mut rng = RngStream::new(11, 0).rng();
        let (mut sxy, mut syy, mut sy) = (0.0, 0.0, 0.0);
        let mut x = [0.0; 2];
        let mut y = [0.0; 2];
        for _ in 0..samples {
            m.fill_pair(&mut rng, &mut x, &mut y);
            sxy += x[0] * y[0];
            syy += y[0] * y[0];
            sy += y[0];
        }
        let n = samples as f64;
        (sxy / n, syy / n, sy / n)
    }

    #[test]
    fn validation() {
        assert!(CorrelatedGaussianModel::new(0, 0.5).is_err());
        assert!(CorrelatedGaussianModel::new(2, 1.0).is_err());
        assert!(CorrelatedGaussianModel::new(2, f64::NAN).is_err());
        assert!(CorrelatedGaussianModel::new(2, 0.0).is_ok());
    }

    #[test]
    fn cross_moment_matches_rho() {
        let samples = 200_000;
        for &rho in &[0.0, 0.5, 0.999] {
            let (sxy, syy, sy) = moments(rho, samples);
            // Var(X·Y) = 1 + ρ² for a standard correlated pair.
            let se = ((1.0 + rho * rho) / samples as f64).sqrt();
            assert!((sxy - rho).abs() < 4.0 * se, "rho={rho} got {sxy}");
            assert!((syy - 1.0).abs() < 4.0 * (2.0 / samples as f64).sqrt());
            assert!(sy.abs() < 4.0 / (samples as f64).sqrt());
        }
    }

    #[test]
    fn single_pair_replays() {
        let m = CorrelatedGaussianModel::new(3, 0.3).unwrap();
        let a = sample_correlated_pair(&m, RngStream::new(5, 1));
        let b = sample_correlated_pair(&m, RngStream::new(5, 1));
        assert_eq!(a, b);
        assert_eq!(a.0.len(), 3);
    }
}
