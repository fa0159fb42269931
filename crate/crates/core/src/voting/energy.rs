//! Energy-distance test of a planar sample against the standard Gaussian.
//!
//! The statistic is `N·E_N` with
//! `E_N = (2/N)Σ_i E|z_i − Z| − (1/N²)Σ_{i,j}|z_i − z_j| − E|Z − Z'|`.
//! Under the null it converges to a weighted sum of `χ²₁` variables with
//! mean `E|Z − Z'| = √π` and variance `2E[h(X,Y)²]`, where `h` is the
//! degenerate kernel. The critical value comes from a scaled `χ²` with the
//! same two moments, evaluated through the Wilson–Hilferty approximation.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::{norm_ppf, RngStream};
use crate::geom::V2;

/// Pairs used to estimate the kernel's second moment.
const KERNEL_PAIRS: usize = 200_000;

/// Scaled Bessel `e^{−x}I_k(x)` by the trapezoid rule on its periodic
/// integral representation.
fn bessel_ie(k: u32, x: f64) -> f64 {
    let m = 64usize.max((16.0 * x.sqrt()).ceil() as usize);
    let h = std::f64::consts::PI / m as f64;
    let mut s = 0.0;
    for j in 0..=m {
        let th = j as f64 * h;
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        s += w * (x * (th.cos() - 1.0)).exp() * (k as f64 * th).cos();
    }
    s * h / std::f64::consts::PI
}

/// `E|z − Z|` for `Z` standard Gaussian in the plane, a Rice mean.
pub fn mean_distance(z: V2) -> f64 {
    let nu2 = z[0] * z[0] + z[1] * z[1];
    if nu2 > 1600.0 {
        // Far from the origin the mean is √(ν² + 1) to within ν^{-3}.
        return (nu2 + 1.0).sqrt();
    }
    let x = nu2 / 4.0;
    (std::f64::consts::PI / 2.0).sqrt() * ((1.0 + nu2 / 2.0) * bessel_ie(0, x) + nu2 / 2.0 * bessel_ie(1, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTest {
    pub statistic: f64,
    pub critical_value: f64,
    pub level: f64,
    pub samples: usize,
    pub passes: bool,
}

#[inline]
fn dist(a: V2, b: V2) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Critical value of the null limit at `level`.
pub fn energy_critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(domain("level must lie in (0, 1)"));
    }
    let mean = std::f64::consts::PI.sqrt();
    let mut rng = RngStream::new(0x5eed_e4e7, 0).rng();
    let mut h2 = 0.0;
    for _ in 0..KERNEL_PAIRS {
        let x: V2 = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
        let y: V2 = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
        let h = mean_distance(x) + mean_distance(y) - mean - dist(x, y);
        h2 += h * h;
    }
    h2 /= KERNEL_PAIRS as f64;
    // g·χ²_d with g·d = mean and 2g²d = 2·h2.
    let g = h2 / mean;
    let d = mean / g;
    let z = norm_ppf(1.0 - level)?;
    let c = 2.0 / (9.0 * d);
    Ok(g * d * (1.0 - c + z * c.sqrt()).powi(3))
}

/// Tests whether `sample` looks standard Gaussian at `level`.
pub fn energy_normality(sample: &[V2], level: f64) -> Result<EnergyTest> {
    let n = sample.len();
    if n < 2 {
        return Err(domain("need at least two points"));
    }
    let nf = n as f64;
    let one: f64 = sample.par_iter().map(|&z| mean_distance(z)).sum();
    let pair: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = sample[i];
            let mut acc = [0.0f64; 4];
            let rest = &sample[i + 1..];
            let mut chunks = rest.chunks_exact(4);
            for c in &mut chunks {
                for k in 0..4 {
                    acc[k] += dist(a, c[k]);
                }
            }
            acc.iter().sum::<f64>() + chunks.remainder().iter().map(|&b| dist(a, b)).sum::<f64>()
        })
        .sum();
    let e = 2.0 * one / nf - 2.0 * pair / (nf * nf) - std::f64::consts::PI.sqrt();
    let statistic = nf * e;
    let critical_value = energy_critical_value(level)?;
    Ok(EnergyTest { statistic, critical_value, level, samples: n, passes: statistic <= critical_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rice_mean_matches_known_values() {
        assert!((mean_distance([0.0, 0.0]) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
        let mut rng = RngStream::new(1, 0).rng();
        let z = [1.3, -0.4];
        let m: f64 = (0..400_000)
            .map(|_| {
                let x: V2 = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
                dist(z, x)
            })
            .sum::<f64>()
            / 400_000.0;
        assert!((mean_distance(z) - m).abs() < 4e-3);
        assert!((mean_distance([30.0, 0.0]) - (901f64).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn detects_a_shift_and_accepts_gaussian_data() {
        let mut rng = RngStream::new(2, 0).rng();
        let good: Vec<V2> = (0..3000).map(|_| [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)]).collect();
        let t = energy_normality(&good, 1e-3).unwrap();
        assert!(t.passes, "{t:?}");
        let bad: Vec<V2> = good.iter().map(|z| [z[0] + 0.2, z[1]]).collect();
        assert!(!energy_normality(&bad, 1e-3).unwrap().passes);
    }
}
