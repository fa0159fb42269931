//! Bivariate normal CDF by the Drezner–Wesolowsky method with Genz's
//! double-precision refinements for |ρ| close to one.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::cdf::norm_cdf;
use super::quadrature::gauss_legendre;
use crate::error::{domain, Result};

/// Lower halves of the 6-, 12- and 20-point Gauss–Legendre rules as
/// `(weight, node)` pairs with negative nodes.
fn half_rules() -> &'static [Vec<(f64, f64)>; 3] {
    static RULES: OnceLock<[Vec<(f64, f64)>; 3]> = OnceLock::new();
    RULES.get_or_init(|| {
        let half = |n: usize| {
            let (x, w) = gauss_legendre(n);
            (0..n / 2).map(|i| (w[i], x[i])).collect::<Vec<_>>()
        };
        [half(6), half(12), half(20)]
    })
}

/// `P(X > dh, Y > dk)` for a standard bivariate normal with correlation `r`.
fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    let rules = half_rules();
    let quad = if r.abs() < 0.3 {
        &rules[0]
    } else if r.abs() < 0.75 {
        &rules[1]
    } else {
        &rules[2]
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let sn = (0.5 * asr * (is * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (4.0 * PI);
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * (2.0 * PI).sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in quad {
            for is in [-1.0, 1.0] {
                let xs_ = a * (is * x + 1.0);
                let xs = xs_ * xs_;
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        // Here k has been negated: P(X > h, Y > k) = P(X > h) − P(X > h, −Y > −k).
        let mut out = -bvn;
        if k > h {
            if h < 0.0 {
                out += norm_cdf(k) - norm_cdf(h);
            } else {
                out += norm_cdf(-h) - norm_cdf(-k);
            }
        }
        out.max(0.0)
    }
}

/// `Φ₂(h, k; ρ) = P(X ≤ h, Y ≤ k)` without argument validation. Infinite
/// limits are handled by marginalization.
pub fn bvn_lower(h: f64, k: f64, rho: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return norm_cdf(k);
    }
    if k == f64::INFINITY {
        return norm_cdf(h);
    }
    bvnd(-h, -k, rho).clamp(0.0, 1.0)
}

/// `P(X ≤ h, Y ≤ k)` for a standard bivariate normal pair with correlation
/// `rho`. Infinite limits are accepted; NaN and `|rho| ≥ 1` are rejected.
pub fn bivariate_normal_cdf(h: f64, k: f64, rho: f64) -> Result<f64> {
    if h.is_nan() || k.is_nan() || rho.is_nan() {
        return Err(domain("bivariate normal cdf arguments must not be NaN"));
    }
    if rho.abs() >= 1.0 {
        return Err(domain(format!("correlation must lie in (-1,1), got {rho}")));
    }
    Ok(bvn_lower(h, k, rho))
}

/// Probability of the rectangle `(a1, b1] × (a2, b2]`.
pub fn bvn_rectangle(a1: f64, b1: f64, a2: f64, b2: f64, rho: f64) -> f64 {
    if b1 <= a1 || b2 <= a2 {
        return 0.0;
    }
    let v = bvn_lower(b1, b2, rho) - bvn_lower(a1, b2, rho) - bvn_lower(b1, a2, rho)
        + bvn_lower(a1, a2, rho);
    v.max(0.0)
}
