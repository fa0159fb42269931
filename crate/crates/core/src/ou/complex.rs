//! Holomorphic extension of `t ↦ T_ρ 1_A(cN + tw)` to complex `t`.
//!
//! Split the standardized variable as `ζ = s·u_0 + r·u_0^⊥` where `u_0` is the
//! constraint normal orthogonal to `w`. Its offset does not move with `t`, so
//! it only bounds `s`. The remaining constraint bounds `r` by an affine
//! function `a(s) + c′t` and the inner integral is `Φ(a(s) + c′t)` (or its
//! complement). `Φ` is entire and is evaluated at complex arguments along
//! the two-leg path `0 → Re`, then `Re → Re + i·Im`.

use num_complex::Complex64;

use super::cone::{ConeCell2D, TRUNCATION};
use super::line::LineRestriction;
use crate::error::{domain, unsupported, Error, Result};
use crate::gaussian::quadrature::Legendre;
use crate::gaussian::{norm_cdf, phi, CorrelatedGaussianModel};
use crate::geom::{dot2, norm2, perp, to_v2, V2};

/// Largest `|Im t|` for which the evaluation has been validated.
pub const MAX_IMAG: f64 = 3.0;

const NODES: usize = 16;

/// `Φ(x + iy) = Φ(x) + i∫_0^y φ(x + iv) dv`, with
/// `φ(x + iv) = φ(x)·e^{v²/2}·e^{−ixv}`.
pub fn norm_cdf_complex(a: Complex64) -> Complex64 {
    let (x, y) = (a.re, a.im);
    let base = Complex64::new(norm_cdf(x), 0.0);
    if y == 0.0 {
        return base;
    }
    let rule = legendre();
    let panel = 0.5f64.min(1.0 / (x.abs() + 1.0));
    let (mut cos_part, mut sin_part) = (0.0, 0.0);
    let (lo, hi) = if y > 0.0 { (0.0, y) } else { (y, 0.0) };
    let panels = ((hi - lo) / panel).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a0 = lo + h * p as f64;
        for (v, w) in rule.points(a0, a0 + h) {
            let g = (0.5 * v * v).exp();
            cos_part += w * g * (x * v).cos();
            sin_part += w * g * (x * v).sin();
        }
    }
    if y < 0.0 {
        cos_part = -cos_part;
        sin_part = -sin_part;
    }
    // i·φ(x)·∫(cos − i sin) = φ(x)·(∫sin + i∫cos)
    base + phi(x) * Complex64::new(sin_part, cos_part)
}

fn legendre() -> &'static Legendre {
    static RULE: std::sync::OnceLock<Legendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| Legendre::new(NODES))
}

/// The prepared nested representation of one cell along one line.
#[derive(Debug, Clone)]
pub struct ComplexLineCell {
    s_lo: f64,
    s_hi: f64,
    /// Inner bound `a(s) = intercept + slope·s + coef·t`, if any.
    inner: Option<InnerBound>,
    c_prime: f64,
}

#[derive(Debug, Clone, Copy)]
struct InnerBound {
    intercept: f64,
    slope: f64,
    coef: f64,
    upper: bool,
}

impl ComplexLineCell {
    pub fn new(cell: &ConeCell2D, rho: f64, lr: &LineRestriction) -> Result<Self> {
        if lr.normal.len() != 2 {
            return Err(unsupported("complex evaluation is implemented for the plane"));
        }
        let m = CorrelatedGaussianModel::new(2, rho)?;
        let sigma = m.sigma();
        let n = to_v2(&lr.normal);
        let w = to_v2(&lr.w);
        let wn = norm2(w);
        let what: V2 = [w[0] / wn, w[1] / wn];
        let cons = cell.constraints();
        let u0 = cons
            .iter()
            .find(|h| dot2(h.u, what).abs() < 1e-9)
            .map(|h| h.u)
            .ok_or_else(|| unsupported("no constraint of the cell is parallel to the line"))?;
        let f = perp(u0);
        let mut s_lo = -TRUNCATION;
        let mut s_hi = TRUNCATION;
        let mut inner = None;
        for h in cons {
            // Offset after the affine change of variables, at t = 0, and its
            // rate of change in t.
            let b0 = (h.b - rho * lr.c * dot2(n, h.u)) / sigma;
            let bt = -rho * dot2(w, h.u) / sigma;
            let alpha = dot2(u0, h.u);
            let beta = dot2(f, h.u);
            if beta.abs() < 1e-9 {
                if bt.abs() > 1e-12 {
                    return Err(unsupported("s-bound depends on the line parameter"));
                }
                if alpha > 0.0 {
                    s_hi = s_hi.min(b0 / alpha);
                } else {
                    s_lo = s_lo.max(b0 / alpha);
                }
            } else {
                if inner.is_some() {
                    return Err(unsupported("at most one moving constraint is supported"));
                }
                inner = Some(InnerBound {
                    intercept: b0 / beta,
                    slope: -alpha / beta,
                    coef: bt / beta,
                    upper: beta > 0.0,
                });
            }
        }
        Ok(Self { s_lo, s_hi, inner, c_prime: rho.abs() * wn / sigma })
    }

    /// `c′ = |ρ|·‖w‖/√(1−ρ²)`, the rate at which the inner bound moves.
    pub fn c_prime(&self) -> f64 {
        self.c_prime
    }

    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(domain("line parameter must be finite"));
        }
        if t.im.abs() > MAX_IMAG {
            return Err(Error::Accuracy(format!(
                "|Im t| = {} exceeds the validated window {MAX_IMAG}",
                t.im.abs()
            )));
        }
        if self.s_hi <= self.s_lo {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let rule = legendre();
        let panels = ((self.s_hi - self.s_lo) / 0.5).ceil().max(1.0) as usize;
        let h = (self.s_hi - self.s_lo) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a0 = self.s_lo + h * p as f64;
            for (s, wq) in rule.points(a0, a0 + h) {
                let g = match self.inner {
                    None => Complex64::new(1.0, 0.0),
                    Some(b) => {
                        let a = Complex64::new(b.intercept + b.slope * s, 0.0) + b.coef * t;
                        if b.upper {
                            norm_cdf_complex(a)
                        } else {
                            norm_cdf_complex(-a)
                        }
                    }
                };
                acc += wq * phi(s) * g;
            }
        }
        Ok(acc)
    }
}

/// `T_ρ 1_A(cN + zw)` continued to complex `z`.
pub fn complex_line_eval(
    cell: &ConeCell2D,
    rho: f64,
    lr: &LineRestriction,
    z: Complex64,
) -> Result<Complex64> {
    ComplexLineCell::new(cell, rho, lr)?.eval(z)
}

/// Modulus bound `1 + c′|y|·exp(max(c′, c′²)·y²/2)` at `Im z = y`.
pub fn growth_bound(c_prime: f64, im: f64) -> f64 {
    1.0 + c_prime * im.abs() * (c_prime.max(c_prime * c_prime) * im * im / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou::t_rho_cone2d;
    use crate::partition::{make_standard_simplex, StandardSimplexSpec};

    #[test]
    fn complex_cdf_on_the_real_axis_and_symmetry() {
        let v = norm_cdf_complex(Complex64::new(0.3, 0.0));
        assert_eq!(v.re, norm_cdf(0.3));
        // Φ(z) + Φ(−z) = 1 holds for the entire extension too.
        let z = Complex64::new(0.4, 0.9);
        let s = norm_cdf_complex(z) + norm_cdf_complex(-z);
        assert!((s - 1.0).norm() < 1e-13);
        // Φ(conj z) = conj Φ(z).
        let a = norm_cdf_complex(z.conj());
        assert!((a - norm_cdf_complex(z).conj()).norm() < 1e-14);
    }

    #[test]
    fn complex_cdf_derivative_is_the_density() {
        let z = Complex64::new(-0.7, 1.3);
        let h = 1e-5;
        let d = (norm_cdf_complex(z + h) - norm_cdf_complex(z - h)) / (2.0 * h);
        let dens = (-(z * z) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((d - dens).norm() < 1e-8);
    }

    #[test]
    fn real_axis_agrees_with_the_cone_evaluator() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.2, -0.4] }).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        for cell_idx in [0, 1] {
            let cell = p.cell_cone(cell_idx).unwrap();
            for &t in &[-3.0, 0.0, 1.0, 2.5, 8.0] {
                let x = lr.point(t);
                let real = t_rho_cone2d(&cell, 0.5, [x[0], x[1]]).unwrap();
                let c = complex_line_eval(&cell, 0.5, &lr, Complex64::new(t, 0.0)).unwrap();
                assert!((c.re - real).abs() < 1e-8 && c.im == 0.0, "{} vs {real}", c.re);
            }
        }
    }

    #[test]
    fn window_is_enforced() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        let cell = p.cell_cone(0).unwrap();
        assert!(matches!(
            complex_line_eval(&cell, 0.5, &lr, Complex64::new(0.0, 3.5)),
            Err(Error::Accuracy(_))
        ));
        let third = p.cell_cone(2).unwrap();
        assert!(complex_line_eval(&third, 0.5, &lr, Complex64::new(0.0, 1.0)).is_err());
    }
}
