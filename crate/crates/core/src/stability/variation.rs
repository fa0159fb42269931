use crate::error::{domain, Result};
use crate::gaussian::phi;
use crate::gaussian::quadrature::adaptive_gk;
use crate::ou::{line_difference, LineRestriction};
use crate::partition::{BumpPatch, FlatPartition, PatchGeometry};

/// Tolerance on `|∫φ₁γ − ∫φ₂γ|` along the facet.
const MATCH_TOL: f64 = 1e-8;

/// Derivative of `S_ρ` along the normal field `(φ₁ − φ₂)N` supported on the
/// facet of `lr`:
///
/// `2 ∫ h(t)·(φ₁ − φ₂)(t)·γ(cN + tw)·‖w‖ dt` with `h = T_ρ(1_{A_i} − 1_{A_j})`.
///
/// `phi1` pushes cell `i` outward (sign `+1`) and `phi2` pulls it back
/// (sign `−1`). Their heights are the bump amplitudes.
pub fn first_variation(
    p: &FlatPartition,
    lr: &LineRestriction,
    phi1: &BumpPatch,
    phi2: &BumpPatch,
    rho: f64,
) -> Result<f64> {
    if phi1 == phi2 {
        return Ok(0.0);
    }
    for ph in [phi1, phi2] {
        ph.validate()?;
        if ph.facet != lr.pair {
            return Err(domain("patch does not lie on the given facet"));
        }
    }
    if phi1.sign != 1 || phi2.sign != -1 {
        return Err(domain("phi1 must push outward and phi2 inward"));
    }
    if (phi1.center_t - phi2.center_t).abs() < phi1.half_width + phi2.half_width {
        return Err(domain("patch supports overlap"));
    }
    let g1 = PatchGeometry::new(*phi1, lr);
    let g2 = PatchGeometry::new(*phi2, lr);
    let m1 = phi1.height * g1.linear_mass();
    let m2 = phi2.height * g2.linear_mass();
    if (m1 - m2).abs() > MATCH_TOL * m1.max(m2).max(1.0) {
        return Err(domain(format!("patch volumes differ: {m1} vs {m2}")));
    }
    let wn = lr.w_norm();
    let gamma_c = phi(lr.c);
    let side = |ph: &BumpPatch| -> Result<f64> {
        let mut err = None;
        let f = |u: f64| {
            let t = ph.center_t + ph.half_width * u;
            match line_difference(p, lr, rho, t) {
                Ok(h) => h * ph.height * ph.profile.eval(u) * phi(t * wn) * wn * ph.half_width,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        };
        let v = adaptive_gk(f, &[-1.0, 0.0, 1.0], 1e-16, 1e-10, 200).value;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    let i1 = side(phi1)?;
    let i2 = side(phi2)?;
    Ok(2.0 * gamma_c * (i1 - i2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_standard_simplex, Profile, StandardSimplexSpec};

    fn patch(facet: (usize, usize), t: f64, height: f64, sign: i8) -> BumpPatch {
        BumpPatch { facet, center_t: t, half_width: 0.25, height, sign, profile: Profile::SmoothBump }
    }

    fn matched(p: &FlatPartition, lr: &LineRestriction, t1: f64, t2: f64) -> (BumpPatch, BumpPatch) {
        let a = patch(lr.pair, t1, 1.0, 1);
        let b = patch(lr.pair, t2, 1.0, -1);
        let _ = p;
        let h2 = PatchGeometry::new(a, lr).linear_mass() / PatchGeometry::new(b, lr).linear_mass();
        (a, patch(lr.pair, t2, h2, -1))
    }

    #[test]
    fn identical_patches_give_zero() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.3, 0.0] }).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        let a = patch((0, 1), 2.0, 1.0, 1);
        assert_eq!(first_variation(&p, &lr, &a, &a, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn centered_facet_annihilates_matched_bumps() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.0, 0.0] }).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        let (a, b) = matched(&p, &lr, 1.5, 4.0);
        assert!(first_variation(&p, &lr, &a, &b, 0.5).unwrap().abs() <= 1e-6);
    }

    #[test]
    fn rejects_overlap_and_mismatch() {
        let p = make_standard_simplex(&StandardSimplexSpec { n: 2, shift: vec![0.3, 0.0] }).unwrap();
        let lr = p.line_restriction(0, 1).unwrap();
        let (a, b) = matched(&p, &lr, 1.5, 1.7);
        assert!(first_variation(&p, &lr, &a, &b, 0.5).is_err());
        let a = patch((0, 1), 1.5, 1.0, 1);
        let b = patch((0, 1), 3.0, 1.0, -1);
        assert!(first_variation(&p, &lr, &a, &b, 0.5).is_err());
    }
}
