//! Rankine-Hugoniot shocks of the Euler system with `p = (2/3) rho theta`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::euler::{eigenvalues, Family};
use crate::error::{Result, VpbError};
use crate::maxwellian_projection::FluidState;

/// `(γ + 1) / (γ - 1)` for the monatomic gas.
const BETA: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockData {
    pub family: Family,
    pub left: FluidState,
    pub right: FluidState,
    pub speed: f64,
    /// `|Δrho| + |Δm| + |ΔE|`.
    pub strength: f64,
}

/// Euler flux of the conserved variables `(rho, m, E)`.
pub fn euler_flux(u: &[f64; 3]) -> [f64; 3] {
    let (rho, m, e) = (u[0], u[1], u[2]);
    let p = 2.0 / 3.0 * (e - 0.5 * m * m / rho);
    [m, m * m / rho + p, (e + p) * m / rho]
}

/// `s (U_R - U_L) - (F(U_R) - F(U_L))`.
pub fn rh_residual(left: &FluidState, right: &FluidState, s: f64) -> [f64; 3] {
    let (ul, ur) = (left.conserved_1d(), right.conserved_1d());
    let (fl, fr) = (euler_flux(&ul), euler_flux(&ur));
    [0, 1, 2].map(|k| s * (ur[k] - ul[k]) - (fr[k] - fl[k]))
}

pub fn jump_strength(left: &FluidState, right: &FluidState) -> f64 {
    let (a, b) = (left.conserved_1d(), right.conserved_1d());
    (0..3).map(|k| (a[k] - b[k]).abs()).sum()
}

/// Point on the `family` Hugoniot locus through `left` with density ratio `r`.
fn locus_point(left: &FluidState, family: Family, r: f64) -> Result<(FluidState, f64)> {
    let z = (BETA * r - 1.0) / (BETA - r);
    if !(z > 0.0) {
        return Err(VpbError::Inadmissible(format!("density ratio {r} outside the Hugoniot locus")));
    }
    let pl = left.pressure();
    let rho_r = r * left.rho;
    let pr = z * pl;
    if r == 1.0 {
        return Ok((*left, eigenvalues(left)[family.index()]));
    }
    let j2 = (pr - pl) / (1.0 / left.rho - 1.0 / rho_r);
    let j = match family {
        Family::One => j2.sqrt(),
        Family::Three => -j2.sqrt(),
    };
    let s = left.u[0] - j / left.rho;
    let ur = s + j / rho_r;
    let right = FluidState::new_1d(rho_r, ur, 1.5 * pr / rho_r)?;
    Ok((right, s))
}

/// Verifies the strict Lax inequalities for a computed shock.
pub fn check_lax(shock: &ShockData) -> Result<()> {
    let k = shock.family.index();
    let ll = eigenvalues(&shock.left)[k];
    let lr = eigenvalues(&shock.right)[k];
    if lr < shock.speed && shock.speed < ll {
        Ok(())
    } else {
        Err(VpbError::Inadmissible(format!(
            "Lax condition violated for the {:?} shock: need λ(right) = {lr} < s = {} < λ(left) = {ll}",
            shock.family, shock.speed
        )))
    }
}

/// Shock of the given family and strength `|Δrho| + |Δm| + |ΔE|` issuing from `left`.
///
/// The density ratio is found by bisection on the closed-form Hugoniot locus,
/// then `(u_R, theta_R, s)` are polished by Newton on the three jump residuals.
pub fn hugoniot_connect(left: &FluidState, family: Family, strength: f64) -> Result<ShockData> {
    let left = FluidState::new_1d(left.rho, left.u[0], left.theta)?;
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(VpbError::Config(format!("shock strength must be >= 0, got {strength}")));
    }
    if strength == 0.0 {
        return Ok(ShockData {
            family,
            left,
            right: left,
            speed: eigenvalues(&left)[family.index()],
            strength: 0.0,
        });
    }
    // Compressive branch: density rises across a 1-shock and falls across a 3-shock.
    let (r_min, r_max) = match family {
        Family::One => (1.0, BETA),
        Family::Three => (1.0 / BETA, 1.0),
    };
    let measure = |r: f64| -> Result<f64> {
        let (right, _) = locus_point(&left, family, r)?;
        Ok(jump_strength(&left, &right))
    };
    let (mut near, mut far) = match family {
        Family::One => (1.0, 1.0 + 0.5 * (r_max - 1.0)),
        Family::Three => (1.0, 1.0 - 0.5 * (1.0 - r_min)),
    };
    if measure(far)? < strength {
        return Err(VpbError::Inadmissible(format!(
            "shock strength {strength} exceeds the admissible range for this left state"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (near + far);
        if measure(mid)? < strength {
            near = mid;
        } else {
            far = mid;
        }
        if (far - near).abs() < 1e-16 {
            break;
        }
    }
    let (mut right, mut s) = locus_point(&left, family, 0.5 * (near + far))?;

    // Newton polish on (u_R, theta_R, s) at fixed rho_R.
    for _ in 0..20 {
        let res = Vector3::from(rh_residual(&left, &right, s));
        if res.amax() < 1e-15 {
            break;
        }
        let x = Vector3::new(right.u[0], right.theta, s);
        let mut jac = Matrix3::zeros();
        for c in 0..3 {
            let h = 1e-7 * x[c].abs().max(1.0);
            let mut xp = x;
            xp[c] += h;
            let mut xm = x;
            xm[c] -= h;
            let rp = Vector3::from(rh_residual(&left, &FluidState::new_1d(right.rho, xp[0], xp[1])?, xp[2]));
            let rm = Vector3::from(rh_residual(&left, &FluidState::new_1d(right.rho, xm[0], xm[1])?, xm[2]));
            jac.set_column(c, &((rp - rm) / (2.0 * h)));
        }
        // One equation is redundant at fixed rho_R; least squares via SVD handles it.
        let step = jac.svd(true, true).solve(&(-res), 1e-14).map_err(|e| VpbError::Construction(e.into()))?;
        let xn = x + step;
        let trial = FluidState::new_1d(right.rho, xn[0], xn[1])?;
        if Vector3::from(rh_residual(&left, &trial, xn[2])).amax() >= res.amax() {
            break;
        }
        right = trial;
        s = xn[2];
    }
    let shock = ShockData {
        family,
        left,
        right,
        speed: s,
        strength: jump_strength(&left, &right),
    };
    check_lax(&shock)?;
    Ok(shock)
}

/// Left state of a `family` shock whose right state is `right`, found by
/// matching the strength on the reversed locus.
pub fn hugoniot_connect_from_right(right: &FluidState, family: Family, strength: f64) -> Result<ShockData> {
    // A shock from L to R seen in the mirror x -> -x is a shock of the other family from R' to L'.
    let mirror = |s: &FluidState| FluidState::new_1d(s.rho, -s.u[0], s.theta);
    let other = match family {
        Family::One => Family::Three,
        Family::Three => Family::One,
    };
    let m = hugoniot_connect(&mirror(right)?, other, strength)?;
    let shock = ShockData {
        family,
        left: mirror(&m.right)?,
        right: *right,
        speed: -m.speed,
        strength: m.strength,
    };
    check_lax(&shock)?;
    Ok(shock)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_is_degenerate() {
        let l = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let s = hugoniot_connect(&l, Family::Three, 0.0).unwrap();
        assert_eq!(s.right, l);
        assert_eq!(s.speed, eigenvalues(&l)[2]);
    }

    #[test]
    fn three_shock_residual_and_lax() {
        let l = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let s = hugoniot_connect(&l, Family::Three, 0.2).unwrap();
        assert!(rh_residual(&s.left, &s.right, s.speed).iter().all(|r| r.abs() <= 1e-10));
        assert!((s.strength - 0.2).abs() < 1e-10);
        check_lax(&s).unwrap();
    }

    #[test]
    fn one_shock_residual_and_lax() {
        let l = FluidState::new_1d(1.0, 0.3, 1.0).unwrap();
        let s = hugoniot_connect(&l, Family::One, 0.1).unwrap();
        assert!(rh_residual(&s.left, &s.right, s.speed).iter().all(|r| r.abs() <= 1e-10));
        assert!(s.right.rho > s.left.rho);
    }

    #[test]
    fn mirrored_construction() {
        let r = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let s = hugoniot_connect_from_right(&r, Family::One, 0.15).unwrap();
        assert!(rh_residual(&s.left, &s.right, s.speed).iter().all(|x| x.abs() <= 1e-10));
        assert!((s.strength - 0.15).abs() < 1e-10);
    }

    #[test]
    fn lax_violation_detected() {
        let l = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let mut s = hugoniot_connect(&l, Family::Three, 0.1).unwrap();
        s.speed = eigenvalues(&s.left)[2] + 0.5;
        assert!(check_lax(&s).is_err());
    }
}
