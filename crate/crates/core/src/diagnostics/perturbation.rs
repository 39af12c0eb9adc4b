//! Perturbations against the background, their anti-derivatives and the
//! characteristic variables `Z = L V` with `V = (Φ, Ψ̃1, W̃)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::phase_space::{RawMoments, SpaceGrid};
use crate::wave_patterns::{eigen_system, Background, WaveAnsatz};

/// Tolerance on `∫(φ, ψ, ω)` above which the anti-derivative cannot vanish at both ends.
pub const ZERO_MASS_TOLERANCE: f64 = 1e-8;

/// Cumulative integral with the symmetric gauge: faces start at `-Q/2`, cell values are face averages.
/// Returns the cell values and the total `Q`.
pub fn anti_derivative(f: &[f64], grid: &SpaceGrid) -> (Vec<f64>, f64) {
    let dx = grid.dx();
    let q: f64 = f.iter().sum::<f64>() * dx;
    if q.abs() > ZERO_MASS_TOLERANCE {
        log::warn!("anti-derivative of a field with total {q:e}; splitting the mismatch between both ends");
    }
    let mut p = -0.5 * q;
    let out = f
        .iter()
        .map(|v| {
            let lo = p;
            p += v * dx;
            0.5 * (lo + p)
        })
        .collect();
    (out, q)
}

/// Central difference with one-sided ends.
pub fn derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (f[1] - f[0]) / dx
            } else if i == n - 1 {
                (f[n - 1] - f[n - 2]) / dx
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * dx)
            }
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFields {
    /// Conserved perturbations `(φ, ψ, ω) = (ρ - ρ̃, m1 - m̃1, E - Ẽ)`.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub omega: Vec<f64>,
    /// Anti-derivatives `(Φ, Ψ, W)`.
    pub big_phi: Vec<f64>,
    pub big_psi: Vec<f64>,
    pub big_w: Vec<f64>,
    /// `Ψ̃ = (Ψ - ũ Φ)/ρ̃` and `W̃ = (W - ũ Ψ - (θ̃ - ũ²/2) Φ)/ρ̃`.
    pub psi_tilde: Vec<f64>,
    pub w_tilde: Vec<f64>,
    /// `(ψ̃, ω̃) = (Ψ̃_x, W̃_x)`.
    pub psi_tilde_x: Vec<f64>,
    pub w_tilde_x: Vec<f64>,
    /// `∫(φ, ψ, ω) dx`.
    pub totals: [f64; 3],
}

impl PerturbationFields {
    /// `max_i max(|φ|, |ψ|, |ω|)`.
    pub fn sup_norm(&self) -> f64 {
        self.phi
            .iter()
            .chain(&self.psi)
            .chain(&self.omega)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn perturbation_fields(moments: &[RawMoments], ansatz: &WaveAnsatz, grid: &SpaceGrid) -> PerturbationFields {
    let phi: Vec<f64> = moments.iter().zip(&ansatz.rho).map(|(m, r)| m.rho - r).collect();
    let psi: Vec<f64> = moments.iter().zip(&ansatz.m1).map(|(m, r)| m.momentum[0] - r).collect();
    let omega: Vec<f64> = moments.iter().zip(&ansatz.energy).map(|(m, r)| m.energy - r).collect();
    let (big_phi, q0) = anti_derivative(&phi, grid);
    let (big_psi, q1) = anti_derivative(&psi, grid);
    let (big_w, q2) = anti_derivative(&omega, grid);
    let n = phi.len();
    let mut psi_tilde = Vec::with_capacity(n);
    let mut w_tilde = Vec::with_capacity(n);
    for i in 0..n {
        let (r, u, th) = (ansatz.rho[i], ansatz.u1[i], ansatz.theta[i]);
        psi_tilde.push((big_psi[i] - u * big_phi[i]) / r);
        w_tilde.push((big_w[i] - u * big_psi[i] - (th - 0.5 * u * u) * big_phi[i]) / r);
    }
    let psi_tilde_x = derivative(&psi_tilde, grid.dx());
    let w_tilde_x = derivative(&w_tilde, grid.dx());
    PerturbationFields {
        phi,
        psi,
        omega,
        big_phi,
        big_psi,
        big_w,
        psi_tilde,
        w_tilde,
        psi_tilde_x,
        w_tilde_x,
        totals: [q0, q1, q2],
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicVars {
    pub z: Vec<[f64; 3]>,
    /// `ρ^{S1}/ρ#` and `ρ^{S3}/ρ#`; identically one without shocks.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Weight exponent `1/sqrt(δ0)`.
    pub n_power: f64,
    pub h: Vec<f64>,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    /// `max_i ‖R L V - V‖∞` over the cells.
    pub round_trip: f64,
}

/// Weighted scalars reported per snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    /// `∫ η1 Z_i² dx`.
    pub z_w: [f64; 3],
    /// `½ ∫ Z1² + α^N (Z2² + Z3²) dx`.
    pub z_alpha: f64,
    /// `½ ∫ β^{-N} (Z1² + Z2²) + Z3² dx`.
    pub z_beta: f64,
}

/// `h` and `η2 = ∫_{-∞}^x h` for the diffusion coefficient `a` and speed `u#`.
pub fn heat_weight(a: f64, u_hash: f64, x: f64, t: f64) -> (f64, f64) {
    let s = 16.0 * a * (1.0 + t);
    let y = x - u_hash * t;
    let h = (-y * y / s).exp() / (std::f64::consts::PI * s).sqrt();
    let eta2 = 0.5 * (1.0 + erf(y / s.sqrt()));
    (h, eta2)
}

pub fn characteristic_vars(p: &PerturbationFields, ansatz: &WaveAnsatz, background: &Background, grid: &SpaceGrid) -> crate::Result<CharacteristicVars> {
    let n = p.phi.len();
    let delta = background.strength();
    let n_power = if delta > 0.0 { 1.0 / delta.sqrt() } else { 0.0 };
    let mut out = CharacteristicVars {
        n_power,
        ..Default::default()
    };
    let t = ansatz.t;
    for i in 0..n {
        let es = eigen_system(&ansatz.state(i))?;
        let v = [p.big_phi[i], p.psi_tilde[i], p.w_tilde[i]];
        let mut z = [0.0; 3];
        for r in 0..3 {
            z[r] = (0..3).map(|c| es.left[(r, c)] * v[c]).sum();
        }
        let mut err = 0.0f64;
        for r in 0..3 {
            let back: f64 = (0..3).map(|c| es.right[(r, c)] * z[c]).sum();
            err = err.max((back - v[r]).abs());
        }
        out.round_trip = out.round_trip.max(err);
        out.z.push(z);
        let x = grid.x(i);
        let (a, b) = background.shock_weights(x, t).unwrap_or((1.0, 1.0));
        out.alpha.push(a);
        out.beta.push(b);
        let (h, e2) = match background.diffusion() {
            Some(d) => heat_weight(d.a, d.u_hash, x, t),
            None => (0.0, 0.0),
        };
        out.h.push(h);
        out.eta2.push(e2);
        out.eta1.push(e2.exp());
    }
    Ok(out)
}

impl CharacteristicVars {
    pub fn weighted_norms(&self, grid: &SpaceGrid) -> WeightedNorms {
        let dx = grid.dx();
        let np = self.n_power;
        let mut w = WeightedNorms::default();
        for (i, z) in self.z.iter().enumerate() {
            for k in 0..3 {
                w.z_w[k] += self.eta1[i] * z[k] * z[k] * dx;
            }
            let an = self.alpha[i].powf(np);
            let bn = self.beta[i].powf(-np);
            w.z_alpha += 0.5 * (z[0] * z[0] + an * (z[1] * z[1] + z[2] * z[2])) * dx;
            w.z_beta += 0.5 * (bn * (z[0] * z[0] + z[1] * z[1]) + z[2] * z[2]) * dx;
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anti_derivative_of_zero_is_zero() {
        let g = SpaceGrid::new(20, -1.0, 1.0).unwrap();
        let (a, q) = anti_derivative(&[0.0; 20], &g);
        assert_eq!(q, 0.0);
        assert!(a.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn anti_derivative_recovers_bump_at_second_order() {
        // bump b = (1 - x²)^4 on [-1, 1], φ = b'
        let bump = |x: f64| if x.abs() < 1.0 { (1.0 - x * x).powi(4) } else { 0.0 };
        let dbump = |x: f64| if x.abs() < 1.0 { -8.0 * x * (1.0 - x * x).powi(3) } else { 0.0 };
        let mut errs = Vec::new();
        for cells in [40, 80, 160] {
            let g = SpaceGrid::new(cells, -2.0, 2.0).unwrap();
            let phi: Vec<f64> = g.centers().iter().map(|x| dbump(*x)).collect();
            let (a, _) = anti_derivative(&phi, &g);
            let e = g.centers().iter().zip(&a).fold(0.0f64, |m, (x, v)| m.max((bump(*x) - v).abs()));
            errs.push(e);
            assert!(a[0].abs() < 1e-8 && a[cells - 1].abs() < 1e-8);
        }
        let r1 = (errs[0] / errs[1]).log2();
        let r2 = (errs[1] / errs[2]).log2();
        assert!(r1 > 1.8 && r2 > 1.8, "{errs:?}");
    }

    #[test]
    fn heat_weight_bounds() {
        for x in [-50.0, -3.0, 0.0, 2.0, 80.0] {
            let (h, e2) = heat_weight(0.7, 0.1, x, 3.0);
            assert!(h >= 0.0);
            let eta1 = e2.exp();
            assert!((1.0..=std::f64::consts::E).contains(&eta1));
        }
    }
}
