//! 3-rarefaction waves and their Burgers smoothing.
//!
//! Along a 3-rarefaction curve `Σ_3^(1) = u1 - sqrt(10 theta)` and `S` are
//! constant, so a value `w` of `λ3` determines the state:
//! `sqrt(10 theta) = 3 (w - Σ) / 4`, `u1 = Σ + sqrt(10 theta)`,
//! `rho = ((4 pi / 3) theta e^{1 - S})^{3/2}`.
//! The smooth profile takes `w` from the inviscid Burgers solution with
//! initial data `(w+ + w-)/2 + (w+ - w-)/2 tanh x`, evaluated at `1 + t`.

use serde::{Deserialize, Serialize};

use super::euler::{eigenvalues, riemann_invariants, Family};
use super::{AnsatzMeta, WaveAnsatz};
use crate::error::{Result, VpbError};
use crate::maxwellian_projection::FluidState;
use crate::phase_space::SpaceGrid;

/// Relative tolerance for the two invariants when checking that states share a 3-rarefaction curve.
pub const CONNECTIVITY_TOLERANCE: f64 = 1e-8;

fn burgers_initial(wm: f64, wp: f64, x: f64) -> (f64, f64, f64) {
    let th = x.tanh();
    let sech2 = 1.0 - th * th;
    let h = 0.5 * (wp - wm);
    (0.5 * (wp + wm) + h * th, h * sech2, -2.0 * h * sech2 * th)
}

/// Foot of the characteristic through `(x, t)`: solves `x0 + w̄0(x0) t = x`.
pub fn burgers_foot(wm: f64, wp: f64, x: f64, t: f64) -> Result<f64> {
    if wm > wp {
        return Err(VpbError::Construction(format!(
            "Burgers data must be increasing for a rarefaction, got w- = {wm} > w+ = {wp}"
        )));
    }
    if t < 0.0 {
        return Err(VpbError::Construction(format!("negative time {t}")));
    }
    if t == 0.0 || wm == wp {
        return Ok(x - if wm == wp { wm * t } else { 0.0 });
    }
    let f = |x0: f64| {
        let (w, dw, _) = burgers_initial(wm, wp, x0);
        (x0 + w * t - x, 1.0 + dw * t)
    };
    let (mut lo, mut hi) = (x - wp * t, x - wm * t);
    let mut x0 = x - 0.5 * (wm + wp) * t;
    let tol = 1e-12 * x.abs().max(1.0);
    let mut last_step = hi - lo;
    for _ in 0..200 {
        let (r, dr) = f(x0);
        if r.abs() <= tol {
            return Ok(x0);
        }
        if r > 0.0 {
            hi = x0;
        } else {
            lo = x0;
        }
        let newton = x0 - r / dr;
        // bisect when Newton leaves the bracket or stalls in the flat tails
        let next = if newton > lo && newton < hi && (r / dr).abs() < 0.5 * last_step {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_step = (next - x0).abs();
        x0 = next;
        if hi - lo < 1e-15 * x.abs().max(1.0) {
            return Ok(x0);
        }
    }
    let (r, _) = f(x0);
    Err(VpbError::NonConvergence {
        what: "Burgers characteristic foot",
        iterations: 200,
        residual: r.abs(),
    })
}

/// `w̄(x, t)` for the smoothed Riemann data.
pub fn burgers_exact(wm: f64, wp: f64, x: f64, t: f64) -> Result<f64> {
    let x0 = burgers_foot(wm, wp, x, t)?;
    Ok(burgers_initial(wm, wp, x0).0)
}

/// `(w̄, ∂x w̄, ∂xx w̄)` at `(x, t)`.
pub fn burgers_with_derivatives(wm: f64, wp: f64, x: f64, t: f64) -> Result<(f64, f64, f64)> {
    let x0 = burgers_foot(wm, wp, x, t)?;
    let (w, dw, ddw) = burgers_initial(wm, wp, x0);
    let j = 1.0 + dw * t;
    Ok((w, dw / j, ddw / (j * j * j)))
}

/// A 3-rarefaction wave between two states on one rarefaction curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RarefactionWave {
    pub left: FluidState,
    pub right: FluidState,
    /// `Σ_3^(1)`, constant across the wave.
    pub sigma: f64,
    /// Entropy, constant across the wave.
    pub entropy: f64,
    pub w_minus: f64,
    pub w_plus: f64,
}

impl RarefactionWave {
    /// Checks that `left` and `right` lie on one 3-rarefaction curve with `λ3` increasing.
    pub fn new(left: FluidState, right: FluidState) -> Result<Self> {
        let (sl, el) = riemann_invariants(&left, Family::Three);
        let (sr, er) = riemann_invariants(&right, Family::Three);
        if (sl - sr).abs() > CONNECTIVITY_TOLERANCE * (1.0 + sl.abs()) {
            return Err(VpbError::Inadmissible(format!(
                "states are not on one 3-rarefaction curve: Σ3 differs ({sl} vs {sr})"
            )));
        }
        if (el - er).abs() > CONNECTIVITY_TOLERANCE * (1.0 + el.abs()) {
            return Err(VpbError::Inadmissible(format!(
                "states are not on one 3-rarefaction curve: entropy differs ({el} vs {er})"
            )));
        }
        if left.u[1] != 0.0 || left.u[2] != 0.0 || right.u[1] != 0.0 || right.u[2] != 0.0 {
            return Err(VpbError::Inadmissible("rarefaction states must have u2 = u3 = 0".into()));
        }
        let wm = eigenvalues(&left)[2];
        let wp = eigenvalues(&right)[2];
        if wp < wm {
            return Err(VpbError::Inadmissible(format!(
                "λ3 must increase across a rarefaction: λ3- = {wm} > λ3+ = {wp}"
            )));
        }
        Ok(Self {
            left,
            right,
            sigma: sl,
            entropy: el,
            w_minus: wm,
            w_plus: wp,
        })
    }

    /// Right state at Euclidean distance `delta` from `left` in `(rho, u1, theta)` along the 3-rarefaction curve.
    pub fn from_strength(left: FluidState, delta: f64) -> Result<Self> {
        if delta < 0.0 || !delta.is_finite() {
            return Err(VpbError::Config(format!("rarefaction strength must be >= 0, got {delta}")));
        }
        let left = FluidState::new_1d(left.rho, left.u[0], left.theta)?;
        let (sigma, entropy) = riemann_invariants(&left, Family::Three);
        let wm = eigenvalues(&left)[2];
        let dist = |w: f64| -> Result<f64> {
            let s = state_on_curve(sigma, entropy, w)?;
            Ok(((s.rho - left.rho).powi(2) + (s.u[0] - left.u[0]).powi(2) + (s.theta - left.theta).powi(2)).sqrt())
        };
        if delta == 0.0 {
            return Self::new(left, left);
        }
        let mut hi = wm + delta;
        while dist(hi)? < delta {
            hi = wm + 2.0 * (hi - wm);
        }
        let mut lo = wm;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dist(mid)? < delta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        let right = state_on_curve(sigma, entropy, 0.5 * (lo + hi))?;
        Ok(Self {
            left,
            right,
            sigma,
            entropy,
            w_minus: wm,
            w_plus: eigenvalues(&right)[2],
        })
    }

    pub fn strength(&self) -> f64 {
        let (a, b) = (self.left, self.right);
        ((a.rho - b.rho).powi(2) + (a.u[0] - b.u[0]).powi(2) + (a.theta - b.theta).powi(2)).sqrt()
    }

    pub fn state_at(&self, w: f64) -> Result<FluidState> {
        state_on_curve(self.sigma, self.entropy, w)
    }

    /// Background state and its `x`-gradient `(rho_x, u1_x, theta_x)` at `(x, t)`.
    pub fn sample(&self, x: f64, t: f64) -> Result<(FluidState, [f64; 3])> {
        let (w, wx, _) = burgers_with_derivatives(self.w_minus, self.w_plus, x, 1.0 + t)?;
        let s = self.state_at(w)?;
        let dtheta = 9.0 * (w - self.sigma) / 80.0;
        let du = 0.75;
        let drho = 1.5 * s.rho / s.theta * dtheta;
        Ok((s, [drho * wx, du * wx, dtheta * wx]))
    }

    /// Sampled ansatz `(rhō, ū1, θ̄)(x, t)`.
    pub fn ansatz(&self, grid: &SpaceGrid, t: f64) -> Result<WaveAnsatz> {
        let mut a = WaveAnsatz::with_capacity(grid, t);
        let mut grads = Vec::with_capacity(grid.cells());
        for x in grid.centers() {
            let (s, g) = self.sample(x, t)?;
            a.push(s);
            grads.push(g);
        }
        a.gradients = Some(grads);
        a.meta = AnsatzMeta::Rarefaction {
            w_minus: self.w_minus,
            w_plus: self.w_plus,
        };
        Ok(a)
    }
}

/// State with `λ3 = w` on the curve `(Σ_3^(1), S) = (sigma, entropy)`.
pub fn state_on_curve(sigma: f64, entropy: f64, w: f64) -> Result<FluidState> {
    let root = 0.75 * (w - sigma);
    if !(root > 0.0) {
        return Err(VpbError::Construction(format!("λ3 = {w} is below Σ3 = {sigma}")));
    }
    let theta = root * root / 10.0;
    let rho = (4.0 * std::f64::consts::PI / 3.0 * theta * (1.0 - entropy).exp()).powf(1.5);
    FluidState::new_1d(rho, sigma + root, theta)
}

/// `(Σ, S)` at every cell of a rarefaction ansatz.
pub fn invariants_along(a: &WaveAnsatz) -> Vec<(f64, f64)> {
    a.states().iter().map(|s| riemann_invariants(s, Family::Three)).collect()
}

/// Residual of the inviscid Euler system for the ansatz, by central differences in `x` and `t`.
pub fn euler_residual(wave: &RarefactionWave, grid: &SpaceGrid, t: f64, dt: f64) -> Result<f64> {
    let before = wave.ansatz(grid, (t - dt).max(0.0))?;
    let after = wave.ansatz(grid, t + dt)?;
    let now = wave.ansatz(grid, t)?;
    let span = t + dt - (t - dt).max(0.0);
    let flux = |i: usize| -> [f64; 3] {
        let (r, u, th) = (now.rho[i], now.u1[i], now.theta[i]);
        let p = 2.0 / 3.0 * r * th;
        [r * u, r * u * u + p, (now.energy[i] + p) * u]
    };
    let dx = grid.dx();
    let mut worst = 0.0f64;
    for i in 1..grid.cells() - 1 {
        let fl = flux(i - 1);
        let fr = flux(i + 1);
        let ut = [
            (after.rho[i] - before.rho[i]) / span,
            (after.m1[i] - before.m1[i]) / span,
            (after.energy[i] - before.energy[i]) / span,
        ];
        for k in 0..3 {
            worst = worst.max((ut[k] + (fr[k] - fl[k]) / (2.0 * dx)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn foot_converges_deep_in_a_late_fan() {
        let w = RarefactionWave::from_strength(FluidState::new_1d(1.0, 0.0, 1.0).unwrap(), 0.3).unwrap();
        for (x, t) in [(55.254924165275526, 51.0), (107.8283878659986, 101.0)] {
            let x0 = burgers_foot(w.w_minus, w.w_plus, x, t).unwrap();
            assert!((x0 + burgers_initial(w.w_minus, w.w_plus, x0).0 * t - x).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_burgers_centre() {
        for t in [0.0, 0.5, 3.0, 40.0] {
            assert!(burgers_exact(-1.0, 1.0, 0.0, t).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn burgers_initial_time() {
        for x in [-3.0, -0.2, 0.7, 5.0] {
            let w = burgers_exact(0.5, 1.5, x, 0.0).unwrap();
            assert!((w - (1.0 + 0.5 * f64::tanh(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn burgers_characteristic_residual() {
        for &(x, t) in &[(-30.0, 10.0), (0.3, 2.0), (77.0, 90.0)] {
            let x0 = burgers_foot(0.9, 1.3, x, t).unwrap();
            let (w, _, _) = burgers_initial(0.9, 1.3, x0);
            assert!((x0 + w * t - x).abs() <= 1e-12 * f64::max(1.0, x.abs()));
        }
    }

    #[test]
    fn decreasing_data_rejected() {
        assert!(burgers_exact(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn curve_inverts_invariants() {
        let left = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let w = RarefactionWave::from_strength(left, 0.2).unwrap();
        assert!((w.strength() - 0.2).abs() < 1e-12);
        let (s, e) = riemann_invariants(&w.right, Family::Three);
        assert!((s - w.sigma).abs() < 1e-13 && (e - w.entropy).abs() < 1e-13);
        assert!(w.w_plus > w.w_minus);
        let back = w.state_at(w.w_minus).unwrap();
        assert!((back.rho - 1.0).abs() < 1e-13 && back.u[0].abs() < 1e-13 && (back.theta - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_strength_is_constant() {
        let left = FluidState::new_1d(1.0, 0.1, 0.9).unwrap();
        let w = RarefactionWave::from_strength(left, 0.0).unwrap();
        let g = SpaceGrid::new(20, -10.0, 10.0).unwrap();
        let a = w.ansatz(&g, 3.0).unwrap();
        for i in 0..20 {
            assert!((a.rho[i] - 1.0).abs() < 1e-14 && (a.theta[i] - 0.9).abs() < 1e-14);
        }
    }

    #[test]
    fn disconnected_states_rejected() {
        let a = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let b = FluidState::new_1d(1.0, 0.1, 1.0).unwrap();
        let err = RarefactionWave::new(a, b).unwrap_err();
        assert!(matches!(err, VpbError::Inadmissible(_)));
    }
}
