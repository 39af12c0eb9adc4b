//! Linear diffusion wave carrying the excess mass of the contact field.

use serde::{Deserialize, Serialize};

use crate::collision::transport_closed_form;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionWave {
    pub alpha2: f64,
    /// Diffusion coefficient `a = 3 kappa(theta#) / (5 rho#)`.
    pub a: f64,
    pub u_hash: f64,
}

impl DiffusionWave {
    pub fn new(alpha2: f64, rho_hash: f64, theta_hash: f64, u_hash: f64, nu0: f64) -> Self {
        Self {
            alpha2,
            a: coefficient(rho_hash, theta_hash, nu0),
            u_hash,
        }
    }

    /// `(Θ, Θ_x, Θ_xx)` at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let s = 1.0 + t;
        let y = x - self.u_hash * t;
        let th = self.alpha2 / (4.0 * std::f64::consts::PI * self.a * s).sqrt() * (-y * y / (4.0 * self.a * s)).exp();
        let thx = -y / (2.0 * self.a * s) * th;
        let thxx = (y * y / (4.0 * self.a * self.a * s * s) - 1.0 / (2.0 * self.a * s)) * th;
        (th, thx, thxx)
    }

    /// `Θ_t` from the closed form.
    pub fn time_derivative(&self, x: f64, t: f64) -> f64 {
        let s = 1.0 + t;
        let y = x - self.u_hash * t;
        let (th, _, _) = self.eval(x, t);
        th * (-0.5 / s + y * self.u_hash / (2.0 * self.a * s) + y * y / (4.0 * self.a * s * s))
    }

    /// `Θ_t + u# Θ_x - a Θ_xx`.
    pub fn heat_residual(&self, x: f64, t: f64) -> f64 {
        let (_, thx, thxx) = self.eval(x, t);
        self.time_derivative(x, t) + self.u_hash * thx - self.a * thxx
    }
}

pub fn coefficient(rho_hash: f64, theta_hash: f64, nu0: f64) -> f64 {
    3.0 * transport_closed_form(theta_hash, nu0).kappa / (5.0 * rho_hash)
}

/// `(Θ, Θ_x, Θ_xx)` for the diffusion wave with mass `alpha2` around the middle state.
pub fn diffusion_wave(alpha2: f64, theta_hash: f64, rho_hash: f64, u_hash: f64, nu0: f64, x: f64, t: f64) -> (f64, f64, f64) {
    DiffusionWave::new(alpha2, rho_hash, theta_hash, u_hash, nu0).eval(x, t)
}
