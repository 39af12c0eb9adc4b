//! Eigen-structure of the linearized Euler system in the variables
//! `V = (Φ, Ψ̃1, W̃)` and the Riemann invariants of the genuinely nonlinear fields.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::maxwellian_projection::{FluidState, ENTROPY_K};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    One,
    Three,
}

impl Family {
    pub fn index(self) -> usize {
        match self {
            Family::One => 0,
            Family::Three => 2,
        }
    }
}

/// Sound speed `sqrt(10 theta) / 3`.
pub fn sound_speed(theta: f64) -> f64 {
    (10.0 * theta).sqrt() / 3.0
}

/// Characteristic speeds `(u1 - c, u1, u1 + c)`.
pub fn eigenvalues(s: &FluidState) -> [f64; 3] {
    let c = sound_speed(s.theta);
    [s.u[0] - c, s.u[0], s.u[0] + c]
}

#[derive(Clone, Debug)]
pub struct EulerEigenSystem {
    pub state: FluidState,
    pub lambda: [f64; 3],
    /// Rows are the left eigenvectors `l_i`.
    pub left: Matrix3<f64>,
    /// Columns are the right eigenvectors `r_i`.
    pub right: Matrix3<f64>,
    pub a1: Matrix3<f64>,
}

impl EulerEigenSystem {
    /// `max |L R - I|`.
    pub fn lr_error(&self) -> f64 {
        (self.left * self.right - Matrix3::identity()).amax()
    }

    /// `max |L A1 R - Λ|`.
    pub fn diagonalization_error(&self) -> f64 {
        let lam = Matrix3::from_diagonal(&self.lambda.into());
        (self.left * self.a1 * self.right - lam).amax()
    }
}

pub fn eigen_system(state: &FluidState) -> Result<EulerEigenSystem> {
    let (rho, u, th) = (state.rho, state.u[0], state.theta);
    if !(th > 0.0) || !(rho > 0.0) {
        return Err(VpbError::NonPhysical { rho, theta: th });
    }
    let q = (10.0 * th).sqrt();
    let a1 = Matrix3::new(
        u, rho, 0.0, //
        2.0 * th / (3.0 * rho), u, 2.0 / 3.0, //
        0.0, 2.0 * th / 3.0, u,
    );
    let left = Matrix3::new(
        th, -0.5 * q * rho, rho, //
        th, 0.0, -1.5 * rho, //
        th, 0.5 * q * rho, rho,
    );
    let c13 = 3.0 / (10.0 * rho * th);
    let c2 = 2.0 / (5.0 * rho * th);
    let right = Matrix3::new(
        c13 * rho, c2 * rho, c13 * rho, //
        -c13 * q / 3.0, 0.0, c13 * q / 3.0, //
        c13 * 2.0 * th / 3.0, -c2 * th, c13 * 2.0 * th / 3.0,
    );
    Ok(EulerEigenSystem {
        state: *state,
        lambda: eigenvalues(state),
        left,
        right,
        a1,
    })
}

/// `(Σ_i^(1), Σ_i^(2))` with `Σ^(1) = u1 ∓ sqrt(15 k) e^{S/2} rho^{1/3}` and `Σ^(2) = S`.
pub fn riemann_invariants(state: &FluidState, family: Family) -> (f64, f64) {
    let s = state.entropy();
    let r = (15.0 * ENTROPY_K).sqrt() * (0.5 * s).exp() * state.rho.cbrt();
    let sign = match family {
        Family::One => 1.0,
        Family::Three => -1.0,
    };
    (state.u[0] + sign * r, s)
}
