//! Relative entropy pair around a reference state.

use serde::{Deserialize, Serialize};

use crate::maxwellian_projection::FluidState;

/// `Ψ(s) = s - ln s - 1`.
pub fn psi(s: f64) -> f64 {
    s - s.ln() - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub eta: f64,
    pub q: f64,
}

/// `η = ρθ̄ Ψ(ρ̄/ρ) + 3/2 ρθ̄ Ψ(θ/θ̄) + 3/4 ρ|u - ū|²`, `q = u1 η + (u1 - ū1)(ρθ - ρ̄θ̄)`.
pub fn entropy_sample(s: &FluidState, r: &FluidState) -> EntropySample {
    let du2: f64 = (0..3).map(|a| (s.u[a] - r.u[a]).powi(2)).sum();
    let eta = s.rho * r.theta * psi(r.rho / s.rho) + 1.5 * s.rho * r.theta * psi(s.theta / r.theta) + 0.75 * s.rho * du2;
    let q = s.u[0] * eta + (s.u[0] - r.u[0]) * (s.rho * s.theta - r.rho * r.theta);
    EntropySample { eta, q }
}

pub fn entropy_pair(states: &[FluidState], reference: &[FluidState]) -> Vec<EntropySample> {
    states.iter().zip(reference).map(|(s, r)| entropy_sample(s, r)).collect()
}

/// `X = (ρ, u1, θ)`.
pub fn entropy_variables(s: &FluidState) -> [f64; 3] {
    [s.rho, s.u[0], s.theta]
}

/// Smallest `C0` with `|X - X̄|²/C0 ≤ η ≤ C0 |X - X̄|²` over the samples; points closer than `1e-8` are skipped.
pub fn quadratic_constant(states: &[FluidState], reference: &[FluidState]) -> f64 {
    let mut c0 = 1.0f64;
    for (s, r) in states.iter().zip(reference) {
        let (x, y) = (entropy_variables(s), entropy_variables(r));
        let d2: f64 = (0..3).map(|k| (x[k] - y[k]).powi(2)).sum();
        if d2 < 1e-16 {
            continue;
        }
        let eta = entropy_sample(s, r).eta;
        c0 = c0.max(eta / d2).max(d2 / eta);
    }
    c0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vanishes_at_reference() {
        let r = FluidState::new_1d(1.2, 0.3, 0.9).unwrap();
        let e = entropy_sample(&r, &r);
        assert_eq!(e.eta, 0.0);
        assert_eq!(e.q, 0.0);
    }

    proptest! {
        #[test]
        fn positive_away_from_reference(dr in -0.2f64..0.2, du in -0.2f64..0.2, dt in -0.2f64..0.2) {
            prop_assume!(dr.abs() + du.abs() + dt.abs() > 1e-6);
            let r = FluidState::new_1d(1.0, 0.1, 1.0).unwrap();
            let s = FluidState::new_1d(1.0 + dr, 0.1 + du, 1.0 + dt).unwrap();
            prop_assert!(entropy_sample(&s, &r).eta > 0.0);
            let c0 = quadratic_constant(&[s], &[r]);
            prop_assert!(c0.is_finite() && c0 < 10.0);
        }
    }
}
