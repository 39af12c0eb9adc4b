//! First-order microscopic correction built from background gradients.

use crate::collision::{invert_l_m, CollisionModel};
use crate::error::Result;
use crate::maxwellian_projection::ChiBasis;
use crate::phase_space::VelocityGrid;

/// `Ḡ = (3 / (2θ)) L_M^{-1}[P1(v1 (|v-u|^2/(2θ) θ̄_x + v1 ū1_x) M)]`.
pub fn correction_g_bar(theta_x: f64, u1_x: f64, basis: &ChiBasis, model: &CollisionModel, grid: &VelocityGrid) -> Result<Vec<f64>> {
    if theta_x == 0.0 && u1_x == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let s = basis.state();
    let th = s.theta;
    let src: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(basis.weight())
        .map(|(v, m)| {
            let c2: f64 = (0..3).map(|a| (v[a] - s.u[a]).powi(2)).sum();
            1.5 / th * v[0] * (c2 / (2.0 * th) * theta_x + v[0] * u1_x) * m
        })
        .collect();
    invert_l_m(&basis.p1(&src, grid), basis, model, grid)
}

/// Chapman-Enskog leading term `L_M^{-1}[P1(v1 M_x)]` for given macroscopic gradients `(rho_x, u1_x, theta_x)`.
pub fn chapman_enskog_g(grad: [f64; 3], basis: &ChiBasis, model: &CollisionModel, grid: &VelocityGrid) -> Result<Vec<f64>> {
    let s = basis.state();
    let rt = crate::GAS_CONSTANT * s.theta;
    let src: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(basis.weight())
        .map(|(v, m)| {
            let c: [f64; 3] = [v[0] - s.u[0], v[1] - s.u[1], v[2] - s.u[2]];
            let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            let mx = grad[0] / s.rho + c[0] * grad[1] / rt + (c2 / (2.0 * rt) - 1.5) * grad[2] / s.theta;
            v[0] * mx * m
        })
        .collect();
    invert_l_m(&basis.p1(&src, grid), basis, model, grid)
}
