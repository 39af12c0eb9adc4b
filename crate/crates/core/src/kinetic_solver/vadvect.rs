//! Field-driven advection in `v1`: `F1_t + Π_x ∂v1 F2 = 0`, `F2_t + Π_x ∂v1 F1 = 0`.
//!
//! Written for `FA = F1 + F2` (speed `+Π_x`) and `FB = F1 - F2` (speed `-Π_x`).
//! The semi-discrete operator is `F_j' = -a (G_{j+1/2} - G_{j-1/2}) / w_j` with
//! the trapezoid weights `w_j` and zero flux through the ends of the velocity
//! box, so every line conserves `Σ w F` exactly and gains momentum at exactly
//! `a Σ w F`. Time integration is the three-stage SSP Runge-Kutta scheme.

use serde::{Deserialize, Serialize};

use crate::phase_space::VelocityGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VelocityFlux {
    /// Centered face values; energy exchange with the field is exact up to tail terms.
    #[default]
    Centered,
    /// Upwind face values; positivity preserving but heats the gas at rate `O(|Π_x| Δv)`.
    Upwind,
}

/// `out = a D(f)` on every `v1` line.
fn apply(f: &[f64], a: f64, grid: &VelocityGrid, flux: VelocityFlux, out: &mut [f64]) {
    let n = grid.n();
    let stride = n * n;
    let w = grid.axis_weights();
    out.iter_mut().for_each(|o| *o = 0.0);
    for j in 0..n - 1 {
        let inv_l = a / w[j];
        let inv_r = a / w[j + 1];
        for k in 0..stride {
            let (fl, fr) = (f[j * stride + k], f[(j + 1) * stride + k]);
            let g = match flux {
                VelocityFlux::Centered => 0.5 * (fl + fr),
                VelocityFlux::Upwind => {
                    if a >= 0.0 {
                        fl
                    } else {
                        fr
                    }
                }
            };
            out[j * stride + k] -= g * inv_l;
            out[(j + 1) * stride + k] += g * inv_r;
        }
    }
}

/// Scratch buffers for one cell.
#[derive(Default)]
pub(crate) struct AdvectScratch {
    a: Vec<f64>,
    b: Vec<f64>,
    stage: Vec<f64>,
    rhs: Vec<f64>,
}

fn ssp_rk3(f: &mut [f64], a: f64, dt: f64, grid: &VelocityGrid, flux: VelocityFlux, stage: &mut Vec<f64>, rhs: &mut Vec<f64>) {
    let n = f.len();
    stage.resize(n, 0.0);
    rhs.resize(n, 0.0);
    apply(f, a, grid, flux, rhs);
    for k in 0..n {
        stage[k] = f[k] + dt * rhs[k];
    }
    apply(stage, a, grid, flux, rhs);
    for k in 0..n {
        stage[k] = 0.75 * f[k] + 0.25 * (stage[k] + dt * rhs[k]);
    }
    apply(stage, a, grid, flux, rhs);
    for k in 0..n {
        f[k] = f[k] / 3.0 + 2.0 / 3.0 * (stage[k] + dt * rhs[k]);
    }
}

/// Advances one cell's `(F1, F2)` by `dt` under the frozen field `pix`.
pub(crate) fn advect_cell(f1: &mut [f64], f2: &mut [f64], pix: f64, dt: f64, grid: &VelocityGrid, flux: VelocityFlux, s: &mut AdvectScratch) {
    if pix == 0.0 {
        return;
    }
    let n = f1.len();
    s.a.resize(n, 0.0);
    s.b.resize(n, 0.0);
    for k in 0..n {
        s.a[k] = f1[k] + f2[k];
        s.b[k] = f1[k] - f2[k];
    }
    ssp_rk3(&mut s.a, pix, dt, grid, flux, &mut s.stage, &mut s.rhs);
    ssp_rk3(&mut s.b, -pix, dt, grid, flux, &mut s.stage, &mut s.rhs);
    for k in 0..n {
        f1[k] = 0.5 * (s.a[k] + s.b[k]);
        f2[k] = 0.5 * (s.a[k] - s.b[k]);
    }
}
