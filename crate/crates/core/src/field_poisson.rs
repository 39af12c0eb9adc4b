//! Electric field `Π_x` from `Π_xx = 2 n2`.
//!
//! Face values are accumulated from the left with `P(x_lo) = -Q/2`, so both
//! ends carry the residual `±Q/2` of a nonzero total charge `Q = ∫ 2 n2`.
//! Cell values are face averages, which makes `Σ Π_i n2_i Δx = (P_hi² - P_lo²)/4`
//! vanish identically and lets the field force exchange momentum without drift.

use serde::{Deserialize, Serialize};

use crate::phase_space::SpaceGrid;

/// Total charge above which a truncated domain cannot satisfy both far-field conditions.
pub const NEUTRALITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectricField {
    /// `Π_x` at cell centers.
    pub pix: Vec<f64>,
    /// `Π_x` at the `cells + 1` faces.
    pub faces: Vec<f64>,
    /// `∫ 2 n2 dx`.
    pub total_charge: f64,
    pub periodic: bool,
}

impl ElectricField {
    pub fn zero(cells: usize) -> Self {
        Self {
            pix: vec![0.0; cells],
            faces: vec![0.0; cells + 1],
            total_charge: 0.0,
            periodic: false,
        }
    }

    /// Electric energy density `Π_x² / 4` per cell.
    pub fn energy_density(&self) -> Vec<f64> {
        self.pix.iter().map(|p| 0.25 * p * p).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.pix.iter().fold(0.0f64, |m, p| m.max(p.abs()))
    }
}

fn accumulate(n2: &[f64], dx: f64, start: f64) -> (Vec<f64>, Vec<f64>) {
    let mut faces = Vec::with_capacity(n2.len() + 1);
    let mut p = start;
    faces.push(p);
    for q in n2 {
        p += 2.0 * q * dx;
        faces.push(p);
    }
    let pix = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    (faces, pix)
}

/// Field under the symmetric far-field gauge.
pub fn solve_field(n2: &[f64], grid: &SpaceGrid) -> ElectricField {
    let q: f64 = 2.0 * n2.iter().sum::<f64>() * grid.dx();
    if q.abs() > NEUTRALITY_TOLERANCE {
        log::warn!("net charge {q:e} on the truncated domain; split symmetrically between both ends");
    }
    let (faces, pix) = accumulate(n2, grid.dx(), -0.5 * q);
    ElectricField {
        pix,
        faces,
        total_charge: q,
        periodic: false,
    }
}

/// Field on a periodic domain: the mean of `n2` is removed and `Π_x` has zero mean.
pub fn solve_field_periodic(n2: &[f64], grid: &SpaceGrid) -> ElectricField {
    let mean = n2.iter().sum::<f64>() / n2.len() as f64;
    let centred: Vec<f64> = n2.iter().map(|x| x - mean).collect();
    let (mut faces, mut pix) = accumulate(&centred, grid.dx(), 0.0);
    let shift = pix.iter().sum::<f64>() / pix.len() as f64;
    for p in faces.iter_mut().chain(pix.iter_mut()) {
        *p -= shift;
    }
    ElectricField {
        pix,
        faces,
        total_charge: 2.0 * mean * grid.length(),
        periodic: true,
    }
}

/// `∫ Π_x² / 4 dx` by the midpoint rule.
pub fn electric_energy(field: &ElectricField, grid: &SpaceGrid) -> f64 {
    field.pix.iter().map(|p| 0.25 * p * p).sum::<f64>() * grid.dx()
}
