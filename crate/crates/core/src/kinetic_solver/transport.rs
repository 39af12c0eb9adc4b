//! Free streaming `F_t + v1 F_x = 0` by a conservative face sweep.
//!
//! Each velocity node is advected independently. Face values are first-order
//! upwind or a single-stage minmod-limited reconstruction
//! `F_up ± (1 - |c|)/2 · minmod(ΔF)` with `c = v1 dt / dx`.

use serde::{Deserialize, Serialize};

use crate::phase_space::VelocityGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    Upwind,
    #[default]
    Minmod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Ghost cells hold the far-field Maxwellians; `F2` ghosts are zero.
    #[default]
    FarField,
    Periodic,
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Source of cell slices including two ghost layers on each side.
pub(crate) struct Cells<'a> {
    pub data: &'a [f64],
    pub nodes: usize,
    pub cells: usize,
    pub left: &'a [f64],
    pub right: &'a [f64],
    pub periodic: bool,
}

impl<'a> Cells<'a> {
    #[inline]
    pub fn get(&self, i: isize) -> &'a [f64] {
        let n = self.cells as isize;
        let k = if self.periodic {
            i.rem_euclid(n)
        } else if i < 0 {
            return self.left;
        } else if i >= n {
            return self.right;
        } else {
            i
        } as usize;
        &self.data[k * self.nodes..(k + 1) * self.nodes]
    }
}

/// Flux `v1 F*` through the face between cells `i - 1` and `i`.
fn face_flux(src: &Cells, i: isize, grid: &VelocityGrid, lambda: f64, recon: Reconstruction, out: &mut [f64]) {
    let (fm2, fm1, f0, fp1) = (src.get(i - 2), src.get(i - 1), src.get(i), src.get(i + 1));
    let n = grid.n();
    let block = n * n;
    for (i1, v1) in grid.axis(0).iter().enumerate() {
        let r = i1 * block..(i1 + 1) * block;
        let o = &mut out[r.clone()];
        if *v1 >= 0.0 {
            let (a, b, c) = (&fm2[r.clone()], &fm1[r.clone()], &f0[r]);
            match recon {
                Reconstruction::Upwind => {
                    for k in 0..block {
                        o[k] = v1 * b[k];
                    }
                }
                Reconstruction::Minmod => {
                    let h = 0.5 * (1.0 - v1 * lambda);
                    for k in 0..block {
                        o[k] = v1 * (b[k] + h * minmod(b[k] - a[k], c[k] - b[k]));
                    }
                }
            }
        } else {
            let (a, b, c) = (&fm1[r.clone()], &f0[r.clone()], &fp1[r]);
            match recon {
                Reconstruction::Upwind => {
                    for k in 0..block {
                        o[k] = v1 * b[k];
                    }
                }
                Reconstruction::Minmod => {
                    let h = 0.5 * (1.0 + v1 * lambda);
                    for k in 0..block {
                        o[k] = v1 * (b[k] - h * minmod(b[k] - a[k], c[k] - b[k]));
                    }
                }
            }
        }
    }
}

/// Advances one distribution by `dt`, writing into `out`.
/// Returns the flux vectors through the left and right domain boundaries (per node, times `dt`).
pub(crate) fn transport(src: &Cells, out: &mut [f64], grid: &VelocityGrid, dx: f64, dt: f64, recon: Reconstruction) -> (Vec<f64>, Vec<f64>) {
    let nodes = src.nodes;
    let lambda = dt / dx;
    let mut left_flux = vec![0.0; nodes];
    let mut right_flux = vec![0.0; nodes];
    face_flux(src, 0, grid, lambda, recon, &mut left_flux);
    let boundary_left = left_flux.clone();
    for i in 0..src.cells {
        face_flux(src, i as isize + 1, grid, lambda, recon, &mut right_flux);
        let f = src.get(i as isize);
        let o = &mut out[i * nodes..(i + 1) * nodes];
        for k in 0..nodes {
            o[k] = f[k] - lambda * (right_flux[k] - left_flux[k]);
        }
        std::mem::swap(&mut left_flux, &mut right_flux);
    }
    // after the final swap `left_flux` holds the rightmost face
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x * dt).collect::<Vec<_>>();
    (scale(boundary_left), scale(left_flux))
}
