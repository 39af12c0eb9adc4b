//! Local Maxwellians, the orthonormal macroscopic basis and the projections
//! `P0`, `P1`, `Pd`, `Pc`.
//!
//! The discrete basis `chi_j = p_j(v) M(v)` is orthonormalized with modified
//! Gram-Schmidt under the quadrature inner product weighted by `1/M`. Because
//! every `chi_j` carries the factor `M`, `<g, chi_j>_M = sum g p_j w` needs no
//! division and `P0` is exact on the discrete span.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::phase_space::{dot, VelocityGrid};
use crate::GAS_CONSTANT;

/// Constant of the isentropic law `p = k rho^{5/3} e^S`.
pub const ENTROPY_K: f64 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

impl FluidState {
    pub fn new(rho: f64, u: [f64; 3], theta: f64) -> Result<Self> {
        let ok = rho > 0.0 && theta > 0.0 && rho.is_finite() && theta.is_finite() && u.iter().all(|c| c.is_finite());
        if !ok {
            return Err(VpbError::NonPhysical { rho, theta });
        }
        Ok(Self { rho, u, theta })
    }

    /// One-dimensional state `(rho, (u1, 0, 0), theta)`.
    pub fn new_1d(rho: f64, u1: f64, theta: f64) -> Result<Self> {
        Self::new(rho, [u1, 0.0, 0.0], theta)
    }

    /// From conserved `(rho, m1, E)` with `E = rho (theta + u1^2 / 2)`.
    pub fn from_conserved_1d(rho: f64, m1: f64, energy: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(VpbError::NonPhysical { rho, theta: f64::NAN });
        }
        let u1 = m1 / rho;
        Self::new_1d(rho, u1, energy / rho - 0.5 * u1 * u1)
    }

    pub fn pressure(&self) -> f64 {
        GAS_CONSTANT * self.rho * self.theta
    }

    /// Internal energy per unit mass, equal to `theta` under `R = 2/3`.
    pub fn internal_energy(&self) -> f64 {
        self.theta
    }

    /// Specific entropy `S = -(2/3) ln rho + ln((4 pi / 3) theta) + 1`.
    pub fn entropy(&self) -> f64 {
        -(2.0 / 3.0) * self.rho.ln() + (4.0 * std::f64::consts::PI / 3.0 * self.theta).ln() + 1.0
    }

    pub fn speed_sq(&self) -> f64 {
        self.u.iter().map(|c| c * c).sum()
    }

    /// `(rho, rho u1, rho (theta + |u|^2 / 2))`.
    pub fn conserved_1d(&self) -> [f64; 3] {
        [self.rho, self.rho * self.u[0], self.rho * (self.theta + 0.5 * self.speed_sq())]
    }

    /// Value of the Maxwellian at `v = u`.
    pub fn maxwellian_peak(&self) -> f64 {
        self.rho / (2.0 * std::f64::consts::PI * GAS_CONSTANT * self.theta).powf(1.5)
    }
}

/// Per-axis Gaussian factors `exp(-(v_a - u_a)^2 / (2 R theta))`.
fn axis_factors(state: &FluidState, grid: &VelocityGrid) -> [Vec<f64>; 3] {
    let inv = 1.0 / (2.0 * GAS_CONSTANT * state.theta);
    [0, 1, 2].map(|a| {
        grid.axis(a)
            .iter()
            .map(|v| {
                let c = v - state.u[a];
                (-c * c * inv).exp()
            })
            .collect()
    })
}

/// Tensor product of three axis vectors times a prefactor, in the grid's flattened order.
pub(crate) fn tensor_product(pref: f64, f: &[Vec<f64>; 3], out: &mut [f64]) {
    let n = f[0].len();
    let mut idx = 0;
    for i1 in 0..n {
        let a = pref * f[0][i1];
        for i2 in 0..n {
            let b = a * f[1][i2];
            for i3 in 0..n {
                out[idx] = b * f[2][i3];
                idx += 1;
            }
        }
    }
}

/// Sampled local Maxwellian `rho / (2 pi R theta)^{3/2} exp(-|v-u|^2 / (2 R theta))`.
pub fn maxwellian(state: &FluidState, grid: &VelocityGrid) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    maxwellian_into(state, grid, &mut out);
    out
}

pub fn maxwellian_into(state: &FluidState, grid: &VelocityGrid, out: &mut [f64]) {
    let f = axis_factors(state, grid);
    tensor_product(state.maxwellian_peak(), &f, out);
}

/// `<g1, g2>_M = sum g1 g2 / M w`.
///
/// Nodes where the weight underflows while the numerator is nonzero make the
/// product meaningless; those are reported as ill-conditioned.
pub fn inner_product(g1: &[f64], g2: &[f64], weight: &[f64], grid: &VelocityGrid) -> Result<f64> {
    for f in [g1, g2, weight] {
        if f.len() != grid.len() {
            return Err(VpbError::Dimension {
                expected: grid.len(),
                found: f.len(),
            });
        }
    }
    let mut acc = 0.0;
    for k in 0..grid.len() {
        let num = g1[k] * g2[k];
        if num == 0.0 {
            continue;
        }
        let m = weight[k];
        if !(m > f64::MIN_POSITIVE) {
            return Err(VpbError::IllConditioned(format!(
                "weight Maxwellian is {m:e} at node {k} where g1 g2 = {num:e}"
            )));
        }
        acc += num / m * grid.weights()[k];
    }
    if !acc.is_finite() {
        return Err(VpbError::IllConditioned("weighted sum overflowed".into()));
    }
    Ok(acc)
}

/// Discrete orthonormal basis of the macroscopic subspace at one state.
#[derive(Clone, Debug)]
pub struct ChiBasis {
    state: FluidState,
    weight: Vec<f64>,
    polys: [Vec<f64>; 5],
    chi: [Vec<f64>; 5],
    weight_mass: f64,
}

impl ChiBasis {
    /// Basis built around the sampled Maxwellian of `state`.
    pub fn new(state: &FluidState, grid: &VelocityGrid) -> Self {
        Self::with_weight(state, maxwellian(state, grid), grid)
    }

    /// Basis built around a caller-provided weight, e.g. a discrete Maxwellian.
    pub fn with_weight(state: &FluidState, weight: Vec<f64>, grid: &VelocityGrid) -> Self {
        let rt = GAS_CONSTANT * state.theta;
        let rho = state.rho;
        let nodes = grid.nodes();
        let nn = grid.len();
        let mut polys: [Vec<f64>; 5] = Default::default();
        polys[0] = vec![1.0 / rho.sqrt(); nn];
        for a in 0..3 {
            polys[a + 1] = nodes.iter().map(|v| (v[a] - state.u[a]) / (rt * rho).sqrt()).collect();
        }
        polys[4] = nodes
            .iter()
            .map(|v| {
                let c2: f64 = (0..3).map(|a| (v[a] - state.u[a]).powi(2)).sum();
                (c2 / rt - 3.0) / (6.0 * rho).sqrt()
            })
            .collect();

        let mw: Vec<f64> = weight.iter().zip(grid.weights()).map(|(m, w)| m * w).collect();
        let ip = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&mw).map(|((x, y), z)| x * y * z).sum() };
        // Two Gram-Schmidt passes keep the basis orthonormal to round-off.
        for _pass in 0..2 {
            for j in 0..5 {
                for k in 0..j {
                    let c = ip(&polys[j], &polys[k]);
                    let (lo, hi) = polys.split_at_mut(j);
                    for (pj, pk) in hi[0].iter_mut().zip(&lo[k]) {
                        *pj -= c * pk;
                    }
                }
                let nrm = ip(&polys[j], &polys[j]).sqrt();
                for p in polys[j].iter_mut() {
                    *p /= nrm;
                }
            }
        }
        let chi = [0, 1, 2, 3, 4].map(|j| polys[j].iter().zip(&weight).map(|(p, m)| p * m).collect::<Vec<_>>());
        let weight_mass = dot(&weight, grid.weights());
        Self {
            state: *state,
            weight,
            polys,
            chi,
            weight_mass,
        }
    }

    pub fn state(&self) -> &FluidState {
        &self.state
    }

    /// Weight Maxwellian.
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn chi(&self, j: usize) -> &[f64] {
        &self.chi[j]
    }

    /// `<g, chi_j>_M` for j = 0..4.
    pub fn coefficients(&self, g: &[f64], grid: &VelocityGrid) -> [f64; 5] {
        let w = grid.weights();
        [0, 1, 2, 3, 4].map(|j| g.iter().zip(&self.polys[j]).zip(w).map(|((a, b), c)| a * b * c).sum())
    }

    /// `<chi_i, chi_j>_M` evaluated with the division by the weight.
    pub fn gram(&self, grid: &VelocityGrid) -> Result<[[f64; 5]; 5]> {
        let mut g = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                g[i][j] = inner_product(&self.chi[i], &self.chi[j], &self.weight, grid)?;
            }
        }
        Ok(g)
    }

    pub fn p0(&self, g: &[f64], grid: &VelocityGrid) -> Vec<f64> {
        let c = self.coefficients(g, grid);
        let mut out = vec![0.0; g.len()];
        for j in 0..5 {
            for (o, x) in out.iter_mut().zip(&self.chi[j]) {
                *o += c[j] * x;
            }
        }
        out
    }

    pub fn p1(&self, g: &[f64], grid: &VelocityGrid) -> Vec<f64> {
        let p0 = self.p0(g, grid);
        g.iter().zip(&p0).map(|(a, b)| a - b).collect()
    }

    /// `Pd g = (∫ g dv) M / ∫ M dv`.
    pub fn pd(&self, g: &[f64], grid: &VelocityGrid) -> Vec<f64> {
        let c = dot(g, grid.weights()) / self.weight_mass;
        self.weight.iter().map(|m| c * m).collect()
    }

    pub fn pc(&self, g: &[f64], grid: &VelocityGrid) -> Vec<f64> {
        let pd = self.pd(g, grid);
        g.iter().zip(&pd).map(|(a, b)| a - b).collect()
    }

    /// M-norm of the macroscopic part, `sqrt(sum_j <g, chi_j>^2)`.
    pub fn macro_norm(&self, g: &[f64], grid: &VelocityGrid) -> f64 {
        self.coefficients(g, grid).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// M-norm of the `Pd` component.
    pub fn density_norm(&self, g: &[f64], grid: &VelocityGrid) -> f64 {
        (dot(g, grid.weights()) / self.weight_mass.sqrt()).abs()
    }
}

pub fn project_p0(g: &[f64], state: &FluidState, grid: &VelocityGrid) -> Vec<f64> {
    ChiBasis::new(state, grid).p0(g, grid)
}

pub fn project_p1(g: &[f64], state: &FluidState, grid: &VelocityGrid) -> Vec<f64> {
    ChiBasis::new(state, grid).p1(g, grid)
}

pub fn project_pd(g: &[f64], state: &FluidState, grid: &VelocityGrid) -> Vec<f64> {
    ChiBasis::new(state, grid).pd(g, grid)
}

pub fn project_pc(g: &[f64], state: &FluidState, grid: &VelocityGrid) -> Vec<f64> {
    ChiBasis::new(state, grid).pc(g, grid)
}

/// Fixed Maxwellian weighting all microscopic norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalReference {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub eta0: f64,
}

impl GlobalReference {
    pub fn state(&self) -> FluidState {
        FluidState {
            rho: self.rho,
            u: self.u,
            theta: self.theta,
        }
    }

    pub fn maxwellian(&self, grid: &VelocityGrid) -> Vec<f64> {
        maxwellian(&self.state(), grid)
    }

    /// `theta / 2 < theta_* < theta`.
    pub fn in_band(&self, s: &FluidState) -> bool {
        0.5 * s.theta < self.theta && self.theta < s.theta
    }

    /// `|rho - rho_*| + |u - u_*| + |theta - theta_*| < eta0`.
    pub fn is_close(&self, s: &FluidState) -> bool {
        let du: f64 = (0..3).map(|a| (s.u[a] - self.u[a]).powi(2)).sum::<f64>().sqrt();
        (s.rho - self.rho).abs() + du + (s.theta - self.theta).abs() < self.eta0
    }
}

/// Choose `theta_* = 0.75 min theta` clamped into `(max theta / 2, min theta)`,
/// `rho_*` and `u_*` as sample means.
pub fn select_global_reference(states: &[FluidState], eta0: f64) -> Result<GlobalReference> {
    if states.is_empty() {
        return Err(VpbError::Config("no states to select a reference from".into()));
    }
    let tmin = states.iter().map(|s| s.theta).fold(f64::INFINITY, f64::min);
    let tmax = states.iter().map(|s| s.theta).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (0.5 * tmax, tmin);
    if !(lo < hi) {
        return Err(VpbError::Config(format!(
            "wave too strong for single reference: band ({lo}, {hi}) is empty"
        )));
    }
    let mut theta = 0.75 * tmin;
    if theta <= lo || theta >= hi {
        theta = 0.5 * (lo + hi);
    }
    let n = states.len() as f64;
    let rho = states.iter().map(|s| s.rho).sum::<f64>() / n;
    let u = [0, 1, 2].map(|a| states.iter().map(|s| s.u[a]).sum::<f64>() / n);
    Ok(GlobalReference { rho, u, theta, eta0 })
}
