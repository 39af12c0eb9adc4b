//! Two-shock composite ansatz with shifts and diffusion waves, and the
//! decomposition of the initial excess mass.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::diffusion::DiffusionWave;
use super::profile::ShockProfile;
use super::{AnsatzMeta, WaveAnsatz};
use crate::error::{Result, VpbError};
use crate::phase_space::SpaceGrid;

/// Largest condition number accepted by [`decompose_initial_mass`].
pub const MAX_CONDITION: f64 = 1e10;

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Columns `r1 = U# - U-`, `r2 = (1, u#, u#^2/2)`, `r3 = U+ - U#`.
pub fn mass_directions(p1: &ShockProfile, p3: &ShockProfile) -> Matrix3<f64> {
    let um = p1.shock.left.conserved_1d();
    let uh = p1.shock.right.conserved_1d();
    let up = p3.shock.right.conserved_1d();
    let u = p1.shock.right.u[0];
    let r1 = sub(uh, um);
    let r3 = sub(up, uh);
    Matrix3::new(r1[0], 1.0, r3[0], r1[1], u, r3[1], r1[2], 0.5 * u * u, r3[2])
}

/// Solves `Σ α_i r_i = excess` for `(α1, α2, α3)`.
pub fn decompose_initial_mass(excess: [f64; 3], p1: &ShockProfile, p3: &ShockProfile) -> Result<[f64; 3]> {
    let m = mass_directions(p1, p3);
    let sv = m.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < MAX_CONDITION) {
        return Err(VpbError::Conditioning { condition });
    }
    let a = m.lu().solve(&Vector3::from(excess)).ok_or(VpbError::Conditioning { condition })?;
    Ok([a[0], a[1], a[2]])
}

/// Composite background built from two viscous shock profiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoShockAnsatz {
    pub p1: ShockProfile,
    pub p3: ShockProfile,
    /// `(α1, α2, α3)`.
    pub alphas: [f64; 3],
    /// Positions of the two profiles at `t = 0` before shifting.
    pub centers: [f64; 2],
    pub diffusion: DiffusionWave,
}

impl TwoShockAnsatz {
    pub fn new(p1: ShockProfile, p3: ShockProfile, alphas: [f64; 3], centers: [f64; 2], nu0: f64) -> Result<Self> {
        let (a, b) = (p1.shock.right, p3.shock.left);
        if (a.rho - b.rho).abs() + (a.u[0] - b.u[0]).abs() + (a.theta - b.theta).abs() > 1e-12 {
            return Err(VpbError::Construction("the two shocks do not share the middle state".into()));
        }
        let diffusion = DiffusionWave::new(alphas[1], a.rho, a.theta, a.u[0], nu0);
        Ok(Self {
            p1,
            p3,
            alphas,
            centers,
            diffusion,
        })
    }

    pub fn with_alphas(&self, alphas: [f64; 3]) -> Self {
        let mut out = self.clone();
        out.alphas = alphas;
        out.diffusion.alpha2 = alphas[1];
        out
    }

    pub fn middle(&self) -> crate::maxwellian_projection::FluidState {
        self.p1.shock.right
    }

    fn xi(&self, k: usize, x: f64, t: f64, shifted: bool) -> f64 {
        let (c, s, a) = if k == 0 {
            (self.centers[0], self.p1.shock.speed, self.alphas[0])
        } else {
            (self.centers[1], self.p3.shock.speed, self.alphas[2])
        };
        x - c - s * t + if shifted { a } else { 0.0 }
    }

    /// `(ρ̃, m̃1, Ẽ)` at `(x, t)`.
    pub fn conserved(&self, x: f64, t: f64) -> [f64; 3] {
        let a = self.p1.conserved(self.xi(0, x, t, true));
        let b = self.p3.conserved(self.xi(1, x, t, true));
        let h = self.middle().conserved_1d();
        let u = self.diffusion.u_hash;
        let (th, thx, _) = self.diffusion.eval(x, t);
        let d = self.diffusion.a;
        [
            a[0] + b[0] - h[0] + th,
            a[1] + b[1] - h[1] + u * th - d * thx,
            a[2] + b[2] - h[2] + 0.5 * u * u * th - d * u * thx,
        ]
    }

    /// Superposition without shifts or diffusion waves.
    pub fn unshifted_conserved(&self, x: f64, t: f64) -> [f64; 3] {
        let a = self.p1.conserved(self.xi(0, x, t, false));
        let b = self.p3.conserved(self.xi(1, x, t, false));
        let h = self.middle().conserved_1d();
        [a[0] + b[0] - h[0], a[1] + b[1] - h[1], a[2] + b[2] - h[2]]
    }

    /// Shock-profile densities `(ρ^{S1}, ρ^{S3})` at `(x, t)`, shifted.
    pub fn profile_densities(&self, x: f64, t: f64) -> (f64, f64) {
        (
            self.p1.sample(self.xi(0, x, t, true)).rho,
            self.p3.sample(self.xi(1, x, t, true)).rho,
        )
    }

    pub fn sample(&self, grid: &SpaceGrid, t: f64) -> Result<WaveAnsatz> {
        let mut out = WaveAnsatz::with_capacity(grid, t);
        for x in grid.centers() {
            out.push_conserved(self.conserved(x, t))?;
        }
        out.meta = AnsatzMeta::TwoShock {
            alphas: self.alphas,
            a: self.diffusion.a,
            u_hash: self.diffusion.u_hash,
        };
        Ok(out)
    }

    pub fn sample_unshifted(&self, grid: &SpaceGrid, t: f64) -> Result<WaveAnsatz> {
        let mut out = WaveAnsatz::with_capacity(grid, t);
        for x in grid.centers() {
            out.push_conserved(self.unshifted_conserved(x, t))?;
        }
        Ok(out)
    }
}

/// `∫ (U0 - Ũ0) dx` by the midpoint rule over the grid.
pub fn zero_mass_residual(u0: &[[f64; 3]], ansatz: &TwoShockAnsatz, grid: &SpaceGrid) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (i, u) in u0.iter().enumerate() {
        let a = ansatz.conserved(grid.x(i), 0.0);
        for k in 0..3 {
            acc[k] += u[k] - a[k];
        }
    }
    acc.map(|v| v * grid.dx())
}

/// Shifts `α` that remove the excess mass of `u0` against the ansatz.
///
/// The continuum decomposition gives the first guess; Newton iterations on
/// the discrete residual then absorb truncation and quadrature error.
pub fn fit_shifts(u0: &[[f64; 3]], base: &TwoShockAnsatz, grid: &SpaceGrid) -> Result<(TwoShockAnsatz, f64)> {
    let mut excess = [0.0; 3];
    for (i, u) in u0.iter().enumerate() {
        let b = base.unshifted_conserved(grid.x(i), 0.0);
        for k in 0..3 {
            excess[k] += (u[k] - b[k]) * grid.dx();
        }
    }
    let mut alphas = decompose_initial_mass(excess, &base.p1, &base.p3)?;
    let m = mass_directions(&base.p1, &base.p3);
    let lu = m.lu();
    let mut ans = base.with_alphas(alphas);
    let mut res = zero_mass_residual(u0, &ans, grid);
    for _ in 0..50 {
        let norm = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if norm <= 1e-13 {
            break;
        }
        let step = lu.solve(&Vector3::from(res)).ok_or(VpbError::Conditioning { condition: f64::INFINITY })?;
        let trial = [alphas[0] + step[0], alphas[1] + step[1], alphas[2] + step[2]];
        let cand = base.with_alphas(trial);
        let r2 = zero_mass_residual(u0, &cand, grid);
        if r2.iter().map(|r| r.abs()).fold(0.0, f64::max) >= norm {
            break;
        }
        alphas = trial;
        ans = cand;
        res = r2;
    }
    let norm = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok((ans, norm))
}

/// Composite ansatz sampled on the grid.
pub fn composite_ansatz(ansatz: &TwoShockAnsatz, grid: &SpaceGrid, t: f64) -> Result<WaveAnsatz> {
    ansatz.sample(grid, t)
}
