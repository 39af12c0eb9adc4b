//! Background wave objects: Euler eigen-structure, rarefaction fans and their
//! smoothing, Hugoniot shocks, viscous shock profiles, diffusion waves, the
//! shifted composite ansatz and the microscopic correction.

pub mod ansatz;
pub mod correction;
pub mod diffusion;
pub mod euler;
pub mod profile;
pub mod rarefaction;
pub mod shock;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::maxwellian_projection::FluidState;
use crate::phase_space::SpaceGrid;

pub use ansatz::{composite_ansatz, decompose_initial_mass, fit_shifts, zero_mass_residual, TwoShockAnsatz};
pub use correction::{chapman_enskog_g, correction_g_bar};
pub use diffusion::{diffusion_wave, DiffusionWave};
pub use euler::{eigen_system, riemann_invariants, EulerEigenSystem, Family};
pub use profile::{ns_shock_profile, ShockProfile};
pub use rarefaction::{burgers_exact, RarefactionWave};
pub use shock::{hugoniot_connect, ShockData};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub enum AnsatzMeta {
    #[default]
    Constant,
    Rarefaction {
        w_minus: f64,
        w_plus: f64,
    },
    TwoShock {
        alphas: [f64; 3],
        a: f64,
        u_hash: f64,
    },
}

/// Background profile sampled at cell centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct WaveAnsatz {
    pub t: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub m1: Vec<f64>,
    pub energy: Vec<f64>,
    pub u1: Vec<f64>,
    pub theta: Vec<f64>,
    /// `(rho_x, u1_x, theta_x)` when known in closed form.
    pub gradients: Option<Vec<[f64; 3]>>,
    pub meta: AnsatzMeta,
}

impl WaveAnsatz {
    pub fn with_capacity(grid: &SpaceGrid, t: f64) -> Self {
        let n = grid.cells();
        Self {
            t,
            x: grid.centers(),
            rho: Vec::with_capacity(n),
            m1: Vec::with_capacity(n),
            energy: Vec::with_capacity(n),
            u1: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            gradients: None,
            meta: AnsatzMeta::Constant,
        }
    }

    /// Uniform background.
    pub fn constant(state: &FluidState, grid: &SpaceGrid) -> Self {
        let mut a = Self::with_capacity(grid, 0.0);
        for _ in 0..grid.cells() {
            a.push(*state);
        }
        a.gradients = Some(vec![[0.0; 3]; grid.cells()]);
        a
    }

    pub fn push(&mut self, s: FluidState) {
        let c = s.conserved_1d();
        self.rho.push(s.rho);
        self.m1.push(c[1]);
        self.energy.push(c[2]);
        self.u1.push(s.u[0]);
        self.theta.push(s.theta);
    }

    pub fn push_conserved(&mut self, c: [f64; 3]) -> Result<()> {
        let s = FluidState::from_conserved_1d(c[0], c[1], c[2])?;
        self.rho.push(c[0]);
        self.m1.push(c[1]);
        self.energy.push(c[2]);
        self.u1.push(s.u[0]);
        self.theta.push(s.theta);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn state(&self, i: usize) -> FluidState {
        FluidState {
            rho: self.rho[i],
            u: [self.u1[i], 0.0, 0.0],
            theta: self.theta[i],
        }
    }

    pub fn states(&self) -> Vec<FluidState> {
        (0..self.len()).map(|i| self.state(i)).collect()
    }

    pub fn conserved(&self, i: usize) -> [f64; 3] {
        [self.rho[i], self.m1[i], self.energy[i]]
    }

    /// CSV with columns `x, rho, m1, E, u1, theta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| VpbError::io("ansatz csv", e);
        writeln!(w, "x,rho,m1,E,u1,theta").map_err(io)?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.x[i], self.rho[i], self.m1[i], self.energy[i], self.u1[i], self.theta[i]
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Time-dependent background wave against which perturbations are measured.
#[derive(Clone, Debug)]
pub enum Background {
    Constant(FluidState),
    Rarefaction(RarefactionWave),
    TwoShock(TwoShockAnsatz),
}

impl Background {
    pub fn sample(&self, grid: &SpaceGrid, t: f64) -> Result<WaveAnsatz> {
        match self {
            Background::Constant(s) => {
                let mut a = WaveAnsatz::constant(s, grid);
                a.t = t;
                Ok(a)
            }
            Background::Rarefaction(r) => r.ansatz(grid, t),
            Background::TwoShock(a) => a.sample(grid, t),
        }
    }

    /// Weights `(α, β) = (ρ^{S1}/ρ#, ρ^{S3}/ρ#)` for two-shock backgrounds.
    pub fn shock_weights(&self, x: f64, t: f64) -> Option<(f64, f64)> {
        match self {
            Background::TwoShock(a) => {
                let (r1, r3) = a.profile_densities(x, t);
                let mid = a.middle().rho;
                Some((r1 / mid, r3 / mid))
            }
            _ => None,
        }
    }

    pub fn diffusion(&self) -> Option<&DiffusionWave> {
        match self {
            Background::TwoShock(a) => Some(&a.diffusion),
            _ => None,
        }
    }

    /// Wave strength used for the weight exponent `N = 1/sqrt(δ0)`.
    pub fn strength(&self) -> f64 {
        match self {
            Background::Constant(_) => 0.0,
            Background::Rarefaction(r) => r.strength(),
            Background::TwoShock(a) => a.p1.shock.strength.max(a.p3.shock.strength),
        }
    }
}
