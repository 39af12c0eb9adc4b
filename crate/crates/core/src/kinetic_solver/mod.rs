//! Strang-split kinetic solver for `(F1, F2)` on a tensor grid.
//!
//! One step of length `dt` is `T(dt/2) A(dt/2) C(dt) A(dt/2) T(dt/2)` where
//! `T` is free streaming in `x`, `A` is the field-driven advection in `v1`
//! and `C` is the exact BGK relaxation. The field is re-solved after every
//! `T` stage since only streaming changes the cell charges.
//!
//! On the truncated domain the solver tracks the cumulative fluxes through
//! the two boundary faces so that conservation can be audited exactly.

mod checkpoint;
mod init;
mod transport;
mod vadvect;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use init::{difference_gradients, initialize, perturbed_states, velocity_grid_for, ChargeSeed, ChargeShape, MacroBump, MicroNoise, Perturbation};
pub use transport::{BoundaryMode, Reconstruction};
pub use vadvect::VelocityFlux;

use crate::collision::{discrete_maxwellian, relax_cell, CollisionMode, CollisionModel, RelaxScratch};
use crate::error::{Result, VpbError};
use crate::field_poisson::{electric_energy, solve_field, solve_field_periodic, ElectricField};
use crate::maxwellian_projection::FluidState;
use crate::phase_space::{dot, raw_moments, DistributionField, RawMoments, SpaceGrid, VelocityGrid};
use transport::Cells;
use vadvect::AdvectScratch;

fn default_cfl() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Courant number applied to the streaming, field and collision limits.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    /// Fixed step; shrunk with a warning when it exceeds the stability limit.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub reconstruction: Reconstruction,
    #[serde(default)]
    pub velocity_flux: VelocityFlux,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default)]
    pub collision: CollisionModel,
}

impl SolverConfig {
    pub fn new(t_end: f64, nu0: f64) -> Self {
        Self {
            cfl: default_cfl(),
            t_end,
            dt: None,
            reconstruction: Reconstruction::default(),
            velocity_flux: VelocityFlux::default(),
            boundary: BoundaryMode::default(),
            collision: CollisionModel::bgk(nu0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(VpbError::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(VpbError::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(VpbError::Config(format!("dt must be > 0, got {dt}")));
            }
        }
        if !(self.collision.nu0 >= 0.0) {
            return Err(VpbError::Config(format!("nu0 must be >= 0, got {}", self.collision.nu0)));
        }
        if self.collision.mode != CollisionMode::Bgk {
            return Err(VpbError::Config("the solver relaxes with BGK only; hard_sphere_oracle is a check, not a time-stepping model".into()));
        }
        Ok(())
    }
}

/// Domain totals of the conserved quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub kinetic_energy: f64,
    pub field_energy: f64,
    pub n2: f64,
}

impl Totals {
    pub fn energy(&self) -> f64 {
        self.kinetic_energy + self.field_energy
    }
}

/// Far-field data held in the ghost cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub left: FluidState,
    pub right: FluidState,
}

#[derive(Clone)]
pub struct SimulationState {
    pub space: SpaceGrid,
    pub velocity: VelocityGrid,
    pub dist: DistributionField,
    pub field: ElectricField,
    pub step: u64,
    /// Length of the most recent step.
    pub last_dt: f64,
    pub far: FarField,
    /// Cumulative net inflow through the two boundary faces (field energy excluded).
    pub inflow: Totals,
    moments: Vec<RawMoments>,
    n2: Vec<f64>,
    ghost_left: Vec<f64>,
    ghost_right: Vec<f64>,
    ghost_zero: Vec<f64>,
    buffer: Vec<f64>,
}

impl SimulationState {
    /// Assemble a state from a distribution, computing ghosts, moments and field.
    pub fn new(space: SpaceGrid, velocity: VelocityGrid, dist: DistributionField, far: FarField, boundary: BoundaryMode) -> Result<Self> {
        if dist.cells() != space.cells() || dist.nodes() != velocity.len() {
            return Err(VpbError::Dimension {
                expected: space.cells() * velocity.len(),
                found: dist.cells() * dist.nodes(),
            });
        }
        let raw = |s: &FluidState| {
            let c = s.conserved_1d();
            RawMoments {
                rho: c[0],
                momentum: [c[1], s.rho * s.u[1], s.rho * s.u[2]],
                energy: c[2],
            }
        };
        let ghost_left = discrete_maxwellian(&raw(&far.left), &velocity)?.values;
        let ghost_right = discrete_maxwellian(&raw(&far.right), &velocity)?.values;
        let nodes = velocity.len();
        let cells = space.cells();
        let mut s = Self {
            field: ElectricField::zero(cells),
            space,
            velocity,
            dist,
            step: 0,
            last_dt: 0.0,
            far,
            inflow: Totals::default(),
            moments: Vec::new(),
            n2: vec![0.0; cells],
            ghost_left,
            ghost_right,
            ghost_zero: vec![0.0; nodes],
            buffer: vec![0.0; cells * nodes],
        };
        s.refresh_charge(boundary);
        s.refresh_moments();
        Ok(s)
    }

    pub fn time(&self) -> f64 {
        self.dist.t
    }

    pub fn moments(&self) -> &[RawMoments] {
        &self.moments
    }

    /// Cell charge densities `n2_i` as of the last field solve.
    pub fn n2(&self) -> &[f64] {
        &self.n2
    }

    /// Fluid states of every cell.
    pub fn states(&self) -> Result<Vec<FluidState>> {
        self.moments.iter().map(|m| m.to_state()).collect()
    }

    pub fn totals(&self) -> Totals {
        let dx = self.space.dx();
        let mut t = Totals::default();
        for m in &self.moments {
            t.mass += m.rho * dx;
            for a in 0..3 {
                t.momentum[a] += m.momentum[a] * dx;
            }
            t.kinetic_energy += m.energy * dx;
        }
        t.n2 = self.n2.iter().sum::<f64>() * dx;
        t.field_energy = electric_energy(&self.field, &self.space);
        t
    }

    fn refresh_charge(&mut self, boundary: BoundaryMode) {
        let w = self.velocity.weights();
        let nodes = self.velocity.len();
        self.n2 = self.dist.f2.par_chunks(nodes).map(|c| dot(c, w)).collect();
        self.field = match boundary {
            BoundaryMode::FarField => solve_field(&self.n2, &self.space),
            BoundaryMode::Periodic => solve_field_periodic(&self.n2, &self.space),
        };
    }

    fn refresh_moments(&mut self) {
        let nodes = self.velocity.len();
        let g = &self.velocity;
        self.moments = self
            .dist
            .f1
            .par_chunks(nodes)
            .map(|c| raw_moments(c, g).expect("cell length matches grid"))
            .collect();
    }

    /// Largest step allowed by streaming, field acceleration and relaxation at Courant number `cfl`.
    pub fn stable_dt(&self, config: &SolverConfig) -> f64 {
        let mut lim = self.space.dx() / self.velocity.max_abs_v1();
        let pmax = self.field.max_abs();
        if pmax > 0.0 {
            lim = lim.min(self.velocity.spacing() / pmax);
        }
        let rho_max = self.moments.iter().fold(0.0f64, |m, x| m.max(x.rho));
        let nu = config.collision.nu(rho_max);
        if nu > 0.0 {
            // the relaxation is exact; this only keeps the splitting error bounded
            lim = lim.min(2.0 / nu);
        }
        config.cfl * lim
    }

    fn stream(&mut self, dt: f64, config: &SolverConfig) {
        let nodes = self.velocity.len();
        let periodic = config.boundary == BoundaryMode::Periodic;
        let dx = self.space.dx();
        let grid = &self.velocity;
        let w = grid.weights();
        let fluxes = |inflow: &mut Totals, is_f1: bool, (l, r): (Vec<f64>, Vec<f64>)| {
            if periodic {
                return;
            }
            for (k, v) in grid.nodes().iter().enumerate() {
                let net = (l[k] - r[k]) * w[k];
                if is_f1 {
                    inflow.mass += net;
                    for a in 0..3 {
                        inflow.momentum[a] += net * v[a];
                    }
                    inflow.kinetic_energy += 0.5 * net * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
                } else {
                    inflow.n2 += net;
                }
            }
        };
        for is_f1 in [true, false] {
            let (data, left, right) = if is_f1 {
                (&self.dist.f1, &self.ghost_left, &self.ghost_right)
            } else {
                (&self.dist.f2, &self.ghost_zero, &self.ghost_zero)
            };
            let src = Cells {
                data,
                nodes,
                cells: self.space.cells(),
                left,
                right,
                periodic,
            };
            let bf = transport::transport(&src, &mut self.buffer, grid, dx, dt, config.reconstruction);
            fluxes(&mut self.inflow, is_f1, bf);
            if is_f1 {
                std::mem::swap(&mut self.dist.f1, &mut self.buffer);
            } else {
                std::mem::swap(&mut self.dist.f2, &mut self.buffer);
            }
        }
        self.refresh_charge(config.boundary);
    }

    fn accelerate(&mut self, dt: f64, config: &SolverConfig) {
        let nodes = self.velocity.len();
        let grid = &self.velocity;
        let pix = &self.field.pix;
        let flux = config.velocity_flux;
        self.dist
            .f1
            .par_chunks_mut(nodes)
            .zip(self.dist.f2.par_chunks_mut(nodes))
            .enumerate()
            .for_each_init(AdvectScratch::default, |s, (i, (a, b))| {
                vadvect::advect_cell(a, b, pix[i], dt, grid, flux, s);
            });
    }

    fn collide(&mut self, dt: f64, config: &SolverConfig) -> Result<()> {
        if config.collision.nu0 == 0.0 {
            return Ok(());
        }
        let nodes = self.velocity.len();
        let grid = &self.velocity;
        let model = config.collision;
        self.dist
            .f1
            .par_chunks_mut(nodes)
            .zip(self.dist.f2.par_chunks_mut(nodes))
            .try_for_each_init(RelaxScratch::default, |s, (a, b)| relax_cell(a, b, grid, &model, dt, s))
    }

    /// One Strang step of length `dt`.
    pub fn step(&mut self, dt: f64, config: &SolverConfig) -> Result<()> {
        let half = 0.5 * dt;
        self.stream(half, config);
        self.accelerate(half, config);
        self.collide(dt, config)?;
        self.accelerate(half, config);
        self.stream(half, config);
        self.refresh_moments();
        self.dist.t += dt;
        self.step += 1;
        self.last_dt = dt;
        if !self.dist.is_finite() {
            return Err(VpbError::NonFinite {
                step: self.step,
                time: self.dist.t,
            });
        }
        Ok(())
    }

    /// Step size for the next step: the configured or CFL step, capped by the stability limit and `t_end`.
    pub fn next_dt(&self, config: &SolverConfig) -> f64 {
        let stable = self.stable_dt(config) / config.cfl;
        let mut dt = match config.dt {
            Some(dt) if dt > stable => {
                log::warn!("dt = {dt:e} exceeds the stability limit {stable:e}; shrinking");
                config.cfl * stable
            }
            Some(dt) => dt,
            None => config.cfl * stable,
        };
        let remaining = config.t_end - self.time();
        if remaining < dt {
            dt = remaining;
        }
        dt
    }

    /// Advance to `config.t_end`, calling `observe` before the first step and after every step.
    pub fn run<F>(&mut self, config: &SolverConfig, mut observe: F) -> Result<()>
    where
        F: FnMut(&SimulationState) -> Result<()>,
    {
        config.validate()?;
        observe(self)?;
        while config.t_end - self.time() > 1e-12 * config.t_end.max(1.0) {
            let dt = self.next_dt(config);
            self.step(dt, config)?;
            observe(self)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave_patterns::WaveAnsatz;

    #[test]
    fn oracle_mode_is_not_a_time_stepper() {
        let mut cfg = SolverConfig::new(1.0, 1.0);
        cfg.collision.mode = CollisionMode::HardSphereOracle;
        assert!(matches!(cfg.validate(), Err(VpbError::Config(_))));
    }

    fn uniform(cells: usize, boundary: BoundaryMode) -> (SimulationState, SolverConfig) {
        let s = FluidState::new_1d(1.0, 0.1, 1.0).unwrap();
        let space = SpaceGrid::new(cells, -4.0, 4.0).unwrap();
        let vel = VelocityGrid::new(10, [0.0; 3], 1.0, 5.0).unwrap();
        let mut cfg = SolverConfig::new(1.0, 1.0);
        cfg.boundary = boundary;
        let st = initialize(space.clone(), vel, &WaveAnsatz::constant(&s, &space), &Perturbation::default(), &cfg).unwrap();
        (st, cfg)
    }

    #[test]
    fn uniform_state_is_a_fixed_point() {
        for b in [BoundaryMode::FarField, BoundaryMode::Periodic] {
            let (mut st, cfg) = uniform(16, b);
            let f0 = st.dist.f1.clone();
            let dt = st.next_dt(&cfg);
            for _ in 0..5 {
                st.step(dt, &cfg).unwrap();
            }
            let d = st.dist.f1.iter().zip(&f0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(d < 1e-14, "{b:?}: {d}");
            assert!(st.dist.f2.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn dt_is_shrunk_to_the_stability_limit() {
        let (st, mut cfg) = uniform(8, BoundaryMode::FarField);
        cfg.dt = Some(10.0);
        let stable = st.stable_dt(&cfg) / cfg.cfl;
        assert!(st.next_dt(&cfg) <= stable);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let mut c = SolverConfig::new(1.0, 1.0);
        c.cfl = 1.5;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::new(-1.0, 1.0);
        assert!(c.validate().is_err());
        c.t_end = 1.0;
        c.dt = Some(0.0);
        assert!(c.validate().is_err());
    }
}
