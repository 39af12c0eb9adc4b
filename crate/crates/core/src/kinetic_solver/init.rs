//! Initial data: `F1 = M[ansatz + bump] (+ Ḡ) (+ micro noise)`, `F2 = q(x) M / rho`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FarField, SimulationState, SolverConfig};
use crate::collision::discrete_maxwellian;
use crate::error::{Result, VpbError};
use crate::maxwellian_projection::{ChiBasis, FluidState};
use crate::phase_space::{DistributionField, RawMoments, SpaceGrid, VelocityGrid};
use crate::wave_patterns::{correction_g_bar, WaveAnsatz};

/// Gaussian bump `amplitude exp(-(x - center)^2 / (2 width^2))` added to `(rho, u1, theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroBump {
    pub amplitude: [f64; 3],
    pub center: f64,
    pub width: f64,
}

/// Uniform noise of relative size `amplitude` times `M`, projected onto the microscopic subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroNoise {
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChargeShape {
    /// `-(x - c)/w exp(-(x - c)^2/(2 w^2))`, corrected to zero discrete total.
    Dipole { center: f64, width: f64 },
    /// `sin(2 pi modes (x - x_lo) / L)` for periodic domains.
    Sine { modes: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeSeed {
    pub amplitude: f64,
    pub shape: ChargeShape,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    #[serde(default)]
    pub bump: Option<MacroBump>,
    #[serde(default)]
    pub micro_noise: Option<MicroNoise>,
    #[serde(default)]
    pub charge: Option<ChargeSeed>,
    /// Add the first-order correction `Ḡ` built from the ansatz gradients.
    #[serde(default)]
    pub g_bar: bool,
}

fn raw_of(s: &FluidState) -> RawMoments {
    let c = s.conserved_1d();
    RawMoments {
        rho: c[0],
        momentum: [c[1], s.rho * s.u[1], s.rho * s.u[2]],
        energy: c[2],
    }
}

/// Charge profile `q(x_i)` with exactly zero discrete total for the dipole.
pub(crate) fn charge_profile(seed: &ChargeSeed, space: &SpaceGrid) -> Vec<f64> {
    let xs = space.centers();
    match seed.shape {
        ChargeShape::Dipole { center, width } => {
            let env: Vec<f64> = xs.iter().map(|x| (-(x - center).powi(2) / (2.0 * width * width)).exp()).collect();
            let mut q: Vec<f64> = xs.iter().zip(&env).map(|(x, e)| -seed.amplitude * (x - center) / width * e).collect();
            let total: f64 = q.iter().sum();
            let norm: f64 = env.iter().sum();
            for (qi, e) in q.iter_mut().zip(&env) {
                *qi -= total / norm * e;
            }
            q
        }
        ChargeShape::Sine { modes } => {
            let k = 2.0 * std::f64::consts::PI * modes as f64 / space.length();
            xs.iter().map(|x| seed.amplitude * (k * (x - space.x_lo())).sin()).collect()
        }
    }
}

/// Central-difference gradients `(rho_x, u1_x, theta_x)` of a sampled ansatz.
pub fn difference_gradients(a: &WaveAnsatz, dx: f64) -> Vec<[f64; 3]> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let h = (r - l) as f64 * dx;
            if h == 0.0 {
                return [0.0; 3];
            }
            [
                (a.rho[r] - a.rho[l]) / h,
                (a.u1[r] - a.u1[l]) / h,
                (a.theta[r] - a.theta[l]) / h,
            ]
        })
        .collect()
}

/// Macroscopic states `ansatz + bump` at the cell centers. Rejects a bump that empties a cell or cools it below zero.
pub fn perturbed_states(ansatz: &WaveAnsatz, bump: Option<&MacroBump>, space: &SpaceGrid) -> Result<Vec<FluidState>> {
    space
        .centers()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let s = ansatz.state(i);
            match bump {
                Some(b) => {
                    let g = (-(x - b.center).powi(2) / (2.0 * b.width * b.width)).exp();
                    FluidState::new_1d(s.rho + b.amplitude[0] * g, s.u[0] + b.amplitude[1] * g, s.theta + b.amplitude[2] * g)
                }
                None => Ok(s),
            }
        })
        .collect()
}

/// Build the initial state. Far-field ghosts take the end states of the unperturbed ansatz.
pub fn initialize(space: SpaceGrid, velocity: VelocityGrid, ansatz: &WaveAnsatz, perturbation: &Perturbation, config: &SolverConfig) -> Result<SimulationState> {
    config.validate()?;
    let cells = space.cells();
    if ansatz.len() != cells {
        return Err(VpbError::Dimension {
            expected: cells,
            found: ansatz.len(),
        });
    }
    let nodes = velocity.len();
    let charge = perturbation.charge.as_ref().map(|c| charge_profile(c, &space));
    let gradients = if perturbation.g_bar {
        Some(ansatz.gradients.clone().unwrap_or_else(|| difference_gradients(ansatz, space.dx())))
    } else {
        None
    };
    let mut rng = perturbation.micro_noise.as_ref().map(|n| ChaCha8Rng::seed_from_u64(n.seed));

    let mut dist = DistributionField::zeros(cells, nodes);
    dist.t = ansatz.t;
    let states = perturbed_states(ansatz, perturbation.bump.as_ref(), &space)?;
    for (i, s) in states.into_iter().enumerate() {
        let m = discrete_maxwellian(&raw_of(&s), &velocity)?.values;
        let needs_basis = gradients.is_some() || rng.is_some();
        let mut f1 = m.clone();
        if needs_basis {
            let basis = ChiBasis::with_weight(&s, m.clone(), &velocity);
            if let Some(gr) = &gradients {
                let g = correction_g_bar(gr[i][2], gr[i][1], &basis, &config.collision, &velocity)?;
                for (f, x) in f1.iter_mut().zip(&g) {
                    *f += x;
                }
            }
            if let (Some(r), Some(n)) = (rng.as_mut(), &perturbation.micro_noise) {
                let raw: Vec<f64> = m.iter().map(|mv| n.amplitude * r.gen_range(-1.0..1.0) * mv).collect();
                for (f, x) in f1.iter_mut().zip(basis.p1(&raw, &velocity)) {
                    *f += x;
                }
            }
        }
        dist.f1_cell_mut(i).copy_from_slice(&f1);
        if let Some(q) = &charge {
            let c = q[i] / s.rho;
            for (f, mv) in dist.f2_cell_mut(i).iter_mut().zip(&m) {
                *f = c * mv;
            }
        }
    }
    let far = FarField {
        left: ansatz.state(0),
        right: ansatz.state(cells - 1),
    };
    SimulationState::new(space, velocity, dist, far, config.boundary)
}

/// Velocity grid centered at the mean far-field speed, scaled to the hottest state.
pub fn velocity_grid_for(ansatz: &WaveAnsatz, n: usize, half_width_thermal: f64) -> Result<VelocityGrid> {
    if ansatz.is_empty() {
        return Err(VpbError::Config("empty ansatz".into()));
    }
    let theta_max = ansatz.theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (ansatz.u1[0] + ansatz.u1[ansatz.len() - 1]);
    VelocityGrid::new(n, [center, 0.0, 0.0], theta_max, half_width_thermal)
}
