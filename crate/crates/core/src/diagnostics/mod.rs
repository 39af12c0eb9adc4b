//! Measurements taken on solver snapshots: micro parts, perturbations against
//! the background wave, characteristic variables with their weights, energy
//! functionals, entropy, conservation totals and decay fits.
//!
//! Time derivatives come from differencing stored snapshots, so diagnostics
//! never touch the trajectory.

mod audit;
mod entropy;
mod micro;
mod perturbation;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use audit::{conservation_audit, decay_fit, ConservationReport, DecayFit, MIN_SNAPSHOTS};
pub use entropy::{entropy_pair, entropy_sample, entropy_variables, psi, quadratic_constant, EntropySample};
pub use micro::{chapman_enskog_error, micro_moment_residual, micro_parts, weighted_h2, MicroParts, MicroSnapshot};
pub use perturbation::{
    anti_derivative, characteristic_vars, derivative, heat_weight, perturbation_fields, CharacteristicVars, PerturbationFields, WeightedNorms,
    ZERO_MASS_TOLERANCE,
};

use crate::collision::CollisionModel;
use crate::error::{Result, VpbError};
use crate::kinetic_solver::{difference_gradients, SimulationState, Totals};
use crate::maxwellian_projection::{select_global_reference, GlobalReference};
use crate::wave_patterns::Background;

/// Velocity resolution below which second `v`-derivatives are reported as inaccurate.
pub const ACCURATE_V_NODES: usize = 32;

/// Floor under which a norm series counts as no signal.
pub const SIGNAL_FLOOR: f64 = 1e-13;

fn default_every() -> u64 {
    10
}

fn default_true() -> bool {
    true
}

fn default_eta0() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    /// Record every `every` steps (and always at the first and last step).
    #[serde(default = "default_every")]
    pub every: u64,
    /// Compute the weighted micro blocks of the energy functional.
    #[serde(default = "default_true")]
    pub micro: bool,
    /// Closeness radius of the global reference.
    #[serde(default = "default_eta0")]
    pub eta0: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            every: default_every(),
            micro: true,
            eta0: default_eta0(),
        }
    }
}

/// One row of the diagnostics time series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    pub dt: f64,
    pub mass: f64,
    pub mom1: f64,
    pub energy_total: f64,
    pub n2_total: f64,
    pub n2_l2: f64,
    pub n2_linf: f64,
    pub pix_l2: f64,
    pub pix_linf: f64,
    pub pert_linf: f64,
    pub pert_l2: f64,
    pub e_inst: f64,
    pub e_t: f64,
    pub eta_total: f64,
    pub z_w: [f64; 3],
    pub z_alpha: f64,
    pub z_beta: f64,
    pub alpha_min: f64,
    pub beta_min: f64,
    pub eta1_min: f64,
    pub eta1_max: f64,
    pub micro_g: f64,
    pub micro_f2: f64,
    pub drift: ConservationReport,
}

pub const CSV_COLUMNS: [&str; 31] = [
    "t",
    "step",
    "dt",
    "mass",
    "mom1",
    "energy_total",
    "n2_total",
    "n2_L2",
    "n2_Linf",
    "Pix_L2",
    "Pix_Linf",
    "pert_Linf",
    "pert_L2",
    "E_inst",
    "E_t",
    "eta_total",
    "Z1_w",
    "Z2_w",
    "Z3_w",
    "Z_alpha",
    "Z_beta",
    "alpha_min",
    "beta_min",
    "eta1_min",
    "eta1_max",
    "micro_G",
    "micro_F2",
    "drift_mass",
    "drift_mom1",
    "drift_energy",
    "drift_n2",
];

impl DiagnosticsRecord {
    fn csv_fields(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.16e}");
        let mut out = vec![f(self.t), self.step.to_string()];
        let rest = [
            self.dt,
            self.mass,
            self.mom1,
            self.energy_total,
            self.n2_total,
            self.n2_l2,
            self.n2_linf,
            self.pix_l2,
            self.pix_linf,
            self.pert_linf,
            self.pert_l2,
            self.e_inst,
            self.e_t,
            self.eta_total,
            self.z_w[0],
            self.z_w[1],
            self.z_w[2],
            self.z_alpha,
            self.z_beta,
            self.alpha_min,
            self.beta_min,
            self.eta1_min,
            self.eta1_max,
            self.micro_g,
            self.micro_f2,
            self.drift.mass,
            self.drift.momentum,
            self.drift.energy,
            self.drift.n2,
        ];
        out.extend(rest.iter().map(|v| f(*v)));
        out
    }
}

/// Fits and flags over a finished series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub records: usize,
    pub n2_decay: Option<DecayFit>,
    pub pix_decay: Option<DecayFit>,
    pub pert_decay: Option<DecayFit>,
    pub eta_decay: Option<DecayFit>,
    pub final_drift: ConservationReport,
    /// Largest absolute drifts seen over the run.
    pub worst_drift: ConservationReport,
    pub pert_peak: f64,
    pub pert_final: f64,
    pub field_initial_linf: f64,
    pub field_final_linf: f64,
    pub n2_initial_l2: f64,
    pub n2_final_l2: f64,
    pub pix_initial_l2: f64,
    pub pix_final_l2: f64,
    pub e_t: f64,
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub eta1_range: [f64; 2],
    pub z_round_trip: f64,
    pub entropy_c0: f64,
    /// Every state stayed inside the band of the global reference.
    pub reference_reliable: bool,
    pub v_derivatives_accurate: bool,
}

/// Records diagnostics along a run.
pub struct Monitor {
    pub config: MonitorConfig,
    pub background: Background,
    pub reference: GlobalReference,
    pub model: CollisionModel,
    pub records: Vec<DiagnosticsRecord>,
    inv_mstar: Vec<f64>,
    initial: Totals,
    running_max: f64,
    reliable: bool,
    round_trip: f64,
    entropy_c0: f64,
    ranges: [[f64; 2]; 3],
}

impl Monitor {
    pub fn new(config: MonitorConfig, background: Background, state: &SimulationState, model: CollisionModel) -> Result<Self> {
        if config.every == 0 {
            return Err(VpbError::Config("diagnostics cadence must be at least one step".into()));
        }
        let a0 = background.sample(&state.space, state.time())?;
        let reference = select_global_reference(&a0.states(), config.eta0)?;
        let inv_mstar = reference.maxwellian(&state.velocity).iter().map(|m| 1.0 / m).collect();
        Ok(Self {
            config,
            background,
            reference,
            model,
            records: Vec::new(),
            inv_mstar,
            initial: state.totals(),
            running_max: 0.0,
            reliable: true,
            round_trip: 0.0,
            entropy_c0: 1.0,
            ranges: [[f64::INFINITY, f64::NEG_INFINITY]; 3],
        })
    }

    /// `1/M*` on the velocity grid.
    pub fn inv_mstar(&self) -> &[f64] {
        &self.inv_mstar
    }

    pub fn initial_totals(&self) -> &Totals {
        &self.initial
    }

    /// Record when the cadence is due or `force` is set.
    pub fn observe(&mut self, state: &SimulationState, force: bool) -> Result<()> {
        if force || state.step % self.config.every == 0 {
            let r = self.measure(state)?;
            self.records.push(r);
        }
        Ok(())
    }

    /// Compute one record without storing it.
    pub fn measure(&mut self, state: &SimulationState) -> Result<DiagnosticsRecord> {
        let space = &state.space;
        let dx = space.dx();
        let ansatz = self.background.sample(space, state.time())?;
        let totals = state.totals();
        let drift = conservation_audit(&self.initial, &totals, &state.inflow);
        let states = state.states()?;
        if states.iter().any(|s| !self.reference.in_band(s)) {
            self.reliable = false;
        }

        let l2 = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
        let linf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let n2 = state.n2();
        let pix = &state.field.pix;

        let p = perturbation_fields(state.moments(), &ansatz, space);
        let pert_l2 = (p.phi.iter().chain(&p.psi).chain(&p.omega).map(|x| x * x).sum::<f64>() * dx).sqrt();
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() * dx;
        let macro_block = match self.background {
            Background::TwoShock(_) => {
                let mut acc = sq(&p.big_phi) + sq(&p.big_psi) + sq(&p.big_w);
                for f in [&p.phi, &p.psi, &p.omega] {
                    acc += sq(f) + sq(&derivative(f, dx));
                }
                acc
            }
            _ => {
                let mut acc = 0.0;
                for f in [&p.phi, &p.psi, &p.omega] {
                    acc += sq(f) + sq(&derivative(f, dx));
                }
                acc
            }
        };
        let field_block = sq(pix) + sq(n2) + sq(&derivative(n2, dx));

        let (micro_g, micro_f2) = if self.config.micro {
            let grads = ansatz.gradients.clone().unwrap_or_else(|| difference_gradients(&ansatz, dx));
            let parts = micro_parts(state, Some(&grads), &self.model, None)?;
            let gt = parts.g_tilde.as_ref().unwrap_or(&parts.g);
            (
                weighted_h2(gt, parts.nodes, &state.velocity, &self.inv_mstar, dx),
                weighted_h2(&parts.pc_f2, parts.nodes, &state.velocity, &self.inv_mstar, dx),
            )
        } else {
            (0.0, 0.0)
        };
        let e_inst = macro_block + field_block + micro_g + micro_f2;
        self.running_max = self.running_max.max(e_inst);

        let refs = ansatz.states();
        let eta_total: f64 = entropy_pair(&states, &refs).iter().map(|e| e.eta).sum::<f64>() * dx;
        self.entropy_c0 = self.entropy_c0.max(quadratic_constant(&states, &refs));

        let cv = characteristic_vars(&p, &ansatz, &self.background, space)?;
        self.round_trip = self.round_trip.max(cv.round_trip);
        let wn = cv.weighted_norms(space);
        let mm = |v: &[f64]| (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let (amin, amax) = mm(&cv.alpha);
        let (bmin, bmax) = mm(&cv.beta);
        let (emin, emax) = mm(&cv.eta1);
        for (r, (lo, hi)) in self.ranges.iter_mut().zip([(amin, amax), (bmin, bmax), (emin, emax)]) {
            r[0] = r[0].min(lo);
            r[1] = r[1].max(hi);
        }

        Ok(DiagnosticsRecord {
            t: state.time(),
            step: state.step,
            dt: state.last_dt,
            mass: totals.mass,
            mom1: totals.momentum[0],
            energy_total: totals.energy(),
            n2_total: totals.n2,
            n2_l2: l2(n2),
            n2_linf: linf(n2),
            pix_l2: l2(pix),
            pix_linf: linf(pix),
            pert_linf: p.sup_norm(),
            pert_l2,
            e_inst,
            e_t: self.running_max,
            eta_total,
            z_w: wn.z_w,
            z_alpha: wn.z_alpha,
            z_beta: wn.z_beta,
            alpha_min: amin,
            beta_min: bmin,
            eta1_min: emin,
            eta1_max: emax,
            micro_g,
            micro_f2,
            drift,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let err = |e: csv::Error| VpbError::Io {
            path: "diagnostics csv".into(),
            source: e.into(),
        };
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_COLUMNS).map_err(err)?;
        for r in &self.records {
            wr.write_record(r.csv_fields()).map_err(err)?;
        }
        wr.flush().map_err(|e| VpbError::io("diagnostics csv", e))
    }

    /// Column of the stored series.
    pub fn series<F: Fn(&DiagnosticsRecord) -> f64>(&self, f: F) -> (Vec<f64>, Vec<f64>) {
        (self.records.iter().map(|r| r.t).collect(), self.records.iter().map(f).collect())
    }

    pub fn summary(&self) -> DiagnosticsSummary {
        let fit = |f: &dyn Fn(&DiagnosticsRecord) -> f64| {
            let (t, y) = self.series(f);
            decay_fit(&t, &y, SIGNAL_FLOOR, 0.25).ok()
        };
        let mut worst = ConservationReport::default();
        for r in &self.records {
            worst.mass = worst.mass.max(r.drift.mass.abs());
            worst.momentum = worst.momentum.max(r.drift.momentum.abs());
            worst.energy = worst.energy.max(r.drift.energy.abs());
            worst.n2 = worst.n2.max(r.drift.n2.abs());
        }
        let first = self.records.first().cloned().unwrap_or_default();
        let last = self.records.last().cloned().unwrap_or_default();
        DiagnosticsSummary {
            records: self.records.len(),
            n2_decay: fit(&|r| r.n2_l2),
            pix_decay: fit(&|r| r.pix_l2),
            pert_decay: fit(&|r| r.pert_linf),
            eta_decay: fit(&|r| r.eta_total),
            final_drift: last.drift,
            worst_drift: worst,
            pert_peak: self.records.iter().map(|r| r.pert_linf).fold(0.0, f64::max),
            pert_final: last.pert_linf,
            field_initial_linf: first.pix_linf.max(first.n2_linf),
            field_final_linf: last.pix_linf.max(last.n2_linf),
            n2_initial_l2: first.n2_l2,
            n2_final_l2: last.n2_l2,
            pix_initial_l2: first.pix_l2,
            pix_final_l2: last.pix_l2,
            e_t: self.running_max,
            alpha_range: self.ranges[0],
            beta_range: self.ranges[1],
            eta1_range: self.ranges[2],
            z_round_trip: self.round_trip,
            entropy_c0: self.entropy_c0,
            reference_reliable: self.reliable,
            v_derivatives_accurate: self.records.is_empty() || self.inv_mstar.len() >= ACCURATE_V_NODES.pow(3),
        }
    }
}
