//! Experiment presets, versioned TOML configuration and run orchestration.
//!
//! A run directory receives `config.toml` (the fully resolved configuration),
//! `diagnostics.csv`, `ansatz_initial.csv`, `final.ckpt` and `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsSummary, Monitor, MonitorConfig};
use crate::error::{Result, VpbError};
use crate::kinetic_solver::{
    initialize, perturbed_states, velocity_grid_for, write_checkpoint, BoundaryMode, ChargeSeed, ChargeShape, MacroBump, MicroNoise, Perturbation,
    SimulationState, SolverConfig,
};
use crate::maxwellian_projection::FluidState;
use crate::phase_space::SpaceGrid;
use crate::wave_patterns::euler::sound_speed;
use crate::wave_patterns::shock::{check_lax, jump_strength, rh_residual};
use crate::wave_patterns::{fit_shifts, hugoniot_connect, ns_shock_profile, Background, Family, RarefactionWave, ShockData, TwoShockAnsatz, WaveAnsatz};

pub const SCHEMA_VERSION: u32 = 1;

/// Rankine-Hugoniot residual accepted for user-supplied shock states.
pub const RH_TOLERANCE: f64 = 1e-10;

/// Ratio of the two shock strengths beyond which they are reported as not of the same order.
pub const STRENGTH_RATIO_WARNING: f64 = 10.0;

/// Zero-mass residual required of the fitted shifts.
pub const ZERO_MASS_LIMIT: f64 = 1e-10;

/// Constant `C` in the weight bound `α, β ∈ (1 - C δ, 1]`.
pub const WEIGHT_BOUND_CONSTANT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    RarefactionStability,
    TwoShockStability,
    NeutralityDecay,
    EquilibriumSanity,
}

impl PresetKind {
    pub const ALL: [PresetKind; 4] = [
        PresetKind::RarefactionStability,
        PresetKind::TwoShockStability,
        PresetKind::NeutralityDecay,
        PresetKind::EquilibriumSanity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::RarefactionStability => "rarefaction_stability",
            PresetKind::TwoShockStability => "two_shock_stability",
            PresetKind::NeutralityDecay => "neutrality_decay",
            PresetKind::EquilibriumSanity => "equilibrium_sanity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| VpbError::Config(format!("unknown preset `{name}`, expected one of {}", Self::ALL.map(|k| k.name()).join(", "))))
    }

    pub fn description(self) -> &'static str {
        match self {
            PresetKind::RarefactionStability => "smoothed 3-rarefaction with a Gaussian acoustic pulse, micro noise and a charge dipole; perturbation and field must decay",
            PresetKind::TwoShockStability => "1-shock plus 3-shock with nonzero excess mass; shifts are fitted and perturbations tracked against the shifted ansatz",
            PresetKind::NeutralityDecay => "periodic uniform gas with a sinusoidal charge seed; n2 and the field must decay",
            PresetKind::EquilibriumSanity => "uniform Maxwellian without charge; the state must stay fixed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub rho: f64,
    #[serde(default)]
    pub u1: f64,
    pub theta: f64,
}

impl StateSpec {
    pub fn state(&self) -> Result<FluidState> {
        FluidState::new_1d(self.rho, self.u1, self.theta)
    }
}

impl From<FluidState> for StateSpec {
    fn from(s: FluidState) -> Self {
        Self {
            rho: s.rho,
            u1: s.u[0],
            theta: s.theta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum WaveSpec {
    Constant {
        state: StateSpec,
    },
    /// 3-rarefaction from `left`, given by its strength or its right state.
    Rarefaction {
        left: StateSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strength: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        right: Option<StateSpec>,
    },
    /// 1-shock then 3-shock from `left`, given by strengths or by the middle and right states.
    TwoShock {
        left: StateSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strengths: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        middle: Option<StateSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        right: Option<StateSpec>,
        /// Profile positions at `t = 0`.
        #[serde(default)]
        centers: [f64; 2],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cells: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Velocity nodes per axis.
    pub nv: usize,
    /// Half width of the velocity box in thermal units `sqrt(R θ_max)`.
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub preset: PresetKind,
    pub wave: WaveSpec,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub diagnostics: MonitorConfig,
}

/// Default configuration of a preset.
pub fn preset(kind: PresetKind) -> ExperimentConfig {
    let unit = StateSpec {
        rho: 1.0,
        u1: 0.0,
        theta: 1.0,
    };
    match kind {
        PresetKind::EquilibriumSanity => {
            let mut solver = SolverConfig::new(1.0, 1.0);
            solver.dt = Some(0.01);
            ExperimentConfig {
                schema_version: SCHEMA_VERSION,
                preset: kind,
                wave: WaveSpec::Constant {
                    state: StateSpec { u1: 0.1, ..unit },
                },
                grid: GridSpec {
                    cells: 32,
                    x_lo: -8.0,
                    x_hi: 8.0,
                    nv: 12,
                    half_width: 6.0,
                },
                solver,
                perturbation: Perturbation::default(),
                diagnostics: MonitorConfig {
                    every: 1,
                    ..Default::default()
                },
            }
        }
        PresetKind::NeutralityDecay => {
            let mut solver = SolverConfig::new(20.0, 1.0);
            solver.boundary = BoundaryMode::Periodic;
            ExperimentConfig {
                schema_version: SCHEMA_VERSION,
                preset: kind,
                wave: WaveSpec::Constant { state: unit },
                grid: GridSpec {
                    cells: 64,
                    x_lo: 0.0,
                    x_hi: 20.0,
                    nv: 16,
                    half_width: 6.0,
                },
                solver,
                perturbation: Perturbation {
                    charge: Some(ChargeSeed {
                        amplitude: 0.05,
                        shape: ChargeShape::Sine { modes: 1 },
                    }),
                    ..Default::default()
                },
                diagnostics: MonitorConfig {
                    every: 5,
                    ..Default::default()
                },
            }
        }
        PresetKind::RarefactionStability => {
            let mut solver = SolverConfig::new(100.0, 20.0);
            solver.cfl = 0.95;
            // right-moving acoustic pulse on the left state; largest component 0.02
            let c = sound_speed(1.0);
            let eps = 0.02 / c;
            ExperimentConfig {
                schema_version: SCHEMA_VERSION,
                preset: kind,
                wave: WaveSpec::Rarefaction {
                    left: unit,
                    strength: Some(0.2),
                    right: None,
                },
                grid: GridSpec {
                    cells: 512,
                    x_lo: -10.0,
                    x_hi: 140.0,
                    nv: 24,
                    half_width: 5.0,
                },
                solver,
                perturbation: Perturbation {
                    bump: Some(MacroBump {
                        amplitude: [eps, c * eps, 2.0 / 3.0 * eps],
                        center: 0.0,
                        width: 2.0,
                    }),
                    micro_noise: Some(MicroNoise { amplitude: 0.01, seed: 1 }),
                    charge: Some(ChargeSeed {
                        amplitude: 1e-3,
                        shape: ChargeShape::Dipole { center: 0.0, width: 2.0 },
                    }),
                    g_bar: true,
                },
                diagnostics: MonitorConfig {
                    every: 25,
                    ..Default::default()
                },
            }
        }
        PresetKind::TwoShockStability => {
            let mut solver = SolverConfig::new(20.0, 5.0);
            solver.dt = Some(0.02);
            ExperimentConfig {
                schema_version: SCHEMA_VERSION,
                preset: kind,
                wave: WaveSpec::TwoShock {
                    left: unit,
                    strengths: Some([0.2, 0.2]),
                    middle: None,
                    right: None,
                    centers: [-5.0, 5.0],
                },
                grid: GridSpec {
                    cells: 256,
                    x_lo: -45.0,
                    x_hi: 45.0,
                    nv: 24,
                    half_width: 6.0,
                },
                solver,
                perturbation: Perturbation {
                    bump: Some(MacroBump {
                        amplitude: [0.02, 0.0, 0.0],
                        center: 0.0,
                        width: 2.0,
                    }),
                    micro_noise: None,
                    charge: Some(ChargeSeed {
                        amplitude: 1e-3,
                        shape: ChargeShape::Dipole { center: 0.0, width: 2.0 },
                    }),
                    g_bar: false,
                },
                diagnostics: MonitorConfig {
                    every: 20,
                    ..Default::default()
                },
            }
        }
    }
}

fn shock_from_states(left: FluidState, right: FluidState, family: Family) -> Result<ShockData> {
    let (cl, cr) = (left.conserved_1d(), right.conserved_1d());
    if (cr[0] - cl[0]).abs() < 1e-14 {
        return Err(VpbError::Inadmissible("shock states have equal density".into()));
    }
    let speed = (cr[1] - cl[1]) / (cr[0] - cl[0]);
    let res = rh_residual(&left, &right, speed).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if res > RH_TOLERANCE {
        return Err(VpbError::Inadmissible(format!(
            "Rankine-Hugoniot conditions violated for the {}-shock: residual {res:e}",
            family.index() + 1
        )));
    }
    let shock = ShockData {
        family,
        left,
        right,
        speed,
        strength: jump_strength(&left, &right),
    };
    check_lax(&shock)?;
    Ok(shock)
}

/// Shocks of a two-shock wave specification.
pub fn two_shocks(wave: &WaveSpec) -> Result<(ShockData, ShockData)> {
    let WaveSpec::TwoShock {
        left, strengths, middle, right, ..
    } = wave
    else {
        return Err(VpbError::Config("not a two-shock wave".into()));
    };
    let left = left.state()?;
    let (s1, s3) = match (strengths, middle, right) {
        (Some([d1, d3]), None, None) => {
            let s1 = hugoniot_connect(&left, Family::One, *d1)?;
            let s3 = hugoniot_connect(&s1.right, Family::Three, *d3)?;
            (s1, s3)
        }
        (None, Some(m), Some(r)) => {
            let m = m.state()?;
            (shock_from_states(left, m, Family::One)?, shock_from_states(m, r.state()?, Family::Three)?)
        }
        _ => {
            return Err(VpbError::Config(
                "two_shock wave needs either `strengths` or both `middle` and `right`".into(),
            ))
        }
    };
    let ratio = s1.strength.max(s3.strength) / s1.strength.min(s3.strength);
    if ratio > STRENGTH_RATIO_WARNING {
        log::warn!("shock strengths {:.3e} and {:.3e} are not of the same order", s1.strength, s3.strength);
    }
    Ok((s1, s3))
}

/// Rarefaction of a rarefaction wave specification.
pub fn rarefaction(wave: &WaveSpec) -> Result<RarefactionWave> {
    let WaveSpec::Rarefaction { left, strength, right } = wave else {
        return Err(VpbError::Config("not a rarefaction wave".into()));
    };
    match (strength, right) {
        (Some(d), None) => RarefactionWave::from_strength(left.state()?, *d),
        (None, Some(r)) => RarefactionWave::new(left.state()?, r.state()?),
        _ => Err(VpbError::Config("rarefaction wave needs exactly one of `strength` or `right`".into())),
    }
}

impl ExperimentConfig {
    /// Checks that do not need a full setup.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(VpbError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.solver.validate()?;
        if !(self.solver.t_end > 0.0) {
            return Err(VpbError::Config("solver.t_end must be > 0".into()));
        }
        SpaceGrid::new(self.grid.cells, self.grid.x_lo, self.grid.x_hi)?;
        let expected = match self.preset {
            PresetKind::RarefactionStability => "rarefaction",
            PresetKind::TwoShockStability => "two_shock",
            PresetKind::NeutralityDecay | PresetKind::EquilibriumSanity => "constant",
        };
        let found = match self.wave {
            WaveSpec::Constant { .. } => "constant",
            WaveSpec::Rarefaction { .. } => "rarefaction",
            WaveSpec::TwoShock { .. } => "two_shock",
        };
        if expected != found {
            return Err(VpbError::Config(format!(
                "preset {} needs a `{expected}` wave, got `{found}`",
                self.preset.name()
            )));
        }
        match &self.wave {
            WaveSpec::Constant { state } => {
                state.state()?;
            }
            WaveSpec::Rarefaction { .. } => {
                rarefaction(&self.wave)?;
            }
            WaveSpec::TwoShock { .. } => {
                two_shocks(&self.wave)?;
            }
        }
        if self.preset == PresetKind::NeutralityDecay && self.solver.boundary != BoundaryMode::Periodic {
            return Err(VpbError::Config("neutrality_decay runs on a periodic domain".into()));
        }
        if matches!(self.perturbation.charge.as_ref().map(|c| &c.shape), Some(ChargeShape::Sine { .. })) && self.solver.boundary != BoundaryMode::Periodic {
            return Err(VpbError::Config("a sine charge seed needs the periodic boundary".into()));
        }
        Ok(())
    }
}

fn collect_paths(v: &toml::Value, prefix: &str, out: &mut Vec<(String, String)>) {
    if let toml::Value::Table(t) = v {
        for (k, x) in t {
            let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match x {
                toml::Value::Table(_) => collect_paths(x, &p, out),
                _ => out.push((p, x.to_string())),
            }
        }
    }
}

fn has_path(v: &toml::Value, path: &str) -> bool {
    let mut cur = v;
    for k in path.split('.') {
        match cur.get(k) {
            Some(x) => cur = x,
            None => return false,
        }
    }
    true
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| VpbError::Config(e.to_string()))?;
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| VpbError::Config(e.to_string()))?;
    cfg.validate()?;
    let full = toml::Value::try_from(&cfg).map_err(|e| VpbError::Config(e.to_string()))?;
    let mut paths = Vec::new();
    collect_paths(&full, "", &mut paths);
    for (p, v) in paths {
        if !has_path(&raw, &p) {
            log::info!("default {p} = {v}");
        }
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| VpbError::io(path, e))?;
    parse_config_str(&text)
}

pub fn emit_config(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| VpbError::Config(e.to_string()))
}

/// Everything needed to start a run.
pub struct Prepared {
    pub state: SimulationState,
    pub background: Background,
    /// Sampled background at the initial time (unshifted for two-shock runs).
    pub initial_ansatz: WaveAnsatz,
    pub alphas: Option<[f64; 3]>,
    pub zero_mass_residual: Option<f64>,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let space = SpaceGrid::new(cfg.grid.cells, cfg.grid.x_lo, cfg.grid.x_hi)?;
    let nu0 = cfg.solver.collision.nu0;
    let (background, ansatz, alphas, residual) = match &cfg.wave {
        WaveSpec::Constant { state } => {
            let s = state.state()?;
            (Background::Constant(s), WaveAnsatz::constant(&s, &space), None, None)
        }
        WaveSpec::Rarefaction { .. } => {
            let r = rarefaction(&cfg.wave)?;
            let a = r.ansatz(&space, 0.0)?;
            (Background::Rarefaction(r), a, None, None)
        }
        WaveSpec::TwoShock { centers, .. } => {
            let (s1, s3) = two_shocks(&cfg.wave)?;
            let base = TwoShockAnsatz::new(ns_shock_profile(&s1, nu0)?, ns_shock_profile(&s3, nu0)?, [0.0; 3], *centers, nu0)?;
            let a = base.sample_unshifted(&space, 0.0)?;
            let u0: Vec<[f64; 3]> = perturbed_states(&a, cfg.perturbation.bump.as_ref(), &space)?
                .iter()
                .map(|s| s.conserved_1d())
                .collect();
            let (shifted, res) = fit_shifts(&u0, &base, &space)?;
            let alphas = shifted.alphas;
            (Background::TwoShock(shifted), a, Some(alphas), Some(res))
        }
    };
    let velocity = velocity_grid_for(&ansatz, cfg.grid.nv, cfg.grid.half_width)?;
    let state = initialize(space, velocity, &ansatz, &cfg.perturbation, &cfg.solver)?;
    Ok(Prepared {
        state,
        background,
        initial_ansatz: ansatz,
        alphas,
        zero_mass_residual: residual,
    })
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Write `snapshot_<step>.ckpt` every this many steps.
    pub snapshot_every: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: PresetKind,
    pub status: String,
    pub steps: u64,
    pub t_end: f64,
    pub wall_seconds: f64,
    pub alphas: Option<[f64; 3]>,
    pub zero_mass_residual: Option<f64>,
    pub checks: Vec<Check>,
    pub diagnostics: DiagnosticsSummary,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, value: f64, threshold: f64, passed: bool) -> Check {
    Check {
        name: name.into(),
        passed,
        value,
        threshold,
    }
}

/// Invariant suite of a finished run.
pub fn invariant_checks(cfg: &ExperimentConfig, prepared_residual: Option<f64>, background: &Background, d: &DiagnosticsSummary) -> Vec<Check> {
    let mut out = Vec::new();
    let drift_limit = if cfg.preset == PresetKind::EquilibriumSanity { 1e-12 } else { 1e-8 };
    let w = &d.worst_drift;
    let (wm, wp, we, wn) = (w.mass.abs(), w.momentum.abs(), w.energy.abs(), w.n2.abs());
    out.push(check("mass drift", wm, drift_limit, wm <= drift_limit));
    out.push(check("momentum drift", wp, drift_limit, wp <= drift_limit));
    // The strong seed of the neutrality preset makes the second-order splitting
    // error in the kinetic/field energy exchange visible.
    let energy_limit = if cfg.preset == PresetKind::NeutralityDecay { 1e-5 } else { drift_limit };
    out.push(check("energy drift", we, energy_limit, we <= energy_limit));
    out.push(check("n2 drift", wn, 1e-12, wn <= 1e-12));
    match cfg.preset {
        PresetKind::EquilibriumSanity => {}
        PresetKind::NeutralityDecay => {
            let rate = d.n2_decay.map_or(f64::NAN, |f| f.rate);
            out.push(check("n2 decay rate", rate, 0.0, rate > 0.0));
            let rate = d.pix_decay.map_or(f64::NAN, |f| f.rate);
            out.push(check("field decay rate", rate, 0.0, rate > 0.0));
            let ratio = d.n2_final_l2 / d.n2_initial_l2;
            out.push(check("n2 L2 final/initial", ratio, 0.1, ratio <= 0.1));
            let ratio = d.pix_final_l2 / d.pix_initial_l2;
            out.push(check("field L2 final/initial", ratio, 0.1, ratio <= 0.1));
        }
        PresetKind::RarefactionStability => {
            let ratio = d.pert_final / d.pert_peak;
            out.push(check("perturbation final/peak", ratio, 1.0 / 3.0, ratio <= 1.0 / 3.0));
            let fr = d.field_final_linf / d.field_initial_linf;
            out.push(check("field final/initial", fr, 0.1, fr <= 0.1));
            let dec = d.eta_decay.is_some_and(|f| f.decreasing_after_transient);
            out.push(check("entropy decreasing after transient", dec as u8 as f64, 1.0, dec));
        }
        PresetKind::TwoShockStability => {
            let r = prepared_residual.unwrap_or(f64::NAN);
            out.push(check("zero-mass residual", r, ZERO_MASS_LIMIT, r <= ZERO_MASS_LIMIT));
            let dec = d.pert_decay.is_some_and(|f| f.decreasing_after_transient);
            out.push(check("perturbation decreasing after transient", dec as u8 as f64, 1.0, dec));
            let lo = 1.0 - WEIGHT_BOUND_CONSTANT * background.strength();
            let ok = |r: [f64; 2]| r[0] > lo && r[1] <= 1.0;
            out.push(check("alpha in (1 - C delta, 1]", d.alpha_range[0], lo, ok(d.alpha_range)));
            out.push(check("beta in (1 - C delta, 1]", d.beta_range[0], lo, ok(d.beta_range)));
            let e = d.eta1_range;
            out.push(check("eta1 in [1, e]", e[1], std::f64::consts::E, e[0] >= 1.0 && e[1] <= std::f64::consts::E));
        }
    }
    out
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| VpbError::Config(e.to_string()))?;
    fs::write(path, text).map_err(|e| VpbError::io(path, e))
}

fn write_csv_file(monitor: &Monitor, path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| VpbError::io(path, e))?;
    monitor.write_csv(std::io::BufWriter::new(f))
}

/// Run a configured experiment and write its artifacts. On a solver abort the
/// diagnostics gathered so far and an `abort.ckpt` dump are kept.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let clock = Instant::now();
    let dir = &opts.out_dir;
    fs::create_dir_all(dir).map_err(|e| VpbError::io(dir, e))?;
    let echo = dir.join("config.toml");
    fs::write(&echo, emit_config(cfg)?).map_err(|e| VpbError::io(&echo, e))?;

    let Prepared {
        mut state,
        background,
        initial_ansatz,
        alphas,
        zero_mass_residual,
    } = prepare(cfg)?;
    let ansatz_path = dir.join("ansatz_initial.csv");
    initial_ansatz.write_csv(fs::File::create(&ansatz_path).map_err(|e| VpbError::io(&ansatz_path, e))?)?;
    if let Some(a) = alphas {
        log::info!("shifts alpha = ({:.6e}, {:.6e}, {:.6e}), zero-mass residual {:.3e}", a[0], a[1], a[2], zero_mass_residual.unwrap_or(0.0));
    }

    let mut monitor = Monitor::new(cfg.diagnostics.clone(), background.clone(), &state, cfg.solver.collision)?;
    let t_end = cfg.solver.t_end;
    let snapshot = opts.snapshot_every;
    let boundary = cfg.solver.boundary;
    let result = state.run(&cfg.solver, |s| {
        let last = t_end - s.time() <= 1e-12 * t_end.max(1.0);
        monitor.observe(s, s.step == 0 || last)?;
        if let Some(k) = snapshot {
            if k > 0 && s.step > 0 && s.step % k == 0 {
                write_checkpoint(s, boundary, &dir.join(format!("snapshot_{:06}.ckpt", s.step)))?;
            }
        }
        Ok(())
    });
    let csv_path = dir.join("diagnostics.csv");
    write_csv_file(&monitor, &csv_path)?;
    if let Err(e) = result {
        let dump = dir.join("abort.ckpt");
        if let Err(w) = write_checkpoint(&state, boundary, &dump) {
            log::error!("could not write state dump: {w}");
        }
        return Err(e);
    }
    write_checkpoint(&state, boundary, &dir.join("final.ckpt"))?;

    let diagnostics = monitor.summary();
    let checks = invariant_checks(cfg, zero_mass_residual, &background, &diagnostics);
    let passed = checks.iter().all(|c| c.passed);
    let summary = RunSummary {
        preset: cfg.preset,
        status: if passed { "pass" } else { "fail" }.into(),
        steps: state.step,
        t_end: state.time(),
        wall_seconds: clock.elapsed().as_secs_f64(),
        alphas,
        zero_mass_residual,
        checks,
        diagnostics,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for k in PresetKind::ALL {
            let cfg = preset(k);
            let text = emit_config(&cfg).unwrap();
            let back = parse_config_str(&text).unwrap();
            assert_eq!(back, cfg, "{}", k.name());
        }
    }

    #[test]
    fn minimal_rarefaction_config_is_valid() {
        let text = r#"
schema_version = 1
preset = "rarefaction_stability"

[wave]
kind = "rarefaction"
left = { rho = 1.0, u1 = 0.0, theta = 1.0 }
strength = 0.1

[grid]
cells = 64
x_lo = -10.0
x_hi = 10.0
nv = 12
half_width = 6.0

[solver]
t_end = 1.0
"#;
        let cfg = parse_config_str(text).unwrap();
        assert_eq!(cfg.solver.cfl, 0.5);
        assert_eq!(cfg.solver.collision.nu0, 1.0);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let mut text = emit_config(&preset(PresetKind::EquilibriumSanity)).unwrap();
        text = text.replace("[grid]", "[grid]\ncellz = 3");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("cellz") && err.contains("cells"), "{err}");
    }

    #[test]
    fn lax_violation_is_reported() {
        let mut cfg = preset(PresetKind::TwoShockStability);
        // an expansive jump along the 1-Hugoniot locus: swap the states of a valid 1-shock
        let s1 = hugoniot_connect(&FluidState::new_1d(1.0, 0.0, 1.0).unwrap(), Family::One, 0.2).unwrap();
        let s3 = hugoniot_connect(&s1.left, Family::Three, 0.2).unwrap();
        cfg.wave = WaveSpec::TwoShock {
            left: s1.right.into(),
            strengths: None,
            middle: Some(s1.left.into()),
            right: Some(s3.right.into()),
            centers: [0.0, 0.0],
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.to_lowercase().contains("lax"), "{err}");
    }

    #[test]
    fn rh_violation_is_reported() {
        let mut cfg = preset(PresetKind::TwoShockStability);
        cfg.wave = WaveSpec::TwoShock {
            left: StateSpec { rho: 1.0, u1: 0.0, theta: 1.0 },
            strengths: None,
            middle: Some(StateSpec { rho: 1.1, u1: 0.0, theta: 1.0 }),
            right: Some(StateSpec { rho: 1.0, u1: 0.0, theta: 1.0 }),
            centers: [0.0, 0.0],
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("Rankine-Hugoniot"), "{err}");
    }

    #[test]
    fn r3_violation_is_reported() {
        let mut cfg = preset(PresetKind::RarefactionStability);
        cfg.wave = WaveSpec::Rarefaction {
            left: StateSpec { rho: 1.0, u1: 0.0, theta: 1.0 },
            strength: None,
            right: Some(StateSpec { rho: 0.9, u1: 0.3, theta: 1.0 }),
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = parse_config(Path::new("/nonexistent/dir/run.toml")).unwrap_err().to_string();
        assert!(err.contains("/nonexistent/dir/run.toml"), "{err}");
    }

    #[test]
    fn preset_and_wave_must_agree() {
        let mut cfg = preset(PresetKind::EquilibriumSanity);
        cfg.preset = PresetKind::RarefactionStability;
        assert!(cfg.validate().is_err());
    }
}
