//! Conservation audit and log-linear decay fits.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::kinetic_solver::Totals;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// Relative drift of `∫ρ dx` corrected for boundary inflow.
    pub mass: f64,
    /// Drift of `∫m1 dx` relative to `max(|P0|, M0)`.
    pub momentum: f64,
    /// Relative drift of `∫E dx + ∫Π_x²/4 dx`.
    pub energy: f64,
    /// Absolute drift of `∫n2 dx`.
    pub n2: f64,
}

impl ConservationReport {
    pub fn max_relative(&self) -> f64 {
        self.mass.abs().max(self.momentum.abs()).max(self.energy.abs())
    }
}

pub fn conservation_audit(initial: &Totals, current: &Totals, inflow: &Totals) -> ConservationReport {
    let rel = |now: f64, before: f64, scale: f64| (now - before) / scale.abs().max(f64::MIN_POSITIVE);
    ConservationReport {
        mass: rel(current.mass - inflow.mass, initial.mass, initial.mass),
        momentum: rel(
            current.momentum[0] - inflow.momentum[0],
            initial.momentum[0],
            initial.momentum[0].abs().max(initial.mass.abs()),
        ),
        energy: rel(current.energy() - inflow.kinetic_energy, initial.energy(), initial.energy()),
        n2: current.n2 - inflow.n2 - initial.n2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `-d ln(y)/dt` from least squares.
    pub rate: f64,
    pub intercept: f64,
    pub points: usize,
    /// All samples at or below the floor.
    pub no_signal: bool,
    /// Negative slope over the window after the transient and final value below the window start.
    pub decreasing_after_transient: bool,
}

/// Minimum number of snapshots accepted by [`decay_fit`].
pub const MIN_SNAPSHOTS: usize = 10;

fn log_linear(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = t.iter().zip(y).filter(|(_, v)| **v > 0.0 && v.is_finite()).map(|(a, b)| (*a, b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mt))
}

/// Log-linear fit of `y(t)` ignoring nonpositive samples. `floor` marks the noise level and
/// `transient` is the leading fraction of the time span excluded from the monotonicity flag.
pub fn decay_fit(t: &[f64], y: &[f64], floor: f64, transient: f64) -> Result<DecayFit> {
    if t.len() != y.len() {
        return Err(VpbError::Dimension {
            expected: t.len(),
            found: y.len(),
        });
    }
    if t.len() < MIN_SNAPSHOTS {
        return Err(VpbError::Config(format!("decay fit needs at least {MIN_SNAPSHOTS} snapshots, got {}", t.len())));
    }
    let no_signal = y.iter().all(|v| !(v.abs() > floor));
    let (slope, intercept) = log_linear(t, y).unwrap_or((0.0, f64::NEG_INFINITY));
    let t0 = t[0] + transient * (t[t.len() - 1] - t[0]);
    let start = t.iter().position(|s| *s >= t0).unwrap_or(t.len() - 1);
    let window_slope = log_linear(&t[start..], &y[start..]).map(|s| s.0);
    let decreasing = !no_signal && window_slope.is_some_and(|s| s < 0.0) && y[y.len() - 1] < y[start];
    Ok(DecayFit {
        rate: -slope,
        intercept,
        points: y.iter().filter(|v| **v > 0.0).count(),
        no_signal,
        decreasing_after_transient: decreasing,
    })
}
