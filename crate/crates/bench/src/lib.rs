//! Shared fixtures for the criterion benchmarks in `benches/`.

use vpb_core::experiments::{preset, prepare, PresetKind};
use vpb_core::kinetic_solver::{SimulationState, SolverConfig};
use vpb_core::maxwellian_projection::maxwellian;
use vpb_core::{FluidState, VelocityGrid};

/// A slightly non-equilibrium distribution on an `n³` grid.
pub fn skewed_distribution(n: usize) -> (VelocityGrid, FluidState, Vec<f64>) {
    let grid = VelocityGrid::new(n, [0.0; 3], 1.0, 6.0).unwrap();
    let state = FluidState::new(1.1, [0.2, -0.1, 0.05], 0.9).unwrap();
    let mut f = maxwellian(&state, &grid);
    for (x, v) in f.iter_mut().zip(grid.nodes()) {
        *x *= 1.0 + 0.05 * v[0] * v[1] - 0.02 * v[2];
    }
    (grid, state, f)
}

/// The two-shock preset on a reduced grid, ready to step.
pub fn small_two_shock(cells: usize, nv: usize) -> (SimulationState, SolverConfig) {
    let mut cfg = preset(PresetKind::TwoShockStability);
    cfg.grid.cells = cells;
    cfg.grid.nv = nv;
    let prepared = prepare(&cfg).unwrap();
    (prepared.state, cfg.solver)
}
