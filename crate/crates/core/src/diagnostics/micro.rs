//! Microscopic parts `G = F1 - M`, `G̃ = G - Ḡ`, `Pc F2` and the remainder `Γ`.

use rayon::prelude::*;

use crate::collision::{discrete_maxwellian, invert_l_m, CollisionModel};
use crate::error::{Result, VpbError};
use crate::kinetic_solver::SimulationState;
use crate::maxwellian_projection::ChiBasis;
use crate::phase_space::{dot, raw_moments, VelocityGrid};
use crate::wave_patterns::correction_g_bar;

/// All fields are flattened `cells × nodes`.
#[derive(Clone, Debug)]
pub struct MicroParts {
    pub nodes: usize,
    pub t: f64,
    pub maxwellian: Vec<f64>,
    pub g: Vec<f64>,
    /// `G - Ḡ` when background gradients were supplied.
    pub g_tilde: Option<Vec<f64>>,
    pub pc_f2: Vec<f64>,
    pub n2: Vec<f64>,
    /// Needs a previous snapshot for `G_t`.
    pub gamma: Option<Vec<f64>>,
}

/// Stored `G` for the backward difference in `Γ`.
#[derive(Clone, Debug)]
pub struct MicroSnapshot {
    pub t: f64,
    pub g: Vec<f64>,
}

impl MicroParts {
    pub fn cell<'a>(&self, field: &'a [f64], i: usize) -> &'a [f64] {
        &field[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn snapshot(&self) -> MicroSnapshot {
        MicroSnapshot { t: self.t, g: self.g.clone() }
    }
}

/// Largest collision-invariant moment `|∫ ξ f dv|`, `ξ ∈ {1, v, |v|²/2}`.
pub fn micro_moment_residual(f: &[f64], grid: &VelocityGrid) -> f64 {
    raw_moments(f, grid).map(|m| m.as_array().iter().fold(0.0f64, |a, v| a.max(v.abs()))).unwrap_or(f64::NAN)
}

/// `∂f/∂v_axis` by central differences, one-sided at the edges.
pub(crate) fn dv(f: &[f64], axis: usize, grid: &VelocityGrid, out: &mut [f64]) {
    let n = grid.n();
    let stride = [n * n, n, 1][axis];
    let h = grid.spacing();
    for k in 0..f.len() {
        let j = (k / stride) % n;
        out[k] = if j == 0 {
            (f[k + stride] - f[k]) / h
        } else if j == n - 1 {
            (f[k] - f[k - stride]) / h
        } else {
            (f[k + stride] - f[k - stride]) / (2.0 * h)
        };
    }
}

/// Decompose the current state. `gradients` are the background `(ρ_x, u1_x, θ_x)` per cell.
pub fn micro_parts(state: &SimulationState, gradients: Option<&[[f64; 3]]>, model: &CollisionModel, previous: Option<&MicroSnapshot>) -> Result<MicroParts> {
    let grid = &state.velocity;
    let nodes = grid.len();
    let cells = state.space.cells();
    let w = grid.weights();
    let per_cell: Vec<(Vec<f64>, Vec<f64>, Option<Vec<f64>>, Vec<f64>, f64)> = (0..cells)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let f1 = state.dist.f1_cell(i);
            let f2 = state.dist.f2_cell(i);
            let mom = raw_moments(f1, grid)?;
            let m = discrete_maxwellian(&mom, grid)?;
            let g: Vec<f64> = f1.iter().zip(&m.values).map(|(a, b)| a - b).collect();
            let n2 = dot(f2, w);
            let c = n2 / m.mass;
            let pc: Vec<f64> = f2.iter().zip(&m.values).map(|(a, b)| a - c * b).collect();
            let gt = match gradients {
                Some(gr) => {
                    let basis = ChiBasis::with_weight(&mom.to_state()?, m.values.clone(), grid);
                    let gbar = correction_g_bar(gr[i][2], gr[i][1], &basis, model, grid)?;
                    Some(g.iter().zip(&gbar).map(|(a, b)| a - b).collect())
                }
                None => None,
            };
            Ok((m.values, g, gt, pc, n2))
        })
        .collect::<Result<_>>()?;
    let mut out = MicroParts {
        nodes,
        t: state.time(),
        maxwellian: Vec::with_capacity(cells * nodes),
        g: Vec::with_capacity(cells * nodes),
        g_tilde: gradients.map(|_| Vec::with_capacity(cells * nodes)),
        pc_f2: Vec::with_capacity(cells * nodes),
        n2: Vec::with_capacity(cells),
        gamma: None,
    };
    for (m, g, gt, pc, n2) in per_cell {
        out.maxwellian.extend_from_slice(&m);
        out.g.extend_from_slice(&g);
        if let (Some(dst), Some(src)) = (out.g_tilde.as_mut(), gt) {
            dst.extend_from_slice(&src);
        }
        out.pc_f2.extend_from_slice(&pc);
        out.n2.push(n2);
    }
    if let Some(prev) = previous {
        let dt = out.t - prev.t;
        if prev.g.len() != out.g.len() {
            return Err(VpbError::Dimension {
                expected: out.g.len(),
                found: prev.g.len(),
            });
        }
        if dt > 0.0 {
            out.gamma = Some(gamma(state, &out, prev, dt, model)?);
        }
    }
    Ok(out)
}

/// `Γ = L_M^{-1} P1[G_t + v1 G_x + Π_x ∂_{v1} F2]`; the quadratic term vanishes for BGK.
fn gamma(state: &SimulationState, parts: &MicroParts, prev: &MicroSnapshot, dt: f64, model: &CollisionModel) -> Result<Vec<f64>> {
    let grid = &state.velocity;
    let nodes = grid.len();
    let cells = state.space.cells();
    let dx = state.space.dx();
    let rows: Vec<Vec<f64>> = (0..cells)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(cells - 1));
            let h = (r - l) as f64 * dx;
            let g = parts.cell(&parts.g, i);
            let gp = &prev.g[i * nodes..(i + 1) * nodes];
            let (gl, gr) = (parts.cell(&parts.g, l), parts.cell(&parts.g, r));
            let mut d2 = vec![0.0; nodes];
            dv(state.dist.f2_cell(i), 0, grid, &mut d2);
            let pix = state.field.pix[i];
            let src: Vec<f64> = (0..nodes)
                .map(|k| (g[k] - gp[k]) / dt + grid.nodes()[k][0] * (gr[k] - gl[k]) / h + pix * d2[k])
                .collect();
            let m = parts.cell(&parts.maxwellian, i).to_vec();
            let basis = ChiBasis::with_weight(&state.moments()[i].to_state()?, m, grid);
            invert_l_m(&basis.p1(&src, grid), &basis, model, grid)
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

/// Relative `1/M*`-weighted L² distance between the measured `G` and the leading
/// Chapman-Enskog term `L_M^{-1}[P1(v1 M_x)]` built from central differences of
/// the solution's own `(ρ, u1, θ)`.
pub fn chapman_enskog_error(state: &SimulationState, inv_mstar: &[f64], model: &CollisionModel) -> Result<f64> {
    let grid = &state.velocity;
    let states = state.states()?;
    let cells = states.len();
    let dx = state.space.dx();
    let w = grid.weights();
    let (num, den) = (1..cells - 1)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let (l, r) = (&states[i - 1], &states[i + 1]);
            let grad = [(r.rho - l.rho) / (2.0 * dx), (r.u[0] - l.u[0]) / (2.0 * dx), (r.theta - l.theta) / (2.0 * dx)];
            let f1 = state.dist.f1_cell(i);
            let m = discrete_maxwellian(&raw_moments(f1, grid)?, grid)?;
            let basis = ChiBasis::with_weight(&states[i], m.values.clone(), grid);
            let ce = crate::wave_patterns::chapman_enskog_g(grad, &basis, model, grid)?;
            let mut acc = (0.0, 0.0);
            for k in 0..f1.len() {
                let g = f1[k] - m.values[k];
                acc.0 += (g - ce[k]).powi(2) * w[k] * inv_mstar[k];
                acc.1 += ce[k] * ce[k] * w[k] * inv_mstar[k];
            }
            Ok(acc)
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    if den == 0.0 {
        return Err(VpbError::Config("background has no gradients to compare against".into()));
    }
    Ok((num / den).sqrt())
}

/// `Σ_i Δx Σ_k w_k f²/M*` over derivatives up to total order two (`x` and `v`).
pub fn weighted_h2(field: &[f64], nodes: usize, grid: &VelocityGrid, inv_mstar: &[f64], dx: f64) -> f64 {
    let cells = field.len() / nodes;
    let w = grid.weights();
    let cell = |i: usize| &field[i * nodes..(i + 1) * nodes];
    (0..cells)
        .into_par_iter()
        .map_init(
            || (vec![0.0; nodes], vec![0.0; nodes], vec![0.0; nodes], vec![0.0; nodes]),
            |(fx, fxx, d1, d2), i| {
                let f = cell(i);
                let (l, r) = (i.saturating_sub(1), (i + 1).min(cells - 1));
                let h = (r - l) as f64 * dx;
                let interior = i > 0 && i + 1 < cells;
                for k in 0..nodes {
                    fx[k] = if h > 0.0 { (cell(r)[k] - cell(l)[k]) / h } else { 0.0 };
                    fxx[k] = if interior { (cell(r)[k] - 2.0 * f[k] + cell(l)[k]) / (dx * dx) } else { 0.0 };
                }
                let wsum = |v: &[f64]| -> f64 { v.iter().zip(w).zip(inv_mstar).map(|((a, b), c)| a * a * b * c).sum() };
                let mut acc = wsum(f) + wsum(fx) + wsum(fxx);
                for a in 0..3 {
                    dv(f, a, grid, d1);
                    acc += wsum(d1);
                    for b in a..3 {
                        dv(d1, b, grid, d2);
                        acc += wsum(d2);
                    }
                    dv(fx, a, grid, d1);
                    acc += wsum(d1);
                }
                acc * dx
            },
        )
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic_solver::{initialize, ChargeSeed, ChargeShape, MicroNoise, Perturbation, SolverConfig};
    use crate::maxwellian_projection::FluidState;
    use crate::phase_space::SpaceGrid;
    use crate::wave_patterns::WaveAnsatz;

    fn state(p: &Perturbation) -> (SimulationState, WaveAnsatz) {
        let space = SpaceGrid::new(8, -2.0, 2.0).unwrap();
        let v = VelocityGrid::new(10, [0.0; 3], 1.0, 5.5).unwrap();
        let mut a = WaveAnsatz::with_capacity(&space, 0.0);
        for x in space.centers() {
            a.push(FluidState::new_1d(1.0 + 0.05 * x.tanh(), 0.02 * x, 1.0).unwrap());
        }
        (initialize(space, v, &a, p, &SolverConfig::new(1.0, 1.0)).unwrap(), a)
    }

    #[test]
    fn maxwellian_state_has_no_micro_part() {
        let (st, _) = state(&Perturbation::default());
        let m = micro_parts(&st, Some(&[[0.0; 3]; 8]), &CollisionModel::bgk(1.0), None).unwrap();
        assert!(m.g.iter().all(|v| v.abs() < 1e-14));
        assert!(m.g_tilde.unwrap().iter().all(|v| v.abs() < 1e-14));
        assert!(m.gamma.is_none());
    }

    #[test]
    fn charge_proportional_to_maxwellian_has_no_pc_part() {
        let p = Perturbation {
            charge: Some(ChargeSeed {
                amplitude: 1e-2,
                shape: ChargeShape::Dipole { center: 0.0, width: 0.7 },
            }),
            ..Default::default()
        };
        let (st, _) = state(&p);
        let m = micro_parts(&st, None, &CollisionModel::bgk(1.0), None).unwrap();
        assert!(m.pc_f2.iter().all(|v| v.abs() < 1e-15));
        assert!(m.n2.iter().any(|v| v.abs() > 1e-4));
    }

    #[test]
    fn outputs_are_microscopic() {
        let p = Perturbation {
            micro_noise: Some(MicroNoise { amplitude: 0.2, seed: 3 }),
            charge: Some(ChargeSeed {
                amplitude: 1e-2,
                shape: ChargeShape::Dipole { center: 0.0, width: 0.7 },
            }),
            ..Default::default()
        };
        let (mut st, a) = state(&p);
        let cfg = SolverConfig::new(1.0, 1.0);
        let model = cfg.collision;
        let grads = crate::kinetic_solver::difference_gradients(&a, st.space.dx());
        let first = micro_parts(&st, Some(&grads), &model, None).unwrap();
        let dt = st.next_dt(&cfg);
        st.step(dt, &cfg).unwrap();
        let m = micro_parts(&st, Some(&grads), &model, Some(&first.snapshot())).unwrap();
        let g = &st.velocity;
        let gamma = m.gamma.as_ref().unwrap();
        for i in 0..8 {
            assert!(micro_moment_residual(m.cell(&m.g, i), g) < 1e-8);
            assert!(micro_moment_residual(m.cell(m.g_tilde.as_ref().unwrap(), i), g) < 1e-8);
            assert!(micro_moment_residual(m.cell(gamma, i), g) < 1e-8);
            assert!(dot(m.cell(&m.pc_f2, i), g.weights()).abs() < 1e-10);
        }
    }
}
