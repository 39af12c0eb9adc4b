//! Linearized collision operators, their inverses, transport coefficients,
//! the BGK relaxation stage and a hard-sphere quadrature oracle.
//!
//! The working model is BGK with `nu = nu0 rho`:
//! `L_M g = -nu P1 g`, `N_M h = -nu Pc h`. The relaxation stage drives `F1`
//! toward the discrete Maxwellian whose grid moments equal those of `F1`.

use nalgebra::{Matrix5, Vector5};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::maxwellian_projection::{tensor_product, ChiBasis, FluidState};
use crate::phase_space::{dot, raw_moments, RawMoments, VelocityGrid};
use crate::GAS_CONSTANT;

/// Tolerance used to decide that an input lies in the microscopic subspace.
pub const MICRO_TOLERANCE: f64 = 1e-8;

/// Largest grid accepted by [`hard_sphere_q_oracle`].
pub const ORACLE_MAX_NODES: usize = 12 * 12 * 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CollisionMode {
    #[default]
    Bgk,
    HardSphereOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionModel {
    pub mode: CollisionMode,
    pub nu0: f64,
}

impl Default for CollisionModel {
    fn default() -> Self {
        Self {
            mode: CollisionMode::Bgk,
            nu0: 1.0,
        }
    }
}

impl CollisionModel {
    pub fn bgk(nu0: f64) -> Self {
        Self {
            mode: CollisionMode::Bgk,
            nu0,
        }
    }

    /// Collision frequency `nu0 rho`.
    pub fn nu(&self, rho: f64) -> f64 {
        self.nu0 * rho
    }
}

pub fn l_m(g: &[f64], basis: &ChiBasis, model: &CollisionModel, grid: &VelocityGrid) -> Vec<f64> {
    let nu = model.nu(basis.state().rho);
    basis.p1(g, grid).into_iter().map(|x| -nu * x).collect()
}

pub fn n_m(h: &[f64], basis: &ChiBasis, model: &CollisionModel, grid: &VelocityGrid) -> Vec<f64> {
    let nu = model.nu(basis.state().rho);
    basis.pc(h, grid).into_iter().map(|x| -nu * x).collect()
}

fn m_norm(g: &[f64], basis: &ChiBasis, grid: &VelocityGrid) -> f64 {
    crate::maxwellian_projection::inner_product(g, g, basis.weight(), grid)
        .map(f64::sqrt)
        .unwrap_or(1.0)
}

/// `L_M^{-1}` on the microscopic subspace; rejects inputs with a macroscopic part.
pub fn invert_l_m(g: &[f64], basis: &ChiBasis, model: &CollisionModel, grid: &VelocityGrid) -> Result<Vec<f64>> {
    let residual = basis.macro_norm(g, grid);
    let tolerance = MICRO_TOLERANCE * m_norm(g, basis, grid).max(1.0);
    if residual > tolerance {
        return Err(VpbError::ProjectionViolation { residual, tolerance });
    }
    let nu = model.nu(basis.state().rho);
    Ok(g.iter().map(|x| -x / nu).collect())
}

/// `N_M^{-1}` on the complement of `span(M)`.
pub fn invert_n_m(h: &[f64], basis: &ChiBasis, model: &CollisionModel, grid: &VelocityGrid) -> Result<Vec<f64>> {
    let residual = basis.density_norm(h, grid);
    let tolerance = MICRO_TOLERANCE * m_norm(h, basis, grid).max(1.0);
    if residual > tolerance {
        return Err(VpbError::ProjectionViolation { residual, tolerance });
    }
    let nu = model.nu(basis.state().rho);
    Ok(h.iter().map(|x| -x / nu).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportCoefficients {
    /// Viscosity.
    pub mu: f64,
    /// Heat conductivity.
    pub kappa: f64,
    /// Diffusion coefficient of the charge difference.
    pub kappa1: f64,
}

/// Closed forms of the BGK transport coefficients: `mu = p/nu`, `kappa = (5/2) R p/nu`, `kappa1 = rho R theta/nu`.
pub fn transport_closed_form(theta: f64, nu0: f64) -> TransportCoefficients {
    TransportCoefficients {
        mu: GAS_CONSTANT * theta / nu0,
        kappa: 2.5 * GAS_CONSTANT * GAS_CONSTANT * theta / nu0,
        kappa1: GAS_CONSTANT * theta / nu0,
    }
}

/// Transport coefficients from their defining velocity integrals through the inverse operators.
pub fn transport_coefficients(state: &FluidState, model: &CollisionModel, grid: &VelocityGrid) -> Result<TransportCoefficients> {
    let basis = ChiBasis::new(state, grid);
    let m = basis.weight();
    let rt = GAS_CONSTANT * state.theta;
    let nodes = grid.nodes();
    let w = grid.weights();
    let c = |v: &[f64; 3], a: usize| v[a] - state.u[a];

    // Shear: M_x = (v2 - u2)/(R theta) M for unit u2_x; stress = ∫ c1 c2 L^{-1}[P1(c1 M_x)].
    let shear: Vec<f64> = nodes.iter().zip(m).map(|(v, mv)| c(v, 0) * c(v, 1) / rt * mv).collect();
    let g = invert_l_m(&basis.p1(&shear, grid), &basis, model, grid)?;
    let stress: f64 = nodes.iter().zip(&g).zip(w).map(|((v, gv), wv)| c(v, 0) * c(v, 1) * gv * wv).sum();
    let mu = -stress;

    // Heat: M_x = (|c|^2/(2 R theta^2) - 3/(2 theta)) M for unit theta_x; flux = ∫ |c|^2/2 c1 L^{-1}[P1(c1 M_x)].
    let heat: Vec<f64> = nodes
        .iter()
        .zip(m)
        .map(|(v, mv)| {
            let c2 = c(v, 0).powi(2) + c(v, 1).powi(2) + c(v, 2).powi(2);
            c(v, 0) * (c2 / (2.0 * rt * state.theta) - 1.5 / state.theta) * mv
        })
        .collect();
    let g = invert_l_m(&basis.p1(&heat, grid), &basis, model, grid)?;
    let flux: f64 = nodes
        .iter()
        .zip(&g)
        .zip(w)
        .map(|((v, gv), wv)| {
            let c2 = c(v, 0).powi(2) + c(v, 1).powi(2) + c(v, 2).powi(2);
            0.5 * c2 * c(v, 0) * gv * wv
        })
        .sum();
    let kappa = -flux;

    // Charge diffusion: kappa1 = -∫ c1 N_M^{-1}[c1 M].
    let drift: Vec<f64> = nodes.iter().zip(m).map(|(v, mv)| c(v, 0) * mv).collect();
    let h = invert_n_m(&basis.pc(&drift, grid), &basis, model, grid)?;
    let kappa1 = -nodes.iter().zip(&h).zip(w).map(|((v, hv), wv)| c(v, 0) * hv * wv).sum::<f64>();

    Ok(TransportCoefficients { mu, kappa, kappa1 })
}

/// Monomials `c1^a c2^b c3^c` making up the basis `(1, c1, c2, c3, |c|^2)`.
const BASIS_MONOMIALS: [&[[usize; 3]]; 5] = [
    &[[0, 0, 0]],
    &[[1, 0, 0]],
    &[[0, 1, 0]],
    &[[0, 0, 1]],
    &[[2, 0, 0], [0, 2, 0], [0, 0, 2]],
];

/// Discrete Maxwellian `exp(lambda . phi(c))` matched to given grid moments.
#[derive(Clone, Debug)]
pub struct DiscreteMaxwellian {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// `∫ M dv` on the grid.
    pub mass: f64,
}

/// Newton solve on the five exponent parameters so that the grid moments of
/// the returned Maxwellian equal `target` to relative tolerance `1e-13`.
///
/// The Maxwellian factorizes over the three axes, so all Jacobian entries are
/// products of one-dimensional sums and each iteration costs `O(n)`.
pub fn discrete_maxwellian(target: &RawMoments, grid: &VelocityGrid) -> Result<DiscreteMaxwellian> {
    let mut out = vec![0.0; grid.len()];
    let (iterations, residual, mass) = discrete_maxwellian_into(target, grid, &mut out)?;
    Ok(DiscreteMaxwellian {
        values: out,
        iterations,
        residual,
        mass,
    })
}

pub(crate) fn discrete_maxwellian_into(target: &RawMoments, grid: &VelocityGrid, out: &mut [f64]) -> Result<(usize, f64, f64)> {
    const TOL: f64 = 1e-13;
    const MAX_IT: usize = 30;
    let guess = target.to_state()?;
    let u0 = guess.u;
    let s = (GAS_CONSTANT * guess.theta).sqrt();
    let rho = target.rho;

    // Target moments in the scaled basis.
    let m = target.momentum;
    let tgt = Vector5::new(
        rho,
        (m[0] - u0[0] * rho) / s,
        (m[1] - u0[1] * rho) / s,
        (m[2] - u0[2] * rho) / s,
        (2.0 * target.energy - 2.0 * (u0[0] * m[0] + u0[1] * m[1] + u0[2] * m[2])
            + (u0[0] * u0[0] + u0[1] * u0[1] + u0[2] * u0[2]) * rho)
            / (s * s),
    );

    let n = grid.n();
    let aw = grid.axis_weights();
    let c: [Vec<f64>; 3] = [0, 1, 2].map(|a| grid.axis(a).iter().map(|v| (v - u0[a]) / s).collect());
    let mut lam = Vector5::new(
        (rho / (2.0 * std::f64::consts::PI).powf(1.5)).ln(),
        0.0,
        0.0,
        0.0,
        -0.5,
    );
    let mut fac: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];

    let evaluate = |lam: &Vector5<f64>, fac: &mut [Vec<f64>; 3]| -> (Vector5<f64>, Matrix5<f64>) {
        // 1D sums S[a][p] = sum_i c^p e_a(c) w_i, p = 0..4.
        let mut sums = [[0.0f64; 5]; 3];
        for a in 0..3 {
            for i in 0..n {
                let ci = c[a][i];
                let e = (lam[a + 1] * ci + lam[4] * ci * ci).exp();
                fac[a][i] = e;
                let mut p = e * aw[i];
                for q in 0..5 {
                    sums[a][q] += p;
                    p *= ci;
                }
            }
        }
        let e0 = lam[0].exp();
        let mono = |p: [usize; 3]| e0 * sums[0][p[0]] * sums[1][p[1]] * sums[2][p[2]];
        let mut mom = Vector5::zeros();
        let mut jac = Matrix5::zeros();
        for k in 0..5 {
            for a in BASIS_MONOMIALS[k] {
                mom[k] += mono(*a);
            }
            for l in 0..5 {
                let mut acc = 0.0;
                for a in BASIS_MONOMIALS[k] {
                    for b in BASIS_MONOMIALS[l] {
                        acc += mono([a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
                    }
                }
                jac[(k, l)] = acc;
            }
        }
        (mom, jac)
    };

    let scale = |r: &Vector5<f64>| r.amax() / rho;
    let (mut mom, mut jac) = evaluate(&lam, &mut fac);
    let mut res = scale(&(mom - tgt));
    let mut it = 0;
    while res > TOL {
        if it >= MAX_IT {
            return Err(VpbError::NonConvergence {
                what: "discrete Maxwellian",
                iterations: it,
                residual: res,
            });
        }
        let rhs = tgt - mom;
        let step = jac.lu().solve(&rhs).ok_or(VpbError::NonConvergence {
            what: "discrete Maxwellian (singular Jacobian)",
            iterations: it,
            residual: res,
        })?;
        let mut t = 1.0;
        loop {
            let trial = lam + step * t;
            let (m2, j2) = evaluate(&trial, &mut fac);
            let r2 = scale(&(m2 - tgt));
            if r2 < res || t < 1e-3 || r2 <= TOL {
                lam = trial;
                mom = m2;
                jac = j2;
                res = r2;
                break;
            }
            t *= 0.5;
        }
        it += 1;
    }
    tensor_product(lam[0].exp(), &fac, out);
    Ok((it, res, mom[0]))
}

/// Scratch buffer reused across cells by [`relax_cell`].
#[derive(Clone, Debug, Default)]
pub struct RelaxScratch {
    m: Vec<f64>,
}

/// One BGK relaxation of a single cell over `dt`, in place.
pub fn relax_cell(
    f1: &mut [f64],
    f2: &mut [f64],
    grid: &VelocityGrid,
    model: &CollisionModel,
    dt: f64,
    scratch: &mut RelaxScratch,
) -> Result<()> {
    let mom = raw_moments(f1, grid)?;
    scratch.m.resize(grid.len(), 0.0);
    let (_, _, mass) = discrete_maxwellian_into(&mom, grid, &mut scratch.m)?;
    let decay = (-model.nu(mom.rho) * dt).exp();
    let n2 = dot(f2, grid.weights());
    let c = n2 / mass;
    for ((a, b), m) in f1.iter_mut().zip(f2.iter_mut()).zip(&scratch.m) {
        *a = m + decay * (*a - m);
        let pd = c * m;
        *b = pd + decay * (*b - pd);
    }
    Ok(())
}

/// `F1' = M + e^{-nu dt}(F1 - M)`, `F2' = (n2/rho) M + e^{-nu dt} Pc F2` with `M` the discrete Maxwellian of `F1`.
pub fn relax_step(f1: &[f64], f2: &[f64], grid: &VelocityGrid, model: &CollisionModel, dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(dt > 0.0) {
        return Err(VpbError::Config(format!("relaxation step needs dt > 0, got {dt}")));
    }
    let mut a = f1.to_vec();
    let mut b = f2.to_vec();
    relax_cell(&mut a, &mut b, grid, model, dt, &mut RelaxScratch::default())?;
    Ok((a, b))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Angular rule on the unit sphere: Gauss-Legendre in `cos` times uniform azimuth.
pub fn sphere_rule(n_polar: usize, n_azimuth: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre(n_polar);
    let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
    let mut out = Vec::with_capacity(n_polar * n_azimuth);
    for (ct, wt) in x.iter().zip(&w) {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for k in 0..n_azimuth {
            let phi = (k as f64 + 0.5) * dphi;
            out.push(([st * phi.cos(), st * phi.sin(), *ct], wt * dphi));
        }
    }
    out
}

/// Quadrature used by the hard-sphere oracle: `n_star` Gauss-Legendre nodes
/// per axis for `v*` over the grid box and a `n_polar x n_azimuth` sphere rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleRule {
    pub n_star: usize,
    pub n_polar: usize,
    pub n_azimuth: usize,
}

impl Default for OracleRule {
    fn default() -> Self {
        Self {
            n_star: 16,
            n_polar: 6,
            n_azimuth: 12,
        }
    }
}

/// Hard-sphere collision operator
/// `Q(f,g)(v) = 1/2 ∫∫ (f(v') g(v*') - f(v) g(v*)) |(v - v*).Ω| dv* dΩ`
/// evaluated at the grid nodes.
///
/// `f` and `g` are evaluated pointwise so post-collision velocities need no
/// interpolation. Test oracle only.
pub fn hard_sphere_q_oracle<F, G>(f: F, g: G, grid: &VelocityGrid, rule: &OracleRule) -> Result<Vec<f64>>
where
    F: Fn([f64; 3]) -> f64 + Sync,
    G: Fn([f64; 3]) -> f64 + Sync,
{
    if grid.len() > ORACLE_MAX_NODES {
        return Err(VpbError::GridTooLarge {
            nodes: grid.len(),
            limit: ORACLE_MAX_NODES,
        });
    }
    let omegas = sphere_rule(rule.n_polar, rule.n_azimuth);
    let (x, w) = gauss_legendre(rule.n_star);
    let (c, h) = (grid.center(), grid.half_width());
    let mut stars = Vec::with_capacity(rule.n_star.pow(3));
    for i in 0..rule.n_star {
        for j in 0..rule.n_star {
            for k in 0..rule.n_star {
                let v = [c[0] + h * x[i], c[1] + h * x[j], c[2] + h * x[k]];
                stars.push((v, w[i] * w[j] * w[k] * h * h * h, g(v)));
            }
        }
    }
    let out = grid
        .nodes()
        .par_iter()
        .map(|v| {
            let fv = f(*v);
            let mut acc = 0.0;
            for (vs, ws, gs) in &stars {
                let rel = [v[0] - vs[0], v[1] - vs[1], v[2] - vs[2]];
                let mut inner = 0.0;
                for (om, wo) in &omegas {
                    let d = rel[0] * om[0] + rel[1] * om[1] + rel[2] * om[2];
                    if d == 0.0 {
                        continue;
                    }
                    let vp = [v[0] - d * om[0], v[1] - d * om[1], v[2] - d * om[2]];
                    let vsp = [vs[0] + d * om[0], vs[1] + d * om[1], vs[2] + d * om[2]];
                    inner += (f(vp) * g(vsp) - fv * gs) * d.abs() * wo;
                }
                acc += inner * ws;
            }
            0.5 * acc
        })
        .collect();
    Ok(out)
}

/// Linearized hard-sphere operator `2 Q(M, g) + 2 Q(g, M)` at the grid nodes.
pub fn hard_sphere_l_oracle<M, G>(m: M, g: G, grid: &VelocityGrid, rule: &OracleRule) -> Result<Vec<f64>>
where
    M: Fn([f64; 3]) -> f64 + Sync,
    G: Fn([f64; 3]) -> f64 + Sync,
{
    let a = hard_sphere_q_oracle(&m, &g, grid, rule)?;
    let b = hard_sphere_q_oracle(&g, &m, grid, rule)?;
    Ok(a.iter().zip(&b).map(|(x, y)| 2.0 * (x + y)).collect())
}

/// Rayleigh quotient `<g, L_M g>_{M*} / <nu P1 g, P1 g>_{M*}`.
pub fn rayleigh_quotient(
    g: &[f64],
    basis: &ChiBasis,
    model: &CollisionModel,
    reference: &[f64],
    grid: &VelocityGrid,
) -> Result<f64> {
    use crate::maxwellian_projection::inner_product;
    let lg = l_m(g, basis, model, grid);
    let p1 = basis.p1(g, grid);
    let nu = model.nu(basis.state().rho);
    let num = inner_product(g, &lg, reference, grid)?;
    let den = nu * inner_product(&p1, &p1, reference, grid)?;
    Ok(num / den)
}
