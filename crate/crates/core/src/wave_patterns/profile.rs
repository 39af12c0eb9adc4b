//! Navier-Stokes traveling-wave profiles for Lax shocks.
//!
//! In the shock frame `w = u1 - s` the mass flux `j = rho w` is constant and
//! the profile solves
//!
//! ```text
//! (4/3) mu(theta) w'   = j (w - w_L) + p - p_L
//! kappa(theta) theta'  = j (theta - theta_L) - j (w - w_L)^2 / 2 + p_L (w - w_L)
//! ```
//!
//! with `p = (2/3) j theta / w`. One end state is a saddle of this planar
//! system; the orbit is shot from it along its separatrix and stored as a
//! dense table, extended by exponential tails.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::euler::eigenvalues;
use super::shock::ShockData;
use crate::error::{Result, VpbError};
use crate::maxwellian_projection::FluidState;

type Y = [f64; 2];

/// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of `y' = f(y)` from `y0`, stopping when
/// `stop(y)` holds or `|x|` exceeds `x_max`. Returns the accepted `(x, y)` nodes.
pub fn dormand_prince<F, S>(f: F, y0: Y, direction: f64, rtol: f64, atol: f64, h_max: f64, x_max: f64, stop: S) -> Result<Vec<(f64, Y)>>
where
    F: Fn(&Y) -> Y,
    S: Fn(&Y) -> bool,
{
    let mut out = vec![(0.0, y0)];
    let mut x = 0.0f64;
    let mut y = y0;
    let mut h = 1e-3 * h_max;
    let mut k = [[0.0; 2]; 7];
    for _ in 0..2_000_000 {
        if stop(&y) || x.abs() >= x_max {
            return Ok(out);
        }
        k[0] = f(&y);
        for s in 1..7 {
            let mut ys = y;
            for (r, a) in A[s].iter().enumerate().take(s) {
                for d in 0..2 {
                    ys[d] += direction * h * a * k[r][d];
                }
            }
            k[s] = f(&ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..2 {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for s in 0..7 {
                s5 += B5[s] * k[s][d];
                s4 += B4[s] * k[s][d];
            }
            y5[d] += direction * h * s5;
            let sc = atol + rtol * y[d].abs().max(y5[d].abs());
            err = err.max((h * (s5 - s4)).abs() / sc);
        }
        if err <= 1.0 && y5.iter().all(|v| v.is_finite()) {
            x += direction * h;
            y = y5;
            out.push((x, y));
        }
        let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h = (h * fac.clamp(0.2, 5.0)).min(h_max);
        if h < 1e-14 {
            return Err(VpbError::Profile(format!("step size underflow at x = {x}")));
        }
    }
    Err(VpbError::Profile("too many integration steps".into()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShockProfile {
    pub shock: ShockData,
    pub nu0: f64,
    /// Mass flux in the shock frame.
    pub j: f64,
    xi: Vec<f64>,
    y: Vec<Y>,
    dy: Vec<Y>,
    /// Exponential rates of approach `(left, right)`, both positive.
    pub rates: [f64; 2],
}

struct Rhs {
    j: f64,
    wl: f64,
    tl: f64,
    pl: f64,
    nu0: f64,
}

impl Rhs {
    fn eval(&self, y: &Y) -> Y {
        let (w, th) = (y[0], y[1]);
        let tc = crate::collision::transport_closed_form(th, self.nu0);
        let p = 2.0 / 3.0 * self.j * th / w;
        let dw = (self.j * (w - self.wl) + p - self.pl) / (4.0 / 3.0 * tc.mu);
        let dth = (self.j * (th - self.tl) - 0.5 * self.j * (w - self.wl).powi(2) + self.pl * (w - self.wl)) / tc.kappa;
        [dw, dth]
    }

    fn jacobian(&self, y: &Y) -> Matrix2<f64> {
        let mut m = Matrix2::zeros();
        for c in 0..2 {
            let h = 1e-7 * y[c].abs().max(1e-3);
            let mut yp = *y;
            yp[c] += h;
            let mut ym = *y;
            ym[c] -= h;
            let (fp, fm) = (self.eval(&yp), self.eval(&ym));
            for r in 0..2 {
                m[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        m
    }
}

/// Real eigenpairs of a 2x2 matrix, eigenvalues ascending.
fn eigen2(m: &Matrix2<f64>) -> Result<[(f64, Y); 2]> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        return Err(VpbError::Profile("complex eigenvalues at an end state".into()));
    }
    let sq = disc.sqrt();
    let lams = [tr / 2.0 - sq, tr / 2.0 + sq];
    Ok(lams.map(|l| {
        let v = if b.abs() > (l - a).abs() * 1e-300 && (b.abs() + (l - a).abs()) > 0.0 {
            [b, l - a]
        } else {
            [l - d, c]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        (l, [v[0] / n, v[1] / n])
    }))
}

impl ShockProfile {
    fn state(&self, y: &Y) -> FluidState {
        let w = y[0];
        FluidState {
            rho: self.j / w,
            u: [w + self.shock.speed, 0.0, 0.0],
            theta: y[1],
        }
    }

    fn y_end(&self, right: bool) -> Y {
        let s = if right { self.shock.right } else { self.shock.left };
        [s.u[0] - self.shock.speed, s.theta]
    }

    /// Profile value at `xi = x - s t`, centred so that `rho(0)` is the mean of the end densities.
    pub fn sample(&self, xi: f64) -> FluidState {
        let n = self.xi.len();
        if self.shock.strength == 0.0 || n < 2 {
            return self.shock.left;
        }
        if xi <= self.xi[0] {
            let e = self.y_end(false);
            let y0 = self.y[0];
            let f = (self.rates[0] * (xi - self.xi[0])).exp();
            return self.state(&[e[0] + (y0[0] - e[0]) * f, e[1] + (y0[1] - e[1]) * f]);
        }
        if xi >= self.xi[n - 1] {
            let e = self.y_end(true);
            let y1 = self.y[n - 1];
            let f = (-self.rates[1] * (xi - self.xi[n - 1])).exp();
            return self.state(&[e[0] + (y1[0] - e[0]) * f, e[1] + (y1[1] - e[1]) * f]);
        }
        let k = self.xi.partition_point(|x| *x <= xi).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xi[k], self.xi[k + 1]);
        let h = x1 - x0;
        let t = (xi - x0) / h;
        let (h00, h10, h01, h11) = (
            2.0 * t * t * t - 3.0 * t * t + 1.0,
            t * t * t - 2.0 * t * t + t,
            -2.0 * t * t * t + 3.0 * t * t,
            t * t * t - t * t,
        );
        let y = [0, 1].map(|d| h00 * self.y[k][d] + h10 * h * self.dy[k][d] + h01 * self.y[k + 1][d] + h11 * h * self.dy[k + 1][d]);
        self.state(&y)
    }

    /// `(rho, m1, E)` at `xi`.
    pub fn conserved(&self, xi: f64) -> [f64; 3] {
        self.sample(xi).conserved_1d()
    }

    /// Table abscissae.
    pub fn nodes(&self) -> &[f64] {
        &self.xi
    }

    /// Characteristic length `1 / min(rates)`.
    pub fn width(&self) -> f64 {
        1.0 / self.rates[0].min(self.rates[1])
    }

    /// `λ_i` of the family at each table node.
    pub fn characteristic_speeds(&self) -> Vec<f64> {
        let k = self.shock.family.index();
        self.y.iter().map(|y| eigenvalues(&self.state(y))[k]).collect()
    }

    /// Maximum of `|(rho, u1, theta)(xi) - end state|` beyond `±distance`.
    pub fn far_field_error(&self, distance: f64) -> f64 {
        let d = |a: &FluidState, b: &FluidState| {
            (a.rho - b.rho).abs().max((a.u[0] - b.u[0]).abs()).max((a.theta - b.theta).abs())
        };
        d(&self.sample(-distance), &self.shock.left).max(d(&self.sample(distance), &self.shock.right))
    }
}

/// Viscous profile of `shock` with the BGK transport coefficients at collision rate `nu0`.
pub fn ns_shock_profile(shock: &ShockData, nu0: f64) -> Result<ShockProfile> {
    let (l, r, s) = (shock.left, shock.right, shock.speed);
    let j = l.rho * (l.u[0] - s);
    let mut prof = ShockProfile {
        shock: *shock,
        nu0,
        j,
        xi: vec![0.0],
        y: vec![[l.u[0] - s, l.theta]],
        dy: vec![[0.0, 0.0]],
        rates: [1.0, 1.0],
    };
    if shock.strength == 0.0 {
        return Ok(prof);
    }
    let rhs = Rhs {
        j,
        wl: l.u[0] - s,
        tl: l.theta,
        pl: l.pressure(),
        nu0,
    };
    let yl: Y = [l.u[0] - s, l.theta];
    let yr: Y = [r.u[0] - s, r.theta];
    let jl = rhs.jacobian(&yl);
    let jr = rhs.jacobian(&yr);
    let el = eigen2(&jl)?;
    let er = eigen2(&jr)?;
    let saddle_left = jl.determinant() < 0.0;
    let saddle_right = jr.determinant() < 0.0;
    if saddle_left == saddle_right {
        return Err(VpbError::Profile(format!(
            "expected exactly one saddle end state (left det {:e}, right det {:e})",
            jl.determinant(),
            jr.determinant()
        )));
    }
    let (ys, yn, pairs_s, pairs_n, direction) = if saddle_left {
        (yl, yr, el, er, 1.0)
    } else {
        (yr, yl, er, el, -1.0)
    };
    // Separatrix leaves the saddle forward in xi along the positive eigenvalue
    // (saddle on the left) or backward along the negative one (saddle on the right).
    let (lam_s, vec_s) = if saddle_left { pairs_s[1] } else { pairs_s[0] };
    let gap = [yn[0] - ys[0], yn[1] - ys[1]];
    let span = (gap[0] * gap[0] + gap[1] * gap[1]).sqrt();
    let sign = if vec_s[0] * gap[0] + vec_s[1] * gap[1] >= 0.0 { 1.0 } else { -1.0 };
    let eps = 1e-6 * span;
    let y0 = [ys[0] + sign * eps * vec_s[0], ys[1] + sign * eps * vec_s[1]];

    // Slowest approach rate at the node end.
    let lam_n = if pairs_n[0].0.abs() < pairs_n[1].0.abs() { pairs_n[0].0 } else { pairs_n[1].0 };
    let width = 1.0 / lam_s.abs().min(lam_n.abs());
    let stop_tol = 1e-8 * span;
    let traj = dormand_prince(
        |y| rhs.eval(y),
        y0,
        direction,
        1e-10,
        1e-14 * span.max(1e-300),
        0.05 * width,
        400.0 * width,
        |y| ((y[0] - yn[0]).powi(2) + (y[1] - yn[1]).powi(2)).sqrt() < stop_tol,
    )?;
    let end = traj.last().unwrap().1;
    let miss = ((end[0] - yn[0]).powi(2) + (end[1] - yn[1]).powi(2)).sqrt();
    if miss > 1e-6 * span {
        let trace: Vec<String> = traj
            .iter()
            .step_by((traj.len() / 8).max(1))
            .map(|(x, y)| format!("xi={x:.3} w={:.6} theta={:.6}", y[0], y[1]))
            .collect();
        return Err(VpbError::Profile(format!(
            "shooting missed the end state by {miss:e}; trace: {}",
            trace.join("; ")
        )));
    }
    let mut pts = traj;
    if direction < 0.0 {
        pts.reverse();
    }
    prof.xi = pts.iter().map(|p| p.0).collect();
    prof.y = pts.iter().map(|p| p.1).collect();
    prof.dy = prof.y.iter().map(|y| rhs.eval(y)).collect();
    prof.rates = if saddle_left {
        [lam_s.abs(), lam_n.abs()]
    } else {
        [lam_n.abs(), lam_s.abs()]
    };

    // Centre at the density midpoint.
    let target = 0.5 * (l.rho + r.rho);
    let rho_at = |k: usize| j / prof.y[k][0];
    let above = |k: usize| (rho_at(k) - target) * (r.rho - l.rho) >= 0.0;
    let k = (0..prof.xi.len()).find(|&k| above(k)).unwrap_or(prof.xi.len() - 1).max(1);
    let (mut a, mut b) = (prof.xi[k - 1], prof.xi[k]);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if (prof.sample(m).rho - target) * (r.rho - l.rho) >= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let shift = 0.5 * (a + b);
    for x in prof.xi.iter_mut() {
        *x -= shift;
    }
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave_patterns::euler::Family;
    use crate::wave_patterns::shock::hugoniot_connect;

    #[test]
    fn three_shock_profile_is_monotone() {
        let l = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let s = hugoniot_connect(&l, Family::Three, 0.2).unwrap();
        let p = ns_shock_profile(&s, 1.0).unwrap();
        let lam = p.characteristic_speeds();
        assert!(lam.windows(2).all(|w| w[1] < w[0]));
        let mid = p.sample(0.0);
        assert!((mid.rho - 0.5 * (s.left.rho + s.right.rho)).abs() < 1e-9);
    }

    #[test]
    fn one_shock_profile_is_monotone() {
        let l = FluidState::new_1d(1.0, 0.2, 1.0).unwrap();
        let s = hugoniot_connect(&l, Family::One, 0.1).unwrap();
        let p = ns_shock_profile(&s, 1.0).unwrap();
        let lam = p.characteristic_speeds();
        assert!(lam.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn weak_shock_varies_little() {
        let l = FluidState::new_1d(1.0, 0.0, 1.0).unwrap();
        let s = hugoniot_connect(&l, Family::Three, 1e-3).unwrap();
        let p = ns_shock_profile(&s, 1.0).unwrap();
        let xs: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.5 * p.width() / 20.0).collect();
        let rhos: Vec<f64> = xs.iter().map(|x| p.sample(*x).rho).collect();
        let var = rhos.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - rhos.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(var <= 1e-3);
    }
}
