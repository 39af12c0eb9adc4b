//! Spatial and velocity grids, distribution storage and velocity quadrature.
//!
//! The velocity grid is a uniform tensor grid with trapezoid weights. Nodes
//! are stored flattened as `(i1 * n + i2) * n + i3`, so a line along `v1`
//! has stride `n * n`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::GAS_CONSTANT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    n: usize,
    half_width_thermal: f64,
    theta_ref: f64,
    center: [f64; 3],
    spacing: f64,
    axes: [Vec<f64>; 3],
    axis_weights: Vec<f64>,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl VelocityGrid {
    /// Uniform grid of `n` nodes per axis spanning `center ± half_width_thermal * sqrt(R theta_ref)`.
    pub fn new(n: usize, center: [f64; 3], theta_ref: f64, half_width_thermal: f64) -> Result<Self> {
        if n < 3 {
            return Err(VpbError::Config(format!("velocity grid needs at least 3 nodes per axis, got {n}")));
        }
        if !(theta_ref > 0.0) || !(half_width_thermal > 0.0) {
            return Err(VpbError::Config(format!(
                "velocity grid needs positive theta_ref and width, got {theta_ref} and {half_width_thermal}"
            )));
        }
        let half = half_width_thermal * (GAS_CONSTANT * theta_ref).sqrt();
        let spacing = 2.0 * half / (n - 1) as f64;
        // Build offsets symmetrically so that node k and node n-1-k mirror exactly.
        let offsets: Vec<f64> = (0..n)
            .map(|k| {
                let m = (n - 1) as f64 / 2.0;
                (k as f64 - m) * spacing
            })
            .collect();
        let axes = [0, 1, 2].map(|a| offsets.iter().map(|o| center[a] + o).collect::<Vec<_>>());
        let mut axis_weights = vec![spacing; n];
        axis_weights[0] = 0.5 * spacing;
        axis_weights[n - 1] = 0.5 * spacing;

        let total = n * n * n;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    nodes.push([axes[0][i1], axes[1][i2], axes[2][i3]]);
                    weights.push(axis_weights[i1] * axis_weights[i2] * axis_weights[i3]);
                }
            }
        }
        Ok(Self {
            n,
            half_width_thermal,
            theta_ref,
            center,
            spacing,
            axes,
            axis_weights,
            nodes,
            weights,
        })
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total node count `n^3`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn theta_ref(&self) -> f64 {
        self.theta_ref
    }

    pub fn half_width_thermal(&self) -> f64 {
        self.half_width_thermal
    }

    /// Half-width in velocity units.
    pub fn half_width(&self) -> f64 {
        0.5 * self.spacing * (self.n - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn axis(&self, a: usize) -> &[f64] {
        &self.axes[a]
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.axis_weights
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Stride between consecutive `v1` nodes in the flattened layout.
    pub fn stride_v1(&self) -> usize {
        self.n * self.n
    }

    /// Largest `|v1|` on the grid.
    pub fn max_abs_v1(&self) -> f64 {
        let a = &self.axes[0];
        a[0].abs().max(a[self.n - 1].abs())
    }

    /// Total box volume `(2 L)^3`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width()).powi(3)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    cells: usize,
    x_lo: f64,
    x_hi: f64,
    dx: f64,
}

impl SpaceGrid {
    pub fn new(cells: usize, x_lo: f64, x_hi: f64) -> Result<Self> {
        if cells == 0 || !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(VpbError::Config(format!(
                "space grid needs cells > 0 and x_hi > x_lo, got {cells} on [{x_lo}, {x_hi}]"
            )));
        }
        Ok(Self {
            cells,
            x_lo,
            x_hi,
            dx: (x_hi - x_lo) / cells as f64,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// Cell-center coordinate.
    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.x(i)).collect()
    }

    /// Midpoint-rule integral of cell samples.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx
    }
}

/// `F1` and `F2` on the `(cell, node)` tensor, cell-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField {
    cells: usize,
    nodes: usize,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub t: f64,
}

impl DistributionField {
    pub fn zeros(cells: usize, nodes: usize) -> Self {
        Self {
            cells,
            nodes,
            f1: vec![0.0; cells * nodes],
            f2: vec![0.0; cells * nodes],
            t: 0.0,
        }
    }

    pub fn from_parts(cells: usize, nodes: usize, f1: Vec<f64>, f2: Vec<f64>, t: f64) -> Result<Self> {
        for f in [&f1, &f2] {
            if f.len() != cells * nodes {
                return Err(VpbError::Dimension {
                    expected: cells * nodes,
                    found: f.len(),
                });
            }
        }
        Ok(Self { cells, nodes, f1, f2, t })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn f1_cell(&self, i: usize) -> &[f64] {
        &self.f1[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn f2_cell(&self, i: usize) -> &[f64] {
        &self.f2[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn f1_cell_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.f1[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn f2_cell_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.f2[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn is_finite(&self) -> bool {
        self.f1.iter().chain(self.f2.iter()).all(|v| v.is_finite())
    }

    pub fn min_f1(&self) -> f64 {
        self.f1.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Raw conserved moments `(rho, rho u, rho (theta + |u|^2 / 2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMoments {
    pub rho: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl RawMoments {
    pub fn as_array(&self) -> [f64; 5] {
        [self.rho, self.momentum[0], self.momentum[1], self.momentum[2], self.energy]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            rho: a[0],
            momentum: [a[1], a[2], a[3]],
            energy: a[4],
        }
    }

    /// Convert to `(rho, u, theta)` using `e = theta`.
    pub fn to_state(&self) -> Result<crate::maxwellian_projection::FluidState> {
        let rho = self.rho;
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(VpbError::NonPhysical { rho, theta: f64::NAN });
        }
        let u = self.momentum.map(|m| m / rho);
        let theta = self.energy / rho - 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        crate::maxwellian_projection::FluidState::new(rho, u, theta)
    }
}

fn check_len(f: &[f64], grid: &VelocityGrid) -> Result<()> {
    if f.len() != grid.len() {
        return Err(VpbError::Dimension {
            expected: grid.len(),
            found: f.len(),
        });
    }
    Ok(())
}

/// `sum f w` over the velocity grid.
pub fn integrate_velocity(f: &[f64], grid: &VelocityGrid) -> Result<f64> {
    check_len(f, grid)?;
    Ok(dot(f, grid.weights()))
}

/// Conserved moments of one cell's `F1`. Errors on vacuum or negative temperature.
pub fn moments(f: &[f64], grid: &VelocityGrid) -> Result<RawMoments> {
    let m = raw_moments(f, grid)?;
    m.to_state()?;
    Ok(m)
}

/// Conserved moments without the physicality check.
pub fn raw_moments(f: &[f64], grid: &VelocityGrid) -> Result<RawMoments> {
    check_len(f, grid)?;
    let mut acc = [0.0f64; 5];
    for ((fv, v), w) in f.iter().zip(grid.nodes()).zip(grid.weights()) {
        let fw = fv * w;
        acc[0] += fw;
        acc[1] += fw * v[0];
        acc[2] += fw * v[1];
        acc[3] += fw * v[2];
        acc[4] += 0.5 * fw * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    Ok(RawMoments::from_array(acc))
}

/// Charge-difference density `n2 = ∫ F2 dv`.
pub fn n2_density(f2: &[f64], grid: &VelocityGrid) -> Result<f64> {
    integrate_velocity(f2, grid)
}

/// `∫ v1 F dv`.
pub fn first_moment_v1(f: &[f64], grid: &VelocityGrid) -> f64 {
    f.iter()
        .zip(grid.nodes())
        .zip(grid.weights())
        .map(|((fv, v), w)| fv * v[0] * w)
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxwellian_projection::{maxwellian, FluidState};

    fn grid48() -> VelocityGrid {
        VelocityGrid::new(48, [0.0; 3], 1.0, 6.0).unwrap()
    }

    #[test]
    fn weights_sum_to_box_volume() {
        let g = VelocityGrid::new(10, [0.3, 0.0, 0.0], 1.2, 6.0).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - g.volume()).abs() < 1e-12 * g.volume());
    }

    #[test]
    fn nodes_mirror_about_center() {
        let g = VelocityGrid::new(9, [0.25, 0.0, 0.0], 1.0, 6.0).unwrap();
        let n = g.n();
        for k in 0..n {
            let a = g.axis(0)[k] - 0.25;
            let b = g.axis(0)[n - 1 - k] - 0.25;
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn zero_integrates_to_zero() {
        let g = VelocityGrid::new(6, [0.0; 3], 1.0, 6.0).unwrap();
        assert_eq!(integrate_velocity(&vec![0.0; g.len()], &g).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = VelocityGrid::new(6, [0.0; 3], 1.0, 6.0).unwrap();
        assert!(matches!(
            integrate_velocity(&[1.0, 2.0], &g),
            Err(VpbError::Dimension { .. })
        ));
    }

    #[test]
    fn maxwellian_mass_and_momentum() {
        let g = grid48();
        let m = maxwellian(&FluidState::new(1.0, [0.0; 3], 1.0).unwrap(), &g);
        assert!((integrate_velocity(&m, &g).unwrap() - 1.0).abs() < 1e-6);
        let m = maxwellian(&FluidState::new(1.0, [0.3, 0.0, 0.0], 1.0).unwrap(), &g);
        assert!((first_moment_v1(&m, &g) - 0.3).abs() < 1e-6);
    }

    #[test]
    fn sampled_moments_match_analytic() {
        let g = grid48();
        let s = FluidState::new(2.0, [0.5, 0.0, 0.0], 0.8).unwrap();
        let m = moments(&maxwellian(&s, &g), &g).unwrap();
        let st = m.to_state().unwrap();
        assert!((st.rho - 2.0).abs() < 1e-6);
        assert!((st.u[0] - 0.5).abs() < 1e-6);
        assert!((st.theta - 0.8).abs() < 1e-6);
    }

    #[test]
    fn symmetric_pair_has_zero_velocity() {
        let g = grid48();
        let a = maxwellian(&FluidState::new(0.5, [0.4, 0.0, 0.0], 0.9).unwrap(), &g);
        let b = maxwellian(&FluidState::new(0.5, [-0.4, 0.0, 0.0], 0.9).unwrap(), &g);
        let f: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let st = moments(&f, &g).unwrap().to_state().unwrap();
        assert!(st.u[0].abs() < 1e-14);
    }

    #[test]
    fn n2_scaling() {
        let g = grid48();
        let m = maxwellian(&FluidState::new(1.0, [0.0; 3], 1.0).unwrap(), &g);
        let f2: Vec<f64> = m.iter().map(|x| 0.01 * x).collect();
        assert!((n2_density(&f2, &g).unwrap() - 0.01).abs() < 1e-6);
        assert_eq!(n2_density(&vec![0.0; g.len()], &g).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_rejected() {
        let g = VelocityGrid::new(6, [0.0; 3], 1.0, 6.0).unwrap();
        assert!(matches!(
            moments(&vec![0.0; g.len()], &g),
            Err(VpbError::NonPhysical { .. })
        ));
    }

    #[test]
    fn space_grid_spacing() {
        let s = SpaceGrid::new(4, -1.0, 1.0).unwrap();
        assert_eq!(s.dx(), 0.5);
        assert_eq!(s.x(0), -0.75);
        assert!(SpaceGrid::new(0, 0.0, 1.0).is_err());
        assert!(SpaceGrid::new(4, 1.0, 1.0).is_err());
    }
}
