//! Periodic grid, discrete fields, differential operators and norms.
//!
//! Velocity and magnetic field always carry three components. With `d < 3`
//! the fields depend on the first `d` coordinates only and the remaining
//! axes are a single cell spanning the full box length, so integrals are
//! still taken over the three-dimensional box.

mod fft;
mod norms;
mod ops;
pub mod profiles;
pub mod summation;

pub use norms::{lp_norm, lp_norm_scalar, magnitude, Field};
pub use ops::{Backend, DerivativeKind, Operators};

use serde::{Deserialize, Serialize};
use summation::compensated_sum;
use thiserror::Error;

pub type Scalar = Vec<f64>;
pub type Vector = [Vec<f64>; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("field has {got} points, grid has {expected}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// Uniform periodic grid on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    dims: [usize; 3],
    lengths: [f64; 3],
}

impl Grid {
    /// `dims` lists the points on each active axis (power of two, at least
    /// 4); `lengths` gives all three box extents.
    pub fn new(d: usize, dims: &[usize], lengths: [f64; 3]) -> Result<Self, FieldError> {
        if !(1..=3).contains(&d) {
            return Err(FieldError::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if dims.len() != d {
            return Err(FieldError::InvalidGrid(format!(
                "{} point counts given for {d} active axes",
                dims.len()
            )));
        }
        let mut all = [1usize; 3];
        for (axis, &n) in dims.iter().enumerate() {
            if n < 4 || !n.is_power_of_two() {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {axis} has {n} points; need a power of two >= 4"
                )));
            }
            all[axis] = n;
        }
        if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(FieldError::InvalidGrid(format!("box lengths {lengths:?} must be positive")));
        }
        Ok(Self { d, dims: all, lengths })
    }

    /// Cube `[0, 2π)^3` with `n` points on each of `d` active axes.
    pub fn periodic_cube(d: usize, n: usize) -> Result<Self, FieldError> {
        Self::new(d, &vec![n; d], [std::f64::consts::TAU; 3])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Points per axis; inactive axes report 1.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn n_points(&self) -> usize {
        self.dims.iter().product()
    }

    /// Per-axis spacing; an inactive axis is one cell of the full length.
    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.lengths[a] / self.dims[a] as f64)
    }

    /// Smallest spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        let s = self.spacing();
        (0..self.d).map(|a| s[a]).fold(f64::INFINITY, f64::min)
    }

    pub fn volume_element(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Row-major multi-index of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let [_, n1, n2] = self.dims;
        [flat / (n1 * n2), (flat / n2) % n1, flat % n2]
    }

    /// Physical coordinates of a flat index (inactive coordinates are 0).
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        [0, 1, 2].map(|a| if a < self.d { idx[a] as f64 * h[a] } else { 0.0 })
    }

    /// Integral over the box of pointwise values, compensated and order-fixed.
    pub fn integrate<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        compensated_sum(values) * self.volume_element()
    }

    pub fn check_len(&self, len: usize) -> Result<(), FieldError> {
        if len == self.n_points() {
            Ok(())
        } else {
            Err(FieldError::ShapeMismatch { expected: self.n_points(), got: len })
        }
    }
}

/// Lower bounds applied to density and temperature after every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Floors {
    pub rho: f64,
    pub theta: f64,
}

impl Default for Floors {
    fn default() -> Self {
        Self { rho: 1e-8, theta: 1e-8 }
    }
}

/// Values of all fields at one point, used to build states from closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub h: [f64; 3],
}

/// Discrete fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub time: f64,
    pub rho: Scalar,
    pub u: Vector,
    pub theta: Scalar,
    pub h: Vector,
}

pub fn zeros(n: usize) -> Vector {
    [vec![0.0; n], vec![0.0; n], vec![0.0; n]]
}

impl FieldState {
    pub fn from_fn<F: Fn([f64; 3]) -> PointValues>(grid: &Grid, time: f64, f: F) -> Self {
        let n = grid.n_points();
        let mut s = Self {
            grid: grid.clone(),
            time,
            rho: vec![0.0; n],
            u: zeros(n),
            theta: vec![0.0; n],
            h: zeros(n),
        };
        for i in 0..n {
            let v = f(grid.point(i));
            s.rho[i] = v.rho;
            s.theta[i] = v.theta;
            for c in 0..3 {
                s.u[c][i] = v.u[c];
                s.h[c][i] = v.h[c];
            }
        }
        s
    }

    pub fn constant(grid: &Grid, rho: f64, u: [f64; 3], theta: f64, h: [f64; 3]) -> Self {
        Self::from_fn(grid, 0.0, |_| PointValues { rho, u, theta, h })
    }

    /// Clamps density and temperature from below; returns the number of
    /// clamped values.
    pub fn apply_floors(&mut self, floors: &Floors) -> usize {
        let mut count = 0;
        for r in &mut self.rho {
            if !(*r >= floors.rho) {
                *r = floors.rho;
                count += 1;
            }
        }
        for t in &mut self.theta {
            if !(*t >= floors.theta) {
                *t = floors.theta;
                count += 1;
            }
        }
        count
    }

    /// Number of points sitting at or below a floor.
    pub fn points_at_floor(&self, floors: &Floors) -> usize {
        let r = self.rho.iter().filter(|v| **v <= floors.rho).count();
        let t = self.theta.iter().filter(|v| **v <= floors.theta).count();
        r + t
    }

    pub fn check_shapes(&self) -> Result<(), FieldError> {
        self.grid.check_len(self.rho.len())?;
        self.grid.check_len(self.theta.len())?;
        for c in 0..3 {
            self.grid.check_len(self.u[c].len())?;
            self.grid.check_len(self.h[c].len())?;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.rho.iter().chain(&self.theta).all(|v| v.is_finite())
            && self.u.iter().chain(&self.h).all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// `∫ rho`.
    pub fn mass(&self) -> f64 {
        self.grid.integrate(self.rho.iter().copied())
    }

    /// Momentum density `rho u`.
    pub fn momentum(&self) -> Vector {
        [0, 1, 2].map(|c| self.u[c].iter().zip(&self.rho).map(|(u, r)| u * r).collect())
    }

    /// Scales every component of `u` by `factor`.
    pub fn scale_velocity(&mut self, factor: f64) {
        for c in &mut self.u {
            for v in c.iter_mut() {
                *v *= factor;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, &[8; 4], [1.0; 3]).is_err());
        assert!(Grid::new(1, &[6], [1.0; 3]).is_err());
        assert!(Grid::new(1, &[2], [1.0; 3]).is_err());
        assert!(Grid::new(2, &[8], [1.0; 3]).is_err());
        assert!(Grid::new(1, &[8], [1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn inactive_axes_span_the_box() {
        let g = Grid::new(1, &[16], [2.0, 3.0, 5.0]).unwrap();
        assert_eq!(g.dims(), [16, 1, 1]);
        assert!((g.volume_element() * 16.0 - 30.0).abs() < 1e-12);
        assert_eq!(g.point(3), [3.0 * 2.0 / 16.0, 0.0, 0.0]);
    }

    #[test]
    fn multi_index_is_row_major() {
        let g = Grid::new(3, &[4, 8, 16], [1.0; 3]).unwrap();
        let flat = (2 * 8 + 5) * 16 + 7;
        assert_eq!(g.multi_index(flat), [2, 5, 7]);
    }

    #[test]
    fn floors_count_events() {
        let g = Grid::periodic_cube(1, 8).unwrap();
        let mut s = FieldState::constant(&g, 1.0, [0.0; 3], 1.0, [0.0; 3]);
        s.rho[3] = -1.0;
        s.theta[0] = 0.0;
        let floors = Floors::default();
        assert_eq!(s.apply_floors(&floors), 2);
        assert_eq!(s.rho[3], 1e-8);
        assert_eq!(s.points_at_floor(&floors), 2);
    }
}
