//! Closed-form initial data. Every profile varies along the first axis only,
//! through the phase `x = 2π x₀ / L₀`.

use super::{FieldState, Grid, PointValues};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant { rho: f64, u: [f64; 3], theta: f64, h: [f64; 3] },
    /// `ρ = 1.5 + 0.3a sin x`, `u = a(0.2 sin x, 0.1 cos x, 0)`,
    /// `θ = 1 + 0.2a cos x`, `H = (0.4, 0.5 + 0.3a sin x, 0.2a cos x)`.
    Manufactured { amplitude: f64 },
    /// Quiescent fluid with `H = (0, A sin(kx), 0)`.
    MagneticMode { wavenumber: u32, amplitude: f64, rho: f64, theta: f64 },
    /// Analytic data built from the Poisson kernel
    /// `P(x) = Σ_{k≥1} rᵏ cos kx` and its conjugate `Q(x) = Σ rᵏ sin kx`.
    Poisson { r: f64 },
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Constant { .. } => "constant",
            Profile::Manufactured { .. } => "manufactured",
            Profile::MagneticMode { .. } => "magnetic_mode",
            Profile::Poisson { .. } => "poisson",
        }
    }

    pub fn sample(&self, grid: &Grid) -> FieldState {
        let l0 = grid.lengths()[0];
        let phase = move |x: [f64; 3]| TAU * x[0] / l0;
        match *self {
            Profile::Constant { rho, u, theta, h } => FieldState::constant(grid, rho, u, theta, h),
            Profile::Manufactured { amplitude: a } => FieldState::from_fn(grid, 0.0, |p| {
                let (s, c) = phase(p).sin_cos();
                PointValues {
                    rho: 1.5 + 0.3 * a * s,
                    u: [0.2 * a * s, 0.1 * a * c, 0.0],
                    theta: 1.0 + 0.2 * a * c,
                    h: [0.4, 0.5 + 0.3 * a * s, 0.2 * a * c],
                }
            }),
            Profile::MagneticMode { wavenumber, amplitude, rho, theta } => FieldState::from_fn(grid, 0.0, |p| {
                PointValues {
                    rho,
                    u: [0.0; 3],
                    theta,
                    h: [0.0, amplitude * (f64::from(wavenumber) * phase(p)).sin(), 0.0],
                }
            }),
            Profile::Poisson { r } => FieldState::from_fn(grid, 0.0, |p| {
                let (pk, qk) = poisson_kernels(r, phase(p));
                PointValues {
                    rho: 1.5 + 0.3 * pk,
                    u: [0.2 * pk, 0.1 * qk, 0.0],
                    theta: 1.0 + 0.2 * pk,
                    h: [0.4, 0.5 + 0.3 * qk, 0.2 * pk],
                }
            }),
        }
    }
}

/// `(Σ rᵏ cos kx, Σ rᵏ sin kx)` summed over `k ≥ 1`, for `|r| < 1`.
pub fn poisson_kernels(r: f64, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let den = 1.0 - 2.0 * r * c + r * r;
    ((r * c - r * r) / den, r * s / den)
}
