//! Right-hand sides of the MHD system in primitive variables and the
//! SSP-RK3 time stepper.
//!
//! The evolved unknowns are `(rho, u, theta, H)`. Temperature follows the
//! thermal energy equation; total energy is only diagnosed.

mod stepper;

pub use stepper::{stable_dt_bound, AdvanceStats, StepOutcome, STAGE_WEIGHTS};

use crate::constitutive::{CoefficientSet, ConstitutiveError};
use crate::field_state::{
    zeros, Backend, FieldError, FieldState, Floors, Grid, Operators, Scalar, Vector,
};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("non-finite value in the {term} term")]
    Numeric { term: &'static str },
    #[error("step rejected: {field} grew from {before:e} to {after:e}")]
    StepRejected { field: &'static str, before: f64, after: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Symmetric tensor field stored as its nine components, `t[i][j]`.
pub type Tensor = [Vector; 3];

/// Options that change which equations are evolved.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Physics {
    /// Keep `u` fixed in time (kinematic runs such as resistive decay).
    pub freeze_velocity: bool,
}

/// Time derivatives of all evolved fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendencies {
    pub d_rho: Scalar,
    pub d_u: Vector,
    pub d_theta: Scalar,
    pub d_h: Vector,
}

/// Coefficients evaluated at every grid point of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFields {
    pub mu: Scalar,
    pub mu_prime: Scalar,
    pub lambda: Scalar,
    pub pressure: Scalar,
    pub kappa: Scalar,
    pub nu: Scalar,
}

fn finite(term: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(DynamicsError::Numeric { term })
    }
}

fn finite_vec(term: &'static str, v: &Vector) -> Result<()> {
    v.iter().try_for_each(|c| finite(term, c))
}

impl CoefficientFields {
    pub fn evaluate(state: &FieldState, coeffs: &CoefficientSet) -> Result<Self> {
        let rows: Vec<[f64; 6]> = state
            .rho
            .par_iter()
            .zip(&state.theta)
            .map(|(&r, &t)| {
                let mu = coeffs.mu(r);
                let mu_prime = coeffs.mu_prime(r);
                [
                    mu,
                    mu_prime,
                    2.0 * (r * mu_prime - mu),
                    coeffs.pressure(r, t),
                    coeffs.kappa(r, t),
                    coeffs.nu(r, t),
                ]
            })
            .collect();
        let col = |j: usize| rows.iter().map(|row| row[j]).collect::<Vec<_>>();
        let fields = Self {
            mu: col(0),
            mu_prime: col(1),
            lambda: col(2),
            pressure: col(3),
            kappa: col(4),
            nu: col(5),
        };
        finite("viscosity", &fields.mu)?;
        finite("viscosity", &fields.mu_prime)?;
        finite("viscosity", &fields.lambda)?;
        finite("pressure", &fields.pressure)?;
        finite("heat conductivity", &fields.kappa)?;
        finite("resistivity", &fields.nu)?;
        Ok(fields)
    }
}

pub(crate) fn cross(a: &Vector, b: &Vector) -> Vector {
    [0, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        (0..a[0].len()).map(|p| a[j][p] * b[k][p] - a[k][p] * b[j][p]).collect()
    })
}

pub(crate) fn dot(a: &Vector, b: &Vector) -> Scalar {
    (0..a[0].len()).map(|p| a[0][p] * b[0][p] + a[1][p] * b[1][p] + a[2][p] * b[2][p]).collect()
}

/// Velocity gradient and the quantities built from it.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// `grad_u[i][j] = ∂_j u_i`.
    pub grad_u: Tensor,
    pub div_u: Scalar,
}

impl Kinematics {
    /// `D(u) : D(u)` pointwise.
    pub fn strain_squared(&self) -> Scalar {
        let g = &self.grad_u;
        (0..self.div_u.len())
            .map(|p| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let d = 0.5 * (g[i][j][p] + g[j][i][p]);
                        s += d * d;
                    }
                }
                s
            })
            .collect()
    }

    /// `A(u) : A(u)` pointwise, with `A` the skew part of `∇u`.
    pub fn rotation_squared(&self) -> Scalar {
        let g = &self.grad_u;
        (0..self.div_u.len())
            .map(|p| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let a = 0.5 * (g[i][j][p] - g[j][i][p]);
                        s += a * a;
                    }
                }
                s
            })
            .collect()
    }
}

/// Evaluates the system on a fixed grid with fixed coefficients.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub ops: Operators,
    pub coeffs: CoefficientSet,
    pub physics: Physics,
    pub floors: Floors,
}

impl Dynamics {
    pub fn new(grid: &Grid, backend: Backend, coeffs: CoefficientSet, physics: Physics, floors: Floors) -> Self {
        Self { ops: Operators::new(grid, backend), coeffs, physics, floors }
    }

    fn check_state(&self, state: &FieldState) -> Result<()> {
        if &state.grid != self.ops.grid() {
            return Err(DynamicsError::Usage("state grid differs from the solver grid".into()));
        }
        state.check_shapes()?;
        Ok(())
    }

    pub fn kinematics(&self, u: &Vector) -> Result<Kinematics> {
        let grad_u = self.ops.jacobian(u)?;
        let div_u = (0..u[0].len()).map(|p| grad_u[0][0][p] + grad_u[1][1][p] + grad_u[2][2][p]).collect();
        Ok(Kinematics { grad_u, div_u })
    }

    /// `Ψ = 2 mu D(u) + lambda (div u) I`.
    pub fn stress_tensor(&self, state: &FieldState) -> Result<Tensor> {
        self.check_state(state)?;
        let coef = CoefficientFields::evaluate(state, &self.coeffs)?;
        let kin = self.kinematics(&state.u)?;
        Ok(stress_from(&kin, &coef))
    }

    /// `(∇ × H) × H`.
    pub fn lorentz_force(&self, h: &Vector) -> Result<Vector> {
        let j = self.ops.curl(h)?;
        Ok(cross(&j, h))
    }

    /// Electric field `E = nu ∇×H − u × H`.
    pub fn electric_field(&self, state: &FieldState, nu: &[f64]) -> Result<Vector> {
        let j = self.ops.curl(&state.h)?;
        let uxh = cross(&state.u, &state.h);
        Ok([0, 1, 2].map(|c| (0..nu.len()).map(|p| nu[p] * j[c][p] - uxh[c][p]).collect()))
    }

    /// Induction tendency `−∇ × E` before projection.
    pub fn induction_unprojected(&self, state: &FieldState, nu: &[f64]) -> Result<Vector> {
        let e = self.electric_field(state, nu)?;
        let c = self.ops.curl(&e)?;
        Ok(c.map(|comp| comp.into_iter().map(|v| -v).collect()))
    }

    pub fn rhs(&self, state: &FieldState) -> Result<Tendencies> {
        self.check_state(state)?;
        let n = state.grid.n_points();
        let coef = CoefficientFields::evaluate(state, &self.coeffs)?;
        let rho = &state.rho;
        let u = &state.u;

        let mass_flux = state.momentum();
        let d_rho: Scalar = self.ops.divergence(&mass_flux)?.into_iter().map(|v| -v).collect();
        finite("mass flux", &d_rho)?;

        let kin = self.kinematics(u)?;
        let psi = stress_from(&kin, &coef);

        let d_u = if self.physics.freeze_velocity {
            zeros(n)
        } else {
            let grad_p = self.ops.gradient(&coef.pressure)?;
            finite_vec("pressure gradient", &grad_p)?;
            let lorentz = self.lorentz_force(&state.h)?;
            finite_vec("Lorentz force", &lorentz)?;
            let div_psi = [
                self.ops.divergence(&psi[0])?,
                self.ops.divergence(&psi[1])?,
                self.ops.divergence(&psi[2])?,
            ];
            finite_vec("viscous stress", &div_psi)?;
            let d_u: Vector = [0, 1, 2].map(|i| {
                (0..n)
                    .map(|p| {
                        let adv = u[0][p] * kin.grad_u[i][0][p]
                            + u[1][p] * kin.grad_u[i][1][p]
                            + u[2][p] * kin.grad_u[i][2][p];
                        -adv + (lorentz[i][p] - grad_p[i][p] + div_psi[i][p]) / rho[p]
                    })
                    .collect()
            });
            finite_vec("momentum", &d_u)?;
            d_u
        };

        let grad_theta = self.ops.gradient(&state.theta)?;
        let heat_flux: Vector =
            [0, 1, 2].map(|c| grad_theta[c].iter().zip(&coef.kappa).map(|(g, k)| g * k).collect());
        let div_q = self.ops.divergence(&heat_flux)?;
        finite("heat flux", &div_q)?;
        let j = self.ops.curl(&state.h)?;
        let j2 = dot(&j, &j);
        let cv = self.coeffs.specific_heat;
        let d_theta: Scalar = (0..n)
            .map(|p| {
                let mut dissipation = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        dissipation += psi[a][b][p] * kin.grad_u[a][b][p];
                    }
                }
                let source = div_q[p] + coef.nu[p] * j2[p] + dissipation
                    - state.theta[p] * rho[p] * kin.div_u[p];
                let adv = u[0][p] * grad_theta[0][p] + u[1][p] * grad_theta[1][p] + u[2][p] * grad_theta[2][p];
                source / (cv * rho[p]) - adv
            })
            .collect();
        finite("thermal energy", &d_theta)?;

        let d_h = self.ops.project_div_free(&self.induction_unprojected(state, &coef.nu)?)?;
        finite_vec("induction", &d_h)?;

        Ok(Tendencies { d_rho, d_u, d_theta, d_h })
    }
}

/// Builds `Ψ` from precomputed kinematics and coefficients.
pub fn stress_from(kin: &Kinematics, coef: &CoefficientFields) -> Tensor {
    let g = &kin.grad_u;
    [0, 1, 2].map(|i| {
        [0, 1, 2].map(|j| {
            (0..kin.div_u.len())
                .map(|p| {
                    let d = 0.5 * (g[i][j][p] + g[j][i][p]);
                    let iso = if i == j { coef.lambda[p] * kin.div_u[p] } else { 0.0 };
                    2.0 * coef.mu[p] * d + iso
                })
                .collect()
        })
    })
}
