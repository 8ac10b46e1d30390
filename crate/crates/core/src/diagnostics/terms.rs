use super::{DiagnosticsError, Result};
use crate::dynamics::{cross, dot, stress_from, CoefficientFields, Dynamics, Kinematics};
use crate::field_state::{FieldState, Scalar, Vector};
use rayon::prelude::*;

/// Pointwise fields shared by all functionals, rates and norms of a state.
pub(crate) struct Terms<'a> {
    pub state: &'a FieldState,
    pub coef: CoefficientFields,
    pub kin: Kinematics,
    pub current: Vector,
    pub lorentz: Vector,
    pub grad_rho: Vector,
    pub grad_theta: Vector,
    pub grad_p: Vector,
    pub grad_mu: Vector,
    /// `∇φ(ρ) = μ'(ρ) ∇ρ / ρ`.
    pub grad_phi: Vector,
    /// `Ψ : ∇u`.
    pub dissipation: Scalar,
}

impl<'a> Terms<'a> {
    pub fn new(dynamics: &Dynamics, state: &'a FieldState) -> Result<Self> {
        if &state.grid != dynamics.ops.grid() {
            return Err(DiagnosticsError::Usage("state grid differs from the solver grid".into()));
        }
        let ops = &dynamics.ops;
        let coef = CoefficientFields::evaluate(state, &dynamics.coeffs)?;
        let kin = dynamics.kinematics(&state.u)?;
        let psi = stress_from(&kin, &coef);
        let n = state.rho.len();
        let dissipation = (0..n)
            .map(|p| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += psi[i][j][p] * kin.grad_u[i][j][p];
                    }
                }
                s
            })
            .collect();
        let current = ops.curl(&state.h)?;
        let lorentz = cross(&current, &state.h);
        let grad_rho = ops.gradient(&state.rho)?;
        let grad_phi =
            [0, 1, 2].map(|c| (0..n).map(|p| coef.mu_prime[p] * grad_rho[c][p] / state.rho[p]).collect());
        Ok(Self {
            state,
            grad_theta: ops.gradient(&state.theta)?,
            grad_p: ops.gradient(&coef.pressure)?,
            grad_mu: ops.gradient(&coef.mu)?,
            grad_rho,
            grad_phi,
            current,
            lorentz,
            dissipation,
            kin,
            coef,
        })
    }

    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.state.grid.integrate((0..self.state.rho.len()).map(f))
    }

    pub fn current_squared(&self) -> Scalar {
        dot(&self.current, &self.current)
    }

    /// Right side of the energy balance: `d/dt ∫ (ρ|u|² + |H|²)/2`.
    pub fn energy_rate(&self) -> f64 {
        let d2 = self.kin.strain_squared();
        let j2 = self.current_squared();
        let c = &self.coef;
        let div = &self.kin.div_u;
        -self.integrate(|p| {
            2.0 * c.mu[p] * d2[p] + c.lambda[p] * div[p] * div[p] + c.nu[p] * j2[p] - c.pressure[p] * div[p]
        })
    }

    /// Right side of the BD entropy balance: `d/dt ∫ (ρ|u + 2∇φ|² + |H|²)/2`.
    pub fn bd_rate(&self) -> f64 {
        let a2 = self.kin.rotation_squared();
        let j2 = self.current_squared();
        let c = &self.coef;
        let s = self.state;
        -self.integrate(|p| {
            let gp_gphi: f64 = (0..3).map(|i| self.grad_p[i][p] * self.grad_phi[i][p]).sum();
            let l_gmu: f64 = (0..3).map(|i| self.lorentz[i][p] * self.grad_mu[i][p]).sum();
            2.0 * c.mu[p] * a2[p] + c.nu[p] * j2[p] - c.pressure[p] * self.kin.div_u[p] + 2.0 * gp_gphi
                - 2.0 * l_gmu / s.rho[p]
        })
    }

    /// `d/dt ∫ ρ ln ρ = −∫ ρ div u`.
    pub fn rho_log_rho_rate(&self) -> f64 {
        -self.integrate(|p| self.state.rho[p] * self.kin.div_u[p])
    }

    /// The three entropy production integrals (viscous, ohmic, Fourier).
    pub fn productions(&self) -> [f64; 3] {
        let j2 = self.current_squared();
        let s = self.state;
        let c = &self.coef;
        [
            self.integrate(|p| self.dissipation[p] / s.theta[p]),
            self.integrate(|p| c.nu[p] * j2[p] / s.theta[p]),
            self.integrate(|p| {
                let g2: f64 = (0..3).map(|i| self.grad_theta[i][p] * self.grad_theta[i][p]).sum();
                c.kappa[p] * g2 / (s.theta[p] * s.theta[p])
            }),
        ]
    }

    pub fn entropy_rate(&self) -> f64 {
        self.productions().iter().sum()
    }
}

/// Conserved or balanced integrals of a single state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Functionals {
    pub kinetic: f64,
    pub magnetic: f64,
    pub internal: f64,
    pub bd: f64,
    pub entropy: f64,
    pub rho_log_rho: f64,
    pub rho_pe: f64,
}

impl Functionals {
    pub fn total_energy(&self) -> f64 {
        self.kinetic + self.magnetic + self.internal
    }

    pub fn energy22(&self) -> f64 {
        self.kinetic + self.magnetic
    }

    pub fn new(dynamics: &Dynamics, terms: &Terms) -> Self {
        let (state, grad_phi) = (terms.state, &terms.grad_phi);
        let c = &dynamics.coeffs;
        let g = &state.grid;
        let n = state.rho.len();
        let pe = pressure_potentials(dynamics, &state.rho);
        let (rho, theta, u, h) = (&state.rho, &state.theta, &state.u, &state.h);
        let u2 = |p: usize| u[0][p] * u[0][p] + u[1][p] * u[1][p] + u[2][p] * u[2][p];
        let h2 = |p: usize| h[0][p] * h[0][p] + h[1][p] * h[1][p] + h[2][p] * h[2][p];
        let range = || 0..n;
        Self {
            kinetic: g.integrate(range().map(|p| 0.5 * rho[p] * u2(p))),
            magnetic: g.integrate(range().map(|p| 0.5 * h2(p))),
            internal: g.integrate(range().map(|p| rho[p] * (c.specific_heat * theta[p] + pe[p]))),
            bd: g.integrate(range().map(|p| {
                let w: f64 = (0..3).map(|i| (u[i][p] + 2.0 * grad_phi[i][p]).powi(2)).sum();
                0.5 * (rho[p] * w + h2(p))
            })),
            entropy: g.integrate(range().map(|p| rho[p] * (c.specific_heat * theta[p].ln() - rho[p].ln()))),
            rho_log_rho: g.integrate(range().map(|p| rho[p] * rho[p].ln())),
            rho_pe: g.integrate(range().map(|p| rho[p] * pe[p])),
        }
    }
}

/// `P_e(ρ)` at every point.
pub(crate) fn pressure_potentials(dynamics: &Dynamics, rho: &[f64]) -> Vec<f64> {
    rho.par_iter().map(|&r| dynamics.coeffs.pressure_potential(r)).collect()
}
