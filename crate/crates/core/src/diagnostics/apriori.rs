use super::terms::{pressure_potentials, Terms};
use super::{DiagnosticsError, Result};
use crate::dynamics::Dynamics;
use crate::field_state::summation::CompensatedSum;
use serde::Serialize;

/// Instantaneous values of the a priori bounded quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriNorms {
    pub sqrt_rho_u: f64,
    pub grad_mu_over_sqrt_rho: f64,
    pub weighted_grad_u: f64,
    pub weighted_grad_u_over_sqrt_theta: f64,
    pub weighted_grad_rho: f64,
    pub rho_pe: f64,
    pub grad_phi: f64,
    pub rho_theta: f64,
    pub h: f64,
    pub sqrt_nu_curl_h: f64,
    /// `(alpha, ‖√(1+ρ) ∇θ^alpha‖₂)`.
    pub grad_theta_alpha: Vec<(f64, f64)>,
    pub grad_log_theta: f64,
    pub low_density_gradient: f64,
}

impl AprioriNorms {
    /// Flat `(name, value)` list in a fixed order.
    pub fn named(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("sqrt_rho_u_l2".to_string(), self.sqrt_rho_u),
            ("grad_mu_over_sqrt_rho_l2".into(), self.grad_mu_over_sqrt_rho),
            ("weighted_grad_u_l2".into(), self.weighted_grad_u),
            ("weighted_grad_u_over_sqrt_theta_l2".into(), self.weighted_grad_u_over_sqrt_theta),
            ("weighted_grad_rho_l2".into(), self.weighted_grad_rho),
            ("rho_pe_l1".into(), self.rho_pe),
            ("grad_phi_l2".into(), self.grad_phi),
            ("rho_theta_l1".into(), self.rho_theta),
            ("h_l2".into(), self.h),
            ("sqrt_nu_curl_h_l2".into(), self.sqrt_nu_curl_h),
        ];
        for (alpha, v) in &self.grad_theta_alpha {
            out.push((format!("grad_theta_pow_{alpha:?}_l2"), *v));
        }
        out.push(("grad_log_theta_l2".into(), self.grad_log_theta));
        out.push(("low_density_gradient_l2".into(), self.low_density_gradient));
        out
    }
}

fn l2(terms: &Terms, f: impl Fn(usize) -> f64) -> f64 {
    terms.integrate(|p| f(p).powi(2)).max(0.0).sqrt()
}

fn norm3(v: &crate::field_state::Vector, p: usize) -> f64 {
    (v[0][p] * v[0][p] + v[1][p] * v[1][p] + v[2][p] * v[2][p]).sqrt()
}

pub(crate) fn apriori_from_terms(dynamics: &Dynamics, terms: &Terms, alphas: &[f64]) -> Result<AprioriNorms> {
    let c = &dynamics.coeffs;
    let a = c.conductivity_exponent;
    for &alpha in alphas {
        if !(0.0..=a / 2.0).contains(&alpha) {
            return Err(DiagnosticsError::Usage(format!("alpha = {alpha} outside [0, {}]", a / 2.0)));
        }
    }
    let s = terms.state;
    let (rho, theta) = (&s.rho, &s.theta);
    let (beta, m) = (c.beta, c.m);
    let grad_u_norm = |p: usize| {
        let g = &terms.kin.grad_u;
        let mut sum = 0.0;
        for row in g {
            for comp in row {
                sum += comp[p] * comp[p];
            }
        }
        sum.sqrt()
    };
    let visc_weight = |p: usize| rho[p].powf(m / 2.0) + rho[p].powf(beta / 2.0);
    let pe = pressure_potentials(dynamics, rho);
    let gamma = 0.5 * (c.cold_exponent + 1.0 - beta);
    let a1 = c.density_scale.min(c.pressure_scale);
    let grad_theta_alpha = alphas
        .iter()
        .map(|&alpha| {
            let v = l2(terms, |p| {
                (1.0 + rho[p]).sqrt() * alpha * theta[p].powf(alpha - 1.0) * norm3(&terms.grad_theta, p)
            });
            (alpha, v)
        })
        .collect();
    let low_density_gradient = l2(terms, |p| {
        if rho[p] < a1 {
            gamma * rho[p].powf(-gamma - 1.0) * norm3(&terms.grad_rho, p)
        } else {
            0.0
        }
    });
    Ok(AprioriNorms {
        sqrt_rho_u: l2(terms, |p| rho[p].sqrt() * norm3(&s.u, p)),
        grad_mu_over_sqrt_rho: l2(terms, |p| norm3(&terms.grad_mu, p) / rho[p].sqrt()),
        weighted_grad_u: l2(terms, |p| visc_weight(p) * grad_u_norm(p)),
        weighted_grad_u_over_sqrt_theta: l2(terms, |p| visc_weight(p) * grad_u_norm(p) / theta[p].sqrt()),
        weighted_grad_rho: l2(terms, |p| {
            theta[p].sqrt()
                * (rho[p].powf((beta - 1.0) / 2.0) + rho[p].powf((m - 1.0) / 2.0))
                * norm3(&terms.grad_rho, p)
                / rho[p]
        }),
        rho_pe: terms.integrate(|p| (rho[p] * pe[p]).abs()),
        grad_phi: l2(terms, |p| (rho[p] * theta[p] / terms.coef.mu_prime[p]).sqrt() * norm3(&terms.grad_phi, p)),
        rho_theta: terms.integrate(|p| (rho[p] * theta[p]).abs()),
        h: l2(terms, |p| norm3(&s.h, p)),
        sqrt_nu_curl_h: l2(terms, |p| terms.coef.nu[p].sqrt() * norm3(&terms.current, p)),
        grad_theta_alpha,
        grad_log_theta: l2(terms, |p| (rho[p].sqrt() + 1.0) * norm3(&terms.grad_theta, p) / theta[p]),
        low_density_gradient,
    })
}

/// Both sides of an inequality, with `slack = rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorPair {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl MonitorPair {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: rhs - lhs }
    }
}

/// Weighted Sobolev ratios and the three controlled-term inequalities.
///
/// Ratios are `NaN` when their denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monitors {
    pub sobolev_high_ratio: f64,
    pub sobolev_low_ratio: f64,
    pub pressure_work: MonitorPair,
    pub pressure_potential_coupling: MonitorPair,
    pub lorentz_coupling: MonitorPair,
}

fn lp(terms: &Terms, p_exp: f64, f: impl Fn(usize) -> f64) -> f64 {
    terms.integrate(|p| f(p).abs().powf(p_exp)).max(0.0).powf(1.0 / p_exp)
}

/// `d_rho_pe_dt` is `d/dt ∫ ρ P_e(ρ)` when a time window is available;
/// otherwise the continuity identity `−∫ p_e div u` is used.
pub(crate) fn monitors_from_terms(dynamics: &Dynamics, terms: &Terms, d_rho_pe_dt: Option<f64>) -> Monitors {
    let c = &dynamics.coeffs;
    let s = terms.state;
    let (rho, theta) = (&s.rho, &s.theta);
    let a = c.density_scale;
    let div = &terms.kin.div_u;

    let grad_mu_term = lp(terms, 2.0, |p| norm3(&terms.grad_mu, p) / rho[p].sqrt());
    let mu_term = lp(terms, 2.0, |p| terms.coef.mu[p] / rho[p].sqrt());
    let denominator = grad_mu_term + mu_term;
    let ratio = |num: f64| if denominator > 0.0 { num / denominator } else { f64::NAN };
    let high = lp(terms, 6.0, |p| if rho[p] > 2.0 * a { rho[p].powf(c.m - 0.5) } else { 0.0 });
    let low = lp(terms, 6.0, |p| if rho[p] <= a / 2.0 { rho[p].powf(c.beta - 0.5) } else { 0.0 });

    let epsilon = 0.5;
    let pressure_work = {
        let lhs = terms.integrate(|p| terms.coef.pressure[p] * div[p]);
        let d_pe = d_rho_pe_dt.unwrap_or_else(|| -terms.integrate(|p| c.pe(rho[p]) * div[p]));
        let bulk = terms.integrate(|p| (3.0 * terms.coef.lambda[p] + 2.0 * terms.coef.mu[p]) * div[p] * div[p]);
        let rho_theta = terms.integrate(|p| (rho[p] * theta[p]).abs());
        let theta6 = lp(terms, 6.0, |p| theta[p]);
        let theta3 = lp(terms, 3.0, |p| theta[p]);
        let rhs = -d_pe + epsilon * bulk + rho_theta.powi(2) + theta6.powi(2) + theta3.powi(2) * grad_mu_term.powi(2);
        MonitorPair::new(lhs, rhs)
    };

    let pressure_potential_coupling = {
        let gamma = 0.5 * (c.cold_exponent + 1.0 - c.beta);
        let a1 = a.min(c.pressure_scale);
        let cst = c.c3 * c.c0 / (gamma * gamma);
        let dot = |x: &crate::field_state::Vector, y: &crate::field_state::Vector, p: usize| {
            x[0][p] * y[0][p] + x[1][p] * y[1][p] + x[2][p] * y[2][p]
        };
        let lhs = -terms.integrate(|p| dot(&terms.grad_p, &terms.grad_phi, p));
        let rhs = terms.integrate(|p| {
            let phi_prime = terms.coef.mu_prime[p] / rho[p];
            let gr2 = dot(&terms.grad_rho, &terms.grad_rho, p);
            let mut v = -phi_prime * theta[p] * gr2 - phi_prime * rho[p] * dot(&terms.grad_theta, &terms.grad_rho, p);
            if rho[p] < a1 {
                // |∇ρ^{-γ}|² = γ² ρ^{-2γ-2} |∇ρ|²
                v -= cst * gamma * gamma * rho[p].powf(-2.0 * gamma - 2.0) * gr2;
            }
            v
        });
        MonitorPair::new(lhs, rhs)
    };

    let lorentz_coupling = {
        let mut acc = CompensatedSum::new();
        for p in 0..rho.len() {
            acc.add((0..3).map(|i| terms.lorentz[i][p] * terms.grad_mu[i][p]).sum::<f64>() / rho[p]);
        }
        let lhs = (acc.total() * s.grid.volume_element()).abs();
        let j2 = terms.current_squared();
        let rhs = terms.integrate(|p| {
            terms.coef.nu[p] * j2[p] / theta[p] + norm3(&terms.grad_mu, p).powi(2) / rho[p]
        });
        MonitorPair::new(lhs, rhs)
    };

    Monitors {
        sobolev_high_ratio: ratio(high),
        sobolev_low_ratio: ratio(low),
        pressure_work,
        pressure_potential_coupling,
        lorentz_coupling,
    }
}
