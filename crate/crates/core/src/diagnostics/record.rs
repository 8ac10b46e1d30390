use super::apriori::{apriori_from_terms, monitors_from_terms};
use super::terms::{Functionals, Terms};
use super::{default_alphas, window_summary, Result, StepWindow};
use crate::dynamics::Dynamics;
use crate::field_state::{magnitude, FieldState, Floors};
use serde::{Deserialize, Serialize};

/// Settings that affect record contents but not the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordOptions {
    pub floors: Floors,
}

/// One row of the diagnostic time series. Field names are the CSV header.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub time: f64,
    pub total_energy_eq13: f64,
    pub kinetic_energy_eq13: f64,
    pub magnetic_energy_eq13: f64,
    pub internal_energy_eq13: f64,
    pub energy_functional_eq22: f64,
    pub bd_functional_eq23: f64,
    pub entropy_total_eq29: f64,
    pub production_visc_eq210: f64,
    pub production_ohmic_eq210: f64,
    pub production_fourier_eq210: f64,
    pub rho_log_rho_eq11: f64,
    pub res22_eq22: f64,
    pub res23_eq23: f64,
    pub res13_eq13: f64,
    pub res_rho_log_rho_eq11: f64,
    pub res29_eq29: f64,
    pub apriori_sqrt_rho_u_eq215: f64,
    pub apriori_grad_mu_over_sqrt_rho_eq215: f64,
    pub apriori_weighted_grad_u_eq215: f64,
    pub apriori_weighted_grad_u_over_sqrt_theta_eq215: f64,
    pub apriori_weighted_grad_rho_eq215: f64,
    pub apriori_rho_pe_eq215: f64,
    pub apriori_grad_phi_eq215: f64,
    pub apriori_rho_theta_eq215: f64,
    pub apriori_h_eq215: f64,
    pub apriori_sqrt_nu_curl_h_eq215: f64,
    pub apriori_grad_theta_pow_quarter_a_eq212: f64,
    pub apriori_grad_theta_pow_half_a_eq212: f64,
    pub apriori_grad_log_theta_eq212: f64,
    pub apriori_low_density_gradient_eq215: f64,
    pub lemma33_high_ratio: f64,
    pub lemma33_low_ratio: f64,
    pub lemma34_lhs: f64,
    pub lemma34_rhs: f64,
    pub lemma34_slack: f64,
    pub lemma35_lhs: f64,
    pub lemma35_rhs: f64,
    pub lemma35_slack: f64,
    pub lemma36_lhs: f64,
    pub lemma36_rhs: f64,
    pub lemma36_slack: f64,
    pub induction_consistency_eq1d: f64,
    pub div_h_relative_eq14: f64,
    pub mass_eq1a: f64,
    pub flooring_count: u64,
    pub spectral_tail: f64,
}

impl DiagnosticRecord {
    /// Column names in CSV order.
    pub fn columns() -> Vec<String> {
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        w.serialize(Self::default()).expect("record serializes");
        let bytes = w.into_inner().expect("in-memory writer");
        let text = String::from_utf8(bytes).expect("utf-8 header");
        text.lines().next().unwrap_or_default().split(',').map(str::to_string).collect()
    }

    /// Diagnoses `state`; residual columns come from `window` (which must
    /// start at `state`) and are `NaN` without one.
    pub fn compute(
        dynamics: &Dynamics,
        state: &FieldState,
        window: Option<&StepWindow>,
        options: &RecordOptions,
    ) -> Result<Self> {
        let terms = Terms::new(dynamics, state)?;
        let f = Functionals::new(dynamics, &terms);
        let [visc, ohmic, fourier] = terms.productions();
        let summary = match window {
            Some(w) => {
                if w.before.time != state.time || w.before.rho != state.rho {
                    return Err(super::DiagnosticsError::Usage("window does not start at the diagnosed state".into()));
                }
                Some(window_summary(dynamics, w)?)
            }
            None => None,
        };
        let res = |pick: fn(&super::Residuals) -> f64| summary.as_ref().map_or(f64::NAN, |s| pick(&s.residuals));
        let apriori = apriori_from_terms(dynamics, &terms, &default_alphas(dynamics))?;
        let mon = monitors_from_terms(dynamics, &terms, summary.as_ref().map(|s| s.d_rho_pe_dt));
        let consistency = super::electric_field(dynamics, state)?.induction_consistency;
        let div_h = dynamics.ops.divergence(&state.h)?;
        let h_max = magnitude(&state.h).into_iter().fold(0.0, f64::max);
        let div_max = div_h.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let ops = &dynamics.ops;
        let mut tail: f64 = 0.0;
        let scalars = [&state.rho, &state.theta];
        for field in scalars.into_iter().chain(&state.u).chain(&state.h) {
            tail = tail.max(ops.spectral_tail(field)?);
        }
        Ok(Self {
            time: state.time,
            total_energy_eq13: f.total_energy(),
            kinetic_energy_eq13: f.kinetic,
            magnetic_energy_eq13: f.magnetic,
            internal_energy_eq13: f.internal,
            energy_functional_eq22: f.energy22(),
            bd_functional_eq23: f.bd,
            entropy_total_eq29: f.entropy,
            production_visc_eq210: visc,
            production_ohmic_eq210: ohmic,
            production_fourier_eq210: fourier,
            rho_log_rho_eq11: f.rho_log_rho,
            res22_eq22: res(|r| r.res22),
            res23_eq23: res(|r| r.res23),
            res13_eq13: res(|r| r.res13),
            res_rho_log_rho_eq11: res(|r| r.res_rho_log_rho),
            res29_eq29: res(|r| r.res29),
            apriori_sqrt_rho_u_eq215: apriori.sqrt_rho_u,
            apriori_grad_mu_over_sqrt_rho_eq215: apriori.grad_mu_over_sqrt_rho,
            apriori_weighted_grad_u_eq215: apriori.weighted_grad_u,
            apriori_weighted_grad_u_over_sqrt_theta_eq215: apriori.weighted_grad_u_over_sqrt_theta,
            apriori_weighted_grad_rho_eq215: apriori.weighted_grad_rho,
            apriori_rho_pe_eq215: apriori.rho_pe,
            apriori_grad_phi_eq215: apriori.grad_phi,
            apriori_rho_theta_eq215: apriori.rho_theta,
            apriori_h_eq215: apriori.h,
            apriori_sqrt_nu_curl_h_eq215: apriori.sqrt_nu_curl_h,
            apriori_grad_theta_pow_quarter_a_eq212: apriori.grad_theta_alpha[0].1,
            apriori_grad_theta_pow_half_a_eq212: apriori.grad_theta_alpha[1].1,
            apriori_grad_log_theta_eq212: apriori.grad_log_theta,
            apriori_low_density_gradient_eq215: apriori.low_density_gradient,
            lemma33_high_ratio: mon.sobolev_high_ratio,
            lemma33_low_ratio: mon.sobolev_low_ratio,
            lemma34_lhs: mon.pressure_work.lhs,
            lemma34_rhs: mon.pressure_work.rhs,
            lemma34_slack: mon.pressure_work.slack,
            lemma35_lhs: mon.pressure_potential_coupling.lhs,
            lemma35_rhs: mon.pressure_potential_coupling.rhs,
            lemma35_slack: mon.pressure_potential_coupling.slack,
            lemma36_lhs: mon.lorentz_coupling.lhs,
            lemma36_rhs: mon.lorentz_coupling.rhs,
            lemma36_slack: mon.lorentz_coupling.slack,
            induction_consistency_eq1d: consistency,
            div_h_relative_eq14: if h_max > 0.0 { div_max / h_max } else { div_max },
            mass_eq1a: state.mass(),
            flooring_count: state.points_at_floor(&options.floors) as u64,
            spectral_tail: tail,
        })
    }
}
