//! Energy, BD entropy and entropy functionals, their time-discrete balance
//! residuals, a priori norms and inequality monitors.
//!
//! Balance residuals use the stage states of the Runge–Kutta step, so each
//! residual is `ΔF/Δt − Σ b_i Rate(Y_i)` and measures how far the discrete
//! trajectory is from the exact balance law.

mod apriori;
mod record;
mod terms;

pub use apriori::{AprioriNorms, MonitorPair, Monitors};
pub use record::{DiagnosticRecord, RecordOptions};

use crate::dynamics::{Dynamics, DynamicsError, StepOutcome, STAGE_WEIGHTS};
use crate::field_state::{FieldError, FieldState, Vector};
use apriori::{apriori_from_terms, monitors_from_terms};
use terms::{Functionals, Terms};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("usage error: {0}")]
    Usage(String),
}

impl From<crate::constitutive::ConstitutiveError> for DiagnosticsError {
    fn from(e: crate::constitutive::ConstitutiveError) -> Self {
        DiagnosticsError::Dynamics(e.into())
    }
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

/// One accepted step: the state before and after plus the stage states.
#[derive(Debug, Clone, Copy)]
pub struct StepWindow<'a> {
    pub before: &'a FieldState,
    pub after: &'a FieldState,
    pub stages: &'a [FieldState; 3],
    pub dt: f64,
}

impl<'a> StepWindow<'a> {
    pub fn new(before: &'a FieldState, outcome: &'a StepOutcome) -> Self {
        Self { before, after: &outcome.state, stages: &outcome.stages, dt: outcome.dt }
    }

    fn validate(&self) -> Result<()> {
        let same_grid = self.after.grid == self.before.grid && self.stages.iter().all(|s| s.grid == self.before.grid);
        let t0 = self.before.time;
        let tol = 1e-12 * t0.abs().max(1.0);
        let consecutive = (self.after.time - t0 - self.dt).abs() <= tol
            && self.stages[0].time == t0
            && self.stages[0].rho == self.before.rho;
        if !(same_grid && consecutive && self.dt > 0.0) {
            return Err(DiagnosticsError::Usage("window states are not one step of the same run".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    pub kinetic: f64,
    pub magnetic: f64,
    pub internal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub entropy_total: f64,
    pub production_visc: f64,
    pub production_ohmic: f64,
    pub production_fourier: f64,
    /// Balance residual over the window, when one is supplied.
    pub balance_residual_29: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub res22: f64,
    pub res23: f64,
    pub res13: f64,
    pub res_rho_log_rho: f64,
    pub res29: f64,
}

impl Residuals {
    pub fn max_abs(&self) -> f64 {
        [self.res22, self.res23, self.res13, self.res_rho_log_rho, self.res29]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn energy_report(dynamics: &Dynamics, state: &FieldState) -> Result<EnergyReport> {
    let terms = Terms::new(dynamics, state)?;
    let f = Functionals::new(dynamics, &terms);
    Ok(EnergyReport { total: f.total_energy(), kinetic: f.kinetic, magnetic: f.magnetic, internal: f.internal })
}

pub fn entropy_report(dynamics: &Dynamics, state: &FieldState, window: Option<&StepWindow>) -> Result<EntropyReport> {
    if state.rho.iter().chain(&state.theta).any(|v| !(*v > 0.0)) {
        return Err(DiagnosticsError::Usage("entropy needs positive density and temperature".into()));
    }
    let terms = Terms::new(dynamics, state)?;
    let f = Functionals::new(dynamics, &terms);
    let [visc, ohmic, fourier] = terms.productions();
    let balance_residual_29 = match window {
        Some(w) => Some(balance_residuals(dynamics, w)?.res29),
        None => None,
    };
    Ok(EntropyReport {
        entropy_total: f.entropy,
        production_visc: visc,
        production_ohmic: ohmic,
        production_fourier: fourier,
        balance_residual_29,
    })
}

struct StageRates {
    energy: f64,
    bd: f64,
    rho_log_rho: f64,
    entropy: f64,
}

pub(crate) struct WindowSummary {
    pub residuals: Residuals,
    pub d_rho_pe_dt: f64,
}

pub(crate) fn window_summary(dynamics: &Dynamics, window: &StepWindow) -> Result<WindowSummary> {
    window.validate()?;
    let tb = Terms::new(dynamics, window.before)?;
    let ta = Terms::new(dynamics, window.after)?;
    let fb = Functionals::new(dynamics, &tb);
    let fa = Functionals::new(dynamics, &ta);
    let mut rates = StageRates { energy: 0.0, bd: 0.0, rho_log_rho: 0.0, entropy: 0.0 };
    for (i, (stage, b)) in window.stages.iter().zip(STAGE_WEIGHTS).enumerate() {
        let own = if i == 0 { None } else { Some(Terms::new(dynamics, stage)?) };
        let t = own.as_ref().unwrap_or(&tb);
        rates.energy += b * t.energy_rate();
        rates.bd += b * t.bd_rate();
        rates.rho_log_rho += b * t.rho_log_rho_rate();
        rates.entropy += b * t.entropy_rate();
    }
    let dt = window.dt;
    let diff = |a: f64, b: f64| (a - b) / dt;
    Ok(WindowSummary {
        residuals: Residuals {
            res22: diff(fa.energy22(), fb.energy22()) - rates.energy,
            res23: diff(fa.bd, fb.bd) - rates.bd,
            res13: diff(fa.total_energy(), fb.total_energy()),
            res_rho_log_rho: diff(fa.rho_log_rho, fb.rho_log_rho) - rates.rho_log_rho,
            res29: diff(fa.entropy, fb.entropy) - rates.entropy,
        },
        d_rho_pe_dt: diff(fa.rho_pe, fb.rho_pe),
    })
}

pub fn balance_residuals(dynamics: &Dynamics, window: &StepWindow) -> Result<Residuals> {
    Ok(window_summary(dynamics, window)?.residuals)
}

/// Default exponents for the `∇θ^α` entries: `a/4` and `a/2`.
pub fn default_alphas(dynamics: &Dynamics) -> [f64; 2] {
    let a = dynamics.coeffs.conductivity_exponent;
    [a / 4.0, a / 2.0]
}

pub fn apriori_norms(dynamics: &Dynamics, state: &FieldState, alphas: &[f64]) -> Result<AprioriNorms> {
    let terms = Terms::new(dynamics, state)?;
    apriori_from_terms(dynamics, &terms, alphas)
}

pub fn inequality_monitors(dynamics: &Dynamics, state: &FieldState, window: Option<&StepWindow>) -> Result<Monitors> {
    let terms = Terms::new(dynamics, state)?;
    let d_pe = match window {
        Some(w) => Some(window_summary(dynamics, w)?.d_rho_pe_dt),
        None => None,
    };
    Ok(monitors_from_terms(dynamics, &terms, d_pe))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectricFieldReport {
    pub e_field: Vector,
    pub induction_consistency: f64,
}

pub fn electric_field(dynamics: &Dynamics, state: &FieldState) -> Result<ElectricFieldReport> {
    let coef = crate::dynamics::CoefficientFields::evaluate(state, &dynamics.coeffs)?;
    let e_field = dynamics.electric_field(state, &coef.nu)?;
    let d_h = dynamics.induction_unprojected(state, &coef.nu)?;
    let curl_e = dynamics.ops.curl(&e_field)?;
    let g = &state.grid;
    let n = state.rho.len();
    let mismatch = g.integrate((0..n).map(|p| (0..3).map(|c| (d_h[c][p] + curl_e[c][p]).powi(2)).sum::<f64>()));
    let size = g.integrate((0..n).map(|p| (0..3).map(|c| d_h[c][p].powi(2)).sum::<f64>()));
    Ok(ElectricFieldReport { e_field, induction_consistency: mismatch.sqrt() / size.sqrt().max(1.0) })
}

#[cfg(test)]
mod tests;
