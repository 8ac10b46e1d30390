//! Numeric sampling of the structural hypotheses on the coefficients.

use super::quadrature::gauss_legendre_integral;
use super::{CoefficientSet, ConstitutiveError};
use serde::Serialize;
use std::fmt::{self, Write as _};

/// Identifies one hypothesis (or one regime of a two-regime hypothesis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HypothesisId {
    /// Bulk/shear viscosity relation.
    H31,
    /// Viscosity growth below the density scale.
    H32Low,
    /// Viscosity growth above the density scale.
    H32High,
    /// Heat-conductivity structure.
    H33,
    /// Polytropic equations of state.
    H34,
    /// Cold-pressure bounds and the lower bound on its exponent.
    H35Low,
    /// Stiff-pressure bound and the upper bound on its exponent.
    H35High,
    /// Resistivity bounds.
    H36,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 8] = [
        HypothesisId::H31,
        HypothesisId::H32Low,
        HypothesisId::H32High,
        HypothesisId::H33,
        HypothesisId::H34,
        HypothesisId::H35Low,
        HypothesisId::H35High,
        HypothesisId::H36,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HypothesisId::H31 => "H31",
            HypothesisId::H32Low => "H32_low",
            HypothesisId::H32High => "H32_high",
            HypothesisId::H33 => "H33",
            HypothesisId::H34 => "H34",
            HypothesisId::H35Low => "H35_low",
            HypothesisId::H35High => "H35_high",
            HypothesisId::H36 => "H36",
        }
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Where a failing hypothesis was caught.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Witness {
    Sample { rho: f64, theta: f64 },
    /// A parameter-only constraint (exponent ranges and bounds).
    Analytic { constraint: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisEntry {
    pub id: HypothesisId,
    pub pass: bool,
    /// Minimum over all checks of (satisfied side - violating side) divided
    /// by the satisfied side. Negative means violated.
    pub worst_margin: f64,
    pub worst_sample: Option<(f64, f64)>,
    pub witness: Option<Witness>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub entries: Vec<HypothesisEntry>,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, id: HypothesisId) -> &HypothesisEntry {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .expect("every hypothesis has an entry")
    }

    /// Fixed-column text table, one line per hypothesis.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<9} {:<5} {:>13} {:>13} {:>13}  note",
            "id", "pass", "worst_margin", "worst_rho", "worst_theta"
        );
        for e in &self.entries {
            let (r, t) = match e.worst_sample {
                Some((r, t)) => (format!("{r:>13.6e}"), format!("{t:>13.6e}")),
                None => (format!("{:>13}", "-"), format!("{:>13}", "-")),
            };
            let _ = writeln!(
                out,
                "{:<9} {:<5} {:>13.6e} {} {}  {}",
                e.id.label(),
                if e.pass { "yes" } else { "NO" },
                e.worst_margin,
                r,
                t,
                e.note
            );
        }
        out
    }
}

/// Sampling region for [`validate_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub rho_range: (f64, f64),
    pub theta_range: (f64, f64),
    /// Total number of samples; laid out as a square log-spaced grid.
    pub n_samples: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            rho_range: (1e-6, 1e6),
            theta_range: (1e-3, 1e3),
            n_samples: 1000,
        }
    }
}

fn log_spaced(range: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = (range.0.ln(), range.1.ln());
    if n == 1 || lo == hi {
        return vec![range.0];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                range.1
            } else {
                (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn check_range(name: &str, range: (f64, f64), per_axis: usize) -> Result<(), ConstitutiveError> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi.is_finite()) || lo > hi {
        return Err(ConstitutiveError::Usage(format!(
            "{name} range [{lo}, {hi}] is empty or not positive"
        )));
    }
    let decades = (hi / lo).log10();
    if (per_axis as f64) < 2.0 * decades {
        return Err(ConstitutiveError::Usage(format!(
            "{per_axis} samples along {name} cover {decades:.2} decades; at least 2 per decade are required"
        )));
    }
    Ok(())
}

/// Running minimum of the normalized margin.
struct Tracker {
    margin: f64,
    sample: Option<(f64, f64)>,
    analytic: Option<String>,
}

impl Tracker {
    fn new() -> Self {
        Self { margin: f64::INFINITY, sample: None, analytic: None }
    }

    /// Records `small <= big` at a sample.
    fn le(&mut self, small: f64, big: f64, rho: f64, theta: f64) {
        self.record(normalized(small, big), Some((rho, theta)), None);
    }

    /// Records a unitless margin at a sample.
    fn raw(&mut self, margin: f64, rho: f64, theta: f64) {
        self.record(margin, Some((rho, theta)), None);
    }

    fn analytic(&mut self, margin: f64, constraint: String) {
        self.record(margin, None, Some(constraint));
    }

    fn record(&mut self, margin: f64, sample: Option<(f64, f64)>, analytic: Option<String>) {
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if margin < self.margin {
            self.margin = margin;
            if sample.is_some() {
                self.sample = sample;
                self.analytic = None;
            } else {
                self.analytic = analytic;
            }
        }
    }

    fn finish(self, id: HypothesisId, note: String) -> HypothesisEntry {
        let pass = self.margin >= -1e-12;
        let witness = if pass {
            None
        } else if let Some(constraint) = self.analytic.clone() {
            Some(Witness::Analytic { constraint })
        } else {
            self.sample.map(|(rho, theta)| Witness::Sample { rho, theta })
        };
        HypothesisEntry {
            id,
            pass,
            worst_margin: self.margin,
            worst_sample: self.sample,
            witness,
            note,
        }
    }
}

fn normalized(small: f64, big: f64) -> f64 {
    let scale = if big.abs() > 0.0 { big.abs() } else { small.abs().max(f64::MIN_POSITIVE) };
    (big - small) / scale
}

/// Checks every hypothesis at a log-spaced grid of `(rho, theta)` samples,
/// plus the parameter-only exponent constraints.
pub fn validate_hypotheses(
    coeffs: &CoefficientSet,
    spec: &SampleSpec,
) -> Result<HypothesisReport, ConstitutiveError> {
    if spec.n_samples == 0 {
        return Err(ConstitutiveError::Usage("no samples requested".into()));
    }
    let per_axis = (spec.n_samples as f64).sqrt().ceil() as usize;
    check_range("rho", spec.rho_range, per_axis)?;
    check_range("theta", spec.theta_range, per_axis)?;
    let rhos = log_spaced(spec.rho_range, per_axis);
    let thetas = log_spaced(spec.theta_range, per_axis);
    let theta_ref = thetas[thetas.len() / 2];
    let c = coeffs;

    // Viscosity relation: exact algebra plus a derivative cross-check.
    let mut h31 = Tracker::new();
    for &s in &rhos {
        let mu = c.mu(s);
        let mu_p = c.mu_prime(s);
        let lambda = c.lambda(s);
        let identity_err = (lambda - 2.0 * (s * mu_p - mu)).abs() / lambda.abs().max(1.0);
        h31.raw(1.0 - identity_err / 1e-12, s, theta_ref);
        let h = 1e-5 * s;
        let fd = (c.mu(s + h) - c.mu(s - h)) / (2.0 * h);
        let fd_err = (fd - mu_p).abs() / mu_p.abs().max(f64::MIN_POSITIVE);
        h31.raw(1.0 - fd_err / 1e-6, s, theta_ref);
    }
    let h31 = h31.finish(
        HypothesisId::H31,
        "lambda = 2(s mu' - mu); mu' checked against a central difference".into(),
    );

    let (beta, m) = (c.beta, c.m);
    let mut low = Tracker::new();
    low.analytic(
        ((beta - 2.0 / 3.0) / beta).min(1.0 - beta),
        format!("beta = {beta} outside (2/3, 1)"),
    );
    let mut high = Tracker::new();
    high.analytic((m - 1.0) / m, format!("m = {m} not greater than 1"));
    let (mut n_low, mut n_high) = (0, 0);
    for &s in &rhos {
        let mu_p = c.mu_prime(s);
        let tl2m = 3.0 * c.lambda(s) + 2.0 * c.mu(s);
        if s < c.density_scale {
            n_low += 1;
            let w = s.powf(beta - 1.0);
            low.le(c.c0 * w, mu_p, s, theta_ref);
            low.le(mu_p, w / c.c0, s, theta_ref);
            low.le(c.c0 * s.powf(beta), tl2m, s, theta_ref);
        } else {
            n_high += 1;
            let w = s.powf(m - 1.0);
            high.le(c.c1 * w, mu_p, s, theta_ref);
            high.le(mu_p, w / c.c1, s, theta_ref);
            high.le(c.c1 * s.powf(m), tl2m, s, theta_ref);
            high.le(tl2m, s.powf(m) / c.c1, s, theta_ref);
        }
    }
    let h32_low = low.finish(HypothesisId::H32Low, format!("{n_low} density samples below A"));
    let h32_high = high.finish(HypothesisId::H32High, format!("{n_high} density samples at or above A"));

    let mut h33 = Tracker::new();
    let a = c.conductivity_exponent;
    h33.analytic((a - 2.0) / a, format!("a = {a} below 2"));
    for &r in &rhos {
        for &t in &thetas {
            let k0 = c.kappa0(r, t);
            h33.le(c.c2, k0, r, t);
            h33.le(k0, 1.0 / c.c2, r, t);
        }
    }
    let h33 = h33.finish(HypothesisId::H33, "c2 <= kappa0 <= 1/c2".into());

    // Equations of state: the potential must be the integral of p_e/s^2.
    let mut h34 = Tracker::new();
    h34.analytic(1.0f64.min(c.specific_heat), format!("c_upsilon = {} not positive", c.specific_heat));
    for &s in &rhos {
        let got = c.pressure_potential(s);
        let reference = composite_potential(c, s);
        let err = (got - reference).abs() / reference.abs().max(1.0);
        h34.raw(1.0 - err / 1e-8, s, theta_ref);
        let p_err = (c.pressure(s, theta_ref) - (s * theta_ref + c.pe(s))).abs();
        h34.raw(1.0 - p_err / (1e-14 * c.pressure(s, theta_ref).abs().max(1.0)), s, theta_ref);
    }
    let h34 = h34.finish(HypothesisId::H34, "P_e checked against composite Gauss-Legendre".into());

    let (l, k) = (c.cold_exponent, c.stiff_exponent);
    let mut cold = Tracker::new();
    let l_bound = c.cold_exponent_bound();
    cold.analytic(
        (l - l_bound) / l.abs().max(f64::MIN_POSITIVE),
        format!("l = {l} not greater than {l_bound:.6}"),
    );
    let mut stiff = Tracker::new();
    let k_bound = c.stiff_exponent_bound();
    stiff.analytic(
        (k_bound - k) / k_bound.abs().max(f64::MIN_POSITIVE),
        format!("k = {k} exceeds {k_bound:.6}"),
    );
    for &s in &rhos {
        let dp = c.pe_prime(s);
        if s < c.pressure_scale {
            let w = s.powf(-l - 1.0);
            cold.le(c.c3 * w, dp, s, theta_ref);
            cold.le(dp, w / c.c3, s, theta_ref);
        } else if s > c.pressure_scale {
            stiff.le(dp, c.c4 * s.powf(k - 1.0), s, theta_ref);
        }
    }
    let h35_low = cold.finish(HypothesisId::H35Low, format!("l bound {l_bound:.6}"));
    let h35_high = stiff.finish(HypothesisId::H35High, format!("k bound {k_bound:.6}"));

    let mut h36 = Tracker::new();
    let mut active = 0usize;
    for &r in &rhos {
        for &t in &thetas {
            let nu = c.nu(r, t);
            h36.le(c.c6, nu, r, t);
            h36.le(nu, 1.0 / c.c6, r, t);
            let ratio = c.c5 * t / r;
            // The temperature lower bound is only jointly satisfiable with
            // the constant bounds where it does not exceed c6.
            if ratio <= c.c6 {
                active += 1;
                h36.le(ratio, nu, r, t);
            }
        }
    }
    let h36 = h36.finish(
        HypothesisId::H36,
        format!("c5 theta/rho bound checked on {active} of {} samples", rhos.len() * thetas.len()),
    );

    Ok(HypothesisReport {
        entries: vec![h31, h32_low, h32_high, h33, h34, h35_low, h35_high, h36],
        samples: rhos.len() * thetas.len(),
    })
}

/// Independent route for `P_e`: composite Gauss–Legendre in `ln s` with
/// panels of width at most 1/4.
fn composite_potential(c: &CoefficientSet, s: f64) -> f64 {
    let upper = s.ln();
    let panels = ((upper.abs() / 0.25).ceil() as usize).max(1);
    let width = upper / panels as f64;
    (0..panels)
        .map(|i| {
            let a = i as f64 * width;
            gauss_legendre_integral(|t| c.pe(t.exp()) * (-t).exp(), a, a + width)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{NuFamily, PressureFamily};

    #[test]
    fn rejects_empty_range() {
        let spec = SampleSpec { rho_range: (2.0, 1.0), ..SampleSpec::default() };
        assert!(matches!(
            validate_hypotheses(&CoefficientSet::reference(), &spec),
            Err(ConstitutiveError::Usage(_))
        ));
    }

    #[test]
    fn rejects_sparse_sampling() {
        let spec = SampleSpec { n_samples: 16, ..SampleSpec::default() };
        assert!(validate_hypotheses(&CoefficientSet::reference(), &spec).is_err());
    }

    #[test]
    fn constant_resistivity_passes_where_bounds_are_compatible() {
        let c = CoefficientSet {
            nu_family: NuFamily::Constant { value: 0.02 },
            ..CoefficientSet::reference()
        };
        let report = validate_hypotheses(&c, &SampleSpec::default()).unwrap();
        assert!(report.entry(HypothesisId::H36).pass);
    }

    #[test]
    fn pure_power_pressure_fails_cold_bound_with_sample_witness() {
        let c = CoefficientSet {
            pe_family: PressureFamily::Power { coeff: 1.0, exponent: 7.0 },
            ..CoefficientSet::reference()
        };
        let report = validate_hypotheses(&c, &SampleSpec::default()).unwrap();
        let e = report.entry(HypothesisId::H35Low);
        assert!(!e.pass);
        assert!(matches!(e.witness, Some(Witness::Sample { .. })));
    }

    #[test]
    fn table_has_one_line_per_hypothesis() {
        let report = validate_hypotheses(&CoefficientSet::reference(), &SampleSpec::default()).unwrap();
        assert_eq!(report.to_table().lines().count(), 1 + HypothesisId::ALL.len());
    }

    #[test]
    fn reference_set_passes_everything() {
        let report = validate_hypotheses(&CoefficientSet::reference(), &SampleSpec::default()).unwrap();
        assert!(report.all_pass(), "{}", report.to_table());
    }

    #[test]
    fn exponent_perturbations_fail_with_witness() {
        let cases = [
            (CoefficientSet { beta: 0.5, ..CoefficientSet::reference() }, HypothesisId::H32Low),
            (CoefficientSet { cold_exponent: 5.0, ..CoefficientSet::reference() }, HypothesisId::H35Low),
            (CoefficientSet { stiff_exponent: 8.0, ..CoefficientSet::reference() }, HypothesisId::H35High),
        ];
        for (c, id) in cases {
            let report = validate_hypotheses(&c, &SampleSpec::default()).unwrap();
            let e = report.entry(id);
            assert!(!e.pass, "{}", report.to_table());
            assert!(e.witness.is_some());
        }
    }
}
