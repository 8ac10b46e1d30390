//! Constitutive laws: viscosity, conductivity, resistivity and pressure
//! families, together with numeric hypothesis checking and the derived
//! integrability exponents.
//!
//! The bulk viscosity is never an input. It is always derived from the shear
//! viscosity through `lambda(s) = 2 (s mu'(s) - mu(s))`, which is what makes
//! the density-gradient (BD) entropy identity available.

mod exponents;
mod hypotheses;
pub mod quadrature;

pub use exponents::{derived_exponents, ExponentTable};
pub use hypotheses::{
    validate_hypotheses, HypothesisEntry, HypothesisId, HypothesisReport, SampleSpec, Witness,
};

use quadrature::{adaptive_simpson, gauss_legendre_integral, power_integral};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("{name} must be positive, got {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("coefficient `{field}` is not finite ({value}) at rho = {rho}, theta = {theta}")]
    Numeric {
        field: &'static str,
        value: f64,
        rho: f64,
        theta: f64,
    },
    #[error("invalid coefficient parameter: {0}")]
    Invariant(String),
    #[error("invalid sample specification: {0}")]
    Usage(String),
}

/// Shear viscosity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MuFamily {
    /// `mu'(s) = low_coeff * s^(beta-1)` below `A/2`, a pure `s^m` law above
    /// `2A`, and a cubic Hermite blend of the log-slope `s mu'/mu` from
    /// `beta` to `m` in between. The high-density prefactor follows from
    /// continuity.
    Reference { low_coeff: f64 },
    /// `mu(s) = coeff * s^exponent` everywhere.
    Power { coeff: f64, exponent: f64 },
}

/// Bounded factor `kappa_0(rho, theta)` of the heat conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kappa0Family {
    Constant { value: f64 },
    /// `base * (1 + amplitude * sin(ln(rho * theta)))`, |amplitude| < 1.
    Modulated { base: f64, amplitude: f64 },
}

/// Magnetic resistivity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NuFamily {
    Constant { value: f64 },
    /// `clamp(c5 * theta / rho, c6, 1 / c6)`.
    Clamp,
}

/// Density part `p_e(rho)` of the pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PressureFamily {
    /// `p_e(s) = coeff * s^exponent`.
    Power { coeff: f64, exponent: f64 },
    /// `p_e(s) = -cold * s^(-l) / l + stiff * s^k / k`: a cold pressure that
    /// is singular at vacuum plus a stiff high-density branch.
    ColdStiff { cold: f64, stiff: f64 },
}

/// All constitutive parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    /// Low-density viscosity exponent, in (2/3, 1).
    pub beta: f64,
    /// High-density viscosity exponent, > 1.
    pub m: f64,
    /// Density scale separating the two viscosity regimes.
    pub density_scale: f64,
    pub c0: f64,
    pub c1: f64,
    /// Temperature exponent of the conductivity, >= 2.
    pub conductivity_exponent: f64,
    pub c2: f64,
    /// Cold-pressure exponent.
    pub cold_exponent: f64,
    /// Stiff-pressure exponent.
    pub stiff_exponent: f64,
    /// Density scale separating the two pressure regimes.
    pub pressure_scale: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    /// Specific heat at constant volume.
    pub specific_heat: f64,
    pub mu_family: MuFamily,
    pub kappa0_family: Kappa0Family,
    pub nu_family: NuFamily,
    pub pe_family: PressureFamily,
}

/// Pointwise evaluation of every coefficient at one `(rho, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientValues {
    pub mu: f64,
    pub mu_prime: f64,
    pub lambda: f64,
    pub three_lambda_plus_two_mu: f64,
    pub kappa: f64,
    pub nu: f64,
    pub pressure: f64,
    pub internal_energy: f64,
    pub phi: f64,
    pub pressure_potential: f64,
}

impl CoefficientSet {
    /// The shipped reference family: beta = 0.8, m = 2, l = 6, k = 7, a = 2.
    pub fn reference() -> Self {
        Self {
            beta: 0.8,
            m: 2.0,
            density_scale: 0.5,
            c0: 1e-3,
            c1: 1e-3,
            conductivity_exponent: 2.0,
            c2: 5e-3,
            cold_exponent: 6.0,
            stiff_exponent: 7.0,
            pressure_scale: 1.0,
            c3: 1e-2,
            c4: 1.0,
            c5: 1e-2,
            c6: 2e-2,
            specific_heat: 1.5,
            mu_family: MuFamily::Reference { low_coeff: 2e-3 },
            kappa0_family: Kappa0Family::Constant { value: 1e-2 },
            nu_family: NuFamily::Clamp,
            pe_family: PressureFamily::ColdStiff {
                cold: 1e-2,
                stiff: 0.1,
            },
        }
    }

    /// Upper bound on the stiff exponent implied by the other exponents.
    pub fn stiff_exponent_bound(&self) -> f64 {
        let (b, l, m) = (self.beta, self.cold_exponent, self.m);
        (m - 0.5) * (5.0 * (l + 1.0) - 6.0 * b) / (l + 1.0 - b)
    }

    /// Lower bound (strict) on the cold exponent.
    pub fn cold_exponent_bound(&self) -> f64 {
        2.0 * self.beta * (3.0 * self.m - 2.0) / (self.m - 1.0) - 1.0
    }

    /// `min(A, A0)`.
    pub fn low_density_threshold(&self) -> f64 {
        self.density_scale.min(self.pressure_scale)
    }

    /// Checks every parameter constraint; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), ConstitutiveError> {
        let fail = |msg: String| Err(ConstitutiveError::Invariant(msg));
        if !(self.beta > 2.0 / 3.0 && self.beta < 1.0) {
            return fail(format!("beta = {} must lie in (2/3, 1)", self.beta));
        }
        if !(self.m > 1.0) {
            return fail(format!("m = {} must exceed 1", self.m));
        }
        if !(self.conductivity_exponent >= 2.0) {
            return fail(format!("a = {} must be at least 2", self.conductivity_exponent));
        }
        let positives = [
            ("A", self.density_scale),
            ("A0", self.pressure_scale),
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("c5", self.c5),
            ("c6", self.c6),
            ("c_upsilon", self.specific_heat),
        ];
        for (name, v) in positives {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.cold_exponent > self.cold_exponent_bound()) {
            return fail(format!(
                "l = {} must exceed 2 beta (3m - 2)/(m - 1) - 1 = {}",
                self.cold_exponent,
                self.cold_exponent_bound()
            ));
        }
        if !(self.stiff_exponent <= self.stiff_exponent_bound()) {
            return fail(format!(
                "k = {} must not exceed (m - 1/2)(5(l+1) - 6 beta)/(l + 1 - beta) = {}",
                self.stiff_exponent,
                self.stiff_exponent_bound()
            ));
        }
        if let NuFamily::Clamp = self.nu_family {
            if self.c6 > 1.0 {
                return fail(format!("c6 = {} must not exceed 1 for the clamp family", self.c6));
            }
        }
        if let Kappa0Family::Modulated { amplitude, base } = self.kappa0_family {
            if !(amplitude.abs() < 1.0 && base > 0.0) {
                return fail("kappa0 modulation needs base > 0 and |amplitude| < 1".into());
            }
        }
        match self.mu_family {
            MuFamily::Reference { low_coeff } if !(low_coeff > 0.0) => {
                return fail(format!("mu_low = {low_coeff} must be positive"))
            }
            MuFamily::Power { coeff, .. } if !(coeff > 0.0) => {
                return fail(format!("mu_coeff = {coeff} must be positive"))
            }
            _ => {}
        }
        Ok(())
    }

    // ---- shear viscosity -------------------------------------------------

    fn blend_bounds(&self) -> (f64, f64) {
        ((0.5 * self.density_scale).ln(), (2.0 * self.density_scale).ln())
    }

    /// `ln mu` as a function of `t = ln s` for the reference family.
    fn reference_log_mu(&self, low_coeff: f64, t: f64) -> f64 {
        let (t0, t1) = self.blend_bounds();
        let h = t1 - t0;
        let g0 = (low_coeff / self.beta).ln() + self.beta * t0;
        if t <= t0 {
            (low_coeff / self.beta).ln() + self.beta * t
        } else if t < t1 {
            let x = (t - t0) / h;
            let w_int = x * x * x - 0.5 * x * x * x * x;
            g0 + h * (self.beta * x + (self.m - self.beta) * w_int)
        } else {
            let g1 = g0 + h * (self.beta + 0.5 * (self.m - self.beta));
            g1 + self.m * (t - t1)
        }
    }

    /// Log-slope `s mu'(s) / mu(s)` of the reference family.
    fn reference_elasticity(&self, t: f64) -> f64 {
        let (t0, t1) = self.blend_bounds();
        if t <= t0 {
            self.beta
        } else if t < t1 {
            let x = (t - t0) / (t1 - t0);
            self.beta + (self.m - self.beta) * x * x * (3.0 - 2.0 * x)
        } else {
            self.m
        }
    }

    pub fn mu(&self, s: f64) -> f64 {
        match self.mu_family {
            MuFamily::Reference { low_coeff } => self.reference_log_mu(low_coeff, s.ln()).exp(),
            MuFamily::Power { coeff, exponent } => coeff * s.powf(exponent),
        }
    }

    pub fn mu_prime(&self, s: f64) -> f64 {
        match self.mu_family {
            MuFamily::Reference { low_coeff } => {
                let t = s.ln();
                self.reference_elasticity(t) * self.reference_log_mu(low_coeff, t).exp() / s
            }
            MuFamily::Power { coeff, exponent } => coeff * exponent * s.powf(exponent - 1.0),
        }
    }

    /// Bulk viscosity, always `2 (s mu' - mu)`.
    pub fn lambda(&self, s: f64) -> f64 {
        2.0 * (s * self.mu_prime(s) - self.mu(s))
    }

    /// `phi` with `phi' = mu'/s` and `phi(A) = 0`.
    pub fn phi(&self, s: f64) -> f64 {
        self.phi_from_low_end(s) - self.phi_from_low_end(self.density_scale)
    }

    /// `∫_{A/2}^{s} mu'(x)/x dx` (reference) or `∫_{1}^{s}` (power).
    fn phi_from_low_end(&self, s: f64) -> f64 {
        match self.mu_family {
            MuFamily::Power { coeff, exponent } => {
                power_integral(coeff * exponent, exponent - 2.0, 1.0, s)
            }
            MuFamily::Reference { low_coeff } => {
                let (t0, t1) = self.blend_bounds();
                let s_lo = t0.exp();
                let t = s.ln();
                // mu'(x)/x dx = mu'(e^t) dt inside the blend.
                let blend = |a: f64, b: f64| {
                    gauss_legendre_integral(
                        |tau| {
                            self.reference_elasticity(tau)
                                * (self.reference_log_mu(low_coeff, tau) - tau).exp()
                        },
                        a,
                        b,
                    )
                };
                if t <= t0 {
                    power_integral(low_coeff, self.beta - 2.0, s_lo, s)
                } else if t < t1 {
                    blend(t0, t)
                } else {
                    let s_hi = t1.exp();
                    let high_coeff = self.m * self.reference_log_mu(low_coeff, t1).exp()
                        / s_hi.powf(self.m);
                    blend(t0, t1) + power_integral(high_coeff, self.m - 2.0, s_hi, s)
                }
            }
        }
    }

    // ---- heat conductivity and resistivity ------------------------------

    pub fn kappa0(&self, rho: f64, theta: f64) -> f64 {
        match self.kappa0_family {
            Kappa0Family::Constant { value } => value,
            Kappa0Family::Modulated { base, amplitude } => {
                base * (1.0 + amplitude * (rho * theta).ln().sin())
            }
        }
    }

    pub fn kappa(&self, rho: f64, theta: f64) -> f64 {
        self.kappa0(rho, theta) * (rho + 1.0) * (theta.powf(self.conductivity_exponent) + 1.0)
    }

    pub fn nu(&self, rho: f64, theta: f64) -> f64 {
        match self.nu_family {
            NuFamily::Constant { value } => value,
            NuFamily::Clamp => (self.c5 * theta / rho).clamp(self.c6, 1.0 / self.c6),
        }
    }

    // ---- pressure ---------------------------------------------------------

    pub fn pe(&self, s: f64) -> f64 {
        match self.pe_family {
            PressureFamily::Power { coeff, exponent } => coeff * s.powf(exponent),
            PressureFamily::ColdStiff { cold, stiff } => {
                let (l, k) = (self.cold_exponent, self.stiff_exponent);
                -cold * s.powf(-l) / l + stiff * s.powf(k) / k
            }
        }
    }

    pub fn pe_prime(&self, s: f64) -> f64 {
        match self.pe_family {
            PressureFamily::Power { coeff, exponent } => coeff * exponent * s.powf(exponent - 1.0),
            PressureFamily::ColdStiff { cold, stiff } => {
                let (l, k) = (self.cold_exponent, self.stiff_exponent);
                cold * s.powf(-l - 1.0) + stiff * s.powf(k - 1.0)
            }
        }
    }

    /// `P_e(s) = ∫_1^s p_e(x)/x^2 dx`.
    ///
    /// Closed form for a pure power; otherwise adaptive Simpson in the
    /// variable `ln x`, with absolute tolerance `1e-10` relative to the
    /// integral's magnitude.
    pub fn pressure_potential(&self, s: f64) -> f64 {
        match self.pe_family {
            PressureFamily::Power { coeff, exponent } => {
                power_integral(coeff, exponent - 2.0, 1.0, s)
            }
            PressureFamily::ColdStiff { .. } => {
                let upper = s.ln();
                let integrand = |t: f64| self.pe(t.exp()) * (-t).exp();
                let coarse = gauss_legendre_integral(integrand, 0.0, upper);
                let tol = 1e-10 * coarse.abs().max(1.0);
                adaptive_simpson(&integrand, 0.0, upper, tol)
            }
        }
    }

    pub fn pressure(&self, rho: f64, theta: f64) -> f64 {
        rho * theta + self.pe(rho)
    }

    /// Squared fast magnetosonic speed `dp/drho + theta + |H|^2 / rho`.
    pub fn fast_speed_squared(&self, rho: f64, theta: f64, h2: f64) -> f64 {
        theta + self.pe_prime(rho) + theta + h2 / rho
    }
}

/// Evaluates every coefficient at one `(rho, theta)`.
pub fn eval_coefficients(
    rho: f64,
    theta: f64,
    coeffs: &CoefficientSet,
) -> Result<CoefficientValues, ConstitutiveError> {
    if !(rho > 0.0) {
        return Err(ConstitutiveError::Domain { name: "rho", value: rho });
    }
    if !(theta > 0.0) {
        return Err(ConstitutiveError::Domain { name: "theta", value: theta });
    }
    let mu = coeffs.mu(rho);
    let mu_prime = coeffs.mu_prime(rho);
    let lambda = 2.0 * (rho * mu_prime - mu);
    let pressure_potential = coeffs.pressure_potential(rho);
    let values = CoefficientValues {
        mu,
        mu_prime,
        lambda,
        three_lambda_plus_two_mu: 3.0 * lambda + 2.0 * mu,
        kappa: coeffs.kappa(rho, theta),
        nu: coeffs.nu(rho, theta),
        pressure: coeffs.pressure(rho, theta),
        internal_energy: coeffs.specific_heat * theta + pressure_potential,
        phi: coeffs.phi(rho),
        pressure_potential,
    };
    let named = [
        ("mu", values.mu),
        ("mu_prime", values.mu_prime),
        ("lambda", values.lambda),
        ("kappa", values.kappa),
        ("nu", values.nu),
        ("pressure", values.pressure),
        ("internal_energy", values.internal_energy),
        ("phi", values.phi),
        ("pressure_potential", values.pressure_potential),
    ];
    for (field, value) in named {
        if !value.is_finite() {
            return Err(ConstitutiveError::Numeric { field, value, rho, theta });
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn low_regime_power() -> CoefficientSet {
        // mu(s) = s^0.8 for s <= A/2 = 2.
        CoefficientSet {
            density_scale: 4.0,
            mu_family: MuFamily::Reference { low_coeff: 0.8 },
            ..CoefficientSet::reference()
        }
    }

    #[test]
    fn conductivity_at_unit_state() {
        let c = CoefficientSet {
            kappa0_family: Kappa0Family::Constant { value: 1.0 },
            conductivity_exponent: 2.0,
            ..CoefficientSet::reference()
        };
        let v = eval_coefficients(1.0, 1.0, &c).unwrap();
        assert_eq!(v.kappa, 4.0);
    }

    #[test]
    fn low_regime_values_at_unit_density() {
        let v = eval_coefficients(1.0, 3.0, &low_regime_power()).unwrap();
        assert!((v.mu - 1.0).abs() < 1e-14);
        assert!((v.mu_prime - 0.8).abs() < 1e-14);
        assert!((v.lambda + 0.4).abs() < 1e-14);
        assert!((v.three_lambda_plus_two_mu - 0.8).abs() < 1e-14);
    }

    #[test]
    fn pure_power_potential_vanishes_at_one() {
        let c = CoefficientSet {
            pe_family: PressureFamily::Power { coeff: 1.0, exponent: 7.0 },
            ..CoefficientSet::reference()
        };
        assert_eq!(c.pressure_potential(1.0), 0.0);
        assert_eq!(CoefficientSet::reference().pressure_potential(1.0), 0.0);
    }

    #[test]
    fn linear_viscosity_has_no_bulk_part() {
        let c = CoefficientSet {
            mu_family: MuFamily::Power { coeff: 1.0, exponent: 1.0 },
            ..CoefficientSet::reference()
        };
        for rho in [1e-3, 0.7, 1.0, 42.0] {
            assert_eq!(eval_coefficients(rho, 1.0, &c).unwrap().lambda, 0.0);
        }
    }

    #[test]
    fn rejects_non_positive_state() {
        let c = CoefficientSet::reference();
        assert!(matches!(
            eval_coefficients(0.0, 1.0, &c),
            Err(ConstitutiveError::Domain { name: "rho", .. })
        ));
        assert!(matches!(
            eval_coefficients(1.0, -2.0, &c),
            Err(ConstitutiveError::Domain { name: "theta", .. })
        ));
    }

    #[test]
    fn nan_coefficient_is_reported_with_sample() {
        let c = CoefficientSet {
            kappa0_family: Kappa0Family::Constant { value: f64::NAN },
            ..CoefficientSet::reference()
        };
        match eval_coefficients(2.0, 3.0, &c) {
            Err(ConstitutiveError::Numeric { field, rho, theta, .. }) => {
                assert_eq!(field, "kappa");
                assert_eq!((rho, theta), (2.0, 3.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reference_mu_is_continuous_across_regimes() {
        let c = CoefficientSet::reference();
        for edge in [0.25, 1.0] {
            let below = c.mu(edge * (1.0 - 1e-12));
            let above = c.mu(edge * (1.0 + 1e-12));
            assert!((below - above).abs() < 1e-10 * below);
            let dbelow = c.mu_prime(edge * (1.0 - 1e-12));
            let dabove = c.mu_prime(edge * (1.0 + 1e-12));
            assert!((dbelow - dabove).abs() < 1e-9 * dbelow);
        }
    }

    #[test]
    fn phi_is_normalized_at_density_scale() {
        let c = CoefficientSet::reference();
        assert!(c.phi(c.density_scale).abs() < 1e-15);
    }

    #[test]
    fn clamp_resistivity_respects_bounds() {
        let c = CoefficientSet::reference();
        assert_eq!(c.nu(1.0, 1e-6), c.c6);
        assert_eq!(c.nu(1e-9, 1e3), 1.0 / c.c6);
        let mid = c.nu(1.0, 3.0 * c.c6 / c.c5);
        assert!((mid - 3.0 * c.c6).abs() < 1e-15);
    }

    #[test]
    fn invariant_messages_name_the_constraint() {
        let bad = CoefficientSet { beta: 0.5, ..CoefficientSet::reference() };
        let msg = bad.check_invariants().unwrap_err().to_string();
        assert!(msg.contains("(2/3, 1)"), "{msg}");
        assert!(CoefficientSet::reference().check_invariants().is_ok());
    }
}
