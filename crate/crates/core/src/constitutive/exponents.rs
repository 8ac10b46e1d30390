use super::CoefficientSet;
use serde::Serialize;

/// Integrability exponents for velocity, energy flux and density that follow
/// from `(beta, l, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTable {
    pub j: f64,
    pub j1: f64,
    /// Time exponent of the velocity gradient bound.
    pub q1: f64,
    pub q2: f64,
    /// Space exponent of the velocity gradient bound.
    pub q3: f64,
    pub s_exp: f64,
    pub r_exp: f64,
    /// Local integrability exponent of the density, `6m - 3`.
    pub p_density: f64,
    pub delta_floor: f64,
}

pub fn derived_exponents(coeffs: &CoefficientSet) -> ExponentTable {
    let (b, l, m) = (coeffs.beta, coeffs.cold_exponent, coeffs.m);
    let shifted = l + 1.0 - b;
    let j = shifted / b;
    let q1 = 2.0 * (1.0 - b / (l + 1.0));
    let q3 = 1.0 / (1.0 / (6.0 * j) + 0.5);
    ExponentTable {
        j,
        j1: shifted / (2.0 * l),
        q1,
        q2: 3.0 * q1,
        q3,
        s_exp: 6.0 * shifted / (5.0 * l + 3.0),
        r_exp: 18.0 * shifted / (17.0 * l + 15.0 - 12.0 * b),
        p_density: 6.0 * m - 3.0,
        delta_floor: 3.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_exponents() {
        let t = derived_exponents(&CoefficientSet::reference());
        // Hand evaluation at beta = 0.8, l = 6, m = 2.
        assert!((t.q1 - 2.0 * (1.0 - 0.8 / 7.0)).abs() < 1e-15);
        assert!((t.q1 - 1.771_428_571_428_571).abs() < 1e-12);
        assert!((t.j - 7.75).abs() < 1e-15);
        assert!((t.q3 - 1.917_525_773_195_876).abs() < 1e-12);
        assert!((t.q2 - 5.314_285_714_285_714).abs() < 1e-12);
        assert_eq!(t.p_density, 9.0);
        // q2 is also the Sobolev conjugate 3 q3 / (3 - q3).
        assert!((t.q2 - 3.0 * t.q3 / (3.0 - t.q3)).abs() < 1e-12);
    }
}
