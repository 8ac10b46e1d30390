//! Quadrature rules used by the coefficient families.

use std::sync::OnceLock;

const GAUSS_POINTS: usize = 24;

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1].
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss–Legendre integral of `f` over `[a, b]`.
///
/// Exact for polynomials up to degree 47; used for analytic integrands on
/// short intervals.
pub fn gauss_legendre_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Simpson quadrature with the Richardson-corrected estimate.
///
/// `tol` is an absolute tolerance on the whole interval.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// ∫_a^b c·ξ^e dξ in closed form, including the logarithmic case e = -1.
pub fn power_integral(coeff: f64, exponent: f64, a: f64, b: f64) -> f64 {
    if (exponent + 1.0).abs() < 1e-14 {
        coeff * (b / a).ln()
    } else {
        let e1 = exponent + 1.0;
        coeff * (b.powf(e1) - a.powf(e1)) / e1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let got = gauss_legendre_integral(|x| x.powi(7) - 3.0 * x.powi(2) + 1.0, -0.5, 2.0);
        let exact = |x: f64| x.powi(8) / 8.0 - x.powi(3) + x;
        assert!((got - (exact(2.0) - exact(-0.5))).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let (_, w) = gauss_legendre();
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_reaches_tolerance() {
        let got = adaptive_simpson(&|x: f64| x.exp(), 0.0, 3.0, 1e-12);
        assert!((got - (3f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn log_case_of_power_integral() {
        assert!((power_integral(2.0, -1.0, 1.0, std::f64::consts::E) - 2.0).abs() < 1e-14);
        assert!((power_integral(1.0, 2.0, 0.0, 3.0) - 9.0).abs() < 1e-14);
    }
}
