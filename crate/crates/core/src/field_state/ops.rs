use super::fft::NdFft;
use super::norms::Field;
use super::{FieldError, Grid, Scalar, Vector};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Fourier differentiation with the 2/3 dealiasing mask.
    Spectral,
    /// Second-order central differences.
    CentralDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    Gradient,
    Divergence,
    Curl,
}

/// Differential operators on a fixed grid.
#[derive(Debug, Clone)]
pub struct Operators {
    grid: Grid,
    backend: Backend,
    fft: NdFft,
    /// Wavenumber per flat spectral index, Nyquist components set to zero.
    kappa: Vec<[f64; 3]>,
    /// Wavenumber per flat spectral index with Nyquist taken positive.
    kappa_abs: Vec<[f64; 3]>,
    /// Modulus of the mode index relative to the dealiasing cutoff.
    band: Vec<f64>,
    keep: Vec<bool>,
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
fn times_i(c: Complex64, s: f64) -> Complex64 {
    Complex64::new(-s * c.im, s * c.re)
}

impl Operators {
    pub fn new(grid: &Grid, backend: Backend) -> Self {
        let dims = grid.dims();
        let lengths = grid.lengths();
        let n = grid.n_points();
        let mut kappa = Vec::with_capacity(n);
        let mut kappa_abs = Vec::with_capacity(n);
        let mut band = Vec::with_capacity(n);
        let mut keep = Vec::with_capacity(n);
        for flat in 0..n {
            let idx = grid.multi_index(flat);
            let mut k = [0.0; 3];
            let mut ka = [0.0; 3];
            let mut kept = true;
            let mut b: f64 = 0.0;
            for a in 0..grid.d() {
                let na = dims[a];
                let m = signed_index(idx[a], na);
                let scale = TAU / lengths[a];
                let nyquist = 2 * idx[a] == na;
                k[a] = if nyquist { 0.0 } else { m as f64 * scale };
                ka[a] = if nyquist { (na / 2) as f64 * scale } else { m as f64 * scale };
                let cutoff = (na / 3) as i64;
                kept &= m.abs() <= cutoff && !nyquist;
                b = b.max(m.abs() as f64 / cutoff as f64);
            }
            kappa.push(k);
            kappa_abs.push(ka);
            band.push(b);
            keep.push(kept);
        }
        Self { grid: grid.clone(), backend, fft: NdFft::new(dims), kappa, kappa_abs, band, keep }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    fn check(&self, f: &[f64]) -> Result<(), FieldError> {
        self.grid.check_len(f.len())
    }

    fn symbol(&self, flat: usize, axis: usize) -> f64 {
        if self.keep[flat] {
            self.kappa[flat][axis]
        } else {
            0.0
        }
    }

    fn spectral_derivative(&self, hat: &[Complex64], axis: usize) -> Vec<f64> {
        let out = hat.iter().enumerate().map(|(k, c)| times_i(*c, self.symbol(k, axis))).collect();
        self.fft.inverse_real(out)
    }

    fn central_derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let dims = self.grid.dims();
        let n = dims[axis];
        let stride: usize = dims[axis + 1..].iter().product();
        let inv = 1.0 / (2.0 * self.grid.spacing()[axis]);
        (0..f.len())
            .map(|flat| {
                let i = (flat / stride) % n;
                let base = flat - i * stride;
                let ip = base + ((i + 1) % n) * stride;
                let im = base + ((i + n - 1) % n) * stride;
                (f[ip] - f[im]) * inv
            })
            .collect()
    }

    /// `∂f/∂x_axis`; zero on inactive axes.
    pub fn derivative(&self, f: &[f64], axis: usize) -> Result<Vec<f64>, FieldError> {
        self.check(f)?;
        if axis >= 3 {
            return Err(FieldError::Usage(format!("axis {axis} out of range")));
        }
        if axis >= self.grid.d() {
            return Ok(vec![0.0; f.len()]);
        }
        Ok(match self.backend {
            Backend::Spectral => self.spectral_derivative(&self.fft.forward_real(f), axis),
            Backend::CentralDifference => self.central_derivative(f, axis),
        })
    }

    pub fn gradient(&self, f: &[f64]) -> Result<Vector, FieldError> {
        self.check(f)?;
        let n = f.len();
        let d = self.grid.d();
        match self.backend {
            Backend::Spectral => {
                let hat = self.fft.forward_real(f);
                Ok([0, 1, 2].map(|a| if a < d { self.spectral_derivative(&hat, a) } else { vec![0.0; n] }))
            }
            Backend::CentralDifference => {
                Ok([0, 1, 2].map(|a| if a < d { self.central_derivative(f, a) } else { vec![0.0; n] }))
            }
        }
    }

    /// Full velocity gradient, `jac[i][j] = ∂_j v_i`.
    pub fn jacobian(&self, v: &Vector) -> Result<[Vector; 3], FieldError> {
        Ok([self.gradient(&v[0])?, self.gradient(&v[1])?, self.gradient(&v[2])?])
    }

    pub fn divergence(&self, v: &Vector) -> Result<Scalar, FieldError> {
        for c in v {
            self.check(c)?;
        }
        let n = self.grid.n_points();
        let d = self.grid.d();
        match self.backend {
            Backend::Spectral => {
                let mut acc = vec![Complex64::default(); n];
                for (a, comp) in v.iter().enumerate().take(d) {
                    let hat = self.fft.forward_real(comp);
                    for (k, (o, c)) in acc.iter_mut().zip(&hat).enumerate() {
                        *o += times_i(*c, self.symbol(k, a));
                    }
                }
                Ok(self.fft.inverse_real(acc))
            }
            Backend::CentralDifference => {
                let mut out = vec![0.0; n];
                for (a, comp) in v.iter().enumerate().take(d) {
                    for (o, g) in out.iter_mut().zip(self.central_derivative(comp, a)) {
                        *o += g;
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn curl(&self, v: &Vector) -> Result<Vector, FieldError> {
        for c in v {
            self.check(c)?;
        }
        let n = self.grid.n_points();
        let d = self.grid.d();
        match self.backend {
            Backend::Spectral => {
                let hats = [0, 1, 2].map(|c| self.fft.forward_real(&v[c]));
                Ok([0, 1, 2].map(|i| {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    // (curl v)_i = ∂_j v_k - ∂_k v_j
                    let out = (0..n)
                        .map(|q| {
                            let sj = if j < d { self.symbol(q, j) } else { 0.0 };
                            let sk = if k < d { self.symbol(q, k) } else { 0.0 };
                            times_i(hats[k][q], sj) - times_i(hats[j][q], sk)
                        })
                        .collect();
                    self.fft.inverse_real(out)
                }))
            }
            Backend::CentralDifference => {
                let jac = self.jacobian(v)?;
                Ok([0, 1, 2].map(|i| {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    jac[k][j].iter().zip(&jac[j][k]).map(|(a, b)| a - b).collect()
                }))
            }
        }
    }

    pub fn apply_derivative(&self, kind: DerivativeKind, field: &Field) -> Result<Field, FieldError> {
        match (kind, field) {
            (DerivativeKind::Gradient, Field::Scalar(f)) => Ok(Field::Vector(self.gradient(f)?)),
            (DerivativeKind::Divergence, Field::Vector(v)) => Ok(Field::Scalar(self.divergence(v)?)),
            (DerivativeKind::Curl, Field::Vector(v)) => Ok(Field::Vector(self.curl(v)?)),
            (kind, f) => Err(FieldError::Usage(format!(
                "{kind:?} is not defined for a {} field",
                if matches!(f, Field::Scalar(_)) { "scalar" } else { "vector" }
            ))),
        }
    }

    /// Leray projection onto discretely divergence-free fields; the mean is kept.
    pub fn project_div_free(&self, v: &Vector) -> Result<Vector, FieldError> {
        for c in v {
            self.check(c)?;
        }
        let d = self.grid.d();
        let h = self.grid.spacing();
        let mut hats = [0, 1, 2].map(|c| self.fft.forward_real(&v[c]));
        for q in 0..self.grid.n_points() {
            let mut k = self.kappa[q];
            if self.backend == Backend::CentralDifference {
                for a in 0..d {
                    k[a] = (self.kappa_abs[q][a] * h[a]).sin() / h[a];
                }
            }
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 <= 1e-20 {
                continue;
            }
            let dot = (hats[0][q] * k[0] + hats[1][q] * k[1] + hats[2][q] * k[2]) / k2;
            for c in 0..3 {
                hats[c][q] -= dot * k[c];
            }
        }
        Ok(hats.map(|hat| self.fft.inverse_real(hat)))
    }

    /// Applies a real Fourier multiplier `m(κ)`; `m` should be even in each
    /// component of `κ`.
    pub fn apply_multiplier<M: Fn([f64; 3]) -> f64>(&self, f: &[f64], m: M) -> Result<Vec<f64>, FieldError> {
        self.check(f)?;
        let mut hat = self.fft.forward_real(f);
        for (c, k) in hat.iter_mut().zip(&self.kappa_abs) {
            *c *= m(*k);
        }
        Ok(self.fft.inverse_real(hat))
    }

    /// `H^{-1}` norm, `sqrt(∫ f ψ)` with `(1 - Δ)ψ = f`.
    pub fn hminus1_norm(&self, f: &[f64]) -> Result<f64, FieldError> {
        let psi = self.apply_multiplier(f, |k| 1.0 / (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))?;
        Ok(self.grid.integrate(f.iter().zip(&psi).map(|(a, b)| a * b)).max(0.0).sqrt())
    }

    /// Fraction of fluctuation energy held in the upper third of the
    /// resolved band or beyond it.
    pub fn spectral_tail(&self, f: &[f64]) -> Result<f64, FieldError> {
        self.check(f)?;
        let hat = self.fft.forward_real(f);
        let mut total = super::summation::CompensatedSum::new();
        let mut tail = super::summation::CompensatedSum::new();
        for (q, c) in hat.iter().enumerate().skip(1) {
            let e = c.norm_sqr();
            total.add(e);
            if self.band[q] > 2.0 / 3.0 {
                tail.add(e);
            }
        }
        let t = total.total();
        Ok(if t > 0.0 { tail.total() / t } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_state::summation::compensated_sum;

    fn field(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..grid.n_points()).map(|i| f(grid.point(i))).collect()
    }

    #[test]
    fn spectral_derivative_of_sine_is_exact() {
        let g = Grid::periodic_cube(1, 16).unwrap();
        let ops = Operators::new(&g, Backend::Spectral);
        let f = field(&g, |x| (3.0 * x[0]).sin());
        let df = ops.derivative(&f, 0).unwrap();
        for (i, v) in df.iter().enumerate() {
            assert!((v - 3.0 * (3.0 * g.point(i)[0]).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn dealiased_modes_are_removed() {
        let g = Grid::periodic_cube(1, 16).unwrap();
        let ops = Operators::new(&g, Backend::Spectral);
        // |k| = 6 lies above floor(16/3) = 5.
        let f = field(&g, |x| (6.0 * x[0]).sin());
        assert!(ops.derivative(&f, 0).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn curl_of_gradient_vanishes_3d() {
        let g = Grid::periodic_cube(3, 8).unwrap();
        let ops = Operators::new(&g, Backend::Spectral);
        let f = field(&g, |x| (x[0] + 2.0 * x[1]).sin() * x[2].cos());
        let c = ops.curl(&ops.gradient(&f).unwrap()).unwrap();
        assert!(c.iter().flatten().all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn wrong_field_kind_is_a_usage_error() {
        let g = Grid::periodic_cube(1, 8).unwrap();
        let ops = Operators::new(&g, Backend::Spectral);
        let r = ops.apply_derivative(DerivativeKind::Divergence, &Field::Scalar(vec![0.0; 8]));
        assert!(matches!(r, Err(FieldError::Usage(_))));
        let r = ops.derivative(&[0.0; 4], 0);
        assert!(matches!(r, Err(FieldError::ShapeMismatch { .. })));
    }

    #[test]
    fn projection_keeps_mean_and_kills_divergence() {
        for backend in [Backend::Spectral, Backend::CentralDifference] {
            let g = Grid::periodic_cube(2, 16).unwrap();
            let ops = Operators::new(&g, backend);
            let v = [
                field(&g, |x| 0.3 + x[0].sin() * x[1].cos()),
                field(&g, |x| (2.0 * x[0]).cos() + x[1].sin()),
                field(&g, |x| x[1].cos()),
            ];
            let p = ops.project_div_free(&v).unwrap();
            let div = ops.divergence(&p).unwrap();
            assert!(div.iter().all(|x| x.abs() < 1e-11), "{backend:?}");
            let mean = compensated_sum(p[0].iter().copied()) / 256.0;
            assert!((mean - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn central_difference_is_second_order() {
        let mut errors = Vec::new();
        for n in [32, 64, 128] {
            let g = Grid::periodic_cube(1, n).unwrap();
            let ops = Operators::new(&g, Backend::CentralDifference);
            let f = field(&g, |x| x[0].sin().exp());
            let df = ops.derivative(&f, 0).unwrap();
            let err = (0..n)
                .map(|i| {
                    let x = g.point(i)[0];
                    (df[i] - x.cos() * x.sin().exp()).abs()
                })
                .fold(0.0, f64::max);
            errors.push(err);
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9 && order < 2.1, "order {order}");
        }
    }

    #[test]
    fn hminus1_norm_of_single_mode() {
        let g = Grid::periodic_cube(1, 16).unwrap();
        let ops = Operators::new(&g, Backend::Spectral);
        let f = field(&g, |x| (2.0 * x[0]).sin());
        // ∫ sin^2(2x) / 5 over (2π)^3.
        let expected = (TAU.powi(3) / 2.0 / 5.0).sqrt();
        assert!((ops.hminus1_norm(&f).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn spectral_tail_separates_bands() {
        let g = Grid::periodic_cube(1, 32).unwrap();
        let ops = Operators::new(&g, Backend::Spectral);
        let low = field(&g, |x| x[0].sin());
        let high = field(&g, |x| (9.0 * x[0]).sin());
        assert!(ops.spectral_tail(&low).unwrap() < 1e-20);
        assert!((ops.spectral_tail(&high).unwrap() - 1.0).abs() < 1e-12);
    }
}
