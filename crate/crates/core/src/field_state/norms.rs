use super::{FieldError, Grid, Scalar, Vector};

/// A scalar or three-component field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(Scalar),
    Vector(Vector),
}

/// Pointwise Euclidean length of a vector field.
pub fn magnitude(v: &Vector) -> Vec<f64> {
    (0..v[0].len()).map(|i| (v[0][i] * v[0][i] + v[1][i] * v[1][i] + v[2][i] * v[2][i]).sqrt()).collect()
}

/// Weighted `L^p` norm `(∫ w |f|^p)^{1/p}`; `p = ∞` gives the weighted max.
pub fn lp_norm_scalar(grid: &Grid, f: &[f64], p: f64, weight: Option<&[f64]>) -> Result<f64, FieldError> {
    grid.check_len(f.len())?;
    if let Some(w) = weight {
        grid.check_len(w.len())?;
    }
    if !(p >= 1.0) {
        return Err(FieldError::Usage(format!("norm exponent {p} must be at least 1")));
    }
    let w = |i: usize| weight.map_or(1.0, |w| w[i]);
    if p.is_infinite() {
        return Ok((0..f.len()).map(|i| (w(i) * f[i]).abs()).fold(0.0, f64::max));
    }
    let integral = grid.integrate((0..f.len()).map(|i| w(i) * f[i].abs().powf(p)));
    Ok(integral.max(0.0).powf(1.0 / p))
}

pub fn lp_norm(grid: &Grid, field: &Field, p: f64, weight: Option<&[f64]>) -> Result<f64, FieldError> {
    match field {
        Field::Scalar(f) => lp_norm_scalar(grid, f, p, weight),
        Field::Vector(v) => {
            for c in v {
                grid.check_len(c.len())?;
            }
            lp_norm_scalar(grid, &magnitude(v), p, weight)
        }
    }
}
