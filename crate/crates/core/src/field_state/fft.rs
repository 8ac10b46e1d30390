use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const LINES_PER_TASK: usize = 16;

/// Unnormalized complex FFT over the active axes of a row-major array.
#[derive(Clone)]
pub(crate) struct NdFft {
    dims: [usize; 3],
    forward: Vec<Option<Arc<dyn Fft<f64>>>>,
    inverse: Vec<Option<Arc<dyn Fft<f64>>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("dims", &self.dims).finish()
    }
}

impl NdFft {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let plan = |planner: &mut FftPlanner<f64>, n: usize, fwd: bool| {
            (n > 1).then(|| {
                if fwd {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
        };
        let forward = dims.iter().map(|&n| plan(&mut planner, n, true)).collect();
        let inverse = dims.iter().map(|&n| plan(&mut planner, n, false)).collect();
        Self { dims, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        data
    }

    /// Inverse transform with `1/n` scaling, returning the real part.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut data, false);
        let scale = 1.0 / self.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let dims = self.dims;
        for axis in 0..3 {
            let plans = if forward { &self.forward } else { &self.inverse };
            let Some(plan) = plans[axis].as_ref() else { continue };
            let n = dims[axis];
            let stride: usize = dims[axis + 1..].iter().product();
            if stride == 1 {
                data.par_chunks_mut(n * LINES_PER_TASK).for_each(|chunk| plan.process(chunk));
                continue;
            }
            let lines = data.len() / n;
            let mut buf = vec![Complex64::default(); data.len()];
            let src: &[Complex64] = data;
            buf.par_chunks_mut(n).enumerate().for_each(|(line, out)| {
                let base = (line / stride) * n * stride + line % stride;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = src[base + i * stride];
                }
            });
            buf.par_chunks_mut(n * LINES_PER_TASK).for_each(|chunk| plan.process(chunk));
            for line in 0..lines {
                let base = (line / stride) * n * stride + line % stride;
                for i in 0..n {
                    data[base + i * stride] = buf[line * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_3d() {
        let dims = [4, 8, 16];
        let fft = NdFft::new(dims);
        let f: Vec<f64> = (0..fft.len()).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let back = fft.inverse_real(fft.forward_real(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        let dims = [8, 8, 1];
        let fft = NdFft::new(dims);
        let f: Vec<f64> = (0..64)
            .map(|i| {
                let (x, y) = ((i / 8) as f64, (i % 8) as f64);
                (std::f64::consts::TAU * (2.0 * x + 3.0 * y) / 8.0).cos()
            })
            .collect();
        let hat = fft.forward_real(&f);
        assert!((hat[2 * 8 + 3].re - 32.0).abs() < 1e-10);
        assert!((hat[6 * 8 + 5].re - 32.0).abs() < 1e-10);
        assert!(hat[1].norm() < 1e-10);
    }
}
