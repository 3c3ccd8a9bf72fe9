//! Surface-deflection influence coefficients for uniformly loaded square cells
//! and an FFT-backed linear convolution over the contact grid.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Antiderivative of `1/√(x²+y²)` with respect to both `x` and `y`.
fn inv_r_primitive(x: f64, y: f64) -> f64 {
    let mut acc = 0.0;
    if x != 0.0 {
        acc += x * (y / x.abs()).asinh();
    }
    if y != 0.0 {
        acc += y * (x / y.abs()).asinh();
    }
    acc
}

/// `∫∫ 1/r dA` over the rectangle `[x0, x1] × [y0, y1]`, with `r` measured
/// from the origin.
pub fn rect_inv_r_integral(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    inv_r_primitive(x1, y1) - inv_r_primitive(x0, y1) - inv_r_primitive(x1, y0)
        + inv_r_primitive(x0, y0)
}

/// Normal deflection at a cell centre per unit pressure on another cell,
/// tabulated by cell offset.
#[derive(Debug, Clone)]
pub struct InfluenceKernel {
    n: usize,
    values: Vec<f64>,
}

impl InfluenceKernel {
    /// `compliance` is `(1 - ν²) / (π E)`, `cell` the cell edge length.
    pub fn new(n: usize, cell: f64, compliance: f64) -> Self {
        let m = 2 * n - 1;
        let mut values = vec![0.0; m * m];
        let h = cell / 2.0;
        for dj in 0..m {
            for di in 0..m {
                let ox = (di as f64 - (n as f64 - 1.0)) * cell;
                let oy = (dj as f64 - (n as f64 - 1.0)) * cell;
                values[dj * m + di] =
                    compliance * rect_inv_r_integral(ox - h, ox + h, oy - h, oy + h);
            }
        }
        Self { n, values }
    }

    /// Deflection at cell `(i, j)` per unit pressure on cell `(k, l)`.
    #[inline]
    pub fn at(&self, di: isize, dj: isize) -> f64 {
        let m = 2 * self.n - 1;
        let c = self.n as isize - 1;
        self.values[((dj + c) as usize) * m + (di + c) as usize]
    }

    pub fn self_term(&self) -> f64 {
        self.at(0, 0)
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }
}

/// Linear (non-periodic) convolution of an `n × n` field with an influence
/// kernel through a zero-padded `2n × 2n` FFT.
pub struct Convolver {
    n: usize,
    m: usize,
    kernel_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Convolver {
    pub fn new(kernel: &InfluenceKernel) -> Self {
        let n = kernel.grid_size();
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let mut buf = vec![Complex::new(0.0, 0.0); m * m];
        let ni = n as isize;
        for r in 0..m {
            for c in 0..m {
                let dj = if r < n { r as isize } else { r as isize - m as isize };
                let di = if c < n { c as isize } else { c as isize - m as isize };
                if di.abs() < ni && dj.abs() < ni {
                    buf[r * m + c] = Complex::new(kernel.at(di, dj), 0.0);
                }
            }
        }
        let mut conv = Self {
            n,
            m,
            kernel_hat: Vec::new(),
            forward,
            inverse,
        };
        conv.fft2(&mut buf, true);
        conv.kernel_hat = buf;
        conv
    }

    fn transpose(&self, buf: &mut [Complex<f64>]) {
        let m = self.m;
        for r in 0..m {
            for c in (r + 1)..m {
                buf.swap(r * m + c, c * m + r);
            }
        }
    }

    fn fft2(&self, buf: &mut [Complex<f64>], forward: bool) {
        let plan = if forward { &self.forward } else { &self.inverse };
        plan.process(buf);
        self.transpose(buf);
        plan.process(buf);
        self.transpose(buf);
    }

    /// `out[i] = Σ_k K(i - k) field[k]` over the `n × n` grid.
    pub fn apply(&self, field: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut buf = vec![Complex::new(0.0, 0.0); m * m];
        for j in 0..n {
            for i in 0..n {
                buf[j * m + i].re = field[j * n + i];
            }
        }
        self.fft2(&mut buf, true);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.fft2(&mut buf, false);
        let scale = 1.0 / (m * m) as f64;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] = buf[j * m + i].re * scale;
            }
        }
        out
    }
}
