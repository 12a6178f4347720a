//! Radix-2 complex FFT and its tensor-product extension over a [`TensorGrid`].
//!
//! Forward transforms are unnormalized; inverse transforms divide by the
//! number of points, so `inverse(forward(x)) == x` up to rounding.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::grid::TensorGrid;

/// Precomputed twiddles and bit-reversal table for one power-of-two length.
#[derive(Debug, Clone)]
pub struct Radix2 {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self { len, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place transform. `inverse` conjugates the twiddles and applies the
    /// `1/len` normalization.
    pub fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for v in buf.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// Per-axis plans for a whole grid. Data layout matches
/// [`TensorGrid::index`]: axis 0 varies fastest.
#[derive(Debug, Clone)]
pub struct GridFft {
    counts: Vec<usize>,
    plans: Vec<Radix2>,
}

impl GridFft {
    pub fn new(grid: &TensorGrid) -> Self {
        let counts = grid.counts().to_vec();
        let plans = counts.iter().map(|&n| Radix2::new(n)).collect();
        Self { counts, plans }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Forward transform of real samples.
    pub fn forward_real(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len());
        let mut inner = 1;
        for (axis, plan) in self.plans.iter().enumerate() {
            let n = self.counts[axis];
            let outer = data.len() / (inner * n);
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * n * inner + i;
                    for (a, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + a * inner];
                    }
                    plan.process(&mut line, inverse);
                    for (a, value) in line.iter().enumerate() {
                        data[base + a * inner] = *value;
                    }
                }
            }
            inner *= n;
        }
    }
}
