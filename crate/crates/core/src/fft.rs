//! Zero-padded FFT helpers: linear convolution and oversampled evaluation of
//! trigonometric polynomials.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Largest transform length accepted by the helpers (2^28 complex points).
pub const MAX_FFT_LEN: usize = 1 << 28;

/// Smallest power of two `>= n`, guarded against overflow and [`MAX_FFT_LEN`].
pub fn checked_pow2(n: usize) -> Result<usize> {
    match n.checked_next_power_of_two() {
        Some(len) if len <= MAX_FFT_LEN => Ok(len),
        _ => Err(Error::FftSizeOverflow(n)),
    }
}

/// Linear convolution of two sequences through a forward/inverse transform pair
/// of a fixed power-of-two length. Plans are built once and reused.
pub struct Convolver {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf_x: Vec<Complex64>,
    buf_y: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Convolver {
    /// Convolver able to hold inputs of length up to `max_input` each without
    /// circular aliasing: the transform length is the next power of two
    /// `>= 2 * max_input + 1`.
    pub fn new(max_input: usize) -> Result<Self> {
        let bound = max_input
            .checked_mul(2)
            .and_then(|v| v.checked_add(1))
            .ok_or(Error::FftSizeOverflow(max_input))?;
        let len = checked_pow2(bound)?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Self {
            len,
            forward,
            inverse,
            buf_x: vec![Complex64::default(); len],
            buf_y: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn transform_len(&self) -> usize {
        self.len
    }

    /// `out[k] = sum_{i+j=k} x[i] y[j]`, `k = 0..x.len()+y.len()-1`.
    pub fn convolve(&mut self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        assert!(
            x.len() + y.len() < self.len,
            "inputs exceed convolver capacity"
        );
        if x.is_empty() || y.is_empty() {
            return Vec::new();
        }
        let zero = Complex64::default();
        self.buf_x.fill(zero);
        self.buf_y.fill(zero);
        self.buf_x[..x.len()].copy_from_slice(x);
        self.buf_y[..y.len()].copy_from_slice(y);
        self.forward
            .process_with_scratch(&mut self.buf_x, &mut self.scratch);
        self.forward
            .process_with_scratch(&mut self.buf_y, &mut self.scratch);
        // rustfft is unnormalized; the two 1/sqrt(len) factors of the unitary pair are applied here
        let scale = 1.0 / self.len as f64;
        for (p, q) in self.buf_x.iter_mut().zip(&self.buf_y) {
            *p *= q * scale;
        }
        self.inverse
            .process_with_scratch(&mut self.buf_x, &mut self.scratch);
        self.buf_x[..x.len() + y.len() - 1].to_vec()
    }
}

/// Evaluates `P(t) = sum_k coeffs[k] e^{2 pi i k t}` at `t = j / len`,
/// `j = 0..len`, reusing one inverse-transform plan.
///
/// A common phase factor `e^{2 pi i s t}` does not change `|P|`, so callers
/// interested in moduli can place the lowest frequency at index 0.
pub struct GridEvaluator {
    len: usize,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl GridEvaluator {
    pub fn new(len: usize) -> Self {
        assert!(len > 0);
        let inverse = FftPlanner::new().plan_fft_inverse(len);
        let scratch = vec![Complex64::default(); inverse.get_inplace_scratch_len()];
        Self {
            len,
            inverse,
            buf: vec![Complex64::default(); len],
            scratch,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid values; `coeffs.len()` must not exceed the grid size.
    pub fn evaluate(&mut self, coeffs: &[Complex64]) -> &[Complex64] {
        assert!(coeffs.len() <= self.len);
        self.buf.fill(Complex64::default());
        self.buf[..coeffs.len()].copy_from_slice(coeffs);
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        &self.buf
    }
}

/// One-shot [`GridEvaluator::evaluate`].
pub fn evaluate_on_grid(coeffs: &[Complex64], len: usize) -> Vec<Complex64> {
    GridEvaluator::new(len).evaluate(coeffs).to_vec()
}
