//! Cube averages.
//!
//! Index origin is 1 everywhere at this API: `a_n` is `a.at(n)`, which is
//! stored at `a.values()[n - 1]`. No sequence is ever wrapped periodically;
//! shifted indices such as `c_{n+m}` must be present up to `2N` (and
//! `u7_{n+m+p}` up to `3N`).
//!
//! Two-parameter average of three sequences:
//!
//! ```text
//! M_N(a, b, c) = N^{-2} sum_{n,m=1}^{N} a_n b_m c_{n+m}
//! ```
//!
//! Three-parameter average of seven sequences:
//!
//! ```text
//! N^{-3} sum_{n,m,p=1}^{N} u1_n u2_m u3_p u4_{n+m} u5_{n+p} u6_{p+m} u7_{n+m+p}
//! ```

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::accum::{self, CompensatedSum};
use crate::dynsys::SampledSequence;
use crate::fft::Convolver;
use crate::{Error, Result};

/// Below this `N` the twisted average is summed directly.
pub const TWISTED_NAIVE_CUTOFF: usize = 32;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The triple `(a_n, b_m, c_{n+m})`.
#[derive(Debug, Clone)]
pub struct CubeInput2 {
    pub a: SampledSequence,
    pub b: SampledSequence,
    pub c: SampledSequence,
}

impl CubeInput2 {
    pub fn new(a: SampledSequence, b: SampledSequence, c: SampledSequence) -> Self {
        Self { a, b, c }
    }

    /// Largest `N` these sequences support.
    pub fn max_n(&self) -> usize {
        self.a.len().min(self.b.len()).min(self.c.len() / 2)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        check_n(n)?;
        self.a.require("a", n)?;
        self.b.require("b", n)?;
        self.c.require("c", 2 * n)
    }

    /// Product of the bounds of the three inputs.
    pub fn bound(&self) -> f64 {
        self.a.bound() * self.b.bound() * self.c.bound()
    }
}

/// Seven sequences `u1..u7` attached to the indices
/// `n, m, p, n+m, n+p, p+m, n+m+p`.
#[derive(Debug, Clone)]
pub struct CubeInput3 {
    pub u: [SampledSequence; 7],
}

/// How many multiples of `N` each of the seven sequences must cover.
pub const CUBE3_LENGTH_SCHEDULE: [usize; 7] = [1, 1, 1, 2, 2, 2, 3];
const CUBE3_NAMES: [&str; 7] = ["u1", "u2", "u3", "u4", "u5", "u6", "u7"];

impl CubeInput3 {
    pub fn new(u: [SampledSequence; 7]) -> Self {
        Self { u }
    }

    pub fn max_n(&self) -> usize {
        self.u
            .iter()
            .zip(CUBE3_LENGTH_SCHEDULE)
            .map(|(s, k)| s.len() / k)
            .min()
            .unwrap_or(0)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        check_n(n)?;
        for ((s, k), name) in self.u.iter().zip(CUBE3_LENGTH_SCHEDULE).zip(CUBE3_NAMES) {
            s.require(name, k * n)?;
        }
        Ok(())
    }

    pub fn bound(&self) -> f64 {
        self.u.iter().map(|s| s.bound()).product()
    }
}

/// Direct `O(N^2)` double loop with compensated accumulation.
pub fn cube_avg2_naive(input: &CubeInput2, n: usize) -> Result<Complex64> {
    input.check(n)?;
    let (a, b, c) = (input.a.values(), input.b.values(), input.c.values());
    let mut acc = CompensatedSum::new();
    // 0-based i, j hold a_{i+1}, b_{j+1}; c_{(i+1)+(j+1)} sits at i+j+1
    for (i, ai) in a[..n].iter().enumerate() {
        let mut row = CompensatedSum::new();
        for (j, bj) in b[..n].iter().enumerate() {
            row.add(bj * c[i + j + 1]);
        }
        acc.add(ai * row.value());
    }
    Ok(acc.value() / (n * n) as f64)
}

/// `O(N log N)`: `w = a * b` by zero-padded FFT, then `sum_k c_k w_k`.
pub fn cube_avg2_fft(input: &CubeInput2, n: usize) -> Result<Complex64> {
    input.check(n)?;
    let mut conv = Convolver::new(n)?;
    Ok(cube2_with(
        &mut conv,
        input.a.head(n),
        input.b.head(n),
        input.c.values(),
        n,
    ))
}

/// `N^{-2} sum_{s} c_s (a*b)_s` with 0-based `a`, `b` of length `n`; the
/// convolution index `k` corresponds to `s = k + 2`, i.e. `c.values()[k + 1]`.
fn cube2_with(
    conv: &mut Convolver,
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    n: usize,
) -> Complex64 {
    let w = conv.convolve(a, b);
    let total = accum::sum(w.iter().enumerate().map(|(k, wk)| c[k + 1] * wk));
    total / (n * n) as f64
}

/// Direct `O(N^3)` triple loop. Practical up to `N` of a few hundred.
pub fn cube_avg3_naive(input: &CubeInput3, n: usize) -> Result<Complex64> {
    input.check(n)?;
    let u: Vec<&[Complex64]> = input.u.iter().map(|s| s.values()).collect();
    let mut acc = CompensatedSum::new();
    // 0-based i, j, l stand for n, m, p; an index sum of r terms sits at (sum of 0-based) + r - 1
    for i in 0..n {
        let mut slab = CompensatedSum::new();
        for j in 0..n {
            let outer = u[1][j] * u[3][i + j + 1];
            let mut line = CompensatedSum::new();
            for l in 0..n {
                line.add(u[2][l] * u[4][i + l + 1] * u[5][l + j + 1] * u[6][i + j + l + 2]);
            }
            slab.add(outer * line.value());
        }
        acc.add(u[0][i] * slab.value());
    }
    Ok(acc.value() / (n as f64).powi(3))
}

/// `O(N^2 log N)`: for each `n`, with `A_m = u2_m u4_{n+m}` and
/// `B_p = u3_p u5_{n+p}`, the inner double sum over `(m, p)` is
/// `D_n = sum_s u6_s u7_{n+s} (A*B)_s`, a two-parameter average in `s = m+p`.
pub fn cube_avg3_fft(input: &CubeInput3, n: usize) -> Result<Complex64> {
    input.check(n)?;
    let mut conv = Convolver::new(n)?;
    let u: Vec<&[Complex64]> = input.u.iter().map(|s| s.values()).collect();
    let mut a = vec![Complex64::default(); n];
    let mut b = vec![Complex64::default(); n];
    let mut c = vec![Complex64::default(); 2 * n];
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            a[j] = u[1][j] * u[3][i + j + 1];
            b[j] = u[2][j] * u[4][i + j + 1];
        }
        // c holds s = 1..=2N at 0-based s-1; u7_{n+s} sits at i + s
        for (s0, cs) in c.iter_mut().enumerate() {
            *cs = u[5][s0] * u[6][i + s0 + 1];
        }
        let d = cube2_with(&mut conv, &a, &b, &c, 1);
        acc.add(u[0][i] * d);
    }
    Ok(acc.value() / (n as f64).powi(3))
}

/// `e^{2 pi i n t}` with the product `n t` reduced mod 1 before scaling.
fn twist(n: usize, t: f64) -> Complex64 {
    let phase = (n as f64 * t).rem_euclid(1.0);
    Complex64::from_polar(1.0, TAU * phase)
}

fn twist_sequence(n: usize, t: f64) -> Vec<Complex64> {
    (1..=n).map(|k| twist(k, t)).collect()
}

fn check_twisted(b: &SampledSequence, c: &SampledSequence, n: usize, t: f64) -> Result<()> {
    check_n(n)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "phase t = {t} is not finite"
        )));
    }
    b.require("b", n)?;
    c.require("c", 2 * n)
}

/// `N^{-2} sum_{m,n=1}^{N} b_m c_{m+n} e^{2 pi i n t}`, direct double sum.
pub fn twisted_cube_avg2_naive(
    b: &SampledSequence,
    c: &SampledSequence,
    n: usize,
    t: f64,
) -> Result<Complex64> {
    check_twisted(b, c, n, t)?;
    let twists = twist_sequence(n, t);
    let (bv, cv) = (b.values(), c.values());
    let mut acc = CompensatedSum::new();
    for (i, e) in twists.iter().enumerate() {
        let mut row = CompensatedSum::new();
        for (j, bj) in bv[..n].iter().enumerate() {
            row.add(bj * cv[i + j + 1]);
        }
        acc.add(e * row.value());
    }
    Ok(acc.value() / (n * n) as f64)
}

/// Twisted average `N^{-2} sum_{m,n=1}^{N} b_m c_{m+n} e^{2 pi i n t}`.
///
/// This is the two-parameter average with `a_n = e^{2 pi i n t}`, evaluated on
/// the FFT path; small `N` fall back to the direct sum.
pub fn twisted_cube_avg2(
    b: &SampledSequence,
    c: &SampledSequence,
    n: usize,
    t: f64,
) -> Result<Complex64> {
    if n < TWISTED_NAIVE_CUTOFF {
        return twisted_cube_avg2_naive(b, c, n, t);
    }
    check_twisted(b, c, n, t)?;
    let twists = twist_sequence(n, t);
    let mut conv = Convolver::new(n)?;
    Ok(cube2_with(&mut conv, &twists, b.head(n), c.values(), n))
}

/// `M_N` along an increasing grid of truncation lengths, with Cauchy gaps
/// `|M_{N_{j+1}} - M_{N_j}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageSeries {
    pub grid: Vec<usize>,
    pub values: Vec<Complex64>,
    pub cauchy_gaps: Vec<f64>,
}

impl AverageSeries {
    /// Evaluate `kernel(N)` for every `N` in `grid` (strictly increasing, nonempty).
    pub fn evaluate<F>(grid: &[usize], mut kernel: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<Complex64>,
    {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "grid must be strictly increasing: {grid:?}"
            )));
        }
        let values = grid
            .iter()
            .map(|&n| kernel(n))
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite average {v}")));
        }
        let cauchy_gaps = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        Ok(Self {
            grid: grid.to_vec(),
            values,
            cauchy_gaps,
        })
    }

    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("nonempty grid")
    }
}

/// [`AverageSeries::evaluate`] under its operational name.
pub fn average_series<F>(grid: &[usize], kernel: F) -> Result<AverageSeries>
where
    F: FnMut(usize) -> Result<Complex64>,
{
    AverageSeries::evaluate(grid, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: Vec<Complex64>) -> SampledSequence {
        SampledSequence::from_values(v).unwrap()
    }

    fn ones(len: usize) -> SampledSequence {
        SampledSequence::constant(Complex64::new(1.0, 0.0), len).unwrap()
    }

    fn impulse(len: usize) -> SampledSequence {
        let mut v = vec![Complex64::default(); len];
        v[0] = Complex64::new(1.0, 0.0);
        seq(v)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn all_ones_arity2() {
        let input = CubeInput2::new(ones(16), ones(16), ones(32));
        assert!(close(
            cube_avg2_naive(&input, 16).unwrap(),
            1.0.into(),
            1e-15
        ));
        assert!(close(cube_avg2_fft(&input, 16).unwrap(), 1.0.into(), 1e-13));
    }

    #[test]
    fn telescoping_phases() {
        let theta = 0.3;
        let e = |k: i64| Complex64::from_polar(1.0, TAU * theta * k as f64);
        let a = seq((1..=32).map(e).collect());
        let c = seq((1..=64).map(|j| e(-j)).collect());
        let input = CubeInput2::new(a.clone(), a, c);
        assert!(close(
            cube_avg2_naive(&input, 32).unwrap(),
            1.0.into(),
            1e-12
        ));
        assert!(close(cube_avg2_fft(&input, 32).unwrap(), 1.0.into(), 1e-12));
    }

    #[test]
    fn impulse_picks_c2() {
        let c = seq((1..=16)
            .map(|j| Complex64::new(j as f64 / 16.0, -0.5))
            .collect());
        let input = CubeInput2::new(impulse(8), impulse(8), c.clone());
        let expect = c.at(2) / 64.0;
        assert!(close(cube_avg2_fft(&input, 8).unwrap(), expect, 1e-15));
        assert!(close(cube_avg2_naive(&input, 8).unwrap(), expect, 1e-16));
    }

    #[test]
    fn arity2_length_errors() {
        let input = CubeInput2::new(ones(8), ones(8), ones(15));
        assert_eq!(
            cube_avg2_naive(&input, 8),
            Err(Error::InsufficientLength {
                name: "c",
                needed: 16,
                available: 15
            })
        );
        assert!(cube_avg2_fft(&input, 8).is_err());
        assert!(cube_avg2_fft(&input, 0).is_err());
        assert_eq!(input.max_n(), 7);
    }

    fn ones7(n: usize) -> [SampledSequence; 7] {
        CUBE3_LENGTH_SCHEDULE.map(|k| ones(k * n))
    }

    #[test]
    fn all_ones_arity3() {
        let input = CubeInput3::new(ones7(8));
        assert!(close(
            cube_avg3_naive(&input, 8).unwrap(),
            1.0.into(),
            1e-15
        ));
        assert!(close(cube_avg3_fft(&input, 8).unwrap(), 1.0.into(), 1e-13));
    }

    #[test]
    fn impulse_slabs_arity3() {
        for slot in [0usize, 2] {
            let mut u = ones7(8);
            u[slot] = impulse(8);
            let input = CubeInput3::new(u);
            let expect = Complex64::new(0.125, 0.0);
            assert!(close(cube_avg3_naive(&input, 8).unwrap(), expect, 1e-15));
            assert!(close(cube_avg3_fft(&input, 8).unwrap(), expect, 1e-13));
        }
    }

    #[test]
    fn arity3_length_schedule() {
        let mut u = ones7(4);
        u[6] = ones(11);
        let input = CubeInput3::new(u);
        assert_eq!(
            cube_avg3_fft(&input, 4),
            Err(Error::InsufficientLength {
                name: "u7",
                needed: 12,
                available: 11
            })
        );
        assert_eq!(input.max_n(), 3);
    }

    #[test]
    fn twisted_trivial_values() {
        let (b, c) = (ones(16), ones(32));
        assert!(close(
            twisted_cube_avg2(&b, &c, 16, 0.0).unwrap(),
            1.0.into(),
            1e-15
        ));
        assert!(close(
            twisted_cube_avg2(&b, &c, 16, 0.5).unwrap(),
            0.0.into(),
            1e-14
        ));
        let (b, c) = (ones(64), ones(128));
        assert!(close(
            twisted_cube_avg2(&b, &c, 64, 0.0).unwrap(),
            1.0.into(),
            1e-13
        ));
        assert!(close(
            twisted_cube_avg2(&b, &c, 64, 0.5).unwrap(),
            0.0.into(),
            1e-13
        ));
        assert!(twisted_cube_avg2(&b, &c, 64, f64::NAN).is_err());
    }

    #[test]
    fn series_of_constants() {
        let input = CubeInput2::new(ones(32), ones(32), ones(64));
        let series = average_series(&[8, 16, 32], |n| cube_avg2_fft(&input, n)).unwrap();
        for v in &series.values {
            assert!(close(*v, 1.0.into(), 1e-13));
        }
        assert_eq!(series.cauchy_gaps.len(), 2);
        assert!(series.cauchy_gaps.iter().all(|g| *g <= 1e-13));
        assert!(average_series(&[8, 8], |n| cube_avg2_fft(&input, n)).is_err());
        assert!(average_series(&[], |n| cube_avg2_fft(&input, n)).is_err());
        assert!(average_series(&[8, 64], |n| cube_avg2_fft(&input, n)).is_err());
    }
}
