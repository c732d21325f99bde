//! Wiener–Wintner exponential sums.
//!
//! The central object is the trigonometric polynomial
//! `P(t) = N^{-1} sum_{n=1}^{N} a_n e^{2 pi i n t}`. Its sup over `t` is
//! bracketed by evaluating `|P|` on an oversampled FFT grid (`lo`) and
//! inflating by a factor that depends only on the degree and the grid size
//! (`hi`).
//!
//! Certification: `T = |P|^2` is a real trigonometric polynomial of degree
//! `d = N - 1`. At a maximiser `t*`, `T'(t*) = 0` and Bernstein's inequality
//! gives `|T''| <= (2 pi d)^2 max T`. Every `t*` is within `1/(2L)` of an
//! `L`-point grid, hence `max T (1 - (pi d / L)^2 / 2) <= lo^2`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::accum::{pairwise_sum, CompensatedSum};
use crate::cubeavg::{cube_avg2_naive, CubeInput2};
use crate::dynsys::{SampledSequence, BOUND_SLACK};
use crate::fft::{checked_pow2, GridEvaluator};
use crate::{Error, Result};

/// Smallest accepted oversampling factor.
pub const MIN_OVERSAMPLE: usize = 8;

/// Slack added to the right-hand side of the three-sequence inequality.
pub const LEMMA1_SLACK: f64 = 1e-10;

/// Grid-to-sup inflation factor for a polynomial whose terms span `degree + 1`
/// consecutive frequencies, sampled at `grid_size` equispaced points.
pub fn certification_factor(degree: usize, grid_size: usize) -> f64 {
    let x = PI * degree as f64 / grid_size as f64;
    let shrink = 1.0 - 0.5 * x * x;
    assert!(shrink > 0.0, "grid too coarse for degree {degree}");
    1.0 / shrink.sqrt()
}

/// Certified bracket `[lo, hi]` for `sup_t |N^{-1} sum_{n=1}^{N} a_n e^{2 pi i n t}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBound {
    /// Maximum over the evaluation grid.
    pub lo: f64,
    /// Certified upper bound for the true supremum.
    pub hi: f64,
    pub grid_size: usize,
    /// Highest power of `e^{2 pi i t}` in the polynomial (`N`).
    pub degree: usize,
}

impl SupBound {
    pub fn factor(&self) -> f64 {
        certification_factor(self.degree.saturating_sub(1), self.grid_size)
    }
}

fn twist(n: usize, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (n as f64 * t).rem_euclid(1.0))
}

/// Fixed-frequency average `N^{-1} sum_{n=1}^{N} a_n e^{2 pi i n t}`.
pub fn ww_average(a: &SampledSequence, n: usize, t: f64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    a.require("a", n)?;
    let acc: CompensatedSum = a
        .head(n)
        .iter()
        .enumerate()
        .map(|(i, v)| v * twist(i + 1, t))
        .collect();
    Ok(acc.value() / n as f64)
}

fn grid_size_for(n: usize, oversample: usize) -> Result<usize> {
    if oversample < MIN_OVERSAMPLE {
        return Err(Error::InvalidArgument(format!(
            "oversample must be at least {MIN_OVERSAMPLE}, got {oversample}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    checked_pow2(n)?
        .checked_mul(oversample)
        .filter(|&l| l <= crate::fft::MAX_FFT_LEN)
        .ok_or(Error::FftSizeOverflow(n))
}

/// Certified sup over `t` of `|N^{-1} sum_{n=1}^{N} values[n-1] e^{2 pi i n t}|`
/// on the evaluator's grid.
fn sup_with(evaluator: &mut GridEvaluator, values: &[Complex64]) -> SupBound {
    let n = values.len();
    // |P| does not see the common factor e^{2 pi i t}, so coefficients start at power 0
    let lo = evaluator
        .evaluate(values)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        / n as f64;
    let grid_size = evaluator.len();
    SupBound {
        lo,
        hi: lo * certification_factor(n - 1, grid_size),
        grid_size,
        degree: n,
    }
}

/// Certified bracket for `sup_t |N^{-1} sum_{n=1}^{N} a_n e^{2 pi i n t}|`,
/// evaluated on `oversample * nextpow2(N)` grid points.
pub fn sup_exp_sum(a: &SampledSequence, n: usize, oversample: usize) -> Result<SupBound> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    a.require("a", n)?;
    let mut evaluator = GridEvaluator::new(grid_size_for(n, oversample)?);
    Ok(sup_with(&mut evaluator, a.head(n)))
}

/// Both sides of the three-sequence inequality
/// `|M_N(a,b,c)|^2 <= 4 min(sup_t |(2N)^{-1} sum_{m<=2N} c_m e(mt)|^2, sup_t |N^{-1} sum_{n<=N} a_n e(nt)|^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    pub n: usize,
    pub lhs: f64,
    pub rhs_c: f64,
    pub rhs_a: f64,
    pub holds: bool,
}

impl Lemma1Report {
    pub fn rhs(&self) -> f64 {
        self.rhs_c.min(self.rhs_a)
    }
}

fn require_unit(seq: &SampledSequence, name: &'static str, upto: usize) -> Result<()> {
    seq.require(name, upto)?;
    match seq
        .head(upto)
        .iter()
        .enumerate()
        .find(|(_, v)| v.norm().is_nan() || v.norm() > 1.0 + BOUND_SLACK)
    {
        Some((i, v)) => Err(Error::BoundViolation {
            name,
            index: i + 1,
            value: v.norm(),
            bound: 1.0,
        }),
        None => Ok(()),
    }
}

/// Check the inequality for sequences bounded by one, with the left side from
/// the direct double sum and the right side from certified suprema.
pub fn lemma1_check(
    a: &SampledSequence,
    b: &SampledSequence,
    c: &SampledSequence,
    n: usize,
    oversample: usize,
) -> Result<Lemma1Report> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    require_unit(a, "a", n)?;
    require_unit(b, "b", n)?;
    require_unit(c, "c", 2 * n)?;
    let input = CubeInput2::new(a.clone(), b.clone(), c.clone());
    let lhs = cube_avg2_naive(&input, n)?.norm_sqr();
    let hi_c = sup_exp_sum(c, 2 * n, oversample)?.hi;
    let hi_a = sup_exp_sum(a, n, oversample)?.hi;
    let rhs_c = 4.0 * hi_c * hi_c;
    let rhs_a = 4.0 * hi_a * hi_a;
    Ok(Lemma1Report {
        n,
        lhs,
        rhs_c,
        rhs_a,
        holds: lhs <= rhs_c.min(rhs_a) + LEMMA1_SLACK,
    })
}

/// Lower and certified upper value of
/// `N^{-1} sum_{n=1}^{N} sup_t |N^{-1} sum_{m=1}^{N} u_m v_{n+m} e^{2 pi i m t}|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq4Estimate {
    /// Mean of squared grid maxima.
    pub lower: f64,
    /// Mean of squared certified suprema.
    pub upper: f64,
}

/// Decay estimator for the averaged squared sup-norm of the products
/// `u_m v_{n+m}`. `u` needs `N` terms and `v` needs `2N`.
pub fn eq4_estimator(
    u: &SampledSequence,
    v: &SampledSequence,
    n: usize,
    oversample: usize,
) -> Result<Eq4Estimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    u.require("u", n)?;
    v.require("v", 2 * n)?;
    let (uv, vv) = (u.head(n), v.values());
    let mut lo_sq = Vec::with_capacity(n);
    let mut hi_sq = Vec::with_capacity(n);
    let mut prod = vec![Complex64::default(); n];
    let mut evaluator = GridEvaluator::new(grid_size_for(n, oversample)?);
    for shift in 1..=n {
        for (j, p) in prod.iter_mut().enumerate() {
            // v_{shift + m} with m = j + 1
            *p = uv[j] * vv[shift + j];
        }
        let s = sup_with(&mut evaluator, &prod);
        lo_sq.push(s.lo * s.lo);
        hi_sq.push(s.hi * s.hi);
    }
    Ok(Eq4Estimate {
        lower: pairwise_sum(&lo_sq) / n as f64,
        upper: pairwise_sum(&hi_sq) / n as f64,
    })
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

    #[test]
    fn resonance_gives_one() {
        let theta = 0.137;
        let a = seq((1..=50).map(|n| twist(n, -theta)).collect());
        for n in [1, 7, 50] {
            assert!((ww_average(&a, n, theta).unwrap() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn alternating_sum_vanishes() {
        let a = ones(64);
        assert!(ww_average(&a, 64, 0.5).unwrap().norm() < 1e-13);
        let mean = ww_average(&a, 10, 0.0).unwrap();
        assert_eq!(mean, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn sup_of_unimodular_resonance() {
        let a = seq((1..=100).map(|n| twist(n, 0.3)).collect());
        let s = sup_exp_sum(&a, 100, 8).unwrap();
        assert!(s.lo <= 1.0 + 1e-12 && s.hi >= 1.0, "{s:?}");
        assert!(s.lo >= 0.95 && s.hi <= 1.05, "{s:?}");
        assert_eq!(s.grid_size, 1024);
        assert_eq!(s.degree, 100);
    }

    #[test]
    fn sup_of_zero() {
        let a = seq(vec![Complex64::default(); 32]);
        let s = sup_exp_sum(&a, 32, 8).unwrap();
        assert_eq!((s.lo, s.hi), (0.0, 0.0));
    }

    #[test]
    fn oversample_floor() {
        assert!(matches!(
            sup_exp_sum(&ones(8), 8, 7),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn factor_is_tight_enough() {
        // oversample 8 at a power-of-two N is the worst case
        let f = certification_factor(255, 8 * 256);
        assert!(f > 1.0 && f < 1.05, "{f}");
        assert_eq!(certification_factor(0, 8), 1.0);
    }

    #[test]
    fn lemma1_on_ones() {
        let r = lemma1_check(&ones(16), &ones(16), &ones(32), 16, 8).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        let f2 = certification_factor(31, 256).powi(2);
        assert!(r.rhs_c >= 4.0 && r.rhs_c <= 4.0 * f2 + 1e-12, "{r:?}");
        assert!(r.rhs_a >= 4.0 && r.rhs_a <= 4.0 * certification_factor(15, 128).powi(2) + 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn lemma1_on_alternating_c() {
        let c = seq((1..=32)
            .map(|j| Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect());
        let r = lemma1_check(&ones(16), &ones(16), &c, 16, 8).unwrap();
        assert!(r.lhs < 1e-28);
        assert!(r.rhs_a >= 0.0 && r.rhs_c >= 0.0);
        assert!(r.holds);
    }

    #[test]
    fn lemma1_rejects_unbounded_inputs() {
        let big = SampledSequence::constant(Complex64::new(1.5, 0.0), 16).unwrap();
        assert!(matches!(
            lemma1_check(&big, &ones(16), &ones(32), 8, 8),
            Err(Error::BoundViolation {
                name: "a",
                index: 1,
                ..
            })
        ));
        assert!(matches!(
            lemma1_check(&ones(8), &ones(8), &ones(15), 8, 8),
            Err(Error::InsufficientLength { name: "c", .. })
        ));
    }

    #[test]
    fn eq4_on_constants() {
        for n in [1usize, 8, 33, 64] {
            let e = eq4_estimator(&ones(n), &ones(2 * n), n, 8).unwrap();
            assert!((e.lower - 1.0).abs() < 1e-12, "{n}: {e:?}");
            assert!(e.upper >= e.lower);
        }
        let zero = seq(vec![Complex64::default(); 16]);
        let e = eq4_estimator(&zero, &ones(32), 16, 8).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
        assert!(eq4_estimator(&ones(16), &ones(31), 16, 8).is_err());
    }
}
