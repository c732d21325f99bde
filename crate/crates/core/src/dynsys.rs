//! Exact orbits of concrete measure-preserving systems and observables
//! sampled along them.
//!
//! Circle points are 64-bit fixed-point fractions (`x / 2^64`) with wrapping
//! addition, so rotation orbits carry no floating-point drift. Shifts are
//! realized on pre-generated symbol streams: the state at time `n` is the
//! stream read from position `n` onwards. Streams are drawn from
//! ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`), whose output is
//! stable across platforms and crate versions, so a seed pins the stream
//! bit for bit.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Rational, Result};

/// Number of symbols generated past the end of a shift orbit, so that every
/// state exposes a window of at least this many symbols.
pub const MAX_WORD_LEN: usize = 64;

/// Absolute slack allowed when checking `|value| <= bound`.
pub const BOUND_SLACK: f64 = 1e-12;

/// A point of the unit circle `R/Z` stored as the fraction `raw / 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CirclePoint(pub u64);

impl CirclePoint {
    pub const ZERO: CirclePoint = CirclePoint(0);
    pub const HALF: CirclePoint = CirclePoint(1 << 63);

    /// Nearest 64-bit fraction to `x mod 1`.
    pub fn from_f64(x: f64) -> Self {
        let frac = x.rem_euclid(1.0);
        // 2^64 * frac rounded; frac < 1 but may round up to 2^64 which wraps to 0
        let scaled = (frac * 18_446_744_073_709_551_616.0).round();
        if scaled >= 18_446_744_073_709_551_616.0 {
            CirclePoint(0)
        } else {
            CirclePoint(scaled as u64)
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 18_446_744_073_709_551_616.0
    }

    /// `k * self` on the circle; exact for every integer `k`.
    pub fn times(self, k: i64) -> CirclePoint {
        CirclePoint(self.0.wrapping_mul(k as u64))
    }
}

/// Addition on the circle (wraps modulo 1).
impl std::ops::Add for CirclePoint {
    type Output = CirclePoint;

    fn add(self, other: CirclePoint) -> CirclePoint {
        CirclePoint(self.0.wrapping_add(other.0))
    }
}

/// Description of a measure-preserving system.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    /// `x -> x + alpha` on the circle.
    Rotation { alpha: CirclePoint },
    /// One-sided shift on an i.i.d. stream with symbol law `probs`.
    BernoulliShift { probs: Vec<Rational>, seed: u64 },
    /// One-sided shift on a Markov stream; `matrix` is row-stochastic.
    MarkovShift {
        matrix: Vec<Vec<Rational>>,
        initial: Vec<Rational>,
        seed: u64,
    },
    /// A permutation of `{0..K-1}` with uniform measure.
    FinitePermutation { perm: Vec<usize> },
}

fn check_distribution(p: &[Rational], what: &str) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::InvalidSystem(format!(
            "{what}: alphabet size must be at least 2, got {}",
            p.len()
        )));
    }
    if p.iter().any(|q| q.is_negative()) {
        return Err(Error::InvalidSystem(format!(
            "{what}: negative probability"
        )));
    }
    if p.iter().any(|q| *q.denom() >= 1i128 << 63) {
        return Err(Error::InvalidSystem(format!(
            "{what}: denominators must be below 2^63"
        )));
    }
    let total: Rational = p.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidSystem(format!(
            "{what}: probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn check_permutation(perm: &[usize]) -> Result<()> {
    if perm.is_empty() {
        return Err(Error::InvalidSystem("empty permutation".into()));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() {
            return Err(Error::IndexOutOfRange {
                index: p,
                size: perm.len(),
            });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidSystem(format!(
                "permutation is not a bijection: {p} appears twice"
            )));
        }
    }
    Ok(())
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemSpec::Rotation { .. } => "rotation",
            SystemSpec::BernoulliShift { .. } => "bernoulli",
            SystemSpec::MarkovShift { .. } => "markov",
            SystemSpec::FinitePermutation { .. } => "permutation",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::Rotation { .. } => Ok(()),
            SystemSpec::BernoulliShift { probs, .. } => check_distribution(probs, "bernoulli"),
            SystemSpec::MarkovShift {
                matrix, initial, ..
            } => {
                check_distribution(initial, "markov initial distribution")?;
                if matrix.len() != initial.len() {
                    return Err(Error::InvalidSystem(format!(
                        "markov: matrix has {} rows for {} symbols",
                        matrix.len(),
                        initial.len()
                    )));
                }
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != initial.len() {
                        return Err(Error::InvalidSystem(format!(
                            "markov: row {i} has {} entries, expected {}",
                            row.len(),
                            initial.len()
                        )));
                    }
                    check_distribution(row, &format!("markov row {i}"))?;
                }
                Ok(())
            }
            SystemSpec::FinitePermutation { perm } => check_permutation(perm),
        }
    }

    /// Alphabet size of a shift, or ground-set size of a permutation.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            SystemSpec::Rotation { .. } => None,
            SystemSpec::BernoulliShift { probs, .. } => Some(probs.len()),
            SystemSpec::MarkovShift { initial, .. } => Some(initial.len()),
            SystemSpec::FinitePermutation { perm } => Some(perm.len()),
        }
    }

    /// Invariant probability of each symbol (or point). For a Markov shift this
    /// is the initial distribution, which must be stationary.
    pub fn symbol_measure(&self) -> Result<Vec<Rational>> {
        match self {
            SystemSpec::Rotation { .. } => Err(Error::NoExactIntegral(
                "rotation has no symbol measure".into(),
            )),
            SystemSpec::BernoulliShift { probs, .. } => Ok(probs.clone()),
            SystemSpec::MarkovShift {
                matrix, initial, ..
            } => {
                let s = initial.len();
                let pushed: Vec<Rational> = (0..s)
                    .map(|j| (0..s).map(|i| initial[i] * matrix[i][j]).sum())
                    .collect();
                if &pushed != initial {
                    return Err(Error::NoExactIntegral(
                        "markov initial distribution is not stationary".into(),
                    ));
                }
                Ok(initial.clone())
            }
            SystemSpec::FinitePermutation { perm } => {
                let k = perm.len() as i128;
                Ok(vec![Rational::new(1, k); perm.len()])
            }
        }
    }
}

/// Initial datum `x` of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialDatum {
    /// Starting point on the circle (rotations).
    Circle(CirclePoint),
    /// Starting point of a finite permutation.
    Point(usize),
    /// The shift point is the stream drawn from the system's own seed.
    Stream,
}

#[derive(Debug, Clone, PartialEq)]
enum States {
    Circle(Vec<CirclePoint>),
    Symbolic { stream: Vec<u32>, len: usize },
    Points(Vec<usize>),
}

/// `len` consecutive states `x, T x, ..., T^{len-1} x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    spec: SystemSpec,
    start: InitialDatum,
    states: States,
}

/// Cumulative law as `(numerator, denominator)` pairs; draw `u` maps to the
/// first symbol `j` with `u / 2^64 < cum_j`.
struct CumulativeLaw(Vec<(u128, u128)>);

impl CumulativeLaw {
    fn new(p: &[Rational]) -> Self {
        let mut acc = Rational::zero();
        CumulativeLaw(
            p.iter()
                .map(|q| {
                    acc += q;
                    (*acc.numer() as u128, *acc.denom() as u128)
                })
                .collect(),
        )
    }

    fn draw(&self, u: u64) -> u32 {
        let u = u as u128;
        for (j, &(num, den)) in self.0.iter().enumerate() {
            // u / 2^64 < num / den  <=>  u * den < num * 2^64; both sides < 2^127
            if u * den < num << 64 {
                return j as u32;
            }
        }
        (self.0.len() - 1) as u32
    }
}

/// Generate the orbit `state_n = T^n x` for `n = 0..len`.
pub fn generate_orbit(spec: &SystemSpec, start: InitialDatum, len: usize) -> Result<Orbit> {
    if len == 0 {
        return Err(Error::ZeroLength);
    }
    spec.validate()?;
    let states = match (spec, start) {
        (SystemSpec::Rotation { alpha }, InitialDatum::Circle(x)) => {
            let mut cur = x;
            States::Circle(
                (0..len)
                    .map(|_| {
                        let s = cur;
                        cur = cur + *alpha;
                        s
                    })
                    .collect(),
            )
        }
        (SystemSpec::FinitePermutation { perm }, InitialDatum::Point(x)) => {
            if x >= perm.len() {
                return Err(Error::IndexOutOfRange {
                    index: x,
                    size: perm.len(),
                });
            }
            let mut cur = x;
            States::Points(
                (0..len)
                    .map(|_| {
                        let s = cur;
                        cur = perm[cur];
                        s
                    })
                    .collect(),
            )
        }
        (SystemSpec::BernoulliShift { probs, seed }, InitialDatum::Stream) => {
            let law = CumulativeLaw::new(probs);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let stream = (0..len + MAX_WORD_LEN)
                .map(|_| law.draw(rng.next_u64()))
                .collect();
            States::Symbolic { stream, len }
        }
        (
            SystemSpec::MarkovShift {
                matrix,
                initial,
                seed,
            },
            InitialDatum::Stream,
        ) => {
            let first = CumulativeLaw::new(initial);
            let rows: Vec<CumulativeLaw> = matrix.iter().map(|r| CumulativeLaw::new(r)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut stream = Vec::with_capacity(len + MAX_WORD_LEN);
            let mut cur = first.draw(rng.next_u64());
            stream.push(cur);
            for _ in 1..len + MAX_WORD_LEN {
                cur = rows[cur as usize].draw(rng.next_u64());
                stream.push(cur);
            }
            States::Symbolic { stream, len }
        }
        (spec, start) => {
            return Err(Error::InvalidArgument(format!(
                "initial datum {start:?} does not match a {} system",
                spec.kind()
            )))
        }
    };
    Ok(Orbit {
        spec: spec.clone(),
        start,
        states,
    })
}

impl Orbit {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn start(&self) -> InitialDatum {
        self.start
    }

    pub fn len(&self) -> usize {
        match &self.states {
            States::Circle(v) => v.len(),
            States::Symbolic { len, .. } => *len,
            States::Points(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Circle state at time `n`, for rotation orbits.
    pub fn circle_state(&self, n: usize) -> Option<CirclePoint> {
        match &self.states {
            States::Circle(v) => v.get(n).copied(),
            _ => None,
        }
    }

    /// Point of a permutation orbit at time `n`.
    pub fn point_state(&self, n: usize) -> Option<usize> {
        match &self.states {
            States::Points(v) => v.get(n).copied(),
            _ => None,
        }
    }

    /// The symbol window seen by the shift state at time `n`.
    pub fn symbol_window(&self, n: usize) -> Option<&[u32]> {
        match &self.states {
            States::Symbolic { stream, len } if n < *len => Some(&stream[n..]),
            _ => None,
        }
    }

    /// The full pre-generated stream of a shift orbit (including lookahead).
    pub fn symbol_stream(&self) -> Option<&[u32]> {
        match &self.states {
            States::Symbolic { stream, .. } => Some(stream),
            _ => None,
        }
    }

    /// Rename shift symbols through the bijection `map` (old symbol `s` becomes
    /// `map[s]`), transporting the symbol law along with the stream.
    pub fn relabel_symbols(&self, map: &[usize]) -> Result<Orbit> {
        let s = self
            .spec
            .alphabet_size()
            .filter(|_| matches!(self.states, States::Symbolic { .. }))
            .ok_or_else(|| Error::InvalidArgument("relabeling needs a shift orbit".into()))?;
        if map.len() != s {
            return Err(Error::InvalidArgument(format!(
                "relabeling map has {} entries for {s} symbols",
                map.len()
            )));
        }
        check_permutation(map)?;
        let permute = |v: &[Rational]| {
            let mut out = vec![Rational::zero(); s];
            for (old, q) in v.iter().enumerate() {
                out[map[old]] = *q;
            }
            out
        };
        let spec = match &self.spec {
            SystemSpec::BernoulliShift { probs, seed } => SystemSpec::BernoulliShift {
                probs: permute(probs),
                seed: *seed,
            },
            SystemSpec::MarkovShift {
                matrix,
                initial,
                seed,
            } => {
                let mut m = vec![vec![Rational::zero(); s]; s];
                for (i, row) in matrix.iter().enumerate() {
                    for (j, q) in row.iter().enumerate() {
                        m[map[i]][map[j]] = *q;
                    }
                }
                SystemSpec::MarkovShift {
                    matrix: m,
                    initial: permute(initial),
                    seed: *seed,
                }
            }
            _ => unreachable!("symbolic states imply a shift spec"),
        };
        let States::Symbolic { stream, len } = &self.states else {
            unreachable!()
        };
        Ok(Orbit {
            spec,
            start: self.start,
            states: States::Symbolic {
                stream: stream.iter().map(|&c| map[c as usize] as u32).collect(),
                len: *len,
            },
        })
    }
}

/// Bounded observables `f: X -> C`.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `x -> e^{2 pi i k x}` on the circle.
    Character(i64),
    /// 1 if the current symbol (or permutation point) lies in the set.
    SymbolIndicator(Vec<usize>),
    /// 1 if the next `|w|` symbols equal `w`.
    CylinderIndicator(Vec<usize>),
    Constant(Rational),
    /// Real function of the current symbol with exact mean zero.
    MeanZeroSymbol(Vec<Rational>),
}

fn rational_to_f64(q: &Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Character(_) => "character",
            Observable::SymbolIndicator(_) => "symbol indicator",
            Observable::CylinderIndicator(_) => "cylinder indicator",
            Observable::Constant(_) => "constant",
            Observable::MeanZeroSymbol(_) => "mean-zero symbol function",
        }
    }

    /// Uniform bound `B >= sup |f|`.
    pub fn bound(&self) -> f64 {
        match self {
            Observable::Character(_)
            | Observable::SymbolIndicator(_)
            | Observable::CylinderIndicator(_) => 1.0,
            Observable::Constant(c) => rational_to_f64(&c.abs()),
            Observable::MeanZeroSymbol(table) => table
                .iter()
                .map(|q| rational_to_f64(&q.abs()))
                .fold(0.0, f64::max),
        }
    }

    /// Whether the observable only takes the values 0 and 1.
    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            Observable::SymbolIndicator(_) | Observable::CylinderIndicator(_)
        )
    }

    /// Check that the observable can be evaluated on orbits of `spec`.
    pub fn validate_for(&self, spec: &SystemSpec) -> Result<()> {
        let incompatible = || Error::Incompatible {
            observable: self.name(),
            system: spec.kind(),
        };
        let is_shift = matches!(
            spec,
            SystemSpec::BernoulliShift { .. } | SystemSpec::MarkovShift { .. }
        );
        match self {
            Observable::Character(_) => {
                if !matches!(spec, SystemSpec::Rotation { .. }) {
                    return Err(incompatible());
                }
            }
            Observable::Constant(_) => {}
            Observable::SymbolIndicator(set) => {
                let s = spec.alphabet_size().ok_or_else(incompatible)?;
                if let Some(&bad) = set.iter().find(|&&j| j >= s) {
                    return Err(Error::IndexOutOfRange {
                        index: bad,
                        size: s,
                    });
                }
            }
            Observable::CylinderIndicator(word) => {
                if !is_shift {
                    return Err(incompatible());
                }
                let s = spec.alphabet_size().unwrap_or(0);
                if word.is_empty() || word.len() > MAX_WORD_LEN {
                    return Err(Error::InvalidObservable(format!(
                        "cylinder word length must be in 1..={MAX_WORD_LEN}, got {}",
                        word.len()
                    )));
                }
                if let Some(&bad) = word.iter().find(|&&j| j >= s) {
                    return Err(Error::IndexOutOfRange {
                        index: bad,
                        size: s,
                    });
                }
            }
            Observable::MeanZeroSymbol(table) => {
                let s = spec.alphabet_size().ok_or_else(incompatible)?;
                if table.len() != s {
                    return Err(Error::InvalidObservable(format!(
                        "table has {} entries for {s} symbols",
                        table.len()
                    )));
                }
                let mean: Rational = spec
                    .symbol_measure()?
                    .iter()
                    .zip(table)
                    .map(|(p, v)| p * v)
                    .sum();
                if !mean.is_zero() {
                    return Err(Error::InvalidObservable(format!(
                        "table mean is {mean}, not 0"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact integral `∫ f dμ` with respect to the invariant measure of `spec`.
    pub fn exact_integral(&self, spec: &SystemSpec) -> Result<Rational> {
        self.validate_for(spec)?;
        match self {
            Observable::Character(k) => Ok(if *k == 0 {
                Rational::one()
            } else {
                Rational::zero()
            }),
            Observable::Constant(c) => Ok(*c),
            Observable::SymbolIndicator(set) => {
                let p = spec.symbol_measure()?;
                let mut members = set.clone();
                members.sort_unstable();
                members.dedup();
                Ok(members.iter().map(|&j| p[j]).sum())
            }
            Observable::CylinderIndicator(word) => match spec {
                SystemSpec::BernoulliShift { probs, .. } => {
                    Ok(word.iter().map(|&j| probs[j]).product())
                }
                SystemSpec::MarkovShift { matrix, .. } => {
                    let p = spec.symbol_measure()?;
                    let mut mass = p[word[0]];
                    for w in word.windows(2) {
                        mass *= matrix[w[0]][w[1]];
                    }
                    Ok(mass)
                }
                _ => unreachable!("validated as shift"),
            },
            Observable::MeanZeroSymbol(_) => Ok(Rational::zero()),
        }
    }

    fn eval(&self, orbit: &Orbit, n: usize) -> Complex64 {
        match self {
            Observable::Character(k) => {
                let x = orbit.circle_state(n).expect("validated rotation orbit");
                let phase = x.times(*k);
                // signed phase keeps the angle in [-pi, pi)
                let angle = TAU * (phase.0 as i64 as f64 / 18_446_744_073_709_551_616.0);
                Complex64::from_polar(1.0, angle)
            }
            Observable::Constant(c) => Complex64::new(rational_to_f64(c), 0.0),
            Observable::SymbolIndicator(set) => {
                let sym = current_symbol(orbit, n);
                Complex64::new(if set.contains(&sym) { 1.0 } else { 0.0 }, 0.0)
            }
            Observable::CylinderIndicator(word) => {
                let window = orbit.symbol_window(n).expect("validated shift orbit");
                let hit = word.iter().zip(window).all(|(&w, &c)| w == c as usize);
                Complex64::new(if hit { 1.0 } else { 0.0 }, 0.0)
            }
            Observable::MeanZeroSymbol(table) => {
                Complex64::new(rational_to_f64(&table[current_symbol(orbit, n)]), 0.0)
            }
        }
    }

    /// Evaluate at the orbit state `n` (validates compatibility).
    pub fn evaluate(&self, orbit: &Orbit, n: usize) -> Result<Complex64> {
        self.validate_for(orbit.spec())?;
        if n >= orbit.len() {
            return Err(Error::OrbitTooShort {
                needed: n + 1,
                available: orbit.len(),
            });
        }
        Ok(self.eval(orbit, n))
    }
}

fn current_symbol(orbit: &Orbit, n: usize) -> usize {
    if let Some(p) = orbit.point_state(n) {
        p
    } else {
        orbit.symbol_window(n).expect("validated symbolic orbit")[0] as usize
    }
}

/// Where a sampled sequence came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Origin {
    pub system: SystemSpec,
    pub observable: Observable,
    pub offset: usize,
}

/// A finite complex sequence with a uniform bound, indexed from 1 at the API
/// (`at(1)` is the first value).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSequence {
    values: Vec<Complex64>,
    bound: f64,
    origin: Option<Origin>,
}

impl SampledSequence {
    /// Wrap raw values, checking `|v| <= bound` (with [`BOUND_SLACK`]).
    pub fn new(values: Vec<Complex64>, bound: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ZeroLength);
        }
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bound {bound} is not finite and nonnegative"
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.norm().is_nan() || v.norm() > bound + BOUND_SLACK)
        {
            return Err(Error::BoundViolation {
                name: "values",
                index: i + 1,
                value: v.norm(),
                bound,
            });
        }
        Ok(Self {
            values,
            bound,
            origin: None,
        })
    }

    /// Sequence with the tightest bound `max |v|`.
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        let bound = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Self::new(values, bound)
    }

    pub fn constant(value: Complex64, len: usize) -> Result<Self> {
        Self::new(vec![value; len], value.norm())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn origin(&self) -> Option<&Origin> {
        self.origin.as_ref()
    }

    /// 0-based storage; entry `i` is the sequence term with index `i + 1`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Term with 1-based index `n`.
    pub fn at(&self, n: usize) -> Complex64 {
        self.values[n - 1]
    }

    /// Terms with indices `1..=n` (0-based slice).
    pub fn head(&self, n: usize) -> &[Complex64] {
        &self.values[..n]
    }

    pub fn require(&self, name: &'static str, needed: usize) -> Result<()> {
        if self.values.len() < needed {
            return Err(Error::InsufficientLength {
                name,
                needed,
                available: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: Complex64) -> SampledSequence {
        SampledSequence {
            values: self.values.iter().map(|v| v * lambda).collect(),
            bound: self.bound * lambda.norm(),
            origin: None,
        }
    }

    pub fn conj(&self) -> SampledSequence {
        SampledSequence {
            values: self.values.iter().map(|v| v.conj()).collect(),
            bound: self.bound,
            origin: None,
        }
    }
}

/// `values[j] = f(state_{offset + j})` for `j = 0..len`.
///
/// With `offset = 1`, the 1-based term `n` of the result is `f(T^n x)`.
pub fn sample_observable(
    orbit: &Orbit,
    f: &Observable,
    offset: usize,
    len: usize,
) -> Result<SampledSequence> {
    if len == 0 {
        return Err(Error::ZeroLength);
    }
    f.validate_for(orbit.spec())?;
    let needed = offset.checked_add(len).ok_or(Error::OrbitTooShort {
        needed: usize::MAX,
        available: orbit.len(),
    })?;
    if orbit.len() < needed {
        return Err(Error::OrbitTooShort {
            needed,
            available: orbit.len(),
        });
    }
    let values = (offset..needed).map(|n| f.eval(orbit, n)).collect();
    let mut seq = SampledSequence::new(values, f.bound())?;
    seq.origin = Some(Origin {
        system: orbit.spec().clone(),
        observable: f.clone(),
        offset,
    });
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Rational {
        Rational::new(1, 2)
    }

    fn fair_coin(seed: u64) -> SystemSpec {
        SystemSpec::BernoulliShift {
            probs: vec![half(), half()],
            seed,
        }
    }

    #[test]
    fn half_rotation_has_period_two() {
        let spec = SystemSpec::Rotation {
            alpha: CirclePoint(1 << 63),
        };
        let orbit = generate_orbit(&spec, InitialDatum::Circle(CirclePoint::ZERO), 4).unwrap();
        let states: Vec<_> = (0..4).map(|n| orbit.circle_state(n).unwrap()).collect();
        assert_eq!(
            states,
            vec![
                CirclePoint::ZERO,
                CirclePoint::HALF,
                CirclePoint::ZERO,
                CirclePoint::HALF
            ]
        );
    }

    #[test]
    fn two_cycles_alternate() {
        let spec = SystemSpec::FinitePermutation {
            perm: vec![1, 0, 3, 2],
        };
        let orbit = generate_orbit(&spec, InitialDatum::Point(2), 3).unwrap();
        let states: Vec<_> = (0..3).map(|n| orbit.point_state(n).unwrap()).collect();
        assert_eq!(states, vec![2, 3, 2]);
    }

    #[test]
    fn fair_coin_frequency() {
        let orbit = generate_orbit(&fair_coin(42), InitialDatum::Stream, 10_000).unwrap();
        let stream = orbit.symbol_stream().unwrap();
        let zeros = stream[..10_000].iter().filter(|&&c| c == 0).count();
        let freq = zeros as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn generation_errors() {
        let spec = SystemSpec::FinitePermutation {
            perm: vec![1, 0, 3, 2],
        };
        assert_eq!(
            generate_orbit(&spec, InitialDatum::Point(0), 0),
            Err(Error::ZeroLength)
        );
        assert_eq!(
            generate_orbit(&spec, InitialDatum::Point(4), 2),
            Err(Error::IndexOutOfRange { index: 4, size: 4 })
        );
        let bad = SystemSpec::FinitePermutation {
            perm: vec![0, 5, 1],
        };
        assert!(matches!(
            generate_orbit(&bad, InitialDatum::Point(0), 2),
            Err(Error::IndexOutOfRange { index: 5, .. })
        ));
        let dup = SystemSpec::FinitePermutation { perm: vec![0, 0] };
        assert!(matches!(dup.validate(), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn distributions_must_sum_to_one() {
        let spec = SystemSpec::BernoulliShift {
            probs: vec![Rational::new(1, 3), Rational::new(1, 3)],
            seed: 0,
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidSystem(_))));
        let single = SystemSpec::BernoulliShift {
            probs: vec![Rational::one()],
            seed: 0,
        };
        assert!(matches!(single.validate(), Err(Error::InvalidSystem(_))));
        let markov = SystemSpec::MarkovShift {
            matrix: vec![
                vec![half(), half()],
                vec![Rational::one(), Rational::new(1, 2)],
            ],
            initial: vec![half(), half()],
            seed: 1,
        };
        assert!(matches!(markov.validate(), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn character_on_half_rotation() {
        let spec = SystemSpec::Rotation {
            alpha: CirclePoint::HALF,
        };
        let orbit = generate_orbit(&spec, InitialDatum::Circle(CirclePoint::ZERO), 4).unwrap();
        let seq = sample_observable(&orbit, &Observable::Character(1), 0, 4).unwrap();
        let re: Vec<f64> = seq.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![1.0, -1.0, 1.0, -1.0]);
        assert!(seq.values().iter().all(|v| v.im.abs() < 1e-15));
    }

    #[test]
    fn constant_samples() {
        let orbit = generate_orbit(&fair_coin(3), InitialDatum::Stream, 8).unwrap();
        let seq = sample_observable(&orbit, &Observable::Constant(Rational::one()), 0, 5).unwrap();
        assert_eq!(seq.values(), &[Complex64::new(1.0, 0.0); 5]);
    }

    #[test]
    fn cylinder_matches_stream() {
        let orbit = generate_orbit(&fair_coin(42), InitialDatum::Stream, 200).unwrap();
        let seq =
            sample_observable(&orbit, &Observable::CylinderIndicator(vec![0]), 0, 200).unwrap();
        let stream = orbit.symbol_stream().unwrap();
        for (j, v) in seq.values().iter().enumerate() {
            assert_eq!(v.re, if stream[j] == 0 { 1.0 } else { 0.0 });
        }
        let pair =
            sample_observable(&orbit, &Observable::CylinderIndicator(vec![1, 0]), 3, 100).unwrap();
        for (j, v) in pair.values().iter().enumerate() {
            let hit = stream[3 + j] == 1 && stream[4 + j] == 0;
            assert_eq!(v.re, if hit { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn sampling_errors() {
        let orbit = generate_orbit(&fair_coin(1), InitialDatum::Stream, 10).unwrap();
        assert_eq!(
            sample_observable(&orbit, &Observable::SymbolIndicator(vec![0]), 5, 6),
            Err(Error::OrbitTooShort {
                needed: 11,
                available: 10
            })
        );
        assert!(matches!(
            sample_observable(&orbit, &Observable::Character(1), 0, 3),
            Err(Error::Incompatible { .. })
        ));
        assert!(matches!(
            sample_observable(&orbit, &Observable::SymbolIndicator(vec![2]), 0, 3),
            Err(Error::IndexOutOfRange { index: 2, size: 2 })
        ));
        let skewed = Observable::MeanZeroSymbol(vec![Rational::one(), Rational::zero()]);
        assert!(matches!(
            sample_observable(&orbit, &skewed, 0, 3),
            Err(Error::InvalidObservable(_))
        ));
    }

    #[test]
    fn exact_integrals() {
        let coin = SystemSpec::BernoulliShift {
            probs: vec![Rational::new(1, 3), Rational::new(2, 3)],
            seed: 0,
        };
        assert_eq!(
            Observable::SymbolIndicator(vec![0])
                .exact_integral(&coin)
                .unwrap(),
            Rational::new(1, 3)
        );
        assert_eq!(
            Observable::CylinderIndicator(vec![1, 1, 0])
                .exact_integral(&coin)
                .unwrap(),
            Rational::new(4, 27)
        );
        assert_eq!(
            Observable::MeanZeroSymbol(vec![Rational::from(2), Rational::from(-1)])
                .exact_integral(&coin)
                .unwrap(),
            Rational::zero()
        );
        let rot = SystemSpec::Rotation {
            alpha: CirclePoint::from_f64(0.3),
        };
        assert_eq!(
            Observable::Character(3).exact_integral(&rot).unwrap(),
            Rational::zero()
        );
        assert_eq!(
            Observable::Character(0).exact_integral(&rot).unwrap(),
            Rational::one()
        );
        let perm = SystemSpec::FinitePermutation {
            perm: vec![1, 2, 0, 3],
        };
        assert_eq!(
            Observable::SymbolIndicator(vec![0, 3])
                .exact_integral(&perm)
                .unwrap(),
            half()
        );
    }

    #[test]
    fn markov_integral_requires_stationarity() {
        let q = |a, b| Rational::new(a, b);
        let matrix = vec![vec![q(3, 4), q(1, 4)], vec![q(1, 2), q(1, 2)]];
        let stationary = SystemSpec::MarkovShift {
            matrix: matrix.clone(),
            initial: vec![q(2, 3), q(1, 3)],
            seed: 9,
        };
        assert_eq!(
            Observable::CylinderIndicator(vec![0, 1])
                .exact_integral(&stationary)
                .unwrap(),
            q(1, 6)
        );
        let transient = SystemSpec::MarkovShift {
            matrix,
            initial: vec![q(1, 2), q(1, 2)],
            seed: 9,
        };
        assert!(matches!(
            Observable::SymbolIndicator(vec![0]).exact_integral(&transient),
            Err(Error::NoExactIntegral(_))
        ));
        // transient chains still generate
        assert!(generate_orbit(&transient, InitialDatum::Stream, 16).is_ok());
    }

    #[test]
    fn markov_stream_respects_forbidden_transitions() {
        let q = |a, b| Rational::new(a, b);
        // golden-mean shift: 1 is always followed by 0
        let spec = SystemSpec::MarkovShift {
            matrix: vec![vec![q(1, 2), q(1, 2)], vec![q(1, 1), q(0, 1)]],
            initial: vec![q(2, 3), q(1, 3)],
            seed: 5,
        };
        let orbit = generate_orbit(&spec, InitialDatum::Stream, 5000).unwrap();
        let stream = orbit.symbol_stream().unwrap();
        assert!(stream.windows(2).all(|w| !(w[0] == 1 && w[1] == 1)));
        let ones = stream[..5000].iter().filter(|&&c| c == 1).count() as f64 / 5000.0;
        assert!((ones - 1.0 / 3.0).abs() < 0.03, "{ones}");
    }

    #[test]
    fn seeds_reproduce_streams() {
        let a = generate_orbit(&fair_coin(77), InitialDatum::Stream, 500).unwrap();
        let b = generate_orbit(&fair_coin(77), InitialDatum::Stream, 500).unwrap();
        let c = generate_orbit(&fair_coin(78), InitialDatum::Stream, 500).unwrap();
        assert_eq!(a.symbol_stream(), b.symbol_stream());
        assert_ne!(a.symbol_stream(), c.symbol_stream());
    }

    #[test]
    fn cumulative_draw_boundaries() {
        let law = CumulativeLaw::new(&[half(), half()]);
        assert_eq!(law.draw(0), 0);
        assert_eq!(law.draw((1 << 63) - 1), 0);
        assert_eq!(law.draw(1 << 63), 1);
        assert_eq!(law.draw(u64::MAX), 1);
        let skip = CumulativeLaw::new(&[half(), Rational::zero(), half()]);
        assert_eq!(skip.draw(1 << 63), 2);
    }

    #[test]
    fn relabeling_transports_law() {
        let spec = SystemSpec::BernoulliShift {
            probs: vec![Rational::new(1, 4), Rational::new(3, 4)],
            seed: 2,
        };
        let orbit = generate_orbit(&spec, InitialDatum::Stream, 50).unwrap();
        let swapped = orbit.relabel_symbols(&[1, 0]).unwrap();
        assert_eq!(
            swapped.spec(),
            &SystemSpec::BernoulliShift {
                probs: vec![Rational::new(3, 4), Rational::new(1, 4)],
                seed: 2
            }
        );
        for n in 0..50 {
            assert_eq!(
                swapped.symbol_window(n).unwrap()[0],
                1 - orbit.symbol_window(n).unwrap()[0]
            );
        }
        assert!(orbit.relabel_symbols(&[0, 0]).is_err());
    }

    #[test]
    fn circle_point_conversions() {
        assert_eq!(CirclePoint::from_f64(0.5), CirclePoint::HALF);
        assert_eq!(CirclePoint::from_f64(1.0 - 1e-18), CirclePoint::ZERO);
        assert_eq!(CirclePoint::from_f64(-0.25).to_f64(), 0.75);
        assert_eq!(CirclePoint(3).times(-1), CirclePoint(u64::MAX - 2));
    }
}
