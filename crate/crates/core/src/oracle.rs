//! Exact reference values.
//!
//! On a finite permutation system `(Z_K, uniform, pi)` the invariant
//! sigma-algebra is generated by the cycles of `pi`, so conditional
//! expectations are cycle averages and Birkhoff limits are attained exactly
//! once the averaging length is a multiple of the cycle length. Everything in
//! the first half of this module is exact rational arithmetic.

use num_traits::{One, Zero};

use crate::dynsys::{Observable, Orbit, SystemSpec};
use crate::{Error, Rational, Result};

/// A bijection of `{0..K-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        SystemSpec::FinitePermutation { perm: map.clone() }.validate()?;
        Ok(Permutation(map))
    }

    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    /// The single cycle `0 -> 1 -> ... -> k-1 -> 0`.
    pub fn rotation(k: usize) -> Self {
        Permutation((0..k).map(|i| (i + 1) % k).collect())
    }

    /// Build from disjoint cycles; points not mentioned are fixed.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..k).collect();
        let mut touched = vec![false; k];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= k {
                    return Err(Error::IndexOutOfRange { index: x, size: k });
                }
                if std::mem::replace(&mut touched[x], true) {
                    return Err(Error::InvalidSystem(format!("point {x} in two cycles")));
                }
                map[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::new(map)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Cycles in order of their smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.0[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.0[x];
            }
            out.push(cycle);
        }
        out
    }

    /// Index of the cycle containing each point.
    pub fn cycle_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.len()];
        for (id, cycle) in self.cycles().iter().enumerate() {
            for &x in cycle {
                labels[x] = id;
            }
        }
        labels
    }

    pub fn max_cycle_len(&self) -> usize {
        self.cycles().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether every cycle of `self` lies inside a cycle of `coarser`.
    pub fn refines(&self, coarser: &Permutation) -> bool {
        let labels = coarser.cycle_labels();
        self.cycles()
            .iter()
            .all(|c| c.iter().all(|&x| labels[x] == labels[c[0]]))
    }
}

/// Two permutations of the same finite set, with uniform measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSystem {
    pub pi1: Permutation,
    pub pi2: Permutation,
}

/// Selects `T_1` or `T_2` of a [`FiniteSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

impl FiniteSystem {
    pub fn new(pi1: Permutation, pi2: Permutation) -> Result<Self> {
        if pi1.len() != pi2.len() {
            return Err(Error::InvalidSystem(format!(
                "permutations act on sets of size {} and {}",
                pi1.len(),
                pi2.len()
            )));
        }
        if pi1.is_empty() {
            return Err(Error::InvalidSystem("empty ground set".into()));
        }
        Ok(Self { pi1, pi2 })
    }

    pub fn size(&self) -> usize {
        self.pi1.len()
    }

    pub fn get(&self, which: Which) -> &Permutation {
        match which {
            Which::First => &self.pi1,
            Which::Second => &self.pi2,
        }
    }

    /// Least common multiple of all cycle lengths of both permutations.
    pub fn period(&self) -> usize {
        self.pi1
            .cycles()
            .iter()
            .chain(self.pi2.cycles().iter())
            .fold(1usize, |acc, c| num_integer::lcm(acc, c.len()))
    }
}

/// A subset `A` of the ground set, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    mask: Vec<bool>,
}

impl PointSet {
    pub fn new(k: usize, members: &[usize]) -> Result<Self> {
        let mut mask = vec![false; k];
        for &x in members {
            if x >= k {
                return Err(Error::IndexOutOfRange { index: x, size: k });
            }
            mask[x] = true;
        }
        Ok(Self { mask })
    }

    pub fn full(k: usize) -> Self {
        Self {
            mask: vec![true; k],
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(x, _)| x)
    }

    /// `mu(A) = |A| / K`.
    pub fn measure(&self) -> Rational {
        Rational::new(self.len() as i128, self.universe() as i128)
    }

    pub fn indicator(&self) -> Vec<Rational> {
        self.mask
            .iter()
            .map(|&b| if b { Rational::one() } else { Rational::zero() })
            .collect()
    }
}

/// Per-point values of a conditional expectation onto a cycle partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalExpectation {
    pub values: Vec<Rational>,
}

impl ConditionalExpectation {
    /// Cycle averages of `f` under `perm`.
    pub fn project(perm: &Permutation, f: &[Rational]) -> Result<Self> {
        if f.len() != perm.len() {
            return Err(Error::InvalidArgument(format!(
                "function has {} values on a set of size {}",
                f.len(),
                perm.len()
            )));
        }
        let mut values = vec![Rational::zero(); perm.len()];
        for cycle in perm.cycles() {
            let total: Rational = cycle.iter().map(|&x| f[x]).sum();
            let avg = total / Rational::from(cycle.len() as i128);
            for &x in &cycle {
                values[x] = avg;
            }
        }
        Ok(Self { values })
    }

    /// `∫ E dμ` under the uniform measure.
    pub fn integral(&self) -> Rational {
        self.values.iter().sum::<Rational>() / Rational::from(self.values.len() as i128)
    }
}

fn check_set(system: &FiniteSystem, a: &PointSet) -> Result<()> {
    if a.universe() != system.size() {
        return Err(Error::InvalidArgument(format!(
            "set lives in a ground set of size {}, system has {}",
            a.universe(),
            system.size()
        )));
    }
    Ok(())
}

/// `E(1_A | I_which)`: on each cycle, `|A ∩ cycle| / |cycle|`.
pub fn cond_exp(
    system: &FiniteSystem,
    which: Which,
    a: &PointSet,
) -> Result<ConditionalExpectation> {
    check_set(system, a)?;
    ConditionalExpectation::project(system.get(which), &a.indicator())
}

/// `∫_A E(1_A | I_1) E(1_A | I_2) dμ`, exactly.
pub fn cor1_limit_exact(system: &FiniteSystem, a: &PointSet) -> Result<Rational> {
    let e1 = cond_exp(system, Which::First, a)?;
    let e2 = cond_exp(system, Which::Second, a)?;
    let total: Rational = a.members().map(|x| e1.values[x] * e2.values[x]).sum();
    Ok(total / Rational::from(system.size() as i128))
}

/// `N^{-2} sum_{n,m=1}^{N} mu(A ∩ T_1^{-n} A ∩ T_2^{-n-m} A)`, exactly, by
/// counting. Cost `O(N K)` via prefix sums along the `T_2` orbits.
pub fn cor1_average_empirical(system: &FiniteSystem, a: &PointSet, n: usize) -> Result<Rational> {
    check_set(system, a)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let mut total: i128 = 0;
    let mut prefix = vec![0i64; 2 * n + 1];
    for x in a.members() {
        // prefix[j] = #{1 <= i <= j : T_2^i x ∈ A}
        let mut y = x;
        for j in 1..=2 * n {
            y = system.pi2.apply(y);
            prefix[j] = prefix[j - 1] + i64::from(a.contains(y));
        }
        let mut z = x;
        let mut count: i128 = 0;
        for step in 1..=n {
            z = system.pi1.apply(z);
            if a.contains(z) {
                count += i128::from(prefix[step + n] - prefix[step]);
            }
        }
        total += count;
    }
    let denom = (n as i128) * (n as i128) * system.size() as i128;
    Ok(Rational::new(total, denom))
}

/// How the two invariant sigma-algebras sit relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nesting {
    /// Both permutations have the same cycle partition.
    Equal,
    /// `I_1 ⊂ I_2`: every `pi1`-cycle is a union of `pi2`-cycles.
    FirstInSecond,
    /// `I_2 ⊂ I_1`.
    SecondInFirst,
    NotNested,
}

impl Nesting {
    pub fn of(system: &FiniteSystem) -> Self {
        let first_in_second = system.pi2.refines(&system.pi1);
        let second_in_first = system.pi1.refines(&system.pi2);
        match (first_in_second, second_in_first) {
            (true, true) => Nesting::Equal,
            (true, false) => Nesting::FirstInSecond,
            (false, true) => Nesting::SecondInFirst,
            (false, false) => Nesting::NotNested,
        }
    }

    pub fn is_nested(self) -> bool {
        self != Nesting::NotNested
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KhintchineReport {
    pub limit: Rational,
    /// `mu(A)^3`.
    pub bound: Rational,
    pub nesting: Nesting,
    /// `Some(limit >= bound)` when the partitions are nested, `None` otherwise.
    pub holds_when_nested: Option<bool>,
}

/// Compare the exact limit with `mu(A)^3`. The comparison is only asserted when
/// one invariant sigma-algebra contains the other.
pub fn khintchine_check(system: &FiniteSystem, a: &PointSet) -> Result<KhintchineReport> {
    let limit = cor1_limit_exact(system, a)?;
    let mu = a.measure();
    let bound = mu * mu * mu;
    let nesting = Nesting::of(system);
    Ok(KhintchineReport {
        limit,
        bound,
        nesting,
        holds_when_nested: nesting.is_nested().then_some(limit >= bound),
    })
}

/// `prod_i ∫ f_i dμ_i`, exactly.
pub fn product_integral_limit<'a, I>(factors: I) -> Result<Rational>
where
    I: IntoIterator<Item = (&'a Observable, &'a SystemSpec)>,
{
    factors
        .into_iter()
        .try_fold(Rational::one(), |acc, (f, spec)| {
            Ok(acc * f.exact_integral(spec)?)
        })
}

/// Largest window per dimension for [`syndeticity_scan`].
pub const MAX_WINDOW_2D: usize = 4096;
pub const MAX_WINDOW_3D: usize = 256;

/// Window view of a return set in `[1, W]^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub dims: usize,
    pub window: usize,
    pub hits: u64,
    /// Per axis: longest run of consecutive misses along any axis-parallel
    /// line that contains at least one hit (runs touching the window edge
    /// included). `W` on every axis when there are no hits.
    pub max_gap: Vec<usize>,
    /// Per axis: number of axis-parallel lines without a single hit.
    pub empty_lines: Vec<u64>,
    pub nonempty: bool,
}

impl GapReport {
    /// Maximum of [`GapReport::max_gap`] over all axes.
    pub fn max_gap_all(&self) -> usize {
        self.max_gap.iter().copied().max().unwrap_or(0)
    }
}

/// Scan the lattice points `(n_1, .., n_k) ∈ [1, W]^k` where
///
/// ```text
/// 1_A(x) 1_A(T_1^{n_1} x) 1_A(T_2^{n_1+n_2} x) ... 1_A(T_k^{n_1+...+n_k} x) > lambda mu(A)^{2^k}
/// ```
///
/// `orbits[j]` is the orbit of `x` under `T_{j+1}` and must hold `k W + 1`
/// states; the leading factor is read from state 0 of `orbits[0]`. Because the
/// product is 0 or 1 and the threshold lies in `[0, 1)`, a hit is exactly a
/// product equal to 1.
pub fn syndeticity_scan(
    orbits: &[Orbit],
    a: &Observable,
    lambda: f64,
    window: usize,
) -> Result<GapReport> {
    let k = orbits.len();
    let limit = match k {
        2 => MAX_WINDOW_2D,
        3 => MAX_WINDOW_3D,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "scan dimension must be 2 or 3, got {k}"
            )))
        }
    };
    if window == 0 || window > limit {
        return Err(Error::InvalidArgument(format!(
            "window must be in 1..={limit} for k = {k}, got {window}"
        )));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    if !a.is_indicator() {
        return Err(Error::InvalidObservable(format!(
            "return sets need an indicator, got {}",
            a.name()
        )));
    }
    let mu = a.exact_integral(orbits[0].spec())?;
    if mu.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let needed = k * window + 1;
    let indicators = orbits
        .iter()
        .map(|orbit| {
            if orbit.len() < needed {
                return Err(Error::OrbitTooShort {
                    needed,
                    available: orbit.len(),
                });
            }
            (0..needed)
                .map(|s| Ok(a.evaluate(orbit, s)?.re == 1.0))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mu_f = *mu.numer() as f64 / *mu.denom() as f64;
    let threshold = lambda * mu_f.powi(1 << k);
    debug_assert!(threshold < 1.0);
    let lead = indicators[0][0];

    let w = window;
    let cells = w.pow(k as u32);
    let mut grid = vec![false; cells];
    if lead && 1.0 > threshold {
        // row-major, last coordinate fastest; coordinates stored 0-based
        for (idx, cell) in grid.iter_mut().enumerate() {
            let mut rest = idx;
            let mut coords = [0usize; 3];
            for d in (0..k).rev() {
                coords[d] = rest % w + 1;
                rest /= w;
            }
            let mut partial = 0;
            *cell = (0..k).all(|d| {
                partial += coords[d];
                indicators[d][partial]
            });
        }
    }
    let hits = grid.iter().filter(|&&b| b).count() as u64;
    let mut max_gap = vec![0usize; k];
    let mut empty_lines = vec![0u64; k];
    for axis in 0..k {
        let stride = w.pow((k - 1 - axis) as u32);
        for base in 0..cells {
            // a line is identified by its cell with coordinate 0 along `axis`
            if !(base / stride).is_multiple_of(w) {
                continue;
            }
            let mut run = 0usize;
            let mut longest = 0usize;
            let mut any = false;
            for step in 0..w {
                if grid[base + step * stride] {
                    any = true;
                    run = 0;
                } else {
                    run += 1;
                    longest = longest.max(run);
                }
            }
            if any {
                max_gap[axis] = max_gap[axis].max(longest);
            } else {
                empty_lines[axis] += 1;
            }
        }
    }
    if hits == 0 {
        max_gap.iter_mut().for_each(|g| *g = w);
    }
    Ok(GapReport {
        dims: k,
        window: w,
        hits,
        max_gap,
        empty_lines,
        nonempty: hits > 0,
    })
}
