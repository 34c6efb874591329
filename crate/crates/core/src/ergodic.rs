//! Averages (1/N) Σ_{n ≤ N, n ∈ C} g(T^{Ω(a(n))} x).
//!
//! The sum depends on (T, g, x) only through the orbit table, so it is
//! computed as a histogram of Ω(a(n)) over the condition set dotted with
//! the table.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::{sieve_segment, sieving_primes, SieveConfig};
use crate::bitset::BitSet;
use crate::density::{density, twin_constant};
use crate::dynamics::{default_j_max, orbit_table, Observable, OrbitTable, Point, System};
use crate::kfree::{kfree_mask, product_kfree_mask, twin_squarefree_mask, KfreeConfig};
use crate::poly::IntPolynomial;
use crate::{Error, Result};

/// n ↦ ⌊αn + β⌋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beatty {
    /// α = a/q, β = b/q.
    Rational {
        a: u64,
        b: i64,
        q: u64,
    },
    Real {
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgumentMap {
    Identity,
    /// n ↦ mn + r with 0 ≤ r < m.
    Progression {
        m: u64,
        r: u64,
    },
    Beatty(Beatty),
}

/// Exact ⌊αn + β⌋ for the stored doubles α, β.
fn exact_floor(alpha: f64, beta: f64, n: u64) -> BigInt {
    let (ma, ea) = decode(alpha);
    let (mb, eb) = decode(beta);
    let e = ea.min(eb).min(0);
    let scale = |m: i64, ex: i32| BigInt::from(m) << ((ex - e) as usize);
    let num = scale(ma, ea) * BigInt::from(n) + scale(mb, eb);
    num.div_floor(&(BigInt::from(1) << ((-e) as usize)))
}

/// x = m·2^e exactly.
fn decode(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1 << 52) - 1)) as i64;
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | 1 << 52, exp - 1075) };
    (sign * m, e)
}

impl ArgumentMap {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArgumentMap::Identity => Ok(()),
            ArgumentMap::Progression { m, r } if m >= 1 && r < m => Ok(()),
            ArgumentMap::Progression { m, r } => {
                Err(Error::Invalid(format!("progression needs m >= 1 and 0 <= r < m, got m = {m}, r = {r}")))
            }
            ArgumentMap::Beatty(Beatty::Rational { a, b, q }) => {
                if a == 0 || q == 0 || (a as i128 + b as i128) <= q as i128 {
                    Err(Error::Invalid(format!("Beatty map needs α > 0 and α + β > 1, got α = {a}/{q}, β = {b}/{q}")))
                } else {
                    Ok(())
                }
            }
            ArgumentMap::Beatty(Beatty::Real { alpha, beta }) => {
                if alpha.is_finite()
                    && beta.is_finite()
                    && alpha > 0.0
                    && exact_floor(alpha, beta, 1) >= BigInt::from(1)
                {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("Beatty map needs α > 0 and α + β > 1, got α = {alpha}, β = {beta}")))
                }
            }
        }
    }

    /// a(n) for n ≥ 1.
    pub fn apply(&self, n: u64) -> Result<u64> {
        let overflow = || Error::Overflow(format!("argument of n = {n} exceeds 64 bits"));
        match *self {
            ArgumentMap::Identity => Ok(n),
            ArgumentMap::Progression { m, r } => m.checked_mul(n).and_then(|v| v.checked_add(r)).ok_or_else(overflow),
            ArgumentMap::Beatty(Beatty::Rational { a, b, q }) => {
                let v = (a as i128 * n as i128 + b as i128).div_euclid(q as i128);
                u64::try_from(v).map_err(|_| overflow())
            }
            ArgumentMap::Beatty(Beatty::Real { alpha, beta }) => {
                let t = alpha * n as f64 + beta;
                let near = libm::round(t);
                // far from an integer the rounded value floors correctly
                if (t - near).abs() > 8.0 * f64::EPSILON * (t.abs() + 1.0) && t.abs() < 9.0e15 {
                    let v = libm::floor(t);
                    if v < 0.0 {
                        return Err(overflow());
                    }
                    Ok(v as u64)
                } else {
                    exact_floor(alpha, beta, n).to_u64().ok_or_else(overflow)
                }
            }
        }
    }

    /// Largest argument over `1..=N`; every map is non-decreasing.
    pub fn max_arg(&self, n_max: u64) -> Result<u64> {
        self.apply(n_max.max(1))
    }
}

/// The set of n averaged over.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    All,
    KFreePoly {
        f: IntPolynomial,
        k: u32,
    },
    /// n and n + 1 both squarefree.
    TwinSquarefree,
    /// Product of coprime factors, sieved factor by factor.
    ProductPoly {
        factors: Vec<IntPolynomial>,
        k: u32,
    },
    /// Bit n − 1 selects n.
    CustomMask(BitSet),
}

impl Condition {
    /// Mask on `1..=N`, or `None` when every n is selected.
    pub fn mask(&self, n_max: u64, config: &KfreeConfig) -> Result<Option<BitSet>> {
        Ok(match self {
            Condition::All => None,
            Condition::KFreePoly { f, k } => Some(kfree_mask(f, *k, n_max, config)?.into_bits()),
            Condition::TwinSquarefree => {
                let tables = crate::arith::build_tables(1, n_max + 2, &SieveConfig::default())?;
                Some(twin_squarefree_mask(&tables, n_max)?)
            }
            Condition::ProductPoly { factors, k } => Some(product_kfree_mask(factors, *k, n_max, config)?.into_bits()),
            Condition::CustomMask(bits) => {
                if (bits.len() as u64) < n_max {
                    return Err(Error::OutOfRange { what: "N", value: n_max, lo: 0, hi: bits.len() as u64 + 1 });
                }
                let mut m = BitSet::new(0);
                m.extend_from(bits);
                Some(BitSet::from_fn(n_max as usize, |i| m.get(i)))
            }
        })
    }

    /// Natural density of the condition set. A custom mask uses its
    /// empirical density over its full length.
    pub fn density(&self, p_bound: u64) -> Result<f64> {
        Ok(match self {
            Condition::All => 1.0,
            Condition::KFreePoly { f, k } => density(f, *k, p_bound)?.value,
            Condition::TwinSquarefree => twin_constant(p_bound)?.value,
            Condition::ProductPoly { factors, k } => {
                let (first, rest) =
                    factors.split_first().ok_or_else(|| Error::Invalid("product needs at least one factor".into()))?;
                let f = rest.iter().fold(first.clone(), |acc, g| acc.mul(g));
                density(&f, *k, p_bound)?.value
            }
            Condition::CustomMask(bits) => {
                if bits.is_empty() {
                    0.0
                } else {
                    bits.count_ones() as f64 / bits.len() as f64
                }
            }
        })
    }
}

/// counts[j] = #{n ≤ N selected : Ω(a(n)) = j}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaHistogram {
    pub counts: Vec<u64>,
    pub selected: u64,
    pub n: u64,
}

impl OmegaHistogram {
    pub fn empty(n: u64) -> Self {
        OmegaHistogram { counts: Vec::new(), selected: 0, n }
    }

    /// Adds the counts of a disjoint range; `n` becomes the larger limit.
    pub fn merge(&mut self, other: &OmegaHistogram) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.selected += other.selected;
        self.n = self.n.max(other.n);
    }

    /// Largest j with a nonzero count.
    pub fn max_index(&self) -> Option<usize> {
        self.counts.iter().rposition(|&c| c != 0)
    }
}

/// Primes needed to sieve Ω at every argument over `1..=N`.
pub fn histogram_primes(n_max: u64, argmap: &ArgumentMap) -> Result<Vec<u64>> {
    argmap.validate()?;
    let hi = argmap.max_arg(n_max)?.checked_add(1).ok_or_else(|| Error::Overflow("argument range".into()))?;
    let cfg = SieveConfig::default();
    if hi > cfg.max_hi {
        return Err(Error::Capacity(format!("arguments up to {} exceed the sieve capacity {}", hi - 1, cfg.max_hi)));
    }
    sieving_primes(hi)
}

/// Histogram over n ∈ [lo, hi); `mask` bit n − 1 selects n.
pub fn histogram_segment(
    primes: &[u64],
    lo: u64,
    hi: u64,
    mask: Option<&BitSet>,
    argmap: &ArgumentMap,
) -> Result<OmegaHistogram> {
    let mut h = OmegaHistogram::empty(hi - 1);
    if lo >= hi {
        return Ok(h);
    }
    let a_lo = argmap.apply(lo)?;
    let a_hi = argmap.apply(hi - 1)? + 1;
    let tables = sieve_segment(primes, a_lo, a_hi);
    let omega = tables.omega_slice();
    for n in lo..hi {
        if let Some(m) = mask {
            if !m.get((n - 1) as usize) {
                continue;
            }
        }
        let j = omega[(argmap.apply(n)? - a_lo) as usize] as usize;
        if h.counts.len() <= j {
            h.counts.resize(j + 1, 0);
        }
        h.counts[j] += 1;
        h.selected += 1;
    }
    Ok(h)
}

/// Cumulative histograms at each ascending checkpoint, one segment after another.
pub fn omega_histograms(
    checkpoints: &[u64],
    mask: Option<&BitSet>,
    argmap: &ArgumentMap,
    segment: usize,
) -> Result<Vec<OmegaHistogram>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("checkpoints must be strictly ascending".into()));
    }
    let n_max = checkpoints.last().copied().unwrap_or(0);
    if let Some(m) = mask {
        if (m.len() as u64) < n_max {
            return Err(Error::OutOfRange { what: "N", value: n_max, lo: 0, hi: m.len() as u64 + 1 });
        }
    }
    let primes = histogram_primes(n_max, argmap)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = OmegaHistogram::empty(0);
    let mut lo = 1;
    for &c in checkpoints {
        for (a, b) in split_range(lo, c + 1, segment) {
            acc.merge(&histogram_segment(&primes, a, b, mask, argmap)?);
        }
        acc.n = c;
        out.push(acc.clone());
        lo = c + 1;
    }
    Ok(out)
}

/// Single histogram on `1..=N`.
pub fn omega_histogram(n_max: u64, mask: Option<&BitSet>, argmap: &ArgumentMap) -> Result<OmegaHistogram> {
    if n_max == 0 {
        argmap.validate()?;
        return Ok(OmegaHistogram::empty(0));
    }
    Ok(omega_histograms(&[n_max], mask, argmap, SieveConfig::default().segment)?.remove(0))
}

/// Splits [lo, hi) into pieces of at most `segment` entries.
pub fn split_range(lo: u64, hi: u64, segment: usize) -> impl Iterator<Item = (u64, u64)> {
    let step = segment.max(1) as u64;
    (lo..hi).step_by(step as usize).map(move |a| (a, (a + step).min(hi)))
}

/// (1/N) Σ_j counts[j]·g(T^j x).
pub fn ergodic_average(hist: &OmegaHistogram, table: &OrbitTable) -> Result<f64> {
    if let Some(j) = hist.max_index() {
        if j >= table.values.len() {
            return Err(Error::OutOfRange { what: "Ω value", value: j as u64, lo: 0, hi: table.values.len() as u64 });
        }
    }
    if hist.n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = hist.counts.iter().zip(&table.values).map(|(&c, &v)| c as f64 * v).sum();
    Ok(sum / hist.n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub selected: u64,
    pub average: f64,
    pub target: f64,
    pub residual: f64,
}

/// Rows against the target density·∫g dμ.
pub fn convergence_rows(hists: &[OmegaHistogram], table: &OrbitTable, density: f64) -> Result<Vec<ConvergenceRow>> {
    let target = density * table.mean;
    hists
        .iter()
        .map(|h| {
            let average = ergodic_average(h, table)?;
            Ok(ConvergenceRow { n: h.n, selected: h.selected, average, target, residual: average - target })
        })
        .collect()
}

/// What a convergence report averages.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSetup {
    pub system: System,
    pub observable: Observable,
    pub x: Point,
    pub condition: Condition,
    pub argmap: ArgumentMap,
    /// Prime bound for the condition's density.
    pub p_bound: u64,
}

/// Single-threaded convergence report at ascending checkpoints.
pub fn convergence_report(
    setup: &ErgodicSetup,
    checkpoints: &[u64],
    config: &KfreeConfig,
) -> Result<Vec<ConvergenceRow>> {
    let n_max = checkpoints.last().copied().unwrap_or(0);
    let j_max = default_j_max(setup.argmap.max_arg(n_max)?);
    let table = orbit_table(&setup.system, &setup.observable, setup.x, j_max)?;
    let mask = setup.condition.mask(n_max, config)?;
    let hists = omega_histograms(checkpoints, mask.as_ref(), &setup.argmap, config.segment)?;
    convergence_rows(&hists, &table, setup.condition.density(setup.p_bound)?)
}

/// Least-squares slope of ln max(err, 1) against ln N. All errors zero
/// gives −∞.
pub fn exponent_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Invalid(format!("need at least 2 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[0].0.partial_cmp(&w[1].0) != Some(Ordering::Less))
        || points.iter().any(|p| p.0.is_nan() || p.0 <= 0.0 || p.1.is_nan() || p.1 < 0.0)
    {
        return Err(Error::Invalid("N must be positive and strictly increasing, errors non-negative".into()));
    }
    if points.iter().all(|p| p.1 == 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let xs: Vec<f64> = points.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log(p.1.max(1.0))).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Per-n table lookups without the histogram, for cross-checking.
pub fn direct_sum(n_max: u64, mask: Option<&BitSet>, argmap: &ArgumentMap, table: &OrbitTable) -> Result<f64> {
    let primes = histogram_primes(n_max, argmap)?;
    let mut sum = 0.0;
    for n in 1..=n_max {
        if mask.is_some_and(|m| !m.get((n - 1) as usize)) {
            continue;
        }
        let a = argmap.apply(n)?;
        let j = sieve_segment(&primes, a, a + 1).omega(a)? as usize;
        sum += table.values.get(j).copied().ok_or(Error::OutOfRange {
            what: "Ω value",
            value: j as u64,
            lo: 0,
            hi: table.values.len() as u64,
        })?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{TrigTerm, GOLDEN};
    use alloc::vec;

    #[test]
    fn identity_histogram() {
        let h = omega_histogram(10, None, &ArgumentMap::Identity).unwrap();
        assert_eq!(h.counts, [1, 4, 4, 1]);
        assert_eq!(h.selected, 10);
    }

    #[test]
    fn empty_mask() {
        let m = BitSet::new(50);
        let h = omega_histogram(50, Some(&m), &ArgumentMap::Identity).unwrap();
        assert_eq!(h.selected, 0);
        assert!(h.counts.iter().all(|&c| c == 0));
        let t = orbit_table(&System::TwoPoint, &Observable::TwoPoint(1.0, -1.0), Point::Index(0), 6).unwrap();
        assert_eq!(ergodic_average(&h, &t).unwrap(), 0.0);
    }

    #[test]
    fn progression_histogram() {
        // Ω(3), Ω(5), …, Ω(21)
        let h = omega_histogram(10, None, &ArgumentMap::Progression { m: 2, r: 1 }).unwrap();
        let expected = [1u8, 1, 1, 2, 1, 1, 2, 1, 1, 2];
        let mut counts = [0u64; 3];
        for e in expected {
            counts[e as usize] += 1;
        }
        assert_eq!(h.counts, counts);
    }

    #[test]
    fn liouville_at_ten() {
        let h = omega_histogram(10, None, &ArgumentMap::Identity).unwrap();
        let t = orbit_table(&System::TwoPoint, &Observable::TwoPoint(1.0, -1.0), Point::Index(0), 4).unwrap();
        assert_eq!(ergodic_average(&h, &t).unwrap(), 0.0);
    }

    #[test]
    fn constant_observable() {
        let bits = BitSet::from_fn(100, |i| i % 3 == 0);
        let h = omega_histogram(100, Some(&bits), &ArgumentMap::Identity).unwrap();
        let t = orbit_table(&System::CyclicRotation(1), &Observable::Cyclic(vec![2.5]), Point::Index(0), 8).unwrap();
        assert_eq!(ergodic_average(&h, &t).unwrap(), 2.5 * 34.0 / 100.0);
    }

    #[test]
    fn short_table_rejected() {
        let h = omega_histogram(100, None, &ArgumentMap::Identity).unwrap();
        let t = orbit_table(&System::TwoPoint, &Observable::TwoPoint(1.0, -1.0), Point::Index(0), 2).unwrap();
        assert!(ergodic_average(&h, &t).is_err());
    }

    #[test]
    fn beatty_maps() {
        let real = ArgumentMap::Beatty(Beatty::Real { alpha: 1.5, beta: 0.0 });
        let rat = ArgumentMap::Beatty(Beatty::Rational { a: 3, b: 0, q: 2 });
        for n in 1..1000 {
            assert_eq!(real.apply(n).unwrap(), rat.apply(n).unwrap());
        }
        let golden = ArgumentMap::Beatty(Beatty::Real { alpha: 1.0 + GOLDEN, beta: 0.0 });
        assert_eq!(golden.apply(1).unwrap(), 1);
        assert_eq!(golden.apply(2).unwrap(), 3);
        assert_eq!(golden.apply(3).unwrap(), 4);
        assert!(ArgumentMap::Beatty(Beatty::Real { alpha: 0.5, beta: 0.25 }).validate().is_err());
        assert!(ArgumentMap::Beatty(Beatty::Rational { a: 1, b: 0, q: 1 }).validate().is_err());
        assert!(ArgumentMap::Progression { m: 3, r: 3 }.validate().is_err());
        assert_eq!(exact_floor(0.1, 0.0, 10), BigInt::from(1));
    }

    #[test]
    fn fits() {
        assert!((exponent_fit(&[(10.0, 10.0), (100.0, 100.0)]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(exponent_fit(&[(10.0, 1.0), (100.0, 1.0), (1000.0, 1.0)]).unwrap(), 0.0);
        assert_eq!(exponent_fit(&[(10.0, 0.0), (100.0, 0.0)]).unwrap(), f64::NEG_INFINITY);
        assert!(exponent_fit(&[(10.0, 1.0)]).is_err());
        assert!(exponent_fit(&[(10.0, 1.0), (10.0, 2.0)]).is_err());
    }

    #[test]
    fn report_targets() {
        let setup = ErgodicSetup {
            system: System::CyclicRotation(3),
            observable: Observable::indicator(3, 0).unwrap(),
            x: Point::Index(0),
            condition: Condition::CustomMask(BitSet::full(1000)),
            argmap: ArgumentMap::Identity,
            p_bound: 100,
        };
        let rows = convergence_report(&setup, &[100, 1000], &KfreeConfig::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].target, 1.0 / 3.0);
        let setup = ErgodicSetup {
            system: System::CircleRotation(GOLDEN),
            observable: Observable::Circle { constant: 1.0, terms: vec![TrigTerm { h: 1, a: 1.0, b: 0.0 }] },
            x: Point::Real(0.3),
            condition: Condition::KFreePoly { f: IntPolynomial::from_i64(&[1, 0, 1]).unwrap(), k: 2 },
            argmap: ArgumentMap::Identity,
            p_bound: 10_000,
        };
        let rows = convergence_report(&setup, &[1000], &KfreeConfig::default()).unwrap();
        let e = crate::density::estermann_constant(10_000).unwrap().value;
        assert!((rows[0].target - e).abs() < 1e-9);
        assert!((rows[0].residual - (rows[0].average - rows[0].target)).abs() == 0.0);
    }
}
