//! k-free values of polynomials on `1..=N`.
//!
//! The mask is built by sieving: with `P0 = ⌈B^(1/(k+1))⌉` for a bound
//! `B >= |f(n)|`, every prime `p <= P0` is divided out of f(n) at the
//! residues n ≡ ν (mod p) with f(ν) ≡ 0. The remaining cofactor has only
//! prime factors above P0, so it carries a k-th power divisor exactly when
//! it is itself a perfect k-th power greater than one.
//!
//! The module also carries two desk-scale diagnostics: the exact split of
//! Σ ν_k(f(n))·a(n) into small and large moduli, and the tail count
//! E_f(Y, N).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{primes_up_to, ArithTables};
use crate::bitset::BitSet;
use crate::factor::{mul_mod_u128, Factorizer};
use crate::local_roots::{LocalRoots, RootOptions};
use crate::poly::{factor_biguint, is_perfect_power_big, is_perfect_power_u128, resultant, FastEval, IntPolynomial};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KfreeConfig {
    /// Entries per sieve segment.
    pub segment: usize,
    /// Largest sieving prime P0 accepted.
    pub max_sieve_prime: u64,
    /// Largest N for [`decompose_sum`].
    pub decompose_cap: u64,
    /// Largest N for [`e_f_tail`].
    pub tail_cap: u64,
}

impl Default for KfreeConfig {
    fn default() -> Self {
        KfreeConfig { segment: 1 << 20, max_sieve_prime: 1 << 24, decompose_cap: 1_000_000, tail_cap: 100_000 }
    }
}

impl KfreeConfig {
    pub fn segments(&self, n_max: u64) -> impl Iterator<Item = (u64, u64)> {
        let step = self.segment.max(1) as u64;
        (1..n_max + 1).step_by(self.segment.max(1)).map(move |s| (s, (s + step).min(n_max + 1)))
    }
}

/// Checks the hypotheses every k-free sieve relies on.
pub fn check_hypotheses(f: &IntPolynomial, k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::Invalid(format!("k must be >= 2, got {k}")));
    }
    if !f.is_squarefree_poly() {
        return Err(Error::RepeatedFactor);
    }
    if let Some(prime) = f.fixed_kth_power_prime(k)? {
        return Err(Error::FixedPowerDivisor { prime, k });
    }
    Ok(())
}

/// ⌈b^(1/e)⌉.
fn ceil_root(b: &BigUint, e: u32) -> BigUint {
    let r = b.nth_root(e);
    if num_traits::pow(r.clone(), e as usize) < *b {
        r + 1u32
    } else {
        r
    }
}

#[derive(Debug, Clone)]
enum Values {
    U64(FastEval),
    U128(FastEval),
    Big,
}

/// Everything needed to sieve any segment of `1..=N` for one polynomial.
#[derive(Debug, Clone)]
pub struct KfreePlan {
    f: IntPolynomial,
    k: u32,
    n_max: u64,
    p0: u64,
    sieve: Vec<(u64, Vec<u64>)>,
    values: Values,
}

/// One sieved segment `[lo, hi)` of the mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSegment {
    pub lo: u64,
    pub hi: u64,
    pub bits: BitSet,
    pub zeros: Vec<u64>,
}

impl KfreePlan {
    pub fn new(f: &IntPolynomial, k: u32, n_max: u64, config: &KfreeConfig) -> Result<Self> {
        check_hypotheses(f, k)?;
        let bound = f.value_bound(n_max);
        let p0 = ceil_root(&bound, k + 1);
        let p0 = p0.to_u64().filter(|&p| p <= config.max_sieve_prime).ok_or_else(|| {
            Error::Capacity(format!(
                "sieving bound P0 = {p0} exceeds the configured maximum {}",
                config.max_sieve_prime
            ))
        })?;
        let values = match f.fast_eval(n_max) {
            Some(fe) if bound.bits() <= 64 => Values::U64(fe),
            Some(fe) => Values::U128(fe),
            None => Values::Big,
        };
        let lr = LocalRoots::with_options(f, RootOptions::fast());
        let mut sieve = Vec::new();
        for p in primes_up_to(p0)? {
            let roots = lr.roots_mod_p(p)?;
            if !roots.is_empty() {
                sieve.push((p, roots));
            }
        }
        Ok(KfreePlan { f: f.clone(), k, n_max, p0, sieve, values })
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.f
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn p0(&self) -> u64 {
        self.p0
    }

    /// Sieves `[lo, hi)` with `1 <= lo < hi <= N + 1`.
    pub fn segment(&self, lo: u64, hi: u64) -> MaskSegment {
        assert!(lo >= 1 && lo < hi && hi <= self.n_max + 1, "segment outside 1..=N");
        match &self.values {
            Values::U64(fe) => {
                let vals: Vec<u64> = (lo..hi).map(|n| fe.eval(n).unsigned_abs() as u64).collect();
                self.sieve_values(lo, hi, vals)
            }
            Values::U128(fe) => {
                let vals: Vec<u128> = (lo..hi).map(|n| fe.eval(n).unsigned_abs()).collect();
                self.sieve_values(lo, hi, vals)
            }
            Values::Big => {
                let vals: Vec<BigUint> = (lo..hi).map(|n| self.f.eval(&BigInt::from(n)).magnitude().clone()).collect();
                self.sieve_values(lo, hi, vals)
            }
        }
    }

    fn sieve_values<M: Magnitude>(&self, lo: u64, hi: u64, mut vals: Vec<M>) -> MaskSegment {
        let len = (hi - lo) as usize;
        let mut bad = vec![false; len];
        let mut zeros = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            if v.is_zero() {
                bad[i] = true;
                zeros.push(lo + i as u64);
            }
        }
        let k = self.k;
        for (p, roots) in &self.sieve {
            let p = *p;
            for &r in roots {
                let mut n = lo + (r + p - lo % p) % p;
                while n < hi {
                    let i = (n - lo) as usize;
                    if !bad[i] && vals[i].divide_out(p, k) {
                        bad[i] = true;
                    }
                    n += p;
                }
            }
        }
        for (i, v) in vals.iter().enumerate() {
            if !bad[i] && v.is_kth_power_above_one(k) {
                bad[i] = true;
            }
        }
        MaskSegment { lo, hi, bits: BitSet::from_fn(len, |i| !bad[i]), zeros }
    }

    /// Whole mask, one segment after another.
    pub fn run(&self, config: &KfreeConfig) -> KfreeMask {
        let segs = config.segments(self.n_max).map(|(a, b)| self.segment(a, b)).collect();
        KfreeMask::from_segments(&self.f, self.k, self.n_max, segs).expect("segments generated in order")
    }
}

trait Magnitude {
    fn is_zero(&self) -> bool;
    /// Divides out every factor p; true once the exponent reaches k.
    fn divide_out(&mut self, p: u64, k: u32) -> bool;
    fn is_kth_power_above_one(&self, k: u32) -> bool;
}

impl Magnitude for u64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }

    #[inline]
    fn divide_out(&mut self, p: u64, k: u32) -> bool {
        let mut e = 0;
        while *self % p == 0 {
            *self /= p;
            e += 1;
            if e >= k {
                return true;
            }
        }
        false
    }

    fn is_kth_power_above_one(&self, k: u32) -> bool {
        *self > 1 && is_perfect_power_u128(*self as u128, k)
    }
}

impl Magnitude for u128 {
    fn is_zero(&self) -> bool {
        *self == 0
    }

    #[inline]
    fn divide_out(&mut self, p: u64, k: u32) -> bool {
        let p = p as u128;
        let mut e = 0;
        while *self % p == 0 {
            *self /= p;
            e += 1;
            if e >= k {
                return true;
            }
        }
        false
    }

    fn is_kth_power_above_one(&self, k: u32) -> bool {
        *self > 1 && is_perfect_power_u128(*self, k)
    }
}

impl Magnitude for BigUint {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn divide_out(&mut self, p: u64, k: u32) -> bool {
        let mut e = 0;
        while Zero::is_zero(&(&*self % p)) {
            *self /= p;
            e += 1;
            if e >= k {
                return true;
            }
        }
        false
    }

    fn is_kth_power_above_one(&self, k: u32) -> bool {
        !self.is_one() && is_perfect_power_big(self, k)
    }
}

/// Indicator of n with |f(n)| k-free, for `1 <= n <= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KfreeMask {
    f: IntPolynomial,
    k: u32,
    n_max: u64,
    bits: BitSet,
    zero_hits: Vec<u64>,
}

impl KfreeMask {
    /// Assembles consecutive segments covering `1..=N` in order.
    pub fn from_segments(f: &IntPolynomial, k: u32, n_max: u64, segments: Vec<MaskSegment>) -> Result<Self> {
        let mut bits = BitSet::new(0);
        let mut zero_hits = Vec::new();
        let mut next = 1;
        for s in segments {
            if s.lo != next {
                return Err(Error::Invalid(format!("mask segment starts at {} but {next} was expected", s.lo)));
            }
            bits.extend_from(&s.bits);
            zero_hits.extend(s.zeros);
            next = s.hi;
        }
        if next != n_max + 1 {
            return Err(Error::Invalid(format!("mask segments end at {next}, expected {}", n_max + 1)));
        }
        Ok(KfreeMask { f: f.clone(), k, n_max, bits, zero_hits })
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.f
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Bit n − 1 is set iff |f(n)| is k-free.
    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn into_bits(self) -> BitSet {
        self.bits
    }

    /// The n with f(n) = 0, always classified not k-free.
    pub fn zero_hits(&self) -> &[u64] {
        &self.zero_hits
    }

    pub fn is_kfree(&self, n: u64) -> Result<bool> {
        if n == 0 || n > self.n_max {
            return Err(Error::OutOfRange { what: "n", value: n, lo: 1, hi: self.n_max + 1 });
        }
        Ok(self.bits.get((n - 1) as usize))
    }

    /// #{n <= m : |f(n)| k-free}.
    pub fn count_upto(&self, m: u64) -> u64 {
        self.bits.count_ones_prefix(m.min(self.n_max) as usize) as u64
    }
}

/// Single-threaded k-free mask of f on `1..=N`.
pub fn kfree_mask(f: &IntPolynomial, k: u32, n_max: u64, config: &KfreeConfig) -> Result<KfreeMask> {
    Ok(KfreePlan::new(f, k, n_max, config)?.run(config))
}

/// Sieve plan for a product of coprime factors f = f_1···f_r.
///
/// Each factor gets its own k-free sieve. A prime not dividing any
/// pairwise resultant Res(f_i, f_j) divides at most one f_i(n), so the
/// product is k-free iff every factor is k-free and, for each of the
/// finitely many remaining primes, the exponents across factors sum to
/// less than k.
#[derive(Debug, Clone)]
pub struct ProductPlan {
    product: IntPolynomial,
    factors: Vec<KfreePlan>,
    shared_primes: Vec<u64>,
    k: u32,
    n_max: u64,
}

impl ProductPlan {
    pub fn new(factors: &[IntPolynomial], k: u32, n_max: u64, config: &KfreeConfig) -> Result<Self> {
        let (first, rest) =
            factors.split_first().ok_or_else(|| Error::Invalid("product needs at least one factor".into()))?;
        let product = rest.iter().fold(first.clone(), |acc, g| acc.mul(g));
        check_hypotheses(&product, k)?;
        let plans = factors.iter().map(|g| KfreePlan::new(g, k, n_max, config)).collect::<Result<Vec<_>>>()?;
        let mut shared = Vec::new();
        for i in 0..factors.len() {
            for j in i + 1..factors.len() {
                let r = resultant(factors[i].coeffs(), factors[j].coeffs());
                for (p, _) in factor_biguint(r.magnitude())? {
                    let p = p.to_u64().ok_or_else(|| Error::Capacity(format!("shared prime {p} exceeds 64 bits")))?;
                    shared.push(p);
                }
            }
        }
        shared.sort_unstable();
        shared.dedup();
        Ok(ProductPlan { product, factors: plans, shared_primes: shared, k, n_max })
    }

    pub fn product(&self) -> &IntPolynomial {
        &self.product
    }

    pub fn shared_primes(&self) -> &[u64] {
        &self.shared_primes
    }

    pub fn segment(&self, lo: u64, hi: u64) -> MaskSegment {
        let mut segs = self.factors.iter().map(|p| p.segment(lo, hi));
        let mut acc = segs.next().expect("at least one factor");
        for s in segs {
            acc.bits.and_assign(&s.bits);
            acc.zeros.extend(s.zeros);
        }
        acc.zeros.sort_unstable();
        acc.zeros.dedup();
        if !self.shared_primes.is_empty() {
            let hits: Vec<usize> = acc.bits.iter_ones().collect();
            for i in hits {
                let n = BigInt::from(lo + i as u64);
                for &p in &self.shared_primes {
                    let pb = BigInt::from(p);
                    let mut e = 0;
                    for g in &self.factors {
                        let mut v = g.poly().eval(&n);
                        while (&v % &pb).is_zero() && e < self.k {
                            v /= &pb;
                            e += 1;
                        }
                    }
                    if e >= self.k {
                        acc.bits.clear(i);
                        break;
                    }
                }
            }
        }
        acc
    }

    pub fn run(&self, config: &KfreeConfig) -> KfreeMask {
        let segs = config.segments(self.n_max).map(|(a, b)| self.segment(a, b)).collect();
        KfreeMask::from_segments(&self.product, self.k, self.n_max, segs).expect("segments generated in order")
    }
}

/// k-free mask of a product given by its coprime factors.
pub fn product_kfree_mask(factors: &[IntPolynomial], k: u32, n_max: u64, config: &KfreeConfig) -> Result<KfreeMask> {
    Ok(ProductPlan::new(factors, k, n_max, config)?.run(config))
}

/// Bit n − 1 set iff n and n + 1 are squarefree, for `1 <= n <= N`.
/// `tables` must cover `[1, N + 2)`.
pub fn twin_squarefree_mask(tables: &ArithTables, n_max: u64) -> Result<BitSet> {
    if tables.lo() != 1 || tables.hi() < n_max + 2 {
        return Err(Error::OutOfRange { what: "N + 1", value: n_max + 1, lo: tables.lo(), hi: tables.hi() });
    }
    let sf = tables.squarefree_bits();
    Ok(BitSet::from_fn(n_max as usize, |i| sf.get(i) && sf.get(i + 1)))
}

/// Count at a checkpoint against the density prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRow {
    pub n: u64,
    pub count: u64,
    pub target: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

/// Counts of set bits at each ascending checkpoint, against `density·N_i`.
pub fn count_rows(mask: &BitSet, checkpoints: &[u64], density: f64) -> Result<Vec<CountRow>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("checkpoints must be strictly ascending".into()));
    }
    checkpoints
        .iter()
        .map(|&n| {
            if n > mask.len() as u64 {
                return Err(Error::OutOfRange { what: "checkpoint", value: n, lo: 0, hi: mask.len() as u64 + 1 });
            }
            let count = mask.count_ones_prefix(n as usize) as u64;
            let target = density * n as f64;
            let abs_error = (count as f64 - target).abs();
            let rel_error = if target > 0.0 {
                abs_error / target
            } else if count == 0 {
                0.0
            } else {
                f64::INFINITY
            };
            Ok(CountRow { n, count, target, abs_error, rel_error })
        })
        .collect()
}

/// Result of splitting Σ ν_k(f(n))·a(n) at the modulus Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decomposition {
    /// Σ_{d <= Y} μ(d) Σ_{n <= N, d^k | f(n)} a(n).
    pub s1: i128,
    /// The same over d > Y.
    pub s2: i128,
    /// Σ_{n <= N} ν_k(f(n))·a(n), read off the k-free mask.
    pub total: i128,
}

/// max_{1 <= n <= N} |f(n)|, exactly.
pub fn max_abs_value(f: &IntPolynomial, n_max: u64) -> BigUint {
    match f.fast_eval(n_max) {
        Some(fe) => BigUint::from((1..=n_max).map(|n| fe.eval(n).unsigned_abs()).max().unwrap_or(0)),
        None => (1..=n_max).map(|n| f.eval(&BigInt::from(n)).magnitude().clone()).max().unwrap_or_default(),
    }
}

/// Exact evaluation of both halves of the divisor-sum split by enumerating
/// squarefree d and the roots of f modulo d^k, with the left-hand side
/// computed independently from the k-free mask. `a[n - 1]` is a(n).
pub fn decompose_sum(
    f: &IntPolynomial,
    k: u32,
    y: f64,
    n_max: u64,
    a: &[i64],
    config: &KfreeConfig,
) -> Result<Decomposition> {
    if n_max > config.decompose_cap {
        return Err(Error::Capacity(format!("N = {n_max} exceeds the diagnostic cap {}", config.decompose_cap)));
    }
    if a.len() as u64 != n_max {
        return Err(Error::Invalid(format!("sequence has {} terms, expected N = {n_max}", a.len())));
    }
    if y.is_nan() || y < 1.0 {
        return Err(Error::Invalid(format!("Y must be >= 1, got {y}")));
    }
    let mask = kfree_mask(f, k, n_max, config)?;
    if let Some(&n) = mask.zero_hits().first() {
        return Err(Error::Invalid(format!("f({n}) = 0: every d^k divides it, the divisor sum is undefined")));
    }
    let total: i128 = mask.bits().iter_ones().map(|i| a[i] as i128).sum();
    let fmax = max_abs_value(f, n_max);
    let y_floor = y.floor() as u64;
    if num_traits::pow(BigUint::from(y_floor), k as usize) > fmax {
        return Err(Error::Invalid(format!("Y = {y} exceeds max|f(n)|^(1/{k})")));
    }
    let fmax_u = fmax
        .to_u128()
        .filter(|&m| m < 1 << 126)
        .ok_or_else(|| Error::Capacity("max |f(n)| exceeds 126 bits".into()))?;
    let d_max = fmax_u.nth_root(k);
    const D_LIMIT: u128 = 10_000_000;
    if d_max > D_LIMIT {
        return Err(Error::Capacity(format!("moduli up to {d_max} exceed the enumeration limit {D_LIMIT}")));
    }
    let d_max = d_max as u64;
    if d_max == 0 {
        return Ok(Decomposition { s1: 0, s2: 0, total });
    }
    let tables = crate::arith::build_tables(1, d_max + 1, &crate::arith::SieveConfig::default())?;
    let lr = LocalRoots::with_options(f, RootOptions::fast());
    // roots mod p^k for every prime up to d_max, indexed by p
    let primes = primes_up_to(d_max)?;
    let mut local: Vec<Option<(u128, Vec<u128>)>> = vec![None; d_max as usize + 1];
    for &p in &primes {
        let data = lr.lift_roots(p, k)?;
        if data.elided {
            return Err(Error::Capacity(format!("root list mod {p}^{k} was elided")));
        }
        let pk = (p as u128).pow(k);
        let roots = data.roots.iter().map(|r| r.to_u128().unwrap()).collect();
        local[p as usize] = Some((pk, roots));
    }
    let spf = smallest_prime_factors(d_max);
    let mut s1: i128 = 0;
    let mut s2: i128 = 0;
    for d in 1..=d_max {
        let mu = tables.mobius(d)?;
        if mu == 0 {
            continue;
        }
        // roots of f mod d^k by CRT over the prime factors of d
        let mut modulus: u128 = 1;
        let mut roots: Vec<u128> = vec![0];
        let mut rest = d;
        while rest > 1 {
            let p = spf[rest as usize] as u64;
            rest /= p;
            let (pk, rp) = local[p as usize].as_ref().expect("prime table");
            if rp.is_empty() {
                roots.clear();
                break;
            }
            let inv = inv_mod_u128(modulus % pk, *pk).expect("coprime moduli");
            let mut next = Vec::with_capacity(roots.len() * rp.len());
            for &x in &roots {
                for &r in rp {
                    let diff = (r + pk - x % pk) % pk;
                    let t = mul_mod_u128(diff, inv, *pk);
                    next.push(x + modulus * t);
                }
            }
            modulus *= pk;
            roots = next;
        }
        if roots.is_empty() {
            continue;
        }
        let mut sum: i128 = 0;
        for r in roots {
            let mut n = if r == 0 { modulus } else { r };
            while n <= n_max as u128 {
                sum += a[(n - 1) as usize] as i128;
                n += modulus;
            }
        }
        if d <= y_floor {
            s1 += mu as i128 * sum;
        } else {
            s2 += mu as i128 * sum;
        }
    }
    Ok(Decomposition { s1, s2, total })
}

fn smallest_prime_factors(m: u64) -> Vec<u32> {
    let m = m as usize;
    let mut spf = vec![0u32; m + 1];
    for i in 2..=m {
        if spf[i] == 0 {
            let mut j = i;
            while j <= m {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

fn inv_mod_u128(a: u128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (BigInt::from(m), BigInt::from(a));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = core::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = core::mem::replace(&mut t1, t2);
    }
    if !r0.is_one() {
        return None;
    }
    let mb = BigInt::from(m);
    num_integer::Integer::mod_floor(&t0, &mb).to_u128()
}

/// E_f(Y, N) = #{(d, n) : d squarefree, d > Y, d^k | f(n), n <= N}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCount {
    pub y: f64,
    pub n: u64,
    pub value: u64,
}

/// Factors each |f(n)| completely and counts, for every n, the squarefree
/// d > Y built from primes whose k-th power divides f(n).
///
/// Prime factors up to 10^6 are found by sieving at the roots of f modulo
/// p (the sieve equivalent of trial division); larger cofactors that could
/// hide a k-th power are split by Pollard rho.
pub fn e_f_tail(f: &IntPolynomial, k: u32, y: f64, n_max: u64, config: &KfreeConfig) -> Result<TailCount> {
    const TRIAL_BOUND: u64 = 1_000_000;
    if n_max > config.tail_cap {
        return Err(Error::Capacity(format!("N = {n_max} exceeds the diagnostic cap {}", config.tail_cap)));
    }
    if k < 2 {
        return Err(Error::Invalid(format!("k must be >= 2, got {k}")));
    }
    if y.is_nan() || y < 1.0 {
        return Err(Error::Invalid(format!("Y must be >= 1, got {y}")));
    }
    if n_max == 0 {
        return Ok(TailCount { y, n: 0, value: 0 });
    }
    let fe = f.fast_eval(n_max).ok_or_else(|| Error::Capacity("values of f exceed 126 bits".into()))?;
    let mut vals: Vec<u128> = (1..=n_max).map(|n| fe.eval(n).unsigned_abs()).collect();
    if let Some(i) = vals.iter().position(|&v| v == 0) {
        return Err(Error::Invalid(format!("f({}) = 0: every d^k divides it, the tail is infinite", i + 1)));
    }
    let vmax = vals.iter().copied().max().unwrap_or(1);
    let bound = TRIAL_BOUND.min(vmax.sqrt() as u64 + 1);
    let lr = LocalRoots::with_options(f, RootOptions::fast());
    let mut heavy: Vec<Vec<u128>> = vec![Vec::new(); n_max as usize];
    for p in primes_up_to(bound)? {
        for r in lr.roots_mod_p(p)? {
            let mut n = if r == 0 { p } else { r };
            while n <= n_max {
                let i = (n - 1) as usize;
                let mut e = 0;
                while vals[i] % p as u128 == 0 {
                    vals[i] /= p as u128;
                    e += 1;
                }
                if e >= k {
                    heavy[i].push(p as u128);
                }
                n += p;
            }
        }
    }
    // a cofactor below (bound + 1)^k cannot hold a k-th power of a prime > bound
    let threshold = (bound as u128 + 1).checked_pow(k).unwrap_or(u128::MAX);
    let fz = Factorizer::new(2);
    let mut failed = Vec::new();
    for (i, &c) in vals.iter().enumerate() {
        if c >= threshold {
            match fz.factor(c) {
                Some(fac) => heavy[i].extend(fac.into_iter().filter(|&(_, e)| e >= k).map(|(p, _)| p)),
                None => failed.push(i as u64 + 1),
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::Factorization(failed));
    }
    let y_floor = y.floor() as u128;
    let mut value: u64 = 0;
    for s in &heavy {
        let m = s.len();
        for mask in 1u32..(1 << m) {
            let mut d: u128 = 1;
            for (j, &p) in s.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    d *= p;
                }
            }
            if d > y_floor {
                value += 1;
            }
        }
    }
    Ok(TailCount { y, n: n_max, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{build_tables, SieveConfig};

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c).unwrap()
    }

    fn clear_positions(m: &KfreeMask) -> Vec<u64> {
        (1..=m.n_max()).filter(|&n| !m.is_kfree(n).unwrap()).collect()
    }

    #[test]
    fn x2_plus_1_small() {
        let m = kfree_mask(&p(&[1, 0, 1]), 2, 20, &KfreeConfig::default()).unwrap();
        assert_eq!(m.count_upto(20), 18);
        assert_eq!(clear_positions(&m), [7, 18]);
    }

    #[test]
    fn identity_squarefree() {
        let m = kfree_mask(&p(&[0, 1]), 2, 10, &KfreeConfig::default()).unwrap();
        assert_eq!(clear_positions(&m), [4, 8, 9]);
    }

    #[test]
    fn units_and_zeros() {
        // f = x − 1: f(1) = 0, f(2) = 1
        let m = kfree_mask(&p(&[-1, 1]), 2, 10, &KfreeConfig::default()).unwrap();
        assert_eq!(m.zero_hits(), [1]);
        assert!(!m.is_kfree(1).unwrap());
        assert!(m.is_kfree(2).unwrap());
        // f = 1 − x: f(2) = −1
        let m = kfree_mask(&p(&[1, -1]), 2, 5, &KfreeConfig::default()).unwrap();
        assert!(m.is_kfree(2).unwrap());
        assert!(m.is_kfree(4).unwrap());
        assert!(!m.is_kfree(5).unwrap());
    }

    #[test]
    fn carlitz_small() {
        let rows = {
            let m = kfree_mask(&p(&[0, 1, 1]), 2, 10, &KfreeConfig::default()).unwrap();
            count_rows(m.bits(), &[10], 1.0).unwrap()
        };
        assert_eq!(rows[0].count, 5);
        let empty = kfree_mask(&p(&[0, 1, 1]), 2, 0, &KfreeConfig::default()).unwrap();
        assert_eq!(empty.count_upto(0), 0);
    }

    #[test]
    fn hypothesis_errors() {
        let cfg = KfreeConfig::default();
        assert!(matches!(kfree_mask(&p(&[4, 4]), 2, 10, &cfg), Err(Error::FixedPowerDivisor { prime: 2, k: 2 })));
        assert!(matches!(kfree_mask(&p(&[1, 2, 1]), 2, 10, &cfg), Err(Error::RepeatedFactor)));
        assert!(matches!(kfree_mask(&p(&[1, 0, 1]), 1, 10, &cfg), Err(Error::Invalid(_))));
        let tight = KfreeConfig { max_sieve_prime: 100, ..cfg };
        assert!(matches!(kfree_mask(&p(&[1, 0, 1]), 2, 10_000, &tight), Err(Error::Capacity(_))));
    }

    #[test]
    fn twin_squarefree() {
        let t = build_tables(1, 200, &SieveConfig::default()).unwrap();
        let m = twin_squarefree_mask(&t, 100).unwrap();
        assert!(m.get(0));
        assert!(!m.get(2));
        assert_eq!(m.count_ones(), 33);
    }

    #[test]
    fn product_matches_direct() {
        let cfg = KfreeConfig::default();
        let a = p(&[1, 0, 1]);
        let b = p(&[2, 0, 1]);
        let direct = kfree_mask(&a.mul(&b), 2, 3000, &cfg).unwrap();
        let prod = product_kfree_mask(&[a, b], 2, 3000, &cfg).unwrap();
        assert_eq!(direct.bits(), prod.bits());
        // x(x+2) shares the prime 2 between its factors
        let a = p(&[0, 1]);
        let b = p(&[2, 1]);
        let plan = ProductPlan::new(&[a.clone(), b.clone()], 2, 500, &cfg).unwrap();
        assert_eq!(plan.shared_primes(), [2]);
        let direct = kfree_mask(&a.mul(&b), 2, 500, &cfg).unwrap();
        assert_eq!(direct.bits(), plan.run(&cfg).bits());
    }

    #[test]
    fn decomposition_examples() {
        let cfg = KfreeConfig::default();
        let f = p(&[0, 1]);
        let ones = vec![1i64; 100];
        let d = decompose_sum(&f, 2, 5.0, 100, &ones, &cfg).unwrap();
        assert_eq!(d.s2, 1);
        assert_eq!(d.s1 + d.s2, d.total);
        assert_eq!(d.total, 61);
        let d = decompose_sum(&f, 2, 10.0, 100, &ones, &cfg).unwrap();
        assert_eq!((d.s1, d.s2), (61, 0));
        assert!(decompose_sum(&f, 2, 11.0, 100, &ones, &cfg).is_err());
    }

    #[test]
    fn tail_examples() {
        let cfg = KfreeConfig::default();
        let t = e_f_tail(&p(&[0, 1]), 2, 5.0, 100, &cfg).unwrap();
        assert_eq!(t.value, 5);
        let t = e_f_tail(&p(&[0, 1]), 2, 10.0, 100, &cfg).unwrap();
        assert_eq!(t.value, 0);
    }
}
