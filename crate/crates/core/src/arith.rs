//! Segmented sieves for Ω(n), μ(n), λ(n) and squarefree masks.
//!
//! A segment `[lo, hi)` is sieved by every prime power `p^e < hi` with
//! `p <= sqrt(hi - 1)`: each hit adds one to Ω and multiplies a running
//! product of the small part of n. Whatever the product misses is a single
//! prime above `sqrt(hi - 1)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::{Error, Result};

/// Largest bound accepted by [`primes_up_to`].
pub const MAX_PRIME_BOUND: u64 = 1 << 32;

/// Ascending primes `<= bound`.
pub fn primes_up_to(bound: u64) -> Result<Vec<u64>> {
    if bound > MAX_PRIME_BOUND {
        return Err(Error::Capacity(format!("prime bound {bound} exceeds {MAX_PRIME_BOUND}")));
    }
    if bound < 2 {
        return Ok(Vec::new());
    }
    // odd-only sieve: index i stands for 2i + 1
    let n = bound as usize;
    let half = n.div_ceil(2);
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(approx_prime_count(bound));
    out.push(2);
    out.extend(composite.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| 2 * i as u64 + 1));
    Ok(out)
}

fn approx_prime_count(x: u64) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / libm::log(xf)) as usize
}

pub fn isqrt(n: u64) -> u64 {
    num_integer::Roots::sqrt(&n)
}

/// Segment size and range limits for [`build_tables`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment: usize,
    pub max_hi: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { segment: 1 << 20, max_hi: 1 << 40 }
    }
}

impl SieveConfig {
    pub fn validate(&self, lo: u64, hi: u64) -> Result<()> {
        if lo < 1 || hi <= lo {
            return Err(Error::Invalid(format!("need 1 <= lo < hi, got [{lo}, {hi})")));
        }
        if self.segment == 0 {
            return Err(Error::Invalid("segment size must be positive".into()));
        }
        if self.max_hi > 1 << 62 {
            return Err(Error::Overflow(format!("configured maximum {} exceeds the 62-bit sieve width", self.max_hi)));
        }
        if hi > self.max_hi {
            return Err(Error::Capacity(format!("range end {hi} exceeds configured maximum {}", self.max_hi)));
        }
        Ok(())
    }

    /// `[lo, hi)` cut into consecutive segments.
    pub fn segments(&self, lo: u64, hi: u64) -> impl Iterator<Item = (u64, u64)> {
        let step = self.segment as u64;
        (lo..hi).step_by(self.segment).map(move |s| (s, (s + step).min(hi)))
    }
}

/// Ω, μ and squarefree flags for every n in `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithTables {
    lo: u64,
    hi: u64,
    omega: Vec<u8>,
    mobius: Vec<i8>,
    squarefree: BitSet,
}

/// Primes needed to sieve any segment ending at or below `hi`.
pub fn sieving_primes(hi: u64) -> Result<Vec<u64>> {
    primes_up_to(isqrt(hi.saturating_sub(1)))
}

/// Sieves one segment `[lo, hi)`. `primes` must contain every prime
/// `<= sqrt(hi - 1)`; extra larger primes are ignored.
pub fn sieve_segment(primes: &[u64], lo: u64, hi: u64) -> ArithTables {
    let len = (hi - lo) as usize;
    let mut omega = vec![0u8; len];
    let mut small = vec![1u64; len];
    let mut squarefree = vec![true; len];
    let top = hi - 1;
    for &p in primes {
        if p * p > top {
            break;
        }
        let mut pe = p;
        let mut e = 1;
        loop {
            let start = lo.div_ceil(pe) * pe;
            let mut m = start;
            while m < hi {
                let i = (m - lo) as usize;
                omega[i] += 1;
                small[i] *= p;
                if e >= 2 {
                    squarefree[i] = false;
                }
                m += pe;
            }
            if pe > top / p {
                break;
            }
            pe *= p;
            e += 1;
        }
    }
    let mut mobius = vec![0i8; len];
    for i in 0..len {
        let n = lo + i as u64;
        if small[i] != n {
            omega[i] += 1;
        }
        if squarefree[i] {
            mobius[i] = if omega[i] % 2 == 0 { 1 } else { -1 };
        }
    }
    let squarefree = BitSet::from_fn(len, |i| squarefree[i]);
    ArithTables { lo, hi, omega, mobius, squarefree }
}

/// Sieves `[lo, hi)` segment by segment, single threaded.
pub fn build_tables(lo: u64, hi: u64, config: &SieveConfig) -> Result<ArithTables> {
    config.validate(lo, hi)?;
    let primes = sieving_primes(hi)?;
    let parts: Vec<ArithTables> = config.segments(lo, hi).map(|(a, b)| sieve_segment(&primes, a, b)).collect();
    ArithTables::concat(parts)
}

impl ArithTables {
    /// Joins adjacent segments given in ascending order.
    pub fn concat(parts: Vec<ArithTables>) -> Result<ArithTables> {
        let mut it = parts.into_iter();
        let mut acc = it.next().ok_or_else(|| Error::Invalid("no segments to join".into()))?;
        for part in it {
            if part.lo != acc.hi {
                return Err(Error::Invalid(format!("segments not adjacent: {} then {}", acc.hi, part.lo)));
            }
            acc.omega.extend_from_slice(&part.omega);
            acc.mobius.extend_from_slice(&part.mobius);
            acc.squarefree.extend_from(&part.squarefree);
            acc.hi = part.hi;
        }
        Ok(acc)
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n < self.hi
    }

    #[inline]
    fn index(&self, n: u64) -> Result<usize> {
        if self.contains(n) {
            Ok((n - self.lo) as usize)
        } else {
            Err(Error::OutOfRange { what: "n", value: n, lo: self.lo, hi: self.hi })
        }
    }

    pub fn omega(&self, n: u64) -> Result<u8> {
        Ok(self.omega[self.index(n)?])
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        Ok(self.mobius[self.index(n)?])
    }

    /// λ(n) = (−1)^Ω(n).
    pub fn liouville(&self, n: u64) -> Result<i8> {
        Ok(if self.omega(n)? % 2 == 0 { 1 } else { -1 })
    }

    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        Ok(self.squarefree.get(self.index(n)?))
    }

    /// Ω values, index 0 is `lo`.
    pub fn omega_slice(&self) -> &[u8] {
        &self.omega
    }

    pub fn mobius_slice(&self) -> &[i8] {
        &self.mobius
    }

    pub fn squarefree_bits(&self) -> &BitSet {
        &self.squarefree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega_naive(mut n: u64) -> (u8, i8) {
        let (mut om, mut sf) = (0u8, true);
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            om += e;
            sf &= e < 2;
            p += 1;
        }
        if n > 1 {
            om += 1;
        }
        let mu = if !sf {
            0
        } else if om % 2 == 0 {
            1
        } else {
            -1
        };
        (om, mu)
    }

    #[test]
    fn small_primes() {
        assert!(primes_up_to(0).unwrap().is_empty());
        assert!(primes_up_to(1).unwrap().is_empty());
        assert_eq!(primes_up_to(2).unwrap(), [2]);
        assert_eq!(primes_up_to(10).unwrap(), [2, 3, 5, 7]);
        assert_eq!(primes_up_to(11).unwrap(), [2, 3, 5, 7, 11]);
        assert!(primes_up_to(MAX_PRIME_BOUND + 1).is_err());
    }

    #[test]
    fn named_values() {
        let t = build_tables(1, 100, &SieveConfig::default()).unwrap();
        assert_eq!((t.omega(1).unwrap(), t.mobius(1).unwrap()), (0, 1));
        assert_eq!((t.omega(12).unwrap(), t.mobius(12).unwrap()), (3, 0));
        assert_eq!((t.omega(30).unwrap(), t.mobius(30).unwrap()), (3, -1));
        assert_eq!(t.liouville(1).unwrap(), 1);
        assert_eq!(t.liouville(2).unwrap(), -1);
        assert_eq!(t.liouville(8).unwrap(), -1);
        assert!(t.liouville(100).is_err());
        assert!(t.omega(0).is_err());
    }

    #[test]
    fn offset_segments_match_naive() {
        let cfg = SieveConfig { segment: 97, ..Default::default() };
        let t = build_tables(10_000, 12_345, &cfg).unwrap();
        for n in 10_000..12_345 {
            let (om, mu) = omega_naive(n);
            assert_eq!(t.omega(n).unwrap(), om, "n = {n}");
            assert_eq!(t.mobius(n).unwrap(), mu, "n = {n}");
            assert_eq!(t.is_squarefree(n).unwrap(), mu != 0);
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        let cfg = SieveConfig::default();
        assert!(build_tables(0, 10, &cfg).is_err());
        assert!(build_tables(5, 5, &cfg).is_err());
        let small = SieveConfig { max_hi: 1000, ..cfg };
        assert!(matches!(build_tables(1, 1001, &small), Err(Error::Capacity(_))));
        let wide = SieveConfig { max_hi: u64::MAX, ..cfg };
        assert!(matches!(build_tables(1, 10, &wide), Err(Error::Overflow(_))));
    }
}
