//! Euler products ∏_p (1 − ρ(p^k)/p^k) with two-sided bounds on the
//! infinite product.
//!
//! For every prime above the cutoff the factor lies in [1 − d/p^k, 1] and
//! d/p^k ≤ 1/2, so −log(factor) ≤ 2d/p^k and the tail multiplies the
//! partial product by at least exp(−2d/((k−1)P^(k−1))).

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::arith::primes_up_to;
use crate::factor::pow_mod_u64;
use crate::local_roots::{LocalRoots, RootOptions};
use crate::poly::IntPolynomial;
use crate::{Error, Result};

/// Relative allowance for floating-point error in the accumulated logs.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityResult {
    /// Partial product over primes p ≤ P.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub p_bound: u64,
    /// Primes whose factor came from explicit lifting.
    pub bad_primes: Vec<u64>,
    /// Degree used in the tail bound.
    pub degree: u32,
    pub k: u32,
}

impl DensityResult {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct LogSum {
    sum: f64,
    comp: f64,
}

impl LogSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Accumulates factors 1 − x; a factor of exactly 0 zeroes the product.
#[derive(Debug, Clone, Copy, Default)]
struct Product {
    logs: LogSum,
    zero: bool,
}

impl Product {
    fn push_ratio(&mut self, num: f64, den: f64) {
        if num >= den {
            self.zero = true;
        } else if num > 0.0 {
            self.logs.add(libm::log1p(-num / den));
        }
    }

    fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            libm::exp(self.logs.total())
        }
    }
}

/// Tail exponent bound Σ_{m > P} 2d/m^k ≤ 2d/((k−1)P^(k−1)).
fn tail_exponent(d: u32, k: u32, p_bound: u64) -> f64 {
    let p = (p_bound.max(1)) as f64;
    2.0 * d as f64 / ((k - 1) as f64 * libm::pow(p, (k - 1) as f64))
}

fn finish(value: f64, tail: f64, p_bound: u64, bad_primes: Vec<u64>, degree: u32, k: u32) -> DensityResult {
    let lower = (value * libm::exp(-tail) * (1.0 - ROUNDING_SLACK)).max(0.0);
    let upper = (value * (1.0 + ROUNDING_SLACK)).min(1.0);
    DensityResult { value, lower, upper, p_bound, bad_primes, degree, k }
}

/// p^k as f64, exact for p^k < 2^53 and correctly rounded otherwise.
fn pow_f64(p: u64, k: u32) -> f64 {
    match (p as u128).checked_pow(k) {
        Some(v) => v as f64,
        None => libm::pow(p as f64, k as f64),
    }
}

/// ∏_{p ≤ P} (1 − ρ_f(p^k)/p^k) with bounds on the full product.
///
/// Primes dividing Res(f, f')·lc(f) are lifted explicitly and must all lie
/// below P, as must every prime with p^k < 2d.
pub fn density(f: &IntPolynomial, k: u32, p_bound: u64) -> Result<DensityResult> {
    if k < 2 {
        return Err(Error::Invalid(format!("k must be >= 2, got {k}")));
    }
    let d = f.degree() as u32;
    if f.has_fixed_kth_power(k)? {
        return Ok(DensityResult { value: 0.0, lower: 0.0, upper: 0.0, p_bound, bad_primes: Vec::new(), degree: d, k });
    }
    let r = f.bad_prime_product().magnitude().clone();
    if r.is_zero() {
        return Err(Error::RepeatedFactor);
    }
    if pow_f64(p_bound.saturating_add(1), k) < 2.0 * d as f64 {
        return Err(Error::Invalid(format!(
            "P = {p_bound} too small: primes with p^{k} < 2·{d} must be included, raise P"
        )));
    }
    let primes = primes_up_to(p_bound)?;
    let mut rest: BigUint = r;
    let mut bad = Vec::new();
    for &p in &primes {
        if (&rest % p).is_zero() {
            bad.push(p);
            while (&rest % p).is_zero() {
                rest /= p;
            }
        }
    }
    if rest != BigUint::from(1u32) {
        return Err(Error::Invalid(format!(
            "a bad prime exceeds P = {p_bound} (unresolved part of Res(f, f')·lc(f): {rest}), raise P"
        )));
    }
    let lr = LocalRoots::with_options(f, RootOptions::fast());
    let mut prod = Product::default();
    let mut bi = 0;
    for &p in &primes {
        let pk = pow_f64(p, k);
        let rho = if bi < bad.len() && bad[bi] == p {
            bi += 1;
            lr.rho(p, k)?
        } else {
            lr.count_roots_mod_p(p)? as u128
        };
        prod.push_ratio(rho as f64, pk);
        if prod.zero {
            break;
        }
    }
    let value = prod.value();
    Ok(finish(value, tail_exponent(d, k, p_bound), p_bound, bad, d, k))
}

/// ∏_{p ≤ P} (1 − 2/p²).
pub fn twin_constant(p_bound: u64) -> Result<DensityResult> {
    if p_bound < 2 {
        return Err(Error::Invalid(format!("P must be >= 2, got {p_bound}")));
    }
    let mut prod = Product::default();
    for p in primes_up_to(p_bound)? {
        prod.push_ratio(2.0, pow_f64(p, 2));
    }
    Ok(finish(prod.value(), tail_exponent(2, 2, p_bound), p_bound, Vec::new(), 2, 2))
}

/// ∏_{p ≡ 1 (4), p ≤ P} (1 − 2/p²).
pub fn estermann_constant(p_bound: u64) -> Result<DensityResult> {
    if p_bound < 5 {
        return Err(Error::Invalid(format!("P must be >= 5, got {p_bound}")));
    }
    let mut prod = Product::default();
    for p in primes_up_to(p_bound)? {
        if p % 4 == 1 {
            prod.push_ratio(2.0, pow_f64(p, 2));
        }
    }
    // Only m ≡ 1 (4) above P contribute: Σ 4/m² over that progression is
    // at most 4/m0² + 1/m0 for the first such m0 > P.
    let m0 = (p_bound + 1 + (4 - (p_bound + 1) % 4 + 1) % 4) as f64;
    let tail = 4.0 / (m0 * m0) + 1.0 / m0;
    Ok(finish(prod.value(), tail, p_bound, Vec::new(), 2, 2))
}

/// ∏_{2 < p ≤ P} (1 − ((−1|p) + (−2|p) + 2)/p²).
pub fn bb_constant(p_bound: u64) -> Result<DensityResult> {
    if p_bound < 3 {
        return Err(Error::Invalid(format!("P must be >= 3, got {p_bound}")));
    }
    let mut prod = Product::default();
    for p in primes_up_to(p_bound)? {
        if p == 2 {
            continue;
        }
        let num = legendre(-1, p)? + legendre(-2, p)? + 2;
        prod.push_ratio(num as f64, pow_f64(p, 2));
    }
    // each factor is 1 − c/p² with c ≤ 4
    Ok(finish(prod.value(), tail_exponent(4, 2, p_bound), p_bound, Vec::new(), 4, 2))
}

/// Legendre symbol (a|p) for an odd prime p, by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> Result<i32> {
    if p < 3 || !crate::factor::is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    let r = (a as i128).rem_euclid(p as i128) as u64;
    if r == 0 {
        return Ok(0);
    }
    let e = pow_mod_u64(r, (p - 1) / 2, p);
    Ok(if e == 1 { 1 } else { -1 })
}
