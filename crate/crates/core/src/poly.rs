//! Exact integer polynomials.
//!
//! Coefficients are ascending by power everywhere (constant term first),
//! so `"1,0,1"` is x² + 1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::primes_up_to;
use crate::factor::Factorizer;
use crate::zp;
use crate::{Error, Result};

/// A non-constant polynomial with integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial[{self}]")
    }
}

/// Comma-separated ascending coefficients.
impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| BigInt::from_str(t.trim()).map_err(|_| Error::Invalid(format!("bad coefficient {t:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        IntPolynomial::new(coeffs)
    }
}

impl IntPolynomial {
    /// Rejects the zero polynomial, constants, and a zero leading entry.
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::Invalid("empty coefficient list".into())),
            Some(lc) if lc.is_zero() => Err(Error::Invalid("leading (last) coefficient must be nonzero".into())),
            Some(_) if coeffs.len() < 2 => Err(Error::Invalid("polynomial must have degree >= 1".into())),
            Some(_) => Ok(IntPolynomial { coeffs }),
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        &self.coeffs[self.degree()]
    }

    /// Positive gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        content_of(&self.coeffs)
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * n + c)
    }

    pub fn eval_i64(&self, n: i64) -> BigInt {
        self.eval(&BigInt::from(n))
    }

    /// Σ |a_i| m^i, an upper bound for |f(n)| on `0 <= n <= m`.
    pub fn value_bound(&self, m: u64) -> BigUint {
        let m = BigUint::from(m);
        self.coeffs.iter().rev().fold(BigUint::zero(), |acc, c| acc * &m + c.magnitude())
    }

    /// An `i128` Horner evaluator, returned only when the value bound on
    /// `[0, m]` certifies that no intermediate result overflows.
    pub fn fast_eval(&self, m: u64) -> Option<FastEval> {
        if self.value_bound(m).bits() > 126 {
            return None;
        }
        let coeffs = self.coeffs.iter().map(|c| c.to_i128()).collect::<Option<_>>()?;
        Some(FastEval { coeffs, limit: m })
    }

    pub fn derivative(&self) -> Vec<BigInt> {
        derivative(&self.coeffs)
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial { coeffs: out }
    }

    /// G_f = gcd(f(0), f(1), …, f(d)), equal to gcd of all values.
    pub fn fixed_divisor(&self) -> BigInt {
        let mut g = BigInt::zero();
        for n in 0..=self.degree() as i64 {
            g = g.gcd(&self.eval_i64(n));
        }
        g
    }

    /// A prime p with p^k | G_f, if any (the smallest one).
    pub fn fixed_kth_power_prime(&self, k: u32) -> Result<Option<u128>> {
        if k < 2 {
            return Err(Error::Invalid(format!("k must be >= 2, got {k}")));
        }
        let g = self.fixed_divisor();
        let factors = factor_biguint(g.magnitude())?;
        Ok(factors.into_iter().find(|&(_, e)| e >= k).map(|(p, _)| p))
    }

    pub fn has_fixed_kth_power(&self, k: u32) -> Result<bool> {
        Ok(self.fixed_kth_power_prime(k)?.is_some())
    }

    /// Res(f, f′) by the subresultant remainder sequence.
    pub fn resultant_f_fprime(&self) -> BigInt {
        resultant(&self.coeffs, &self.derivative())
    }

    /// Res(f, f′)·lc(f); primes dividing it are the bad primes.
    pub fn bad_prime_product(&self) -> BigInt {
        self.resultant_f_fprime() * self.leading()
    }

    pub fn is_squarefree_poly(&self) -> bool {
        !self.resultant_f_fprime().is_zero()
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> IntPolynomial {
        let c = self.content();
        let c = if self.leading().is_negative() { -c } else { c };
        IntPolynomial { coeffs: self.coeffs.iter().map(|a| a / &c).collect() }
    }

    /// Tiered irreducibility certificate over the rationals, applied to the
    /// primitive part.
    pub fn irreducibility_check(&self) -> Irreducibility {
        let f = self.primitive_part();
        let d = f.degree();
        if d == 1 {
            return Irreducibility::Proved;
        }
        let root = f.has_rational_root();
        if d <= 3 {
            return match root {
                Some(true) => Irreducibility::Refuted,
                Some(false) => Irreducibility::Proved,
                None => Irreducibility::Unverified,
            };
        }
        if root == Some(true) {
            return Irreducibility::Refuted;
        }
        if f.irreducible_mod_some_prime() {
            Irreducibility::Proved
        } else {
            Irreducibility::Unverified
        }
    }

    /// `Some(true)` if a rational root exists, `None` when the candidate set
    /// is too large to scan.
    fn has_rational_root(&self) -> Option<bool> {
        const MAX_CANDIDATES: usize = 1 << 20;
        if self.coeffs[0].is_zero() {
            return Some(true);
        }
        let nums = divisors(self.coeffs[0].magnitude())?;
        let dens = divisors(self.leading().magnitude())?;
        if nums.len().saturating_mul(dens.len()) > MAX_CANDIDATES {
            return None;
        }
        let d = self.degree();
        for u in &nums {
            for v in &dens {
                if u.gcd(v) != BigUint::one() {
                    continue;
                }
                for sign in [1i32, -1] {
                    let u = BigInt::from_biguint(if sign > 0 { Sign::Plus } else { Sign::Minus }, u.clone());
                    let v = BigInt::from(v.clone());
                    // v^d f(u/v) = Σ a_i u^i v^(d-i)
                    let mut acc = BigInt::zero();
                    let mut upow = BigInt::one();
                    for (i, a) in self.coeffs.iter().enumerate() {
                        acc += a * &upow * num_traits::pow(v.clone(), d - i);
                        upow *= &u;
                    }
                    if acc.is_zero() {
                        return Some(true);
                    }
                }
            }
        }
        Some(false)
    }

    /// Tests f mod p for irreducibility over a fixed list of good primes.
    fn irreducible_mod_some_prime(&self) -> bool {
        let bad = self.bad_prime_product();
        if bad.is_zero() {
            return false;
        }
        let d = self.degree();
        let primes = primes_up_to(2000).expect("small bound");
        for &p in primes.iter().take(200) {
            if (&bad % BigInt::from(p)).is_zero() {
                continue;
            }
            let f = zp::reduce(&self.coeffs, p);
            let mut frob: zp::ZPoly = vec![0, 1];
            let mut irreducible = true;
            for _ in 1..=d / 2 {
                frob = zp::powmod(&frob, p, &f, p);
                let g = zp::gcd(&zp::sub(&frob, &[0, 1], p), &f, p);
                if zp::degree(&g).unwrap_or(0) > 0 {
                    irreducible = false;
                    break;
                }
            }
            if irreducible {
                return true;
            }
        }
        false
    }

    pub fn profile(&self) -> Result<PolyProfile> {
        let res = self.resultant_f_fprime();
        Ok(PolyProfile {
            is_squarefree_poly: !res.is_zero(),
            irreducibility: self.irreducibility_check(),
            fixed_divisor: self.fixed_divisor(),
            bad_prime_product: res * self.leading(),
        })
    }
}

/// Certified `i128` evaluation on `[0, limit]`.
#[derive(Debug, Clone)]
pub struct FastEval {
    coeffs: Vec<i128>,
    limit: u64,
}

impl FastEval {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    #[inline]
    pub fn eval(&self, n: u64) -> i128 {
        debug_assert!(n <= self.limit);
        let x = n as i128;
        self.coeffs.iter().rev().fold(0i128, |acc, &c| acc * x + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Irreducibility {
    Proved,
    Refuted,
    Unverified,
}

impl Irreducibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Irreducibility::Proved => "proved",
            Irreducibility::Refuted => "refuted",
            Irreducibility::Unverified => "unverified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyProfile {
    pub is_squarefree_poly: bool,
    pub irreducibility: Irreducibility,
    pub fixed_divisor: BigInt,
    /// Res(f, f′)·lc(f).
    pub bad_prime_product: BigInt,
}

pub(crate) fn content_of(coeffs: &[BigInt]) -> BigInt {
    coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn trim(a: &mut Vec<BigInt>) {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
}

pub(crate) fn derivative(a: &[BigInt]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = a.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    trim(&mut out);
    out
}

/// lc(b)^(deg a − deg b + 1)·a mod b.
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r: Vec<BigInt> = a.to_vec();
    trim(&mut r);
    let mut e = (a.len() - b.len() + 1) as u32;
    while !r.is_empty() && r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= &lr * bj;
        }
        trim(&mut r);
        e -= 1;
    }
    if e > 0 {
        let s = num_traits::pow(lb.clone(), e as usize);
        for c in r.iter_mut() {
            *c *= &s;
        }
    }
    r
}

/// Resultant of two integer polynomials (ascending coefficients) by the
/// subresultant pseudo-remainder sequence. Zero if either input is zero.
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut a: Vec<BigInt> = a.to_vec();
    let mut b: Vec<BigInt> = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    if a.is_empty() || b.is_empty() {
        return BigInt::zero();
    }
    let mut s = BigInt::one();
    if b.len() > a.len() {
        if (a.len() - 1) % 2 == 1 && (b.len() - 1) % 2 == 1 {
            s = -s;
        }
        core::mem::swap(&mut a, &mut b);
    }
    if b.len() == 1 {
        // Res(a, c) = c^deg a
        return s * num_traits::pow(b[0].clone(), a.len() - 1);
    }
    let ca = content_of(&a);
    let cb = content_of(&b);
    for c in a.iter_mut() {
        *c /= &ca;
    }
    for c in b.iter_mut() {
        *c /= &cb;
    }
    let t = num_traits::pow(ca, b.len() - 1) * num_traits::pow(cb, a.len() - 1);
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let (da, db) = (a.len() - 1, b.len() - 1);
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = pseudo_rem(&a, &b);
        if r.is_empty() {
            return BigInt::zero();
        }
        a = b;
        let div = &g * num_traits::pow(h.clone(), delta);
        b = r.into_iter().map(|c| c / &div).collect();
        g = a[a.len() - 1].clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            _ => num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1),
        };
        if b.len() == 1 {
            break;
        }
    }
    let da = a.len() - 1;
    let lb = b[0].clone();
    let hh = if da == 0 { BigInt::one() } else { num_traits::pow(lb, da) / num_traits::pow(h, da - 1) };
    s * t * hh
}

/// Prime factorization of a positive integer; fails only past `u128`
/// when trial division up to 10^6 leaves a cofactor that could still hide a
/// repeated prime.
pub fn factor_biguint(n: &BigUint) -> Result<Vec<(u128, u32)>> {
    if let Some(v) = n.to_u128() {
        if v == 0 {
            return Err(Error::Invalid("cannot factor zero".into()));
        }
        return Factorizer::new(1000).factor(v).ok_or_else(|| Error::Certification(format!("could not factor {v}")));
    }
    let mut rest = n.clone();
    let mut out = Vec::new();
    for p in primes_up_to(1_000_000)? {
        let pb = BigUint::from(p);
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((p as u128, e));
        }
    }
    if let Some(v) = rest.to_u128() {
        let tail = Factorizer::new(2).factor(v).ok_or_else(|| Error::Certification(format!("could not factor {v}")))?;
        out.extend(tail);
        return Ok(out);
    }
    Err(Error::Capacity(format!("cofactor of {} bits left after trial division", rest.bits())))
}

fn divisors(n: &BigUint) -> Option<Vec<BigUint>> {
    let factors = factor_biguint(n).ok()?;
    let mut out = vec![BigUint::one()];
    for (p, e) in factors {
        let p = BigUint::from(p);
        let len = out.len();
        let mut pk = BigUint::one();
        for _ in 0..e {
            pk *= &p;
            for i in 0..len {
                out.push(&out[i] * &pk);
            }
            if out.len() > 1 << 16 {
                return None;
            }
        }
    }
    Some(out)
}

/// Integer k-th root test.
pub fn is_perfect_power_u128(n: u128, k: u32) -> bool {
    let r = n.nth_root(k);
    r.checked_pow(k) == Some(n)
}

pub fn is_perfect_power_big(n: &BigUint, k: u32) -> bool {
    let r = n.nth_root(k);
    num_traits::pow(r, k as usize) == *n
}

/// Squarefreeness of a positive integer via its factorization.
pub fn is_squarefree_big(n: &BigInt) -> Result<bool> {
    if n.is_zero() {
        return Ok(false);
    }
    Ok(factor_biguint(n.magnitude())?.iter().all(|&(_, e)| e < 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let f: IntPolynomial = "1,0,1".parse().unwrap();
        assert_eq!(f.degree(), 2);
        assert_eq!(f.to_string(), "1,0,1");
        assert!("5".parse::<IntPolynomial>().is_err());
        assert!("1,2,0".parse::<IntPolynomial>().is_err());
        assert!("".parse::<IntPolynomial>().is_err());
        assert!("1,x".parse::<IntPolynomial>().is_err());
    }

    #[test]
    fn evaluation() {
        assert_eq!(p(&[1, 0, 1]).eval_i64(7), BigInt::from(50));
        assert_eq!(p(&[0, 1, 1]).eval_i64(10), BigInt::from(110));
        let big = p(&[2, 0, 0, 1]).eval_i64(1_000_000);
        assert_eq!(big, BigInt::from(1_000_000_000_000_000_002i64));
        let fe = p(&[2, 0, 0, 1]).fast_eval(1_000_000).unwrap();
        assert_eq!(fe.eval(1_000_000), 1_000_000_000_000_000_002);
        assert!(p(&[1, 0, 0, 0, 0, 0, 0, 1]).fast_eval(1 << 20).is_none());
    }

    #[test]
    fn fixed_divisors() {
        assert_eq!(p(&[0, 1, 1]).fixed_divisor(), BigInt::from(2));
        assert_eq!(p(&[1, 0, 1]).fixed_divisor(), BigInt::from(1));
        assert_eq!(p(&[2, 2]).fixed_divisor(), BigInt::from(2));
        assert!(!p(&[0, 1, 1]).has_fixed_kth_power(2).unwrap());
        assert!(p(&[4, 4]).has_fixed_kth_power(2).unwrap());
        assert!(!p(&[1, 0, 1]).has_fixed_kth_power(2).unwrap());
        assert_eq!(p(&[4, 4]).fixed_kth_power_prime(2).unwrap(), Some(2));
    }

    #[test]
    fn resultants() {
        assert_eq!(p(&[1, 0, 1]).resultant_f_fprime(), BigInt::from(4));
        assert_eq!(p(&[0, 0, 1]).resultant_f_fprime(), BigInt::zero());
        // standard sign convention: f′(0)·f′(−1) = −1
        assert_eq!(p(&[0, 1, 1]).resultant_f_fprime(), BigInt::from(-1));
        assert!(!p(&[1, 2, 1]).is_squarefree_poly());
    }

    #[test]
    fn irreducibility() {
        use Irreducibility::*;
        assert_eq!(p(&[1, 0, 1]).irreducibility_check(), Proved);
        assert_eq!(p(&[0, 1, 1]).irreducibility_check(), Refuted);
        assert_eq!(p(&[2, 0, 0, 1]).irreducibility_check(), Proved);
        assert_eq!(p(&[3, 1]).irreducibility_check(), Proved);
        // (2x − 1)(x^2 + 1)
        assert_eq!(p(&[-1, 2, -1, 2]).irreducibility_check(), Refuted);
        // x^4 + 1 is irreducible over Q but reducible mod every prime
        assert_eq!(p(&[1, 0, 0, 0, 1]).irreducibility_check(), Unverified);
        assert_eq!(p(&[2, 0, 0, 0, 1]).irreducibility_check(), Proved);
        // (x^2+1)(x^2+2): no rational root, factors mod every prime
        assert_eq!(p(&[2, 0, 3, 0, 1]).irreducibility_check(), Unverified);
    }

    #[test]
    fn perfect_powers() {
        assert!(is_perfect_power_u128(1 << 60, 3));
        assert!(!is_perfect_power_u128((1 << 60) + 1, 3));
        assert!(is_perfect_power_u128(u64::MAX as u128 * u64::MAX as u128, 2));
        let b = BigUint::from(10u32).pow(60);
        assert!(is_perfect_power_big(&b, 4));
        assert!(!is_perfect_power_big(&(b + 1u32), 4));
    }
}
