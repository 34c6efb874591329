//! Roots of f modulo p and p^k, and the root counts ρ_f(q).
//!
//! Good primes (p ∤ Res(f, f′)·lc(f)) have only simple roots mod p, each of
//! which lifts uniquely. Bad primes branch: a root ν mod p^j extends to
//! every ν + t·p^j with p^(j+1) | f(ν + t·p^j). Because j ≥ 1, that
//! condition only involves f(ν) and f′(ν), so the children are read off
//! without scanning t. Every reported root is re-checked by exact
//! evaluation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::factor::{inv_mod_u64, is_prime_u64, Factorizer};
use crate::poly::IntPolynomial;
use crate::zp;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOptions {
    /// Primes below this are handled by scanning every residue.
    pub scan_below: u64,
    /// Root lists longer than this are elided; only the count is kept.
    pub rho_cap: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { scan_below: 1_000_000, rho_cap: 1_000_000 }
    }
}

impl RootOptions {
    /// Residue scanning only for tiny primes; splitting above.
    pub fn fast() -> Self {
        RootOptions { scan_below: 64, ..Default::default() }
    }
}

/// Roots of f modulo p^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRootData {
    pub p: u64,
    pub k: u32,
    /// Sorted residues in `[0, p^k)`; empty when `elided`.
    pub roots: Vec<BigUint>,
    pub rho: u128,
    pub elided: bool,
    pub is_bad: bool,
}

/// Per-polynomial context caching Res(f, f′)·lc(f) and f′.
#[derive(Debug, Clone)]
pub struct LocalRoots<'a> {
    f: &'a IntPolynomial,
    deriv: Vec<BigInt>,
    bad: BigInt,
    opts: RootOptions,
}

impl<'a> LocalRoots<'a> {
    pub fn new(f: &'a IntPolynomial) -> Self {
        Self::with_options(f, RootOptions::default())
    }

    pub fn with_options(f: &'a IntPolynomial, opts: RootOptions) -> Self {
        LocalRoots { f, deriv: f.derivative(), bad: f.bad_prime_product(), opts }
    }

    pub fn poly(&self) -> &IntPolynomial {
        self.f
    }

    /// Res(f, f′)·lc(f).
    pub fn bad_prime_product(&self) -> &BigInt {
        &self.bad
    }

    /// True when p divides Res(f, f′)·lc(f) (always, for non-squarefree f).
    pub fn is_bad(&self, p: u64) -> bool {
        (&self.bad % BigInt::from(p)).is_zero()
    }

    fn check_prime(p: u64) -> Result<()> {
        if is_prime_u64(p) && p < 1 << 62 {
            Ok(())
        } else {
            Err(Error::NotPrime(p))
        }
    }

    /// All ν in `[0, p)` with p | f(ν), ascending.
    pub fn roots_mod_p(&self, p: u64) -> Result<Vec<u64>> {
        Self::check_prime(p)?;
        let fbar = zp::reduce(self.f.coeffs(), p);
        let mut roots = if fbar.is_empty() {
            if p as usize > self.opts.rho_cap {
                return Err(Error::Capacity(format!("f vanishes identically mod {p}; {p} roots exceed the cap")));
            }
            (0..p).collect()
        } else if p < self.opts.scan_below.max(3) {
            (0..p).filter(|&v| zp::eval(&fbar, v, p) == 0).collect()
        } else {
            let g = zp::gcd(&zp::sub(&zp::x_pow_p(&fbar, p), &[0, 1], p), &fbar, p);
            let mut out = Vec::with_capacity(g.len());
            let mut rng = SplitMix(p ^ 0x9e37_79b9_7f4a_7c15);
            split_linear(&g, p, &mut rng, &mut out);
            out
        };
        roots.sort_unstable();
        for &v in &roots {
            if !(self.f.eval(&BigInt::from(v)) % BigInt::from(p)).is_zero() {
                return Err(Error::Certification(format!("f({v}) is not divisible by {p}")));
            }
        }
        Ok(roots)
    }

    /// deg gcd(x^p − x, f mod p); residue scan when p | lc(f).
    pub fn count_roots_mod_p(&self, p: u64) -> Result<usize> {
        Self::check_prime(p)?;
        if (self.f.leading() % BigInt::from(p)).is_zero() {
            let fbar = zp::reduce(self.f.coeffs(), p);
            if fbar.is_empty() {
                return Ok(p as usize);
            }
            return Ok((0..p).filter(|&v| zp::eval(&fbar, v, p) == 0).count());
        }
        let fbar = zp::reduce(self.f.coeffs(), p);
        let g = zp::gcd(&zp::sub(&zp::x_pow_p(&fbar, p), &[0, 1], p), &fbar, p);
        Ok(zp::degree(&g).unwrap_or(0))
    }

    /// Roots of f modulo p^k.
    pub fn lift_roots(&self, p: u64, k: u32) -> Result<LocalRootData> {
        self.lift(p, k, true)
    }

    /// ρ_f(p^k) without materializing the roots.
    pub fn rho(&self, p: u64, k: u32) -> Result<u128> {
        Ok(self.lift(p, k, false)?.rho)
    }

    fn lift(&self, p: u64, k: u32, keep: bool) -> Result<LocalRootData> {
        if k == 0 {
            return Err(Error::Invalid("exponent k must be >= 1".into()));
        }
        let base = self.roots_mod_p(p)?;
        let is_bad = self.is_bad(p);
        let pb = BigUint::from(p);
        let modulus = num_traits::pow(pb.clone(), k as usize);
        let mut data = LocalRootData { p, k, roots: Vec::new(), rho: 0, elided: !keep, is_bad };
        if !is_bad {
            data.rho = base.len() as u128;
            if keep {
                for v in base {
                    data.roots.push(self.newton_lift(v, p, k));
                }
            }
        } else {
            let mut stack: Vec<(BigUint, u32)> = base.into_iter().rev().map(|v| (BigUint::from(v), 1)).collect();
            let mut pj_cache: Vec<BigUint> = vec![BigUint::one(), pb.clone()];
            while let Some((v, j)) = stack.pop() {
                while pj_cache.len() <= k as usize {
                    let next = pj_cache.last().unwrap() * &pb;
                    pj_cache.push(next);
                }
                if j == k {
                    data.rho += 1;
                    if !data.elided {
                        data.roots.push(v);
                    }
                } else {
                    let taylor = taylor_coeffs(self.f.coeffs(), &BigInt::from(v.clone()));
                    let pj = &pj_cache[j as usize];
                    if whole_class(&taylor, p, j, k) {
                        let span = (k - j) as usize;
                        let count = num_traits::pow(p as u128, span);
                        data.rho = data
                            .rho
                            .checked_add(count)
                            .ok_or_else(|| Error::Overflow(format!("rho({p}^{k}) exceeds 128 bits")))?;
                        if !data.elided {
                            let total = data.roots.len() as u128 + count;
                            if total > self.opts.rho_cap as u128 {
                                data.elided = true;
                                data.roots.clear();
                            } else {
                                let step = pj;
                                let mut r = v.clone();
                                for _ in 0..count {
                                    data.roots.push(r.clone());
                                    r += step;
                                }
                            }
                        }
                        continue;
                    }
                    let c0 = taylor[0].clone();
                    let c1 = taylor.get(1).cloned().unwrap_or_default();
                    let pjb = BigInt::from(pj.clone());
                    let q = (c0 / &pjb).mod_floor(&BigInt::from(p)).to_u64().unwrap();
                    let d1 = c1.mod_floor(&BigInt::from(p)).to_u64().unwrap();
                    if d1 != 0 {
                        let t = (p - q % p) % p;
                        let t = crate::factor::mul_mod_u64(t, inv_mod_u64(d1, p).unwrap(), p);
                        stack.push((v + pj * t, j + 1));
                    } else if q == 0 {
                        for t in (0..p).rev() {
                            stack.push((&v + pj * t, j + 1));
                        }
                    }
                }
                if !data.elided && data.roots.len() > self.opts.rho_cap {
                    data.elided = true;
                    data.roots.clear();
                }
            }
        }
        if !data.elided {
            data.roots.sort_unstable();
            let m = BigInt::from(modulus);
            for r in &data.roots {
                if !(self.f.eval(&BigInt::from(r.clone())) % &m).is_zero() {
                    return Err(Error::Certification(format!("f({r}) is not divisible by {p}^{k}")));
                }
            }
        }
        Ok(data)
    }

    /// Unique lift of a simple root v mod p to p^k.
    fn newton_lift(&self, v: u64, p: u64, k: u32) -> BigUint {
        let pb = BigInt::from(p);
        let fprime_v = eval_coeffs(&self.deriv, &BigInt::from(v)).mod_floor(&pb);
        let inv = BigInt::from(inv_mod_u64(fprime_v.to_u64().unwrap(), p).expect("simple root"));
        let mut r = BigInt::from(v);
        let mut pj = pb.clone();
        for _ in 1..k {
            let next = &pj * &pb;
            // r + t p^j with t ≡ −(f(r)/p^j)·f′(r)^(−1) mod p
            let q = self.f.eval(&r) / &pj;
            let t = (-q * &inv).mod_floor(&pb);
            r = (r + t * &pj).mod_floor(&next);
            pj = next;
        }
        r.to_biguint().unwrap()
    }

    /// ∏_{p | d} ρ_f(p^k) for squarefree d.
    pub fn rho_composite(&self, d: u64, k: u32) -> Result<u128> {
        let mut acc: u128 = 1;
        for p in squarefree_primes(d)? {
            let r = self.rho(p, k)?;
            if r == 0 {
                return Ok(0);
            }
            acc = acc.checked_mul(r).ok_or_else(|| Error::Overflow(format!("rho({d}^{k}) exceeds 128 bits")))?;
        }
        Ok(acc)
    }
}

/// Prime divisors of a squarefree `d >= 1`; error if a square divides d.
pub fn squarefree_primes(d: u64) -> Result<Vec<u64>> {
    if d == 0 {
        return Err(Error::Invalid("d must be positive".into()));
    }
    let fz = Factorizer::new(1000);
    let fac = fz.factor(d as u128).ok_or_else(|| Error::Certification(format!("could not factor {d}")))?;
    if fac.iter().any(|&(_, e)| e > 1) {
        return Err(Error::Invalid(format!("d = {d} is not squarefree")));
    }
    Ok(fac.into_iter().map(|(p, _)| p as u64).collect())
}

pub fn roots_mod_p(f: &IntPolynomial, p: u64) -> Result<Vec<u64>> {
    LocalRoots::new(f).roots_mod_p(p)
}

pub fn count_roots_mod_p(f: &IntPolynomial, p: u64) -> Result<usize> {
    LocalRoots::new(f).count_roots_mod_p(p)
}

pub fn lift_roots(f: &IntPolynomial, p: u64, k: u32) -> Result<LocalRootData> {
    LocalRoots::new(f).lift_roots(p, k)
}

pub fn rho_composite(f: &IntPolynomial, d: u64, k: u32) -> Result<u128> {
    LocalRoots::with_options(f, RootOptions::fast()).rho_composite(d, k)
}

/// Chinese-remainder combination of root sets modulo pairwise coprime
/// moduli. Returns the sorted roots modulo the product.
pub fn crt_combine(parts: &[(BigUint, Vec<BigUint>)]) -> Vec<BigUint> {
    let mut modulus = BigUint::one();
    let mut acc = vec![BigUint::zero()];
    for (m, roots) in parts {
        let mi = BigInt::from(modulus.clone());
        let mm = BigInt::from(m.clone());
        // inverse of the running modulus mod m
        let inv = mod_inverse(&mi, &mm).expect("coprime moduli");
        let mut next = Vec::with_capacity(acc.len() * roots.len());
        for a in &acc {
            let a = BigInt::from(a.clone());
            for r in roots {
                let t = ((BigInt::from(r.clone()) - &a) * &inv).mod_floor(&mm);
                next.push((&a + t * &mi).to_biguint().unwrap());
            }
        }
        modulus *= m;
        acc = next;
    }
    acc.sort_unstable();
    acc
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else if m.is_one() {
        Some(BigInt::zero())
    } else {
        None
    }
}

fn eval_coeffs(c: &[BigInt], x: &BigInt) -> BigInt {
    c.iter().rev().fold(BigInt::zero(), |acc, a| acc * x + a)
}

/// Coefficients of f(v + y) as a polynomial in y.
fn taylor_coeffs(f: &[BigInt], v: &BigInt) -> Vec<BigInt> {
    let mut c: Vec<BigInt> = f.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = &c[j + 1] * v;
            c[j] += t;
        }
    }
    c
}

/// True when f(v + p^j·y) ≡ 0 mod p^k for every integer y.
fn whole_class(taylor: &[BigInt], p: u64, j: u32, k: u32) -> bool {
    let pk = BigInt::from(p).pow(k);
    taylor.iter().enumerate().all(|(i, c)| {
        let shift = i as u64 * j as u64;
        shift >= k as u64 || (c * BigInt::from(p).pow(shift as u32)) % &pk == BigInt::zero()
    })
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// Equal-degree splitting of a monic product of distinct linear factors.
fn split_linear(g: &[u64], p: u64, rng: &mut SplitMix, out: &mut Vec<u64>) {
    match zp::degree(g) {
        None | Some(0) => {}
        Some(1) => out.push((p - g[0] % p) % p),
        Some(d) => loop {
            let a = rng.next() % p;
            let h = zp::powmod(&[a, 1], (p - 1) / 2, g, p);
            let h = zp::sub(&h, &[1], p);
            let s = zp::gcd(&h, g, p);
            let ds = zp::degree(&s).unwrap_or(0);
            if ds > 0 && ds < d {
                let (q, _) = zp::divrem(g, &s, p);
                split_linear(&s, p, rng, out);
                split_linear(&zp::monic(&q, p), p, rng, out);
                return;
            }
        },
    }
}
