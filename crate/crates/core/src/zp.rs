//! Dense polynomials over the prime field of `p` elements, `p < 2^63`.
//!
//! Coefficients are ascending and trimmed: the zero polynomial is the
//! empty vector.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::factor::{inv_mod_u64, mul_mod_u64};

pub type ZPoly = Vec<u64>;

pub fn trim(a: &mut ZPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Degree, or `None` for the zero polynomial.
pub fn degree(a: &[u64]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn reduce(coeffs: &[BigInt], p: u64) -> ZPoly {
    let pb = BigInt::from(p);
    let mut out: ZPoly = coeffs
        .iter()
        .map(|c| {
            let r = c % &pb;
            let r = if r.sign() == num_bigint::Sign::Minus { r + &pb } else { r };
            r.to_u64().expect("residue below p")
        })
        .collect();
    trim(&mut out);
    out
}

pub fn eval(a: &[u64], x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0u64, |acc, &c| (mul_mod_u64(acc, x, p) + c) % p)
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> ZPoly {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = if x >= y { x - y } else { x + (p - y) };
    }
    trim(&mut out);
    out
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    let pp = p as u128;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let t = acc[i + j] + x as u128 * y as u128;
            acc[i + j] = if t >= pp * pp { t % pp } else { t };
        }
    }
    let mut out: ZPoly = acc.into_iter().map(|t| (t % pp) as u64).collect();
    trim(&mut out);
    out
}

pub fn scale(a: &[u64], c: u64, p: u64) -> ZPoly {
    let mut out: ZPoly = a.iter().map(|&x| mul_mod_u64(x, c, p)).collect();
    trim(&mut out);
    out
}

pub fn monic(a: &[u64], p: u64) -> ZPoly {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => scale(a, inv_mod_u64(lc, p).expect("nonzero mod p"), p),
    }
}

/// Quotient and remainder; `m` must be nonzero.
pub fn divrem(a: &[u64], m: &[u64], p: u64) -> (ZPoly, ZPoly) {
    let dm = degree(m).expect("division by the zero polynomial");
    let inv = inv_mod_u64(m[dm], p).expect("leading coefficient invertible");
    let mut r: ZPoly = a.to_vec();
    trim(&mut r);
    if r.len() <= dm {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - dm];
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = mul_mod_u64(r[dr], inv, p);
        let shift = dr - dm;
        q[shift] = c;
        for (j, &mj) in m.iter().enumerate() {
            let t = mul_mod_u64(c, mj, p);
            let x = r[shift + j];
            r[shift + j] = if x >= t { x - t } else { x + (p - t) };
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn rem(a: &[u64], m: &[u64], p: u64) -> ZPoly {
    divrem(a, m, p).1
}

pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> ZPoly {
    rem(&mul(a, b, p), m, p)
}

/// `base^e mod m`.
pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> ZPoly {
    let mut acc: ZPoly = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &b, m, p);
        }
        e >>= 1;
        if e > 0 {
            b = mulmod(&b, &b, m, p);
        }
    }
    acc
}

/// Monic gcd; the gcd of two zero polynomials is zero.
pub fn gcd(a: &[u64], b: &[u64], p: u64) -> ZPoly {
    let mut x: ZPoly = a.to_vec();
    let mut y: ZPoly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    monic(&x, p)
}

/// `x^p mod m` (Frobenius image of x).
pub fn x_pow_p(m: &[u64], p: u64) -> ZPoly {
    powmod(&[0, 1], p, m, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_identity() {
        let p = 101;
        let a = vec![5, 0, 3, 7, 1, 9];
        let m = vec![3, 4, 2];
        let (q, r) = divrem(&a, &m, p);
        let back = {
            let qm = mul(&q, &m, p);
            let mut s = vec![0; qm.len().max(r.len())];
            for (i, v) in s.iter_mut().enumerate() {
                *v = (qm.get(i).copied().unwrap_or(0) + r.get(i).copied().unwrap_or(0)) % p;
            }
            trim(&mut s);
            s
        };
        assert_eq!(back, a);
        assert!(r.len() < m.len());
    }

    #[test]
    fn frobenius_counts_roots() {
        // x^2 + 1 splits mod 13, is irreducible mod 7
        for (p, want) in [(13u64, 2usize), (7, 0)] {
            let f = vec![1, 0, 1];
            let g = gcd(&sub(&x_pow_p(&f, p), &[0, 1], p), &f, p);
            assert_eq!(degree(&g).unwrap_or(0), want, "p = {p}");
        }
    }
}
