#![allow(dead_code)]

use num_bigint::BigInt;
use powerfree_core::IntPolynomial;

pub fn poly(c: &[i64]) -> IntPolynomial {
    IntPolynomial::from_i64(c).unwrap()
}

/// Prime factorisation by trial division.
pub fn trial_factor(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut p = 2u128;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// |f(n)| is k-free, by factoring; zero is not k-free.
pub fn brute_kfree(f: &IntPolynomial, k: u32, n: u64) -> bool {
    let v: BigInt = f.eval(&BigInt::from(n));
    let v = u128::try_from(v.magnitude().clone()).expect("test values fit u128");
    v != 0 && trial_factor(v).iter().all(|&(_, e)| e < k)
}

/// All residues r mod m with f(r) ≡ 0.
pub fn brute_roots(f: &IntPolynomial, m: u64) -> Vec<u64> {
    let mb = BigInt::from(m);
    (0..m)
        .filter(|&r| {
            let v = f.eval(&BigInt::from(r)) % &mb;
            v == BigInt::from(0)
        })
        .collect()
}

pub fn small_primes(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

/// Ω(n) by trial division.
pub fn big_omega(n: u64) -> u32 {
    trial_factor(n as u128).iter().map(|&(_, e)| e).sum()
}
