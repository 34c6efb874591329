//! Word-size modular arithmetic, primality and factorization of `u128`.

use alloc::vec::Vec;

use crate::arith::primes_up_to;

#[inline]
pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin; the first twelve prime bases are exact
/// for every 64-bit input.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// `a * b mod m` for 128-bit operands.
pub fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    if a < b {
        core::mem::swap(&mut a, &mut b);
    }
    let mut acc: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod_u128(acc, a, m);
        }
        a = add_mod_u128(a, a, m);
        b >>= 1;
    }
    acc
}

#[inline]
fn add_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    // a, b < m
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

pub fn pow_mod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u128(acc, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin over the first twenty prime bases. Exact below 3.3·10^24;
/// a fixed-base probable-prime test above that.
pub fn is_prime_u128(n: u128) -> bool {
    if n <= u64::MAX as u128 {
        return is_prime_u64(n as u64);
    }
    const BASES: [u128; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];
    for &p in &BASES {
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u128(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's variant of Pollard rho with a fixed seed sequence.
fn pollard_brent(n: u128) -> Option<u128> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1..64u128 {
        let f = |x: u128| add_mod_u128(mul_mod_u128(x, x, n), c % n, n);
        let (mut y, mut g, mut r, mut q) = (2u128 + c, 1u128, 1u64, 1u128);
        let mut x = y;
        let mut ys = y;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod_u128(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += m;
            }
            r *= 2;
            if r > 1 << 26 {
                break;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
    }
    None
}

/// Trial division table plus rho splitting for the remaining cofactor.
#[derive(Debug, Clone)]
pub struct Factorizer {
    primes: Vec<u64>,
    bound: u64,
}

impl Factorizer {
    /// Trial division by all primes up to `bound`.
    pub fn new(bound: u64) -> Self {
        Factorizer { primes: primes_up_to(bound).expect("trial-division bound within capacity"), bound }
    }

    pub fn trial_bound(&self) -> u64 {
        self.bound
    }

    /// Prime factorization of `n >= 1`, ascending primes with exponents.
    /// `None` only if rho fails to split a composite cofactor.
    pub fn factor(&self, mut n: u128) -> Option<Vec<(u128, u32)>> {
        let mut out = Vec::new();
        if n <= 1 {
            return Some(out);
        }
        for &p in &self.primes {
            let p = p as u128;
            if p * p > n {
                break;
            }
            if n % p == 0 {
                let mut e = 0;
                while n % p == 0 {
                    n /= p;
                    e += 1;
                }
                out.push((p, e));
            }
        }
        if n > 1 {
            self.split_large(n, &mut out)?;
        }
        out.sort_unstable();
        let mut merged: Vec<(u128, u32)> = Vec::with_capacity(out.len());
        for (p, e) in out {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Some(merged)
    }

    /// `n` has no prime factor up to the trial bound.
    fn split_large(&self, n: u128, out: &mut Vec<(u128, u32)>) -> Option<()> {
        if n == 1 {
            return Some(());
        }
        let b = self.bound as u128;
        if n <= b.saturating_mul(b) || is_prime_u128(n) {
            out.push((n, 1));
            return Some(());
        }
        let d = pollard_brent(n)?;
        self.split_large(d, out)?;
        self.split_large(n / d, out)
    }
}
