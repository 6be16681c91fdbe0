//! Prime factorization, primality and square-free testing.
//!
//! Trial division handles everything small or smooth; leftover cofactors go
//! through deterministic Miller-Rabin (below 2^64) and Pollard's rho. Inputs
//! are capped at 2^128, which is far beyond anything the search grids or the
//! census produce.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactorError {
    #[error("factorization requires a positive integer, got {0}")]
    NonPositive(BigInt),
    #[error("input exceeds the 2^128 factorization cap")]
    TooLarge,
    #[error("prime factor does not fit in 64 bits")]
    PrimeFactorTooLarge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

/// Factorization into prime powers with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization(Vec<PrimePower>);

impl Factorization {
    pub fn factors(&self) -> &[PrimePower] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|f| f.prime)
    }

    pub fn exponent_of(&self, prime: u64) -> u32 {
        self.0
            .iter()
            .find(|f| f.prime == prime)
            .map_or(0, |f| f.exponent)
    }

    pub fn product(&self) -> BigInt {
        let mut acc = BigInt::one();
        for f in &self.0 {
            acc *= BigInt::from(f.prime).pow(f.exponent);
        }
        acc
    }

    pub fn is_square_free(&self) -> bool {
        self.0.iter().all(|f| f.exponent <= 1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Deterministic Miller-Rabin; the base set is exact for all of u64.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1;
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

/// Miller-Rabin over u128 with a fixed base set. Exact below 2^64; above
/// that it is a strong probable-prime check, which only ever sees cofactors
/// left after trial division strips every factor below 2^16.
fn is_prime_u128(n: u128) -> bool {
    if let Ok(small) = u64::try_from(n) {
        return is_prime_u64(small);
    }
    const BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    let n_big = BigUint::from(n);
    let nm1 = &n_big - 1u32;
    let s = nm1.trailing_zeros().expect("n > 2 is odd here");
    let d = &nm1 >> s;
    'witness: for &a in &BASES {
        let mut x = BigUint::from(a).modpow(&d, &n_big);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), &n_big);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho. Only called on odd composites with no
/// factor below 2^16, so a nontrivial split always exists.
fn pollard_rho(n: u128) -> u128 {
    let mul = |a: u128, b: u128| -> u128 {
        if n <= u64::MAX as u128 {
            (a * b) % n
        } else {
            let prod = BigUint::from(a) * BigUint::from(b) % BigUint::from(n);
            prod.to_u128().expect("reduced mod n < 2^128")
        }
    };
    let gcd = |mut a: u128, mut b: u128| -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    for c in 1u128.. {
        let f = |x: u128| (mul(x, x) + c) % n;
        let (mut x, mut y, mut d) = (2u128, 2u128, 1u128);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!("rho exhausts all offsets")
}

fn factor_u128(mut n: u128, out: &mut Vec<(u128, u32)>) {
    debug_assert!(n >= 1);
    for p in small_prime_wheel() {
        if p as u128 * p as u128 > n {
            break;
        }
        let mut e = 0;
        while n % p as u128 == 0 {
            n /= p as u128;
            e += 1;
        }
        if e > 0 {
            out.push((p as u128, e));
        }
    }
    if n == 1 {
        return;
    }
    if is_prime_u128(n) {
        out.push((n, 1));
        return;
    }
    let d = pollard_rho(n);
    factor_u128(d, out);
    factor_u128(n / d, out);
}

/// 2, 3, 5 then the 30-wheel up to 2^16.
fn small_prime_wheel() -> impl Iterator<Item = u32> {
    const SPOKES: [u32; 8] = [1, 7, 11, 13, 17, 19, 23, 29];
    [2u32, 3, 5].into_iter().chain(
        (0u32..=(1 << 16) / 30)
            .flat_map(|k| SPOKES.iter().map(move |&s| 30 * k + s))
            .filter(|&c| c > 5),
    )
}

/// Factorizes a positive integer below 2^128. `factorize(1)` is empty.
pub fn factorize(n: &BigInt) -> Result<Factorization, FactorError> {
    if n <= &BigInt::zero() {
        return Err(FactorError::NonPositive(n.clone()));
    }
    let n = n.to_u128().ok_or(FactorError::TooLarge)?;
    let mut raw = Vec::new();
    factor_u128(n, &mut raw);
    raw.sort_unstable();
    let mut merged: Vec<PrimePower> = Vec::with_capacity(raw.len());
    for (p, e) in raw {
        let prime = u64::try_from(p).map_err(|_| FactorError::PrimeFactorTooLarge)?;
        match merged.last_mut() {
            Some(last) if last.prime == prime => last.exponent += e,
            _ => merged.push(PrimePower { prime, exponent: e }),
        }
    }
    Ok(Factorization(merged))
}

pub fn factorize_u64(n: u64) -> Result<Factorization, FactorError> {
    factorize(&BigInt::from(n))
}

/// True when no square of a prime divides `n`.
pub fn is_square_free(n: &BigInt) -> Result<bool, FactorError> {
    Ok(factorize(n)?.is_square_free())
}

pub fn is_square_free_u64(n: u64) -> Result<bool, FactorError> {
    is_square_free(&BigInt::from(n))
}
