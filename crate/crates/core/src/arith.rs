//! Small exact-arithmetic helpers shared by the lattice and density code.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

/// p-adic valuation of a nonzero integer.
pub fn ord_u64(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut k = 0;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    k
}

pub fn ord_bigint(x: &BigInt, p: u64) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut k = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        x = q;
        k += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn ord_rational(x: &BigRational, p: u64) -> i64 {
    ord_bigint(x.numer(), p) as i64 - ord_bigint(x.denom(), p) as i64
}

/// `p^e` as an exact rational, `e` of either sign.
pub fn pow_rational(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

pub fn pow_u128(p: u64, e: u32) -> Option<u128> {
    (p as u128).checked_pow(e)
}

/// Image of a rational with denominator prime to the modulus in `Z/modulus`.
pub fn rational_mod(x: &BigRational, modulus: u128) -> Option<u128> {
    let m = BigInt::from(modulus);
    let den = x.denom().mod_floor(&m);
    let inv = mod_inverse(&den, &m)?;
    let r = (x.numer().mod_floor(&m) * inv).mod_floor(&m);
    r.to_u128()
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i128, p: u64) -> i32 {
    let p = p as i128;
    let a = a.rem_euclid(p);
    if a == 0 {
        return 0;
    }
    let mut result = 1u128;
    let mut base = a as u128;
    let mut e = ((p - 1) / 2) as u128;
    let m = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

/// `(2/x)` on Z_2: the Hilbert symbol (2, x)_2 for odd x, zero for even x.
pub fn hilbert_two(x: i128) -> i32 {
    match x.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn biguint_pow(p: u64, e: u64) -> BigUint {
    BigUint::from(p).pow(e as u32)
}

pub fn rational_from_ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
