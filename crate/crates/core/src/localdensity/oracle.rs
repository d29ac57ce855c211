//! Residue-count oracle: `#{λ mod p^t : φ(λ + ν) ≡ h} / p^{(n-1)t}`.
//!
//! When `p ∤ N`, `ν` is `p`-integral and `λ ↦ λ + ν` permutes
//! `(Z/p^t)^n`, so the count only depends on the gram and `h`.
//! [`residue_count`] computes it exactly in `O(t)` recursive steps:
//!
//! - if every coefficient is divisible by `p`, divide through;
//! - otherwise split solutions by whether some unit-coefficient variable is a
//!   unit. Those solutions are nonsingular and each one mod `p^{k0}`
//!   (`k0 = 1`, or `3` at `p = 2`) lifts to exactly `p^{n-1}` solutions per
//!   extra level. The remaining ones substitute `x = p y`.
//!
//! [`residue_count_by_convolution`] and [`direct_residue_count`] are literal
//! counts kept as cross-checks.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{Density, DensityMethod};
use crate::arith::{is_prime, ord_bigint, ord_rational, ord_u64, pow_u128, rational_mod};
use crate::error::{Error, Result};
use crate::lattice::ShiftedDiagonalLattice;

/// Largest modulus for which a convolution table is built.
const CONVOLUTION_MODULUS_CAP: u128 = 1 << 20;
/// Largest number of residue vectors the literal count will visit.
const DIRECT_CELL_CAP: u128 = 1 << 26;

fn modulus(p: u64, t: u32) -> Result<u128> {
    pow_u128(p, t).ok_or_else(|| Error::Resource(format!("{p}^{t} does not fit in 128 bits")))
}

fn target_residue(p: u64, h: &BigRational, t: u32) -> Result<u128> {
    if !h.is_zero() && ord_rational(h, p) < 0 {
        return Err(Error::domain(format!("h = {h} is not {p}-integral")));
    }
    rational_mod(h, modulus(p, t)?).ok_or_else(|| Error::Internal(format!("{h} mod {p}^{t}")))
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not prime")))
    }
}

/// Number of `x ∈ (Z/M)^n` with `Σ c_j x_j^2 ≡ target`; variables flagged in
/// `divisible` range over multiples of `p` only.
fn convolve(p: u64, modulus: u128, coeffs: &[u128], divisible: &[bool], target: u128) -> BigUint {
    let m = modulus as usize;
    let mut table = vec![BigUint::zero(); m];
    table[0] = BigUint::one();
    for (&c, &restricted) in coeffs.iter().zip(divisible) {
        let mut image = vec![0u64; m];
        for x in 0..modulus {
            if restricted && x % p as u128 != 0 {
                continue;
            }
            image[(c % modulus * (x * x % modulus) % modulus) as usize] += 1;
        }
        let mut next = vec![BigUint::zero(); m];
        for (r, count) in table.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (s, &w) in image.iter().enumerate().filter(|(_, &w)| w != 0) {
                next[(r + s) % m] += count * w;
            }
        }
        table = next;
    }
    table.swap_remove(target as usize)
}

/// Coefficient `p^val · unit`; the unit never changes during the recursion.
#[derive(Clone, Copy)]
struct Coefficient {
    val: u32,
    unit: u64,
}

impl Coefficient {
    fn residue(self, p: u64, modulus: u128) -> u128 {
        match pow_u128(p, self.val) {
            Some(q) if q < modulus => q * self.unit as u128 % modulus,
            _ => 0,
        }
    }
}

fn count(p: u64, coeffs: &[Coefficient], target: u128, t: u32) -> Result<BigUint> {
    if t == 0 {
        return Ok(BigUint::one());
    }
    let n = coeffs.len() as u32;
    let p_big = BigUint::from(p);
    if coeffs.iter().all(|c| c.val >= 1) {
        if !target.is_multiple_of(p as u128) {
            return Ok(BigUint::zero());
        }
        let lowered: Vec<Coefficient> = coeffs
            .iter()
            .map(|c| Coefficient {
                val: c.val - 1,
                ..*c
            })
            .collect();
        return Ok(p_big.pow(n) * count(p, &lowered, target / p as u128, t - 1)?);
    }

    let base_level = if p == 2 { 3 } else { 1 };
    if t < base_level {
        let m = modulus(p, t)?;
        let residues: Vec<u128> = coeffs.iter().map(|c| c.residue(p, m)).collect();
        return Ok(convolve(
            p,
            m,
            &residues,
            &vec![false; coeffs.len()],
            target % m,
        ));
    }

    let m = modulus(p, base_level)?;
    let residues: Vec<u128> = coeffs.iter().map(|c| c.residue(p, m)).collect();
    let units: Vec<bool> = coeffs.iter().map(|c| c.val == 0).collect();
    let all = convolve(p, m, &residues, &vec![false; coeffs.len()], target % m);
    let singular = convolve(p, m, &residues, &units, target % m);
    let good = (all - singular) * p_big.pow((n - 1) * (t - base_level));

    let raised: Vec<Coefficient> = coeffs
        .iter()
        .map(|c| {
            if c.val == 0 {
                Coefficient { val: 2, ..*c }
            } else {
                *c
            }
        })
        .collect();
    let unit_count = units.iter().filter(|&&u| u).count() as u32;
    let overcounted = count(p, &raised, target, t)?;
    let divisor = p_big.pow(unit_count);
    if !(&overcounted % &divisor).is_zero() {
        return Err(Error::Internal(
            "residue recursion produced a non-divisible count".into(),
        ));
    }
    Ok(good + overcounted / divisor)
}

/// `#{x ∈ (Z/p^t)^n : Σ a_j x_j^2 ≡ h (mod p^t)}`.
pub fn residue_count(p: u64, gram: &[u64], h: &BigRational, t: u32) -> Result<BigUint> {
    check_prime(p)?;
    if gram.is_empty() || gram.contains(&0) {
        return Err(Error::domain("gram entries must be positive"));
    }
    let target = target_residue(p, h, t)?;
    let coeffs: Vec<Coefficient> = gram
        .iter()
        .map(|&a| {
            let val = ord_u64(a, p);
            Coefficient {
                val,
                unit: a / p.pow(val),
            }
        })
        .collect();
    count(p, &coeffs, target, t)
}

/// Same count as [`residue_count`], by a full convolution table mod `p^t`.
pub fn residue_count_by_convolution(
    p: u64,
    gram: &[u64],
    h: &BigRational,
    t: u32,
) -> Result<BigUint> {
    check_prime(p)?;
    let m = modulus(p, t)?;
    if m > CONVOLUTION_MODULUS_CAP {
        return Err(Error::Resource(format!("convolution table of size {m}")));
    }
    let target = target_residue(p, h, t)?;
    let residues: Vec<u128> = gram.iter().map(|&a| a as u128 % m).collect();
    Ok(convolve(p, m, &residues, &vec![false; gram.len()], target))
}

/// `#{λ ∈ (Z/p^t)^n : φ(λ + ν) ≡ h}`, visiting every residue vector and
/// applying the shift `ν ≡ -c N^{-1}` literally.
pub fn direct_residue_count(
    lattice: &ShiftedDiagonalLattice,
    p: u64,
    h: &BigRational,
    t: u32,
) -> Result<u128> {
    check_prime(p)?;
    if lattice.conductor().is_multiple_of(p) {
        return Err(Error::Dispatch(format!(
            "{p} divides N = {}",
            lattice.conductor()
        )));
    }
    let m = modulus(p, t)?;
    let n = lattice.rank() as u32;
    if m.checked_pow(n).is_none_or(|cells| cells > DIRECT_CELL_CAP) {
        return Err(Error::Resource(format!("({p}^{t})^{n} residue vectors")));
    }
    let target = target_residue(p, h, t)?;
    let shift = rational_mod(&-lattice.shift_fraction(), m)
        .ok_or_else(|| Error::Internal("shift is not p-integral".into()))?;
    let gram: Vec<u128> = lattice.gram().iter().map(|&a| a as u128 % m).collect();
    let term = |j: usize, x: u128| {
        let y = (x + shift) % m;
        gram[j] * (y * y % m) % m
    };
    let count = (0..m)
        .into_par_iter()
        .map(|x0| {
            let mut hits = 0u128;
            let mut digits = vec![0u128; gram.len()];
            digits[0] = x0;
            loop {
                let value = digits
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, &x)| (acc + term(j, x)) % m);
                if value == target {
                    hits += 1;
                }
                let mut j = 1;
                while j < digits.len() {
                    digits[j] += 1;
                    if digits[j] < m {
                        break;
                    }
                    digits[j] = 0;
                    j += 1;
                }
                if j == digits.len() {
                    return hits;
                }
            }
        })
        .sum();
    Ok(count)
}

/// `2 ord_p(2 det L) + ord_p h + 1`: past this level the count quotient is
/// constant in `t`.
pub fn oracle_threshold(lattice: &ShiftedDiagonalLattice, p: u64, h: &BigRational) -> u32 {
    let two_det = lattice.det() * 2;
    let h_ord = if h.is_zero() {
        0
    } else {
        ord_rational(h, p).max(0) as u32
    };
    2 * ord_bigint(&two_det, p) + h_ord + 1
}

fn quotient(p: u64, n: usize, t: u32, hits: BigUint) -> BigRational {
    let scale = BigUint::from(p).pow((n as u32 - 1) * t);
    BigRational::new(hits.into(), scale.into())
}

/// The count quotient at level `t`, flagged stabilized when levels
/// `t, t+1, t+2` give the same value.
pub fn siegel_count_density(
    lattice: &ShiftedDiagonalLattice,
    p: u64,
    h: &BigRational,
    t: u32,
) -> Result<Density> {
    check_prime(p)?;
    if lattice.conductor().is_multiple_of(p) {
        return Err(Error::Dispatch(format!(
            "no residue-count oracle at {p} | N = {}",
            lattice.conductor()
        )));
    }
    if t == 0 {
        return Err(Error::domain("level t must be at least 1"));
    }
    let n = lattice.rank();
    let values = (t..t + 3)
        .map(|s| Ok(quotient(p, n, s, residue_count(p, lattice.gram(), h, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let stabilized = values.windows(2).all(|w| w[0] == w[1]);
    Density::new(values[0].clone(), DensityMethod::Oracle { t, stabilized })
}

/// [`siegel_count_density`] at the first level past [`oracle_threshold`] where
/// it is stabilized.
pub fn stabilized_count_density(
    lattice: &ShiftedDiagonalLattice,
    h: &BigRational,
    p: u64,
) -> Result<Density> {
    let start = oracle_threshold(lattice, p, h);
    for t in start..start + 16 {
        let density = siegel_count_density(lattice, p, h, t)?;
        if matches!(
            density.method,
            DensityMethod::Oracle {
                stabilized: true,
                ..
            }
        ) {
            return Ok(density);
        }
    }
    Err(Error::Internal(format!(
        "residue count at {p} did not stabilize past t = {start}"
    )))
}
