//! Yang's explicit formulas for `b_p(h, λ, 0)` at primes not dividing `N`.
//!
//! Write `h = α p^a` with `α` a unit and `L_p ≅ ⟨b_i p^{r_i}⟩`. Both formulas
//! return `1 + R_1(1, h, L_p)`; exponents of `p` are tracked doubled (`2d`) so
//! that half powers can be checked to cancel before any value is built.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Density, DensityMethod, JordanDecomposition};
use crate::arith::{hilbert_two, legendre, ord_rational, pow_rational, rational_mod};
use crate::error::{Error, Result};

/// `(a, α mod modulus)` for `h = α p^a`.
fn split_target(p: u64, h: &BigRational, modulus: u128) -> Result<(u32, u128)> {
    if !h.is_positive() {
        return Err(Error::domain("target h must be positive"));
    }
    let a = ord_rational(h, p);
    if a < 0 {
        return Err(Error::domain(format!("ord_{p}(h) = {a} < 0")));
    }
    let alpha = h / pow_rational(p, a);
    let residue = rational_mod(&alpha, modulus)
        .ok_or_else(|| Error::Internal(format!("{alpha} is not a {p}-adic unit")))?;
    Ok((a as u32, residue))
}

fn check_rank(jd: &JordanDecomposition) -> Result<()> {
    let n = jd.rank();
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::domain(format!(
            "density formulas need even rank n >= 4, got {n}"
        )));
    }
    Ok(())
}

/// `p^{twice/2}`; fails unless `twice` is even.
fn half_power(p: u64, twice: i64, what: &str) -> Result<BigRational> {
    if twice % 2 != 0 {
        return Err(Error::Internal(format!(
            "half power of {p} survives in {what}"
        )));
    }
    Ok(pow_rational(p, twice / 2))
}

/// Per-level quantities of the odd-prime formula.
pub(super) struct OddTerms<'a> {
    jd: &'a JordanDecomposition,
}

impl<'a> OddTerms<'a> {
    pub(super) fn new(jd: &'a JordanDecomposition) -> Self {
        Self { jd }
    }

    /// Indices with `r_i < t` and `t - r_i` odd.
    fn odd_set(&self, t: u32) -> impl Iterator<Item = usize> + '_ {
        self.jd
            .entries()
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.exponent < t && (t - e.exponent) % 2 == 1)
            .map(|(i, _)| i)
    }

    pub(super) fn l(&self, t: u32) -> usize {
        self.odd_set(t).count()
    }

    /// `2 d(t) = 2t + Σ_{r_i < t} (r_i - t)`.
    pub(super) fn twice_d(&self, t: u32) -> i64 {
        let t = t as i64;
        2 * t
            + self
                .jd
                .entries()
                .iter()
                .filter(|e| (e.exponent as i64) < t)
                .map(|e| e.exponent as i64 - t)
                .sum::<i64>()
    }

    /// `ε(t) = (-1/p)^{⌊l/2⌋} Π_{i ∈ L(t)} (b_i/p)`.
    pub(super) fn epsilon(&self, t: u32) -> i32 {
        let p = self.jd.p();
        let sign = legendre(-1, p).pow((self.l(t) / 2) as u32);
        self.odd_set(t)
            .map(|i| legendre(self.jd.entries()[i].unit as i128, p))
            .fold(sign, |acc, s| acc * s)
    }

    /// `ε(t) p^{d(t)}` for `l(t)` even.
    pub(super) fn even_term(&self, t: u32) -> Result<BigRational> {
        let d = half_power(self.jd.p(), self.twice_d(t), "an even-level term")?;
        Ok(d * BigRational::from_integer(self.epsilon(t).into()))
    }
}

/// `R_1(1, h, L_p)` for odd `p`.
pub fn r1_odd(jd: &JordanDecomposition, h: &BigRational) -> Result<BigRational> {
    let p = jd.p();
    if p == 2 {
        return Err(Error::Dispatch("r1_odd needs an odd prime".into()));
    }
    check_rank(jd)?;
    let (a, alpha) = split_target(p, h, p as u128)?;
    let terms = OddTerms::new(jd);

    let mut sum = BigRational::zero();
    for t in 1..=a {
        if terms.l(t).is_multiple_of(2) {
            sum += terms.even_term(t)?;
        }
    }
    sum *= BigRational::one() - pow_rational(p, -1);

    let t = a + 1;
    let last = if terms.l(t).is_multiple_of(2) {
        terms.even_term(t)? * -pow_rational(p, -1)
    } else {
        let power = half_power(p, terms.twice_d(t) - 1, "f_1")?;
        let sign = terms.epsilon(t) * legendre(alpha as i128, p);
        power * BigRational::from_integer(sign.into())
    };
    Ok(sum + last)
}

pub fn yang_density_odd(jd: &JordanDecomposition, h: &BigRational) -> Result<Density> {
    Density::new(BigRational::one() + r1_odd(jd, h)?, DensityMethod::YangOdd)
}

/// Per-level quantities of the 2-adic formula.
pub(super) struct TwoTerms<'a> {
    jd: &'a JordanDecomposition,
}

impl<'a> TwoTerms<'a> {
    pub(super) fn new(jd: &'a JordanDecomposition) -> Self {
        Self { jd }
    }

    /// Indices with `r_i < t - 1` and `t - 1 - r_i` odd.
    fn odd_set(&self, t: u32) -> impl Iterator<Item = usize> + '_ {
        let s = t - 1;
        self.jd
            .entries()
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.exponent < s && (s - e.exponent) % 2 == 1)
            .map(|(i, _)| i)
    }

    /// `l(t - 1, 1)`.
    pub(super) fn l(&self, t: u32) -> usize {
        self.odd_set(t).count()
    }

    /// `2 d(t) = 2t + Σ_{r_i < t-1} (r_i - t + 1)`.
    pub(super) fn twice_d(&self, t: u32) -> i64 {
        let s = t as i64 - 1;
        2 * t as i64
            + self
                .jd
                .entries()
                .iter()
                .filter(|e| (e.exponent as i64) < s)
                .map(|e| e.exponent as i64 - s)
                .sum::<i64>()
    }

    /// `δ(t) = 0` iff some `r_i = t - 1`.
    pub(super) fn delta(&self, t: u32) -> bool {
        self.jd.entries().iter().all(|e| e.exponent != t - 1)
    }

    /// `ε(t) = Π_{i ∈ L(t-1)} b_i mod 8`.
    fn epsilon(&self, t: u32) -> i128 {
        self.odd_set(t)
            .map(|i| (self.jd.entries()[i].unit % 8) as i128)
            .fold(1, |acc, b| acc * b % 8)
    }

    /// `μ_t(h) = α 2^{a+3-t} - Σ_{r_i < t-1} b_i mod 8`.
    fn mu(&self, t: u32, a: u32, alpha: u128) -> i128 {
        let shift = a + 3 - t;
        let scaled = if shift >= 3 {
            0
        } else {
            (alpha as i128) << shift
        };
        let units: i128 = self
            .jd
            .entries()
            .iter()
            .filter(|e| e.exponent < t - 1)
            .map(|e| (e.unit % 8) as i128)
            .sum();
        (scaled - units).rem_euclid(8)
    }

    /// `|term(t)|` without `δ`: `2^{d-3/2}` for `l` odd, `2^{d-1}` for `l` even.
    pub(super) fn magnitude(&self, t: u32) -> Result<BigRational> {
        let twice = self.twice_d(t);
        if self.l(t) % 2 == 1 {
            half_power(2, twice - 3, "an odd-level term")
        } else {
            half_power(2, twice - 2, "an even-level term")
        }
    }

    /// The signed level-`t` contribution to `R_1` for `h = α 2^a`.
    fn term(&self, t: u32, a: u32, alpha: u128) -> Result<BigRational> {
        if !self.delta(t) {
            return Ok(BigRational::zero());
        }
        let eps = self.epsilon(t);
        let mu = self.mu(t, a, alpha);
        let sign = if self.l(t) % 2 == 1 {
            hilbert_two(mu * eps)
        } else if mu % 4 != 0 {
            0
        } else {
            let e2 = if mu == 0 { 1 } else { -1 };
            hilbert_two(eps) * e2
        };
        if sign == 0 {
            return Ok(BigRational::zero());
        }
        Ok(self.magnitude(t)? * BigRational::from_integer(sign.into()))
    }
}

/// `R_1(1, h, L_2)`. Needs a unimodular component (`r_1 = 0`).
pub fn r1_two(jd: &JordanDecomposition, h: &BigRational) -> Result<BigRational> {
    if jd.p() != 2 {
        return Err(Error::Dispatch("r1_two needs p = 2".into()));
    }
    check_rank(jd)?;
    if jd.entries().iter().all(|e| e.exponent > 0) {
        return Err(Error::domain(
            "L_2 has no unimodular component; the lattice is not primitive",
        ));
    }
    let (a, alpha) = split_target(2, h, 8)?;
    let terms = TwoTerms::new(jd);
    let mut sum = BigRational::zero();
    for t in 2..=a + 3 {
        sum += terms.term(t, a, alpha)?;
    }
    Ok(sum)
}

pub fn yang_density_two(jd: &JordanDecomposition, h: &BigRational) -> Result<Density> {
    Density::new(BigRational::one() + r1_two(jd, h)?, DensityMethod::YangTwo)
}
