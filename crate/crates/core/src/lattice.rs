//! Shifted diagonal lattices `X = L + ν` attached to polygonal forms.
//!
//! For `f = Σ a_j P_m(x_j)` take `L = ⟨a_1, ..., a_n⟩` and
//! `ν = -(c/N)(v_1 + ... + v_n)` with `c/N = (m-4)/(2(m-2))` in lowest
//! terms. Completing the square gives `f(x) = ℓ` iff `φ(x + ν) = h(ℓ)`, where
//! `h(ℓ) = 2ℓ/(m-2) + Σ a_j ((m-4)/(2(m-2)))^2` and `φ(v) = Σ a_j λ_j^2`.
//!
//! All quantities here are exact; nothing in this module touches floats.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::gcd_u64;
use crate::error::{Error, Result};
use crate::polygonal::{PolygonalForm, RepresentationSet};

/// Default cap on enumeration box cells for [`representation_count`].
pub const DEFAULT_CELL_CAP: u128 = 100_000_000;

/// `L + ν` with `L = ⟨gram⟩` diagonal and `ν = -(c/N)(v_1 + ... + v_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShiftedDiagonalLattice {
    gram: Vec<u64>,
    shift_num: u64,
    conductor: u64,
}

impl ShiftedDiagonalLattice {
    /// `c` is reduced into `[0, N)`; requires `gcd(c, N) = 1`.
    pub fn new(gram: Vec<u64>, shift_num: u64, conductor: u64) -> Result<Self> {
        if gram.is_empty() || gram.contains(&0) {
            return Err(Error::domain("gram entries must be positive"));
        }
        if conductor == 0 {
            return Err(Error::domain("conductor must be positive"));
        }
        let c = shift_num % conductor;
        if gcd_u64(c, conductor) != 1 {
            return Err(Error::domain(format!("gcd({shift_num}, {conductor}) != 1")));
        }
        Ok(Self {
            gram,
            shift_num: c,
            conductor,
        })
    }

    pub fn gram(&self) -> &[u64] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// `c`, normalized into `[0, N)`.
    pub fn shift_num(&self) -> u64 {
        self.shift_num
    }

    /// `N`, the least positive integer with `Nν ∈ L`.
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn shift_fraction(&self) -> BigRational {
        BigRational::new(self.shift_num.into(), self.conductor.into())
    }

    pub fn det(&self) -> BigInt {
        self.gram.iter().map(|&a| BigInt::from(a)).product()
    }

    /// gcd of the gram entries; 1 means `L` is primitive.
    pub fn content(&self) -> u64 {
        self.gram.iter().fold(0, |g, &a| gcd_u64(g, a))
    }

    /// `Σ a_j (c/N)^2 = φ(ν)`.
    pub fn shift_norm(&self) -> BigRational {
        let s = self.shift_fraction();
        let total: u64 = self.gram.iter().sum();
        BigRational::from_integer(total.into()) * &s * &s
    }

    /// `φ(λ + ν)` for `λ ∈ Z^n`.
    pub fn norm_at(&self, lambda: &[i64]) -> BigRational {
        let s = self.shift_fraction();
        self.gram
            .iter()
            .zip(lambda)
            .map(|(&a, &l)| {
                let d = BigRational::from_integer(l.into()) - &s;
                BigRational::from_integer(a.into()) * &d * &d
            })
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Whether `k·ν ∈ L`.
    pub fn multiple_in_lattice(&self, k: u64) -> bool {
        (k as u128 * self.shift_num as u128).is_multiple_of(self.conductor as u128)
    }
}

/// The reduced fraction `(m-4)/(2(m-2))` as `(c, N)` with `c` in `[0, N)`.
fn shift_of(m: u64) -> (u64, u64) {
    let num = m as i64 - 4;
    let den = 2 * (m as i64 - 2);
    let g = num.gcd(&den);
    let (c, n) = (num / g, den / g);
    (c.rem_euclid(n) as u64, n as u64)
}

/// The shifted lattice corresponding to `form`.
pub fn lattice_from_form(form: &PolygonalForm) -> Result<ShiftedDiagonalLattice> {
    let (c, n) = shift_of(form.m());
    ShiftedDiagonalLattice::new(form.coeffs().to_vec(), c, n)
}

/// `h(ℓ) = 2ℓ/(m-2) + Σ a_j ((m-4)/(2(m-2)))^2`.
pub fn h_of_ell(form: &PolygonalForm, ell: u64) -> BigRational {
    let m = BigInt::from(form.m());
    let s = BigRational::new(&m - 4, BigInt::from(2) * (&m - 2));
    let total: u64 = form.coeffs().iter().sum();
    BigRational::new(BigInt::from(2) * ell, &m - 2)
        + BigRational::from_integer(total.into()) * &s * &s
}

/// Condition (3) of the density formulas:
/// `(h - Σ a_j (c/N)^2) · gcd(N, 4) · N / 8 ∈ Z`.
pub fn admissible(lattice: &ShiftedDiagonalLattice, h: &BigRational) -> bool {
    let n = lattice.conductor();
    let scale = BigRational::new(BigInt::from(gcd_u64(n, 4) * n), BigInt::from(8));
    ((h - lattice.shift_norm()) * scale).is_integer()
}

/// `r(h, X) = #{v ∈ X : φ(v) = h}` by exhaustive search of the box
/// `|λ_j - c/N| <= sqrt(h / a_j)`.
pub fn representation_count(lattice: &ShiftedDiagonalLattice, h: &BigRational) -> Result<u64> {
    representation_count_capped(lattice, h, DEFAULT_CELL_CAP)
}

pub fn representation_count_capped(
    lattice: &ShiftedDiagonalLattice,
    h: &BigRational,
    cell_cap: u128,
) -> Result<u64> {
    if h.is_negative() {
        return Err(Error::domain("target must be nonnegative"));
    }
    // With y_j = N λ_j - c: Σ a_j y_j^2 = N^2 h and y_j ≡ -c (mod N).
    let n = lattice.conductor() as i128;
    let scaled = h * BigRational::from_integer(BigInt::from(n * n));
    if !scaled.is_integer() {
        return Ok(0);
    }
    let target = scaled
        .to_integer()
        .to_u128()
        .ok_or_else(|| Error::Resource("target too large for enumeration".into()))?;
    let residue = (-(lattice.shift_num() as i128)).rem_euclid(n);

    let radii: Vec<u128> = lattice
        .gram()
        .iter()
        .map(|&a| (target / a as u128).sqrt())
        .collect();
    let cells = radii
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(2 * r / n as u128 + 1));
    match cells {
        Some(c) if c <= cell_cap => {}
        _ => {
            return Err(Error::Resource(format!(
                "enumeration box exceeds the cell cap of {cell_cap}"
            )))
        }
    }

    let counter = Enumerator {
        gram: lattice.gram(),
        modulus: n,
        residue,
    };
    if lattice.rank() == 1 {
        return Ok(counter.count(0, target));
    }
    let first = admissible_coords(radii[0] as i128, n, residue);
    let total = first
        .into_par_iter()
        .map(|y| {
            let used = lattice.gram()[0] as u128 * (y * y) as u128;
            if used > target {
                0
            } else {
                counter.count(1, target - used)
            }
        })
        .sum();
    Ok(total)
}

/// Integers `y` with `|y| <= radius` and `y ≡ residue (mod modulus)`.
fn admissible_coords(radius: i128, modulus: i128, residue: i128) -> Vec<i128> {
    let start = -radius + (residue - (-radius)).rem_euclid(modulus);
    (0..)
        .map(|k| start + k * modulus)
        .take_while(|&y| y <= radius)
        .collect()
}

struct Enumerator<'a> {
    gram: &'a [u64],
    modulus: i128,
    residue: i128,
}

impl Enumerator<'_> {
    fn count(&self, j: usize, remaining: u128) -> u64 {
        let a = self.gram[j] as u128;
        if j + 1 == self.gram.len() {
            // last coordinate: solve a y^2 = remaining directly
            if !remaining.is_multiple_of(a) {
                return 0;
            }
            let sq = remaining / a;
            let y = sq.sqrt();
            if y * y != sq {
                return 0;
            }
            let y = y as i128;
            let hits = |v: i128| (v - self.residue).rem_euclid(self.modulus) == 0;
            return if y == 0 {
                hits(0) as u64
            } else {
                hits(y) as u64 + hits(-y) as u64
            };
        }
        let radius = (remaining / a).sqrt() as i128;
        admissible_coords(radius, self.modulus, self.residue)
            .into_iter()
            .map(|y| self.count(j + 1, remaining - a * (y * y) as u128))
            .sum()
    }
}

/// Checks that `ℓ` is represented by `form` exactly when `h(ℓ)` is
/// represented by the corresponding shifted lattice, and returns the shared
/// answer. A disagreement is an internal error.
pub fn represents_equivalence_check(
    form: &PolygonalForm,
    ell: u64,
    set: &RepresentationSet,
) -> Result<bool> {
    if ell > set.bound() {
        return Err(Error::domain(format!(
            "ℓ = {ell} exceeds the set bound {}",
            set.bound()
        )));
    }
    let by_form = set.contains(ell);
    let lattice = lattice_from_form(form)?;
    let by_lattice = representation_count(&lattice, &h_of_ell(form, ell))? > 0;
    if by_form != by_lattice {
        return Err(Error::Internal(format!(
            "{form} (m={}): ℓ={ell} form says {by_form}, lattice says {by_lattice}",
            form.m()
        )));
    }
    Ok(by_form)
}
