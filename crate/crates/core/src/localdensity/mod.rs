//! Local representation densities `b_p(h, λ, 0)` of shifted diagonal lattices.
//!
//! Three sources of values, never mixed:
//!
//! - closed forms at primes dividing the conductor `N`;
//! - Yang's explicit formulas at primes not dividing `N`
//!   ([`yang_density_odd`], [`yang_density_two`]);
//! - residue counting, `#{λ mod p^t : φ(λ+ν) ≡ h} / p^{(n-1)t}` once it has
//!   stabilized in `t` ([`siegel_count_density`]). This is the oracle the
//!   formulas are checked against.
//!
//! [`local_density`] dispatches between the first two. Everything except
//! [`tau_gauss_sum`] is exact rational arithmetic.

mod bounds;
mod oracle;
mod report;
mod yang;

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::arith::{is_prime, ord_u64, pow_rational};
use crate::error::{Error, Result};
use crate::lattice::{admissible, ShiftedDiagonalLattice};

pub use bounds::{classify_universality_pattern, verify_case_bounds, BoundRow, UniversalityCase};
pub use oracle::{
    direct_residue_count, oracle_threshold, residue_count, residue_count_by_convolution,
    siegel_count_density, stabilized_count_density,
};
pub use report::{write_report, ReportRow};
pub use yang::{r1_odd, r1_two, yang_density_odd, yang_density_two};

/// One Jordan component `⟨unit · p^exponent⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct JordanEntry {
    pub exponent: u32,
    pub unit: u64,
}

/// `L_p ≅ ⟨b_1 p^{r_1}, ..., b_n p^{r_n}⟩` with `r_1 <= ... <= r_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanDecomposition {
    p: u64,
    entries: Vec<JordanEntry>,
}

impl JordanDecomposition {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> &[JordanEntry] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.exponent).collect()
    }
}

/// Splits each diagonal entry into `p^{ord_p a} · unit`, sorted by exponent.
pub fn jordan_decompose(p: u64, gram: &[u64]) -> Result<JordanDecomposition> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if gram.is_empty() || gram.contains(&0) {
        return Err(Error::domain("gram entries must be positive"));
    }
    let mut entries: Vec<JordanEntry> = gram
        .iter()
        .map(|&a| {
            let exponent = ord_u64(a, p);
            JordanEntry {
                exponent,
                unit: a / p.pow(exponent),
            }
        })
        .collect();
    entries.sort();
    Ok(JordanDecomposition { p, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMethod {
    ClosedForm,
    YangOdd,
    YangTwo,
    /// Residue count at level `p^t`; `stabilized` when `t, t+1, t+2` agree.
    Oracle {
        t: u32,
        stabilized: bool,
    },
}

impl fmt::Display for DensityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityMethod::ClosedForm => write!(f, "closed_form"),
            DensityMethod::YangOdd => write!(f, "yang_odd"),
            DensityMethod::YangTwo => write!(f, "yang_two"),
            DensityMethod::Oracle { t, .. } => write!(f, "oracle(t={t})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    pub value: BigRational,
    pub method: DensityMethod,
}

impl Density {
    fn new(value: BigRational, method: DensityMethod) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Internal(format!(
                "negative density {value} from {method}"
            )));
        }
        Ok(Self { value, method })
    }
}

/// Closed forms at `p | N`: `p^{-ord_p N}` for odd `p`, `2` when `2 ∥ N`,
/// `2^{-(ord_2 N - 1)}` when `4 | N`.
pub fn density_p_dividing_n(p: u64, conductor: u64) -> Result<Density> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if conductor == 0 || !conductor.is_multiple_of(p) {
        return Err(Error::Dispatch(format!(
            "{p} does not divide N = {conductor}"
        )));
    }
    let k = ord_u64(conductor, p) as i64;
    let value = match (p, k) {
        (2, 1) => pow_rational(2, 1),
        (2, _) => pow_rational(2, -(k - 1)),
        _ => pow_rational(p, -k),
    };
    Density::new(value, DensityMethod::ClosedForm)
}

/// `τ_p(p^{-t} α) = p^{-t} Σ_{x mod p^t} e_p(p^{-t} α (N x^2 - 2 c x))`,
/// with `e_p(z) = exp(-2πi {z})`. Floating point; used only for spot checks.
pub fn tau_gauss_sum(p: u64, t: u32, alpha: u64, conductor: u64, c: i64) -> Result<Complex64> {
    let modulus =
        p.checked_pow(t).filter(|&q| q <= 1 << 24).ok_or_else(|| {
            Error::Resource(format!("{p}^{t} is too large for a direct Gauss sum"))
        })? as i128;
    if alpha.is_multiple_of(p) {
        return Err(Error::domain("α must be a unit at p"));
    }
    let (a, n, c) = (alpha as i128, conductor as i128, c as i128);
    let mut total = Complex64::zero();
    for x in 0..modulus {
        let phase = (a * (n * x * x - 2 * c * x)).rem_euclid(modulus);
        let angle = -2.0 * std::f64::consts::PI * phase as f64 / modulus as f64;
        total += Complex64::from_polar(1.0, angle);
    }
    Ok(total / modulus as f64)
}

/// Closed-form value of `τ_p(p^{-t} α)` when `p | N`: 1 on the
/// integrality region, 0 outside. `None` when `p ∤ N`.
pub fn tau_lemma_value(p: u64, t: u32, conductor: u64) -> Option<u32> {
    if !conductor.is_multiple_of(p) {
        return None;
    }
    let one_up_to = match p {
        2 if ord_u64(conductor, 2) == 1 => 2,
        2 => 1,
        _ => 0,
    };
    Some(u32::from(t <= one_up_to))
}

/// Checks the shared preconditions of the density formulas.
fn check_lattice_for_density(lattice: &ShiftedDiagonalLattice, h: &BigRational) -> Result<()> {
    let n = lattice.rank();
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::domain(format!(
            "density formulas need even rank n >= 4, got {n}"
        )));
    }
    if lattice.content() != 1 {
        return Err(Error::domain(
            "density formulas need a primitive lattice (gcd of entries 1)",
        ));
    }
    if !h.is_positive() {
        return Err(Error::domain("target h must be positive"));
    }
    if !admissible(lattice, h) {
        return Err(Error::domain(format!(
            "h = {h} is not admissible for this lattice"
        )));
    }
    Ok(())
}

/// `b_p(h, λ, 0)` by the formula appropriate to `p` and `N`.
pub fn local_density(lattice: &ShiftedDiagonalLattice, h: &BigRational, p: u64) -> Result<Density> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    check_lattice_for_density(lattice, h)?;
    if lattice.conductor().is_multiple_of(p) {
        return density_p_dividing_n(p, lattice.conductor());
    }
    let jd = jordan_decompose(p, lattice.gram())?;
    if p == 2 {
        yang_density_two(&jd, h)
    } else {
        yang_density_odd(&jd, h)
    }
}

/// A formula value together with the oracle value when one is defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityCheck {
    pub formula: Density,
    pub oracle: Option<Density>,
}

impl DensityCheck {
    /// True when there is no oracle or the oracle agrees exactly.
    pub fn agrees(&self) -> bool {
        self.oracle
            .as_ref()
            .is_none_or(|o| o.value == self.formula.value)
    }
}

/// [`local_density`] plus the stabilized residue count when `p ∤ N`.
pub fn local_density_checked(
    lattice: &ShiftedDiagonalLattice,
    h: &BigRational,
    p: u64,
) -> Result<DensityCheck> {
    let formula = local_density(lattice, h, p)?;
    let oracle = if lattice.conductor().is_multiple_of(p) {
        None
    } else {
        Some(stabilized_count_density(lattice, h, p)?)
    };
    Ok(DensityCheck { formula, oracle })
}
