//! Locally universal exponent patterns and the bounds on `R_1` they imply.
//!
//! Odd `p` (first four exponents `[r_1, r_2, r_3, r_4]`, `χ = (-b_1 b_2 / p)`):
//!
//! 1. `[0,0,0,i]`: `|R_1| <= 2/p`;
//! 2. `[0,0,i,j]`, `1 <= i <= j`, `χ = 1`: `1 - 2/p <= R_1 <= r_4` when
//!    `p | h`, and `R_1^2 <= 1/p` when `p ∤ h`;
//! 3. `[0,0,1,1]`, `χ = -1`: `|R_1| <= 1 - (p^{-r_n} - p^{-r_n-1})`.
//!
//! `p = 2`: patterns `[0,0,0,≤2]`, `[0,0,1,1..=3]`, `[0,1,1,1..=2]`,
//! `[0,1,2,2..=3]`. The tail of the level sum beyond `r_n + 1` and the middle
//! block `r_4 + 2 ..= r_n` are bounded independently of `h`, and every
//! density satisfies `0 < b_2 <= 2`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::yang::{r1_odd, r1_two, TwoTerms};
use super::JordanDecomposition;
use crate::arith::{legendre, ord_rational, pow_rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniversalityCase {
    /// Case 1, 2 or 3 of the odd-prime list.
    Odd(u8),
    /// Case 1 to 4 of the 2-adic list.
    Two(u8),
    Unclassified,
}

impl fmt::Display for UniversalityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniversalityCase::Odd(k) | UniversalityCase::Two(k) => write!(f, "case ({k})"),
            UniversalityCase::Unclassified => write!(f, "unclassified"),
        }
    }
}

pub fn classify_universality_pattern(jd: &JordanDecomposition) -> Result<UniversalityCase> {
    let n = jd.rank();
    if n < 6 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "classification needs even rank n >= 6, got {n}"
        )));
    }
    let r = jd.exponents();
    let head = [r[0], r[1], r[2], r[3]];
    let case = if jd.p() == 2 {
        match head {
            [0, 0, 0, i] if i <= 2 => UniversalityCase::Two(1),
            [0, 0, 1, i] if (1..=3).contains(&i) => UniversalityCase::Two(2),
            [0, 1, 1, i] if (1..=2).contains(&i) => UniversalityCase::Two(3),
            [0, 1, 2, i] if (2..=3).contains(&i) => UniversalityCase::Two(4),
            _ => UniversalityCase::Unclassified,
        }
    } else {
        let e = jd.entries();
        let chi = legendre(-((e[0].unit as i128) * (e[1].unit as i128)), jd.p());
        match head {
            [0, 0, 0, _] => UniversalityCase::Odd(1),
            [0, 0, i, _] if i >= 1 && chi == 1 => UniversalityCase::Odd(2),
            [0, 0, 1, 1] => UniversalityCase::Odd(3),
            _ => UniversalityCase::Unclassified,
        }
    };
    Ok(case)
}

/// One checked inequality. `h` is `None` for lattice-level checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub check: String,
    pub h: Option<BigRational>,
    pub value: BigRational,
    pub pass: bool,
}

fn row(check: &str, h: Option<&BigRational>, value: BigRational, pass: bool) -> BoundRow {
    BoundRow {
        check: check.to_string(),
        h: h.cloned(),
        value,
        pass,
    }
}

/// Evaluates the bound for the pattern's case at every `h` in the sweep.
/// Unclassified patterns are a domain error.
pub fn verify_case_bounds(jd: &JordanDecomposition, hs: &[BigRational]) -> Result<Vec<BoundRow>> {
    let case = classify_universality_pattern(jd)?;
    let p = jd.p();
    let r = jd.exponents();
    let (r4, rn) = (r[3], r[r.len() - 1]);
    let one = BigRational::one();
    let mut rows = Vec::new();
    match case {
        UniversalityCase::Unclassified => {
            return Err(Error::domain("exponent pattern is not locally universal"));
        }
        UniversalityCase::Odd(k) => {
            for h in hs {
                let r1 = r1_odd(jd, h)?;
                let entry = match k {
                    1 => {
                        let pass =
                            r1.abs() <= pow_rational(p, -1) * BigRational::from_integer(2.into());
                        row("case(1): |R1| <= 2/p", Some(h), r1, pass)
                    }
                    2 if ord_rational(h, p) == 0 => {
                        let pass = &r1 * &r1 <= pow_rational(p, -1);
                        row("case(2), p∤h: R1^2 <= 1/p", Some(h), r1, pass)
                    }
                    2 => {
                        let lower =
                            &one - pow_rational(p, -1) * BigRational::from_integer(2.into());
                        let upper = BigRational::from_integer(r4.into());
                        let pass = lower <= r1 && r1 <= upper;
                        row("case(2): 1-2/p <= R1 <= r4", Some(h), r1, pass)
                    }
                    _ => {
                        let bound = &one
                            - (pow_rational(p, -(rn as i64)) - pow_rational(p, -(rn as i64) - 1));
                        let pass = r1.abs() <= bound;
                        row("case(3): |R1| <= 1-(p^-rn - p^-(rn+1))", Some(h), r1, pass)
                    }
                };
                rows.push(entry);
            }
        }
        UniversalityCase::Two(_) => {
            let improved = matches!(r[..4], [0, 0, 0, 2] | [0, 0, 1, 3]);
            rows.push(tail_row(jd, r4, rn, improved)?);
            if r4 + 2 <= rn {
                rows.push(middle_row(jd, r4, rn, improved)?);
            }
            let two = BigRational::from_integer(2.into());
            for h in hs {
                let b2 = &one + r1_two(jd, h)?;
                let pass = b2.is_positive() && b2 <= two;
                rows.push(row("0 < b2 <= 2", Some(h), b2, pass));
            }
        }
    }
    Ok(rows)
}

/// `Σ_{t >= r_n + 2} |term(t)|` against `2^{r_4 - r_n - 1}` (or `- 2`).
///
/// Past `r_n + 1` every exponent is below `t - 1`, so `term(t + 2) =
/// term(t) · 2^{2-n}` and the tail is a geometric series summed exactly.
fn tail_row(jd: &JordanDecomposition, r4: u32, rn: u32, improved: bool) -> Result<BoundRow> {
    let terms = TwoTerms::new(jd);
    let ratio = pow_rational(2, 2 - jd.rank() as i64);
    let tail = (terms.magnitude(rn + 2)? + terms.magnitude(rn + 3)?) / (BigRational::one() - ratio);
    let exponent = r4 as i64 - rn as i64 - if improved { 2 } else { 1 };
    let pass = tail <= pow_rational(2, exponent);
    let label = if improved {
        "tail t>=rn+2 <= 2^(r4-rn-2)"
    } else {
        "tail t>=rn+2 <= 2^(r4-rn-1)"
    };
    Ok(row(label, None, tail, pass))
}

/// `Σ_{r_4+2 <= t <= r_n} δ(t) |term(t)|` against `2^{-1} + ... + 2^{r_4-r_n+1}`
/// (or `2^{-2} + ... + 2^{r_4-r_n}`).
fn middle_row(jd: &JordanDecomposition, r4: u32, rn: u32, improved: bool) -> Result<BoundRow> {
    let terms = TwoTerms::new(jd);
    let mut sum = BigRational::zero();
    for t in r4 + 2..=rn {
        if terms.delta(t) {
            sum += terms.magnitude(t)?;
        }
    }
    let span = (rn - r4) as i64;
    let (first, last) = if improved { (2, span) } else { (1, span - 1) };
    let bound = (first..=last).fold(BigRational::zero(), |acc, k| acc + pow_rational(2, -k));
    let pass = sum <= bound;
    let label = if improved {
        "middle r4+2..rn <= 2^-2+..+2^(r4-rn)"
    } else {
        "middle r4+2..rn <= 2^-1+..+2^(r4-rn+1)"
    };
    Ok(row(label, None, sum, pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational_from_ratio;
    use crate::localdensity::jordan_decompose;

    fn classify(p: u64, gram: &[u64]) -> UniversalityCase {
        classify_universality_pattern(&jordan_decompose(p, gram).unwrap()).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify(5, &[1, 1, 1, 25, 25, 25]),
            UniversalityCase::Odd(1)
        );
        assert_eq!(classify(2, &[1, 2, 4, 8, 16, 32]), UniversalityCase::Two(4));
        assert_eq!(
            classify(3, &[1, 3, 3, 3, 3, 3]),
            UniversalityCase::Unclassified
        );
        // χ = (-1·1/3) = -1 at p = 3: [0,0,1,1] is case 3, and [0,0,1,2] is unclassified.
        assert_eq!(classify(3, &[1, 1, 3, 3, 3, 3]), UniversalityCase::Odd(3));
        assert_eq!(
            classify(3, &[1, 1, 3, 9, 9, 9]),
            UniversalityCase::Unclassified
        );
        // χ = (-2/3) = 1.
        assert_eq!(classify(3, &[1, 2, 3, 9, 9, 9]), UniversalityCase::Odd(2));
        assert!(classify_universality_pattern(&jordan_decompose(3, &[1; 4]).unwrap()).is_err());
    }

    fn sweep(p: u64) -> Vec<BigRational> {
        (1..=200i64)
            .map(|k| rational_from_ratio(k * (p as i64).pow(k as u32 % 4), 1))
            .collect()
    }

    #[test]
    fn odd_cases_hold() {
        for (p, gram) in [
            (5u64, vec![1, 1, 1, 25, 25, 25]),
            (3, vec![1, 2, 3, 9, 9, 9]),
            (3, vec![1, 1, 3, 3, 3, 3]),
            (7, vec![1, 3, 7, 49, 7, 7]),
        ] {
            let jd = jordan_decompose(p, &gram).unwrap();
            for row in verify_case_bounds(&jd, &sweep(p)).unwrap() {
                assert!(row.pass, "{p} {gram:?} {row:?}");
            }
        }
    }

    #[test]
    fn two_adic_cases_hold() {
        for gram in [
            vec![1, 1, 1, 4, 4, 4],
            vec![1, 3, 2, 8, 64, 128],
            vec![1, 2, 2, 4, 32, 32],
            vec![1, 2, 4, 8, 8, 256],
            vec![1, 1, 1, 1, 1, 1, 1, 1],
        ] {
            let jd = jordan_decompose(2, &gram).unwrap();
            let rows = verify_case_bounds(&jd, &sweep(2)).unwrap();
            assert!(rows.iter().all(|r| r.pass), "{gram:?} {rows:?}");
        }
    }

    #[test]
    fn unclassified_is_rejected() {
        let jd = jordan_decompose(3, &[1, 3, 3, 3, 3, 3]).unwrap();
        assert!(verify_case_bounds(&jd, &[rational_from_ratio(1, 1)]).is_err());
    }
}
