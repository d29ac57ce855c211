//! Generalized m-gonal numbers and the integers represented by
//! `a_1 P_m(x_1) + ... + a_n P_m(x_n)` up to a bound.
//!
//! `P_m(x) = ((m-2)x^2 - (m-4)x) / 2` with `x` ranging over all of `Z`.
//! Representation is decided exactly on `[0, B]` by a bitset fold, one
//! coefficient at a time.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::gcd_u64;
use crate::error::{Error, Result};

/// Default representation bound.
pub const DEFAULT_BOUND: u64 = 100_000;

/// Largest bound accepted by [`represented_set`] (2^32 bits = 512 MiB).
pub const MAX_BOUND: u64 = 1 << 32;

/// Largest coefficient accepted in a [`PolygonalForm`].
pub const MAX_COEFF: u64 = (1 << 31) - 1;

fn check_m(m: u64) -> Result<()> {
    if m < 3 {
        return Err(Error::domain(format!("m must be at least 3, got {m}")));
    }
    Ok(())
}

/// `P_m(x)`.
pub fn polygonal_value(m: u64, x: i64) -> Result<u64> {
    check_m(m)?;
    let (m, x) = (m as i128, x as i128);
    let twice = (m - 2) * x * x - (m - 4) * x;
    debug_assert!(twice >= 0 && twice % 2 == 0);
    u64::try_from(twice / 2).map_err(|_| Error::Resource(format!("P_{m}({x}) overflows u64")))
}

/// All values `P_m(x) <= bound`, sorted and deduplicated.
///
/// Walks `x = 0, 1, -1, 2, -2, ...` and stops a direction as soon as the
/// value passes the bound; `P_m` is nondecreasing in `|x|` on each side of 0.
pub fn polygonal_values_up_to(m: u64, bound: u64) -> Result<Vec<u64>> {
    check_m(m)?;
    let mut values = vec![0u64];
    for step in [1i64, -1] {
        let mut x = step;
        loop {
            let v = polygonal_value(m, x)?;
            if v > bound {
                break;
            }
            values.push(v);
            x += step;
        }
    }
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

/// A sum `a_1 P_m(x_1) + ... + a_n P_m(x_n)` with `a_1 <= ... <= a_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolygonalForm {
    m: u64,
    coeffs: Vec<u64>,
}

impl PolygonalForm {
    /// Builds a form from positive coefficients; they are sorted ascending.
    pub fn new(m: u64, mut coeffs: Vec<u64>) -> Result<Self> {
        check_m(m)?;
        if coeffs.is_empty() {
            return Err(Error::domain("a form needs at least one coefficient"));
        }
        if let Some(&a) = coeffs.iter().find(|&&a| a == 0 || a > MAX_COEFF) {
            return Err(Error::domain(format!(
                "coefficient {a} outside [1, 2^31 - 1]"
            )));
        }
        coeffs.sort_unstable();
        Ok(Self { m, coeffs })
    }

    /// The empty sum, which represents only 0. Root of every escalator tree.
    pub fn empty(m: u64) -> Result<Self> {
        check_m(m)?;
        Ok(Self {
            m,
            coeffs: Vec::new(),
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    /// gcd of the coefficients (0 for the empty form).
    pub fn gcd(&self) -> u64 {
        self.coeffs.iter().fold(0, |g, &a| gcd_u64(g, a))
    }

    /// The form with one more coefficient, kept sorted.
    pub fn extended(&self, a: u64) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs.push(a);
        Self::new(self.m, coeffs)
    }

    /// Evaluates the form at `x`.
    pub fn evaluate(&self, x: &[i64]) -> Result<u64> {
        if x.len() != self.coeffs.len() {
            return Err(Error::domain("argument length does not match rank"));
        }
        let mut total = 0u64;
        for (&a, &xi) in self.coeffs.iter().zip(x) {
            total += a * polygonal_value(self.m, xi)?;
        }
        Ok(total)
    }
}

impl fmt::Display for PolygonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Smallest positive integer not represented, or `Universal` when every
/// integer in `[1, B]` is represented. `Universal` is a bounded statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truant {
    Value(u64),
    Universal,
}

impl Truant {
    pub fn value(self) -> Option<u64> {
        match self {
            Truant::Value(v) => Some(v),
            Truant::Universal => None,
        }
    }

    pub fn is_universal(self) -> bool {
        matches!(self, Truant::Universal)
    }
}

impl fmt::Display for Truant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truant::Value(v) => write!(f, "{v}"),
            Truant::Universal => write!(f, "universal"),
        }
    }
}

// JSON: an integer, or the string "universal".
impl Serialize for Truant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Truant::Value(v) => s.serialize_u64(*v),
            Truant::Universal => s.serialize_str("universal"),
        }
    }
}

impl<'de> Deserialize<'de> for Truant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(v) if v >= 1 => Ok(Truant::Value(v)),
            Repr::Int(_) => Err(serde::de::Error::custom(
                "truant must be a positive integer",
            )),
            Repr::Str(s) if s == "universal" => Ok(Truant::Universal),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a positive integer or \"universal\", got \"{s}\""
            ))),
        }
    }
}

/// Exact membership over `{0, 1, ..., B}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationSet {
    bound: u64,
    words: Vec<u64>,
}

impl RepresentationSet {
    /// The set `{0}`: what the empty form represents.
    pub fn zero_only(bound: u64) -> Result<Self> {
        if bound > MAX_BOUND {
            return Err(Error::Resource(format!(
                "bound {bound} exceeds the bitset cap {MAX_BOUND}"
            )));
        }
        let mut words = vec![0u64; (bound as usize) / 64 + 1];
        words[0] = 1;
        Ok(Self { bound, words })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn contains(&self, k: u64) -> bool {
        k <= self.bound && (self.words[(k / 64) as usize] >> (k % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.bound).filter(move |&k| self.contains(k))
    }

    /// Integers in `[0, B]` that are not represented.
    pub fn missing(&self) -> Vec<u64> {
        (0..=self.bound).filter(|&k| !self.contains(k)).collect()
    }

    pub fn truant(&self) -> Truant {
        // bits above the bound are always clear
        match self.words.iter().position(|&w| w != u64::MAX) {
            Some(i) => {
                let k = i as u64 * 64 + (!self.words[i]).trailing_zeros() as u64;
                if k > self.bound {
                    Truant::Universal
                } else {
                    Truant::Value(k)
                }
            }
            None => Truant::Universal,
        }
    }

    /// `self ⊆ other` (both must share the bound).
    pub fn is_subset(&self, other: &Self) -> bool {
        self.bound == other.bound
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// Adds one variable with coefficient `a`: the sumset with `a·values`.
    /// `values` must be the sorted P_m values up to the bound.
    pub fn fold(&self, a: u64, values: &[u64]) -> Self {
        let mut out = vec![0u64; self.words.len()];
        for &v in values {
            let Some(shift) = v.checked_mul(a) else { break };
            if shift > self.bound {
                break;
            }
            or_shifted(&mut out, &self.words, shift as usize);
        }
        let mut set = Self {
            bound: self.bound,
            words: out,
        };
        set.clear_above_bound();
        set
    }

    fn clear_above_bound(&mut self) {
        let used = (self.bound % 64) + 1;
        if used < 64 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << used) - 1;
        }
    }
}

/// `dst |= src << shift` over little-endian word vectors of equal length.
fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let (word_shift, bit_shift) = (shift / 64, shift % 64);
    let n = dst.len();
    if word_shift >= n {
        return;
    }
    if bit_shift == 0 {
        for i in word_shift..n {
            dst[i] |= src[i - word_shift];
        }
    } else {
        dst[word_shift] |= src[0] << bit_shift;
        for (j, word) in dst[word_shift + 1..].iter_mut().enumerate() {
            *word |= (src[j + 1] << bit_shift) | (src[j] >> (64 - bit_shift));
        }
    }
}

/// Exact set of integers in `[0, B]` represented by `form`.
pub fn represented_set(form: &PolygonalForm, bound: u64) -> Result<RepresentationSet> {
    let values = polygonal_values_up_to(form.m(), bound)?;
    let mut set = RepresentationSet::zero_only(bound)?;
    for &a in form.coeffs() {
        set = set.fold(a, &values);
    }
    Ok(set)
}

/// Smallest positive integer in `[1, B]` the form misses.
pub fn truant(form: &PolygonalForm, bound: u64) -> Result<Truant> {
    if bound < 1 {
        return Err(Error::domain("truant needs a bound of at least 1"));
    }
    Ok(represented_set(form, bound)?.truant())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(m: u64, c: &[u64]) -> PolygonalForm {
        PolygonalForm::new(m, c.to_vec()).unwrap()
    }

    #[test]
    fn value_examples() {
        assert_eq!(polygonal_value(3, 4).unwrap(), 10);
        assert_eq!(polygonal_value(5, -2).unwrap(), 7);
        assert_eq!(polygonal_value(10, -1).unwrap(), 7);
        assert!(matches!(polygonal_value(2, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn values_up_to_examples() {
        assert_eq!(polygonal_values_up_to(3, 10).unwrap(), vec![0, 1, 3, 6, 10]);
        // P_8: x=0,1,-1,2,-2,3 -> 0,1,5,8,16,21
        assert_eq!(polygonal_values_up_to(8, 9).unwrap(), vec![0, 1, 5, 8]);
        assert_eq!(polygonal_values_up_to(12, 1).unwrap(), vec![0, 1]);
        assert_eq!(polygonal_values_up_to(4, 0).unwrap(), vec![0]);
    }

    #[test]
    fn represented_set_examples() {
        let s = represented_set(&form(3, &[1]), 10).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 1, 3, 6, 10]);
        let s = represented_set(&form(3, &[1, 1]), 8).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 6, 7]);
        let s = represented_set(&form(20, &[1]), 17).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 1, 17]);
    }

    #[test]
    fn truant_examples() {
        assert_eq!(truant(&form(3, &[1]), 100).unwrap(), Truant::Value(2));
        for m in [12, 13, 40] {
            assert_eq!(truant(&form(m, &[1, 1]), 100).unwrap(), Truant::Value(3));
            assert_eq!(truant(&form(m, &[1, 2, 4]), 100).unwrap(), Truant::Value(8));
        }
        assert_eq!(
            truant(&form(4, &[1, 1, 1, 1]), 1000).unwrap(),
            Truant::Universal
        );
    }

    #[test]
    fn bound_edges() {
        // bound at a word boundary and just past it
        for bound in [63, 64, 127, 128] {
            let s = represented_set(&form(4, &[1, 1, 1, 1]), bound).unwrap();
            assert_eq!(s.len() as u64, bound + 1);
            assert_eq!(s.truant(), Truant::Universal);
        }
        let s = RepresentationSet::zero_only(0).unwrap();
        assert!(s.contains(0));
        assert_eq!(s.truant(), Truant::Universal);
        assert!(matches!(
            RepresentationSet::zero_only(MAX_BOUND + 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn form_invariants() {
        let f = form(5, &[3, 1, 2]);
        assert_eq!(f.coeffs(), &[1, 2, 3]);
        assert_eq!(form(5, &[4, 6]).gcd(), 2);
        assert!(PolygonalForm::new(5, vec![]).is_err());
        assert!(PolygonalForm::new(5, vec![0, 1]).is_err());
        assert!(PolygonalForm::new(5, vec![1 << 31]).is_err());
        assert!(PolygonalForm::new(2, vec![1]).is_err());
    }

    #[test]
    fn truant_json() {
        assert_eq!(serde_json::to_string(&Truant::Value(7)).unwrap(), "7");
        assert_eq!(
            serde_json::to_string(&Truant::Universal).unwrap(),
            "\"universal\""
        );
        assert_eq!(
            serde_json::from_str::<Truant>("\"universal\"").unwrap(),
            Truant::Universal
        );
        assert!(serde_json::from_str::<Truant>("0").is_err());
        assert!(serde_json::from_str::<Truant>("\"many\"").is_err());
    }
}
