//! Forms that miss exactly one value, and the witnesses for `γ_m >= m - 4`.
//!
//! For `m >= 6` and `1 <= ℓ <= m - 4` the form with `ℓ - 1` ones, `m` copies
//! of `ℓ + 1` and one `2ℓ + 1` represents every nonnegative integer except
//! `ℓ`. Its escalator path therefore has truant `ℓ` at some node, which gives
//! `γ_m >= m - 4`. Both facts are checked on a finite window `[0, B]`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polygonal::{represented_set, PolygonalForm};

/// Default verification window.
pub const DEFAULT_GUY_BOUND: u64 = 5000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuyForm {
    m: u64,
    ell: u64,
    form: PolygonalForm,
}

impl GuyForm {
    pub fn m(&self) -> u64 {
        self.m
    }

    /// The single value the form misses.
    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn form(&self) -> &PolygonalForm {
        &self.form
    }
}

fn check_range(m: u64, ell: u64) -> Result<()> {
    if m < 6 {
        return Err(Error::domain(format!("m = {m} must be at least 6")));
    }
    if ell == 0 || ell > m - 4 {
        return Err(Error::domain(format!(
            "ℓ = {ell} must lie in [1, {}]",
            m - 4
        )));
    }
    Ok(())
}

pub fn guy_form(m: u64, ell: u64) -> Result<GuyForm> {
    check_range(m, ell)?;
    let mut coeffs = vec![1; (ell - 1) as usize];
    coeffs.extend(std::iter::repeat_n(ell + 1, m as usize));
    coeffs.push(2 * ell + 1);
    Ok(GuyForm {
        m,
        ell,
        form: PolygonalForm::new(m, coeffs)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuyReport {
    pub m: u64,
    pub ell: u64,
    pub bound: u64,
    /// Positive integers in `[1, bound]` the form does not represent.
    pub missing: Vec<u64>,
    /// `missing == [ℓ]`.
    pub pass: bool,
}

impl GuyReport {
    /// `misses exactly {5}: PASS`, or the actual missing set on failure.
    pub fn summary(&self) -> String {
        let listed: Vec<String> = self.missing.iter().map(u64::to_string).collect();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "m={} ℓ={} B={}: misses exactly {{{}}}: {verdict}",
            self.m,
            self.ell,
            self.bound,
            listed.join(",")
        )
    }
}

pub fn verify_guy(gf: &GuyForm, bound: u64) -> Result<GuyReport> {
    if bound <= gf.ell {
        return Err(Error::domain(format!(
            "bound {bound} must exceed ℓ = {}",
            gf.ell
        )));
    }
    let missing = represented_set(&gf.form, bound)?.missing();
    let pass = missing == [gf.ell];
    Ok(GuyReport {
        m: gf.m,
        ell: gf.ell,
        bound,
        missing,
        pass,
    })
}

/// Whether `ℓ` is not a sum of `ℓ - 1` generalized `m`-gonal numbers.
pub fn lower_bound_witness(m: u64, ell: u64) -> Result<bool> {
    check_range(m, ell)?;
    let form = if ell == 1 {
        PolygonalForm::empty(m)?
    } else {
        PolygonalForm::new(m, vec![1; (ell - 1) as usize])?
    };
    Ok(!represented_set(&form, ell)?.contains(ell))
}

/// One grid cell: the Guy check and the witness for `(m, ℓ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridEntry {
    pub report: GuyReport,
    pub witness: bool,
}

/// Every `(m, ℓ)` with `m` in `ms` and `1 <= ℓ <= m - 4`, in the order of
/// `ms` and then increasing `ℓ`.
pub fn verify_grid(ms: impl IntoIterator<Item = u64>, bound: u64) -> Result<Vec<GridEntry>> {
    let cells: Vec<(u64, u64)> = ms
        .into_iter()
        .filter(|&m| m >= 6)
        .flat_map(|m| (1..=m - 4).map(move |l| (m, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(m, ell)| {
            let report = verify_guy(&guy_form(m, ell)?, bound)?;
            Ok(GridEntry {
                report,
                witness: lower_bound_witness(m, ell)?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct GuyRow<'a> {
    m: u64,
    #[serde(rename = "ℓ")]
    ell: u64,
    #[serde(rename = "B")]
    bound: u64,
    missing_values: &'a str,
    pass: bool,
}

pub fn write_guy_report<W: Write>(out: W, reports: &[GuyReport]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in reports {
        let missing: Vec<String> = r.missing.iter().map(u64::to_string).collect();
        writer.serialize(GuyRow {
            m: r.m,
            ell: r.ell,
            bound: r.bound,
            missing_values: &missing.join(";"),
            pass: r.pass,
        })?;
    }
    writer.flush()?;
    Ok(())
}
