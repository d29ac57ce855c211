//! CSV rows for density sweeps and bound checks.

use std::io::Write;

use num_rational::BigRational;
use serde::Serialize;

use super::{BoundRow, DensityCheck};
use crate::error::Result;
use crate::lattice::ShiftedDiagonalLattice;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub p: u64,
    /// Gram entries joined by `;`.
    pub gram: String,
    #[serde(rename = "N")]
    pub conductor: u64,
    pub c: u64,
    pub h_num: String,
    pub h_den: String,
    pub method: String,
    pub value_num: String,
    pub value_den: String,
    pub oracle_num: String,
    pub oracle_den: String,
    /// `true`, `false` or `skipped`.
    pub pass: String,
}

fn join(gram: &[u64]) -> String {
    gram.iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn split(x: &BigRational) -> (String, String) {
    (x.numer().to_string(), x.denom().to_string())
}

impl ReportRow {
    fn base(lattice: &ShiftedDiagonalLattice, p: u64, h: &BigRational) -> Self {
        let (h_num, h_den) = split(h);
        Self {
            p,
            gram: join(lattice.gram()),
            conductor: lattice.conductor(),
            c: lattice.shift_num(),
            h_num,
            h_den,
            method: String::new(),
            value_num: String::new(),
            value_den: String::new(),
            oracle_num: String::new(),
            oracle_den: String::new(),
            pass: String::new(),
        }
    }

    pub fn from_check(
        lattice: &ShiftedDiagonalLattice,
        p: u64,
        h: &BigRational,
        check: &DensityCheck,
    ) -> Self {
        let mut row = Self::base(lattice, p, h);
        row.method = check.formula.method.to_string();
        (row.value_num, row.value_den) = split(&check.formula.value);
        if let Some(oracle) = &check.oracle {
            (row.oracle_num, row.oracle_den) = split(&oracle.value);
        }
        row.pass = check.agrees().to_string();
        row
    }

    /// A target the formulas do not accept (not admissible, or not `p`-integral).
    pub fn skipped(
        lattice: &ShiftedDiagonalLattice,
        p: u64,
        h: &BigRational,
        reason: &str,
    ) -> Self {
        let mut row = Self::base(lattice, p, h);
        row.method = reason.to_string();
        row.pass = "skipped".into();
        row
    }

    /// A bound check; `value` holds the bounded quantity.
    pub fn from_bound(lattice: &ShiftedDiagonalLattice, p: u64, bound: &BoundRow) -> Self {
        let mut row = Self::base(lattice, p, &BigRational::from_integer(0.into()));
        (row.h_num, row.h_den) = bound.h.as_ref().map(split).unwrap_or_default();
        row.method = format!("bound {}", bound.check);
        (row.value_num, row.value_den) = split(&bound.value);
        row.pass = bound.pass.to_string();
        row
    }

    pub fn passed(&self) -> bool {
        self.pass != "false"
    }
}

pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
