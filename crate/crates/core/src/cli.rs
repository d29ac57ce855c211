//! The `mgonal` command line.
//!
//! Exit codes: 0 success, 2 conformance failure, 3 resource cap, 64 usage.
//! `MGONAL_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::constructions::{guy_form, lower_bound_witness, verify_guy, DEFAULT_GUY_BOUND};
use crate::error::{Error, Result};
use crate::escalator::{
    build_tree, grow_tree, GammaEstimate, GammaKind, TreeConfig, DEFAULT_MAX_DEPTH,
    DEFAULT_NODE_CAP,
};
use crate::lattice::{admissible, ShiftedDiagonalLattice};
use crate::localdensity::classify_universality_pattern;
use crate::localdensity::{
    jordan_decompose, local_density_checked, tau_gauss_sum, tau_lemma_value, verify_case_bounds,
    write_report, ReportRow, UniversalityCase,
};
use crate::polygonal::DEFAULT_BOUND;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFORMANCE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
const EXIT_OTHER: i32 = 1;

/// Default depth cap for `gamma`; trees for small m finish far below it.
const DEFAULT_GAMMA_DEPTH: usize = 48;

#[derive(Debug, Parser)]
#[command(
    name = "mgonal",
    version,
    about = "Escalator trees, local densities and almost-universal forms for sums of generalized m-gonal numbers"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the escalator tree to a fixed depth and print a summary
    Tree(TreeArgs),
    /// Escalate until every branch is B-universal and print the largest truant
    Gamma(GammaArgs),
    /// Compare local density formulas with residue counts and write a CSV
    Density(DensityArgs),
    /// Check a form that should miss exactly one value
    Guy(GuyArgs),
    /// Evaluate a finite Gauss sum against its predicted value
    Tau(TauArgs),
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    /// Polygonal order m >= 3
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    pub m: u64,
    /// Maximum number of coefficients
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH, value_parser = positive_usize)]
    pub depth: usize,
    /// Representation bound B
    #[arg(long, default_value_t = DEFAULT_BOUND, value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: u64,
    /// Abort with exit code 3 past this many nodes
    #[arg(long, default_value_t = DEFAULT_NODE_CAP, value_parser = positive_usize)]
    pub node_cap: usize,
    /// Write the tree as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Polygonal order m >= 3
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    pub m: u64,
    /// Representation bound B
    #[arg(long, default_value_t = DEFAULT_BOUND, value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: u64,
    /// Depth at which escalation stops; the value is then a lower bound
    #[arg(long, default_value_t = DEFAULT_GAMMA_DEPTH, value_parser = positive_usize)]
    pub depth_cap: usize,
    /// Node count at which escalation stops; the value is then a lower bound
    #[arg(long, default_value_t = DEFAULT_NODE_CAP, value_parser = positive_usize)]
    pub node_cap: usize,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Diagonal gram entries, comma separated
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub gram: Vec<u64>,
    /// Conductor N of the shift
    #[arg(long = "N", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub conductor: u64,
    /// Shift numerator c, with ν = -(c/N)(1, ..., 1)
    #[arg(long, default_value_t = 0)]
    pub c: u64,
    /// Primes, comma separated
    #[arg(long = "p", value_delimiter = ',', required = true)]
    pub primes: Vec<u64>,
    /// Targets: an inclusive range `a..b` or a comma-separated list of rationals
    #[arg(long, default_value = "1..50")]
    pub h: TargetList,
    /// Exit with code 2 if any formula disagrees with the residue count
    #[arg(long)]
    pub strict: bool,
    /// Also check the case bounds for classified patterns
    #[arg(long)]
    pub bounds: bool,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct GuyArgs {
    /// Polygonal order m >= 6
    #[arg(long)]
    pub m: u64,
    /// The value the form should miss, 1 <= ℓ <= m - 4
    #[arg(long)]
    pub ell: u64,
    /// Verification window [0, B]
    #[arg(long, default_value_t = DEFAULT_GUY_BOUND)]
    pub bound: u64,
}

#[derive(Debug, Args)]
pub struct TauArgs {
    /// Prime p
    #[arg(long)]
    pub p: u64,
    /// Level t >= 1
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub t: u32,
    /// Unit α
    #[arg(long, default_value_t = 1)]
    pub alpha: u64,
    /// Conductor N
    #[arg(long = "N")]
    pub conductor: u64,
    /// Shift numerator c
    #[arg(long)]
    pub c: i64,
}

/// Targets for `density --h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetList(pub Vec<BigRational>);

impl FromStr for TargetList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: i64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad range start `{lo}`"))?;
            let hi: i64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad range end `{hi}`"))?;
            if lo > hi {
                return Err(format!("empty range {s}"));
            }
            return Ok(Self(
                (lo..=hi)
                    .map(|k| BigRational::from_integer(k.into()))
                    .collect(),
            ));
        }
        s.split(',')
            .map(parse_rational)
            .collect::<std::result::Result<_, _>>()
            .map(Self)
    }
}

fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|_| format!("bad rational `{s}`"))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|_| format!("bad rational `{s}`"))?;
    if den == BigInt::from(0) {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(num, den))
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Parse { .. } => EXIT_USAGE,
        Error::Resource(_) => EXIT_RESOURCE,
        _ => EXIT_OTHER,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("MGONAL_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::domain(format!(
            "MGONAL_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    // A second call in the same process keeps the existing pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = configure_threads().and_then(|()| dispatch(&config.command, out));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "mgonal: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Tree(args) => cmd_tree(args, out),
        Command::Gamma(args) => cmd_gamma(args, out),
        Command::Density(args) => cmd_density(args, out),
        Command::Guy(args) => cmd_guy(args, out),
        Command::Tau(args) => cmd_tau(args, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_tree(args: &TreeArgs, out: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let config = TreeConfig {
        bound: args.bound,
        max_depth: args.depth,
        node_cap: args.node_cap,
    };
    let tree = build_tree(args.m, &config)?;
    if let Some(path) = &args.out {
        let mut file = create(path)?;
        file.write_all(tree.to_json()?.as_bytes())?;
        file.flush()?;
    }
    writeln!(
        out,
        "m={} depth={} B={}: nodes={} depth-{}-nodes={} max-truant={} leaves={} {} ({:.2}s)",
        args.m,
        args.depth,
        args.bound,
        tree.node_count(),
        args.depth,
        tree.nodes_at_depth(args.depth).count(),
        tree.max_truant(),
        tree.leaf_count(),
        gamma_label(args.m, tree.gamma_estimate()),
        start.elapsed().as_secs_f64()
    )?;
    Ok(EXIT_OK)
}

fn gamma_label(m: u64, estimate: GammaEstimate) -> String {
    match estimate.kind {
        GammaKind::Empirical => format!("gamma_{m} = {} (empirical)", estimate.value),
        GammaKind::LowerBound => format!("gamma_{m} >= {} (lower bound)", estimate.value),
    }
}

pub fn cmd_gamma(args: &GammaArgs, out: &mut dyn Write) -> Result<i32> {
    let config = TreeConfig {
        bound: args.bound,
        max_depth: args.depth_cap,
        node_cap: args.node_cap,
    };
    let tree = grow_tree(args.m, &config)?;
    writeln!(
        out,
        "m={} B={}: {}",
        args.m,
        args.bound,
        gamma_label(args.m, tree.gamma_estimate())
    )?;
    Ok(EXIT_OK)
}

fn density_row(
    lattice: &ShiftedDiagonalLattice,
    p: u64,
    h: &BigRational,
    inject_fault: bool,
) -> Result<ReportRow> {
    if !admissible(lattice, h) {
        return Ok(ReportRow::skipped(lattice, p, h, "not admissible"));
    }
    match local_density_checked(lattice, h, p) {
        Ok(mut check) => {
            if inject_fault && check.oracle.is_some() {
                check.formula.value += BigRational::one();
            }
            Ok(ReportRow::from_check(lattice, p, h, &check))
        }
        Err(Error::Domain(reason)) => Ok(ReportRow::skipped(lattice, p, h, &reason)),
        Err(e) => Err(e),
    }
}

pub fn cmd_density(args: &DensityArgs, out: &mut dyn Write) -> Result<i32> {
    let lattice = ShiftedDiagonalLattice::new(args.gram.clone(), args.c, args.conductor)?;
    if let Some(&p) = args.primes.iter().find(|&&p| !crate::arith::is_prime(p)) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let cells: Vec<(u64, &BigRational)> = args
        .primes
        .iter()
        .flat_map(|&p| args.h.0.iter().map(move |h| (p, h)))
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(p, h)| density_row(&lattice, p, h, args.inject_fault))
        .collect::<Result<Vec<_>>>()?;

    if args.bounds && lattice.rank() >= 6 && lattice.rank() % 2 == 0 {
        for &p in &args.primes {
            if lattice.conductor() % p == 0 {
                continue;
            }
            let jd = jordan_decompose(p, lattice.gram())?;
            if classify_universality_pattern(&jd)? == UniversalityCase::Unclassified {
                continue;
            }
            let hs: Vec<BigRational> = args
                .h
                .0
                .iter()
                .filter(|h| {
                    **h > BigRational::from_integer(0.into())
                        && crate::arith::ord_rational(h, p) >= 0
                })
                .cloned()
                .collect();
            for bound in verify_case_bounds(&jd, &hs)? {
                rows.push(ReportRow::from_bound(&lattice, p, &bound));
            }
        }
    }

    match &args.out {
        Some(path) => {
            let mut file = create(path)?;
            write_report(&mut file, &rows)?;
            file.flush()?;
        }
        None => write_report(&mut *out, &rows)?,
    }
    let failures = rows.iter().filter(|r| !r.passed()).count();
    let checked = rows.iter().filter(|r| r.pass != "skipped").count();
    if args.out.is_some() {
        writeln!(
            out,
            "{checked} rows checked, {failures} failed, {} skipped",
            rows.len() - checked
        )?;
    }
    Ok(if args.strict && failures > 0 {
        EXIT_CONFORMANCE
    } else {
        EXIT_OK
    })
}

pub fn cmd_guy(args: &GuyArgs, out: &mut dyn Write) -> Result<i32> {
    let gf = guy_form(args.m, args.ell)?;
    let report = verify_guy(&gf, args.bound)?;
    let witness = lower_bound_witness(args.m, args.ell)?;
    writeln!(out, "{}", report.summary())?;
    writeln!(
        out,
        "{} is {}a sum of {} generalized {}-gonal numbers",
        args.ell,
        if witness { "not " } else { "" },
        args.ell - 1,
        args.m
    )?;
    Ok(if report.pass && witness {
        EXIT_OK
    } else {
        EXIT_CONFORMANCE
    })
}

pub fn cmd_tau(args: &TauArgs, out: &mut dyn Write) -> Result<i32> {
    let value = tau_gauss_sum(args.p, args.t, args.alpha, args.conductor, args.c)?;
    let predicted = tau_lemma_value(args.p, args.t, args.conductor);
    let (verdict, code) = match predicted {
        Some(v) if (value - num_complex::Complex64::new(v as f64, 0.0)).norm() < 1e-9 => {
            (format!("predicted {v}: PASS"), EXIT_OK)
        }
        Some(v) => (format!("predicted {v}: FAIL"), EXIT_CONFORMANCE),
        None => ("no prediction (p does not divide N)".to_string(), EXIT_OK),
    };
    writeln!(
        out,
        "tau_{}(α={} / {}^{}) = {:.12} {:+.12}i, {verdict}",
        args.p, args.alpha, args.p, args.t, value.re, value.im
    )?;
    Ok(code)
}

/// Runs against the real stdout and stderr.
pub fn main_with_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("mgonal").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn targets_parse() {
        assert_eq!(TargetList::from_str("1..3").unwrap().0.len(), 3);
        let list = TargetList::from_str("10/3, 8").unwrap();
        assert_eq!(list.0[0], BigRational::new(10.into(), 3.into()));
        assert!(TargetList::from_str("3..1").is_err());
        assert!(TargetList::from_str("1/0").is_err());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["tree", "--m", "2"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["guy", "--m", "6", "--ell", "5"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["tree", "--m", "5", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn guy_line() {
        let (code, out, _) = run_args(&["guy", "--m", "6", "--ell", "2", "--bound", "2000"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("misses exactly {2}: PASS"), "{out}");
    }

    #[test]
    fn tree_node_cap_is_a_resource_error() {
        let (code, _, err) = run_args(&[
            "tree",
            "--m",
            "5",
            "--depth",
            "4",
            "--bound",
            "2000",
            "--node-cap",
            "3",
        ]);
        assert_eq!(code, EXIT_RESOURCE, "{err}");
    }
}
