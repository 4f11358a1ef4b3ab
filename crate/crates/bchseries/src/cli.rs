//! Command-line front end.
//!
//! Four subcommands: `compute` (truncated series on a matrix-pair fixture),
//! `verify` (the cross-check battery), `sweep` (truncation error against an
//! oracle over a t grid, with fitted slopes), and `coeffs` (exact coefficient
//! tables). Exit codes: 0 success, 1 input error, 2 numerical failure,
//! 3 verification failure. Outputs are deterministic for a fixed seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::coeffs::{
    compositions, CoeffTable, DEFAULT_DELTA, MAX_COMPOSITION_ORDER, MAX_TABLE_ORDER,
};
use crate::error::Error;
use crate::matops::{BchEngine, BchForm, MatrixPair, DEFAULT_EPSILON, DEFAULT_ORDER_CAP};
use crate::oracle::{convergence_slope, direct_z, direct_z_sweep, SweepGrid};
use crate::verify::{run_all, VerifyReport};
use crate::{CMatrix, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bchseries",
    about = "Truncated log(e^A e^{2B} e^A) as a power series in B, with oracles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the truncated series on a matrix-pair fixture.
    Compute(ComputeArgs),
    /// Run the cross-check battery.
    Verify(VerifyArgs),
    /// Sweep truncation error over t and fit convergence slopes.
    Sweep(SweepArgs),
    /// Dump exact coefficient tables and composition lists.
    Coeffs(CoeffsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Symmetric,
    Standard,
}

impl From<FormArg> for BchForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Symmetric => BchForm::Symmetric,
            FormArg::Standard => BchForm::Standard,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Seed for every random draw; fixed seed means byte-identical output.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Degeneracy threshold on |sinh| of hyperbolic arguments.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Perturbation scale of the degeneracy fallback.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Matrix-pair fixture (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation order N.
    #[arg(long)]
    pub order: usize,
    /// Override the form recorded in the fixture.
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    /// Also compute the direct logarithm and report the truncation error.
    #[arg(long, default_value_t = false)]
    pub compare_oracle: bool,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Highest order exercised by the convolution-identity check.
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    pub order: usize,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Matrix-pair fixture (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Highest truncation order to sweep.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Log-spaced grid as lo:hi:count.
    #[arg(long, default_value = "1e-3:1e-1:8")]
    pub t_grid: String,
    /// Override the form recorded in the fixture.
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    /// Table order (at most 32).
    #[arg(long)]
    pub order: usize,
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Deserialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
struct PairJson {
    dim: usize,
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "B")]
    b: MatrixJson,
    form: String,
}

fn grid_to_matrix(dim: usize, m: &MatrixJson, label: &str) -> Result<CMatrix, Error> {
    let check_shape = |rows: &Vec<Vec<f64>>| -> Result<(), Error> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input(format!("{label} is not {dim}x{dim}")));
        }
        Ok(())
    };
    check_shape(&m.re)?;
    if let Some(im) = &m.im {
        check_shape(im)?;
    }
    let out = CMatrix::from_fn(dim, dim, |i, j| {
        C64::new(m.re[i][j], m.im.as_ref().map_or(0.0, |im| im[i][j]))
    });
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input(format!("{label} has non-finite entries")));
    }
    Ok(out)
}

fn load_pair(path: &Path, form_override: Option<FormArg>) -> Result<MatrixPair, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    let parsed: PairJson = serde_json::from_str(&text)
        .map_err(|e| Error::input(format!("malformed fixture {}: {e}", path.display())))?;
    let form = match form_override {
        Some(f) => f.into(),
        None => match parsed.form.as_str() {
            "symmetric" => BchForm::Symmetric,
            "standard" => BchForm::Standard,
            other => {
                return Err(Error::input(format!(
                    "form must be \"symmetric\" or \"standard\", got {other:?}"
                )))
            }
        },
    };
    let a = grid_to_matrix(parsed.dim, &parsed.a, "A")?;
    let b = grid_to_matrix(parsed.dim, &parsed.b, "B")?;
    MatrixPair::new(a, b, form)
}

fn parse_t_grid(spec: &str) -> Result<SweepGrid, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::input(format!(
            "t-grid must be lo:hi:count, got {spec:?}"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::input(format!("bad t-grid lower bound {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::input(format!("bad t-grid upper bound {:?}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::input(format!("bad t-grid count {:?}", parts[2])))?;
    SweepGrid::log_spaced(lo, hi, count)
}

/// 17 significant digits, locale-free; round-trips f64 exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn matrix_json(m: &CMatrix) -> serde_json::Value {
    let d = m.nrows();
    let re: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)].re).collect())
        .collect();
    let im: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)].im).collect())
        .collect();
    json!({ "re": re, "im": im })
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Error::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

fn fail(stage: &str, err: &Error) -> i32 {
    eprintln!("error[{stage}]: {err}");
    exit_code_for(err)
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Compute(args) => run_compute(args),
        Command::Verify(args) => run_verify(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Coeffs(args) => run_coeffs(args),
    }
}

fn build_engine(common: &CommonOpts) -> Result<BchEngine, Error> {
    BchEngine::new(common.delta, common.epsilon)
}

fn run_compute(args: ComputeArgs) -> i32 {
    if args.order > DEFAULT_ORDER_CAP {
        return fail(
            "parse",
            &Error::input(format!(
                "order {} exceeds the cap {DEFAULT_ORDER_CAP}",
                args.order
            )),
        );
    }
    let engine = match build_engine(&args.common) {
        Ok(e) => e,
        Err(e) => return fail("parse", &e),
    };
    let pair = match load_pair(&args.input, args.form) {
        Ok(p) => p,
        Err(e) => return fail("parse", &e),
    };
    let form = pair.form;
    let (a, b) = pair.into_symmetric();
    let mut report = match engine.bch_truncated(&a, &b, args.order) {
        Ok(r) => r,
        Err(e) => return fail("truncate", &e),
    };
    if args.compare_oracle {
        match direct_z(&a, &b) {
            Ok(exact) => report.oracle_error = Some((&report.z - exact).norm()),
            Err(e) => return fail("oracle", &e),
        }
    }

    let content = match args.common.format {
        OutputFormat::Json => {
            let doc = json!({
                "command": "compute",
                "form": match form { BchForm::Symmetric => "symmetric", BchForm::Standard => "standard" },
                "dim": report.z.nrows(),
                "order": report.order,
                "term_norms": report.term_norms,
                "fallback_count": report.fallback_count,
                "oracle_error": report.oracle_error,
                "z": matrix_json(&report.z),
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("record,i,j,value_re,value_im\n");
            let d = report.z.nrows();
            for i in 0..d {
                for j in 0..d {
                    let z = report.z[(i, j)];
                    let _ = writeln!(s, "z,{i},{j},{},{}", fmt_f64(z.re), fmt_f64(z.im));
                }
            }
            for (k, norm) in report.term_norms.iter().enumerate() {
                let _ = writeln!(s, "term_norm,{},,{},", k + 1, fmt_f64(*norm));
            }
            let _ = writeln!(s, "fallback_count,,,{},", report.fallback_count);
            if let Some(err) = report.oracle_error {
                let _ = writeln!(s, "oracle_error,,,{},", fmt_f64(err));
            }
            s
        }
    };
    match write_output(args.common.output.as_deref(), &content) {
        Ok(()) => EXIT_OK,
        Err(e) => fail("write", &e),
    }
}

fn verify_report_content(report: &VerifyReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let checks: Vec<serde_json::Value> = report
                .checks
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "points": c.points,
                        "failures": c.failures,
                        "rejected": c.rejected,
                        "max_rel_err": c.max_rel_err,
                        "tol": c.tol,
                        "status": c.status(),
                    })
                })
                .collect();
            let doc = json!({
                "command": "verify",
                "seed": report.seed,
                "max_convolution_order": report.max_convolution_order,
                "checks": checks,
                "status": if report.all_passed() { "pass" } else { "fail" },
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("check,points,failures,rejected,max_rel_err,tol,status\n");
            for c in &report.checks {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    c.name,
                    c.points,
                    c.failures,
                    c.rejected,
                    fmt_f64(c.max_rel_err),
                    fmt_f64(c.tol),
                    c.status()
                );
            }
            s
        }
    }
}

fn run_verify(args: VerifyArgs) -> i32 {
    if args.order > DEFAULT_ORDER_CAP {
        return fail(
            "parse",
            &Error::input(format!(
                "order {} exceeds the cap {DEFAULT_ORDER_CAP}",
                args.order
            )),
        );
    }
    let engine = match build_engine(&args.common) {
        Ok(e) => e,
        Err(e) => return fail("parse", &e),
    };
    let report = run_all(&engine, args.common.seed, args.order.max(1));
    let content = verify_report_content(&report, args.common.format);
    if let Err(e) = write_output(args.common.output.as_deref(), &content) {
        return fail("write", &e);
    }
    if report.all_passed() {
        EXIT_OK
    } else {
        for c in report.checks.iter().filter(|c| !c.passed()) {
            eprintln!(
                "verify: {} {} ({} failures, {} singularity rejections)",
                c.name,
                c.status(),
                c.failures,
                c.rejected
            );
        }
        EXIT_VERIFICATION
    }
}

fn run_sweep(args: SweepArgs) -> i32 {
    if args.order == 0 || args.order > DEFAULT_ORDER_CAP {
        return fail(
            "parse",
            &Error::input(format!(
                "order must be in 1..={DEFAULT_ORDER_CAP}, got {}",
                args.order
            )),
        );
    }
    let engine = match build_engine(&args.common) {
        Ok(e) => e,
        Err(e) => return fail("parse", &e),
    };
    let grid = match parse_t_grid(&args.t_grid) {
        Ok(g) => g,
        Err(e) => return fail("parse", &e),
    };
    let pair = match load_pair(&args.input, args.form) {
        Ok(p) => p,
        Err(e) => return fail("parse", &e),
    };
    let (a, b) = pair.into_symmetric();

    // the per-order terms are homogeneous in B, so one evaluation serves the
    // whole sweep: Z_N(A, tB) = 2A + Σ t^k T_k
    let (terms, _fallbacks) = match engine.order_terms(&a, &b, args.order) {
        Ok(v) => v,
        Err(e) => return fail("truncate", &e),
    };
    let (used_grid, logs, halvings) = match direct_z_sweep(&a, &b, &grid, 3) {
        Ok(v) => v,
        Err(e) => return fail("oracle", &e),
    };
    if halvings > 0 {
        eprintln!("note: t grid halved {halvings} time(s) to stay inside the principal branch");
    }

    let two_a = a.scale(2.0);
    let mut rows = String::from("t,order,abs_err\n");
    let mut slopes = Vec::new();
    for order in 1..=args.order {
        let mut pairs = Vec::with_capacity(used_grid.len());
        for (idx, &t) in used_grid.values().iter().enumerate() {
            let mut z = two_a.clone();
            let mut tk = 1.0;
            for term in terms.iter().take(order) {
                tk *= t;
                z += term.scale(tk);
            }
            let err = (z - &logs[idx]).norm();
            let _ = writeln!(rows, "{},{},{}", fmt_f64(t), order, fmt_f64(err));
            pairs.push((t, err));
        }
        match convergence_slope(&pairs) {
            Ok(slope) => slopes.push((order, slope)),
            Err(e) => return fail("slope", &e),
        }
    }
    for (order, slope) in &slopes {
        let _ = writeln!(rows, "summary,{},{}", order, fmt_f64(*slope));
    }
    match write_output(args.common.output.as_deref(), &rows) {
        Ok(()) => EXIT_OK,
        Err(e) => fail("write", &e),
    }
}

fn run_coeffs(args: CoeffsArgs) -> i32 {
    if args.order == 0 || args.order > MAX_TABLE_ORDER {
        return fail(
            "parse",
            &Error::input(format!(
                "order must be in 1..={MAX_TABLE_ORDER}, got {}",
                args.order
            )),
        );
    }
    let table = match CoeffTable::new(args.order) {
        Ok(t) => t,
        Err(e) => return fail("table", &e),
    };
    let t_strings: Vec<String> = (0..=args.order).map(|r| table.t(r).to_string()).collect();
    let a_strings: Vec<String> = (1..=args.order).map(|r| table.a(r).to_string()).collect();

    let listed = args.order.min(MAX_COMPOSITION_ORDER);
    let mut comp_entries = Vec::new();
    for r in 1..=listed {
        let comps = match compositions(r) {
            Ok(c) => c,
            Err(e) => return fail("compositions", &e),
        };
        let lists: Vec<Vec<u32>> = comps.iter().map(|c| c.parts().to_vec()).collect();
        comp_entries.push(json!({ "r": r, "count": lists.len(), "parts": lists }));
    }
    let counts: Vec<serde_json::Value> = (1..=args.order)
        .map(|r| json!({ "r": r, "count": 1u64 << (r - 1) }))
        .collect();

    let doc = json!({
        "command": "coeffs",
        "order": args.order,
        "t": t_strings,
        "a": a_strings,
        "compositions": comp_entries,
        "composition_counts": counts,
    });
    let mut content = serde_json::to_string_pretty(&doc).expect("serialize");
    content.push('\n');
    match write_output(args.common.output.as_deref(), &content) {
        Ok(()) => EXIT_OK,
        Err(e) => fail("write", &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_grid_parsing() {
        let g = parse_t_grid("1e-3:1e-1:8").unwrap();
        assert_eq!(g.len(), 8);
        assert!((g.values()[0] - 1e-3).abs() < 1e-18);
        assert!((g.values()[7] - 1e-1).abs() < 1e-12);
        assert!(parse_t_grid("1e-3:1e-1").is_err());
        assert!(parse_t_grid("1e-3:1e-1:0").is_err());
        assert!(parse_t_grid("abc:1:4").is_err());
    }

    #[test]
    fn f64_formatting_is_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }
}
