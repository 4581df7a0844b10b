//! Command-line front end. `run` returns the process exit code so the whole
//! surface can be exercised in-process by tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifr::{solve_ifr, IfrConfig};
use crate::lc::{solve_lc, RootScanConfig};
use crate::moment::{binomial_to_power, BinomialMomentVector, Direction, Distribution, Instance};
use crate::oracle::{certify, OracleConfig};
use crate::result::{BoundResult, Shape};
use crate::shape::{feasibility_report, SHAPE_TOL};
use crate::unimodal::{solve_unimodal, UnimodalConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "momentbound",
    version,
    about = "Sharp probability bounds from two moments under shape constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a bound and its extremal distribution.
    Solve(SolveArgs),
    /// Reproduce the benchmark table of unimodal and log-concave bounds.
    Table1 {
        /// Emit CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Convert binomial moments `S0,S1,S2` to power moments.
    Convert {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        binomial: Vec<f64>,
    },
    /// Check a distribution (or a solver output) against an instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// JSON with a `mass` array, or a `solve` output with a `witness`.
        #[arg(long)]
        distribution: PathBuf,
        #[arg(long, default_value_t = SHAPE_TOL)]
        tol: f64,
    },
    /// Cross-check a `solve` output with the grid oracle and random probes.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub shape: Shape,
    #[arg(long)]
    pub input: PathBuf,
    /// Overrides the direction stored in the instance.
    #[arg(long)]
    pub direction: Option<Direction>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Moment residual a candidate must meet.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Initial alpha grid size of the LC root scan.
    #[arg(long)]
    pub scan_points: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Accepted for interface symmetry; the solvers are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&std::fs::read_to_string(path)?)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn solve(inst: &Instance, args: &SolveArgs) -> Result<BoundResult> {
    let inst = match args.direction {
        Some(d) => inst.with_direction(d),
        None => inst.clone(),
    };
    match args.shape {
        Shape::Lc => {
            let mut cfg = RootScanConfig {
                threads: args.threads,
                ..Default::default()
            };
            if let Some(t) = args.tol {
                cfg.moment_tol = t;
            }
            if let Some(p) = args.scan_points {
                cfg.scan_points = p;
                cfg.max_scan_points = cfg.max_scan_points.max(p);
            }
            solve_lc(&inst, &cfg)
        }
        Shape::Ifr => {
            let mut cfg = IfrConfig {
                threads: args.threads,
                ..Default::default()
            };
            if let Some(t) = args.tol {
                cfg.moment_tol = t;
            }
            solve_ifr(&inst, &cfg)
        }
        Shape::Unimodal => solve_unimodal(
            &inst,
            &UnimodalConfig {
                threads: args.threads,
            },
        ),
    }
}

/// Shortest decimal rendering with at most twelve fractional digits.
pub fn format_number(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Instances of the benchmark table: `(n, S1, S2)` with objective `P(X >= 1)`.
pub const TABLE1_ROWS: [(usize, f64, f64); 6] = [
    (5, 1.9, 1.3),
    (5, 2.1, 1.3),
    (5, 1.9, 1.7),
    (11, 5.2, 13.1),
    (11, 4.6, 13.1),
    (11, 5.2, 15.1),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub s1: f64,
    pub s2: f64,
    pub unimodal_lb: f64,
    pub unimodal_ub: f64,
    pub lc_lb: f64,
    pub lc_ub: f64,
}

pub fn table1(threads: Option<usize>) -> Result<Vec<Table1Row>> {
    TABLE1_ROWS
        .iter()
        .map(|&(n, s1, s2)| {
            let min = Instance::binomial_tail(n, s1, s2, Direction::Min)?;
            let max = min.with_direction(Direction::Max);
            let lc_cfg = RootScanConfig {
                threads,
                ..Default::default()
            };
            let uni_cfg = UnimodalConfig { threads };
            Ok(Table1Row {
                n,
                s1,
                s2,
                unimodal_lb: solve_unimodal(&min, &uni_cfg)?.bound,
                unimodal_ub: solve_unimodal(&max, &uni_cfg)?.bound,
                lc_lb: solve_lc(&min, &lc_cfg)?.bound,
                lc_ub: solve_lc(&max, &lc_cfg)?.bound,
            })
        })
        .collect()
}

fn table_cell(v: f64) -> String {
    if (v - 1.0).abs() < 5e-9 {
        "1".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn render_table1(rows: &[Table1Row], csv: bool) -> String {
    let mut out = String::new();
    if csv {
        out.push_str("n,S1,S2,unimodal_lb,unimodal_ub,lc_lb,lc_ub\n");
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{:.8},{:.8},{:.8},{:.8}\n",
                r.n, r.s1, r.s2, r.unimodal_lb, r.unimodal_ub, r.lc_lb, r.lc_ub
            ));
        }
        return out;
    }
    out.push_str(&format!(
        "{:>4} {:>6} {:>6} | {:>11} {:>11} | {:>8} {:>8}\n",
        "n", "S1", "S2", "Unimodal LB", "Unimodal UB", "LC LB", "LC UB"
    ));
    out.push_str(&format!("{}\n", "-".repeat(66)));
    for r in rows {
        out.push_str(&format!(
            "{:>4} {:>6} {:>6} | {:>11} {:>11} | {:>8} {:>8}\n",
            r.n,
            r.s1,
            r.s2,
            table_cell(r.unimodal_lb),
            table_cell(r.unimodal_ub),
            table_cell(r.lc_lb),
            table_cell(r.lc_ub)
        ));
    }
    out
}

fn read_distribution(path: &Path) -> Result<(Distribution, Option<Shape>)> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("witness").is_some() {
        let r: BoundResult = serde_json::from_value(value)?;
        Ok((r.witness, Some(r.shape)))
    } else {
        Ok((serde_json::from_value(value)?, None))
    }
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    shape: Option<Shape>,
    passed: bool,
    report: crate::shape::FeasibilityReport,
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Solve(args) => {
            let inst = read_instance(&args.input)?;
            let result = solve(&inst, &args)?;
            let text = result.to_json()? + "\n";
            match &args.output {
                Some(p) => std::fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::Table1 { csv, threads } => {
            let rows = table1(threads)?;
            out.write_all(render_table1(&rows, csv).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Convert { binomial } => {
            let b = BinomialMomentVector::from_slice(&binomial)?;
            let q = binomial_to_power(&b);
            let line: Vec<String> = q.values().iter().map(|&v| format_number(v)).collect();
            writeln!(out, "{}", line.join(","))?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            input,
            distribution,
            tol,
        } => {
            let inst = read_instance(&input)?;
            let (x, shape) = read_distribution(&distribution)?;
            let report = feasibility_report(&inst, &x, tol);
            let shape_ok = match shape {
                Some(Shape::Lc) => report.verdicts.log_concave,
                Some(Shape::Ifr) => report.verdicts.ifr,
                Some(Shape::Unimodal) => report.verdicts.unimodal,
                None => true,
            };
            let passed = report.is_feasible() && shape_ok;
            out.write_all(
                to_json(&VerifyOutput {
                    shape,
                    passed,
                    report,
                })?
                .as_bytes(),
            )?;
            Ok(if passed { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Certify {
            input,
            against,
            trials,
            seed,
            threads,
        } => {
            let inst = read_instance(&input)?;
            let result: BoundResult = serde_json::from_str(&std::fs::read_to_string(against)?)?;
            let cfg = OracleConfig {
                threads,
                ..Default::default()
            };
            let cert = certify(&inst, &result, trials, seed, &cfg)?;
            out.write_all(to_json(&cert)?.as_bytes())?;
            Ok(if cert.passed {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            })
        }
    }
}

/// Parse `args` (program name first), run the command and return the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(4.5), "4.5");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(1.9), "1.9");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(2.0 * 1.3 + 1.9), "4.5");
    }

    #[test]
    fn convert_command() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            ["momentbound", "convert", "--binomial", "1,1.9,1.3"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 0);
        assert_eq!(String::from_utf8(out).unwrap(), "1,1.9,4.5\n");
    }

    #[test]
    fn parse_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(
                ["momentbound", "solve", "--shape", "nope"],
                &mut out,
                &mut err
            ),
            1
        );
        assert!(!err.is_empty());
    }
}
