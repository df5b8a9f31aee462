//! Command-line surface: expansion, decomposition, γ tables, verification
//! sweeps, bound comparison, and the two reference tables.
//!
//! Exit codes: 0 when every check passed, 1 when a verification failure was
//! found, 2 for usage or configuration errors. All big integers print as
//! decimal strings in every format, and re-running a command with the same
//! flags yields identical output (wall-time fields aside).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::combinatorics::gamma_binary;
use crate::error::Result;
use crate::phi_poly::{u2_iterate, PhiPolynomial, Strategy};
use crate::series::LaurentSeries;
use crate::verify::{self, GridRecord, VerificationReport};
use crate::workspace::Workspace;

/// Environment variable naming the directory relative `--output` paths are
/// resolved against.
pub const OUTPUT_DIR_ENV: &str = "PHI2_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "phi2",
    version,
    about = "Exact q-series engine and congruence checker for the level-2 Hauptmodul"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to this file instead of stdout; relative paths resolve
    /// against $PHI2_OUTPUT_DIR when it is set
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Zero-remainder window required when certifying decompositions
    #[arg(long, global = true, default_value_t = 8)]
    guard: i64,

    /// Worker threads for sweeps (0 picks the rayon default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Direct,
    Algebraic,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Expand phi^m as a q-series
    Phi {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        m: u32,
        /// Exclusive exponent bound for the expansion
        #[arg(long, default_value_t = 16)]
        precision: i64,
    },
    /// Decompose U_2^alpha phi^m as a polynomial in phi
    U2 {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        m: u32,
        #[arg(long, default_value_t = 1)]
        alpha: u32,
        #[arg(long, value_enum, default_value_t = StrategyArg::Algebraic)]
        strategy: StrategyArg,
    },
    /// Tabulate gamma(m, alpha) for one m
    Gamma {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        #[arg(long, default_value_t = 9)]
        alpha_max: u32,
    },
    /// Run a verification sweep
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Tabulate the refined bound against the classical one
    CompareBounds {
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
        m_max: u32,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        alpha_max: u32,
    },
    /// Reproduce the reference tables
    Tables {
        #[command(subcommand)]
        table: TableCommand,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// nu_2(a(m, 2^alpha n')) >= 3 gamma(m, alpha) over the (m, n) grid
    Congruence {
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        m_max: u64,
        #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
    },
    /// The refined valuation bound over the support of U_2^alpha phi^m
    Bound {
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
        m_max: u32,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        alpha_max: u32,
        #[arg(long, value_enum, default_value_t = StrategyArg::Algebraic)]
        strategy: StrategyArg,
    },
    /// Support endpoints and coefficient integrality of U_2 phi^m
    Support {
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
        m_max: u32,
    },
    /// Triple-route parity of a(1, n) against odd squares
    Parity {
        #[arg(long, default_value_t = 2048, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
    },
    /// Newton bridge, ring membership, modular-equation residual, half-grid
    Identities {
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
        newton_m_max: u32,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        halfgrid_m_max: u32,
        #[arg(long, default_value_t = 2000)]
        w_precision: i64,
    },
}

#[derive(Subcommand)]
enum TableCommand {
    /// All odd coefficients of phi up to n-max
    OddCoeffs {
        #[arg(long, default_value_t = 225, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
    },
    /// The gamma(40, alpha) row with its closed-form tail
    Gamma40,
}

/// Parses and dispatches, writing primary output to stdout (or `--output`).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout();
    run_to_writer(args, &mut stdout)
}

/// Same as [`run`] but with the stdout stream injected, for tests.
pub fn run_to_writer<I, T, W: Write>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // best effort: the global pool may already exist
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok((text, code)) => match deliver(&cli, text, out) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("phi2: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("phi2: {e}");
            2
        }
    }
}

fn deliver<W: Write>(cli: &Cli, text: String, out: &mut W) -> Result<()> {
    match &cli.output {
        None => {
            out.write_all(text.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let resolved = if path.is_relative() {
                match std::env::var_os(OUTPUT_DIR_ENV) {
                    Some(dir) => PathBuf::from(dir).join(path),
                    None => path.clone(),
                }
            } else {
                path.clone()
            };
            std::fs::write(resolved, text)?;
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(String, i32)> {
    let ws = Workspace::with_guard(cli.guard);
    match &cli.command {
        Command::Phi { m, precision } => {
            let series = ws.phi_power(*m, *precision);
            Ok((render_series(cli.format, *m, &series), 0))
        }
        Command::U2 { m, alpha, strategy } => {
            match strategy {
                StrategyArg::Both => {
                    let direct = u2_iterate(*m, *alpha, Strategy::Direct, &ws)?;
                    let algebraic = u2_iterate(*m, *alpha, Strategy::Algebraic, &ws)?;
                    if direct != algebraic {
                        eprintln!("phi2: direct and algebraic U_2 iterates disagree at m={m}, alpha={alpha}");
                        return Ok((render_poly(cli.format, *m, *alpha, "both", &direct), 1));
                    }
                    Ok((render_poly(cli.format, *m, *alpha, "both", &direct), 0))
                }
                StrategyArg::Direct => {
                    let poly = u2_iterate(*m, *alpha, Strategy::Direct, &ws)?;
                    Ok((render_poly(cli.format, *m, *alpha, "direct", &poly), 0))
                }
                StrategyArg::Algebraic => {
                    let poly = u2_iterate(*m, *alpha, Strategy::Algebraic, &ws)?;
                    Ok((render_poly(cli.format, *m, *alpha, "algebraic", &poly), 0))
                }
            }
        }
        Command::Gamma { m, alpha_max } => Ok((render_gamma(cli.format, *m, *alpha_max), 0)),
        Command::Verify { check } => match check {
            VerifyCommand::Congruence { m_max, n_max } => {
                if n_max < m_max {
                    return Err(crate::error::Error::InvalidGrid {
                        detail: format!("n-max ({n_max}) must be at least m-max ({m_max})"),
                    });
                }
                let report = verify::verify_congruence(*m_max, *n_max, &ws);
                render_report(cli.format, report)
            }
            VerifyCommand::Bound {
                m_max,
                alpha_max,
                strategy,
            } => {
                let strategy = match strategy {
                    StrategyArg::Direct => Strategy::Direct,
                    _ => Strategy::Algebraic,
                };
                let report = verify::verify_valuation_bound(*m_max, *alpha_max, strategy, &ws)?;
                render_report(cli.format, report)
            }
            VerifyCommand::Support { m_max } => {
                let report = verify::verify_support(*m_max, &ws)?;
                render_report(cli.format, report)
            }
            VerifyCommand::Parity { n_max } => {
                let report = verify::verify_parity(*n_max, &ws);
                render_report(cli.format, report)
            }
            VerifyCommand::Identities {
                newton_m_max,
                halfgrid_m_max,
                w_precision,
            } => {
                let report =
                    verify::verify_identities(*newton_m_max, *halfgrid_m_max, *w_precision, &ws)?;
                render_report(cli.format, report)
            }
        },
        Command::CompareBounds { m_max, alpha_max } => {
            let report = verify::compare_bounds(*m_max, *alpha_max, &ws)?;
            render_report(cli.format, report)
        }
        Command::Tables { table } => match table {
            TableCommand::OddCoeffs { n_max } => {
                Ok((render_odd_coeffs(cli.format, *n_max, &ws), 0))
            }
            TableCommand::Gamma40 => Ok((render_gamma(cli.format, 40, 9), 0)),
        },
    }
}

fn render_series(format: Format, m: u32, series: &LaurentSeries) -> String {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct PhiOut<'a> {
                m: u32,
                series: &'a LaurentSeries,
            }
            let mut text = serde_json::to_string(&PhiOut { m, series }).expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("exponent,coefficient\n");
            for (e, c) in series.terms() {
                text.push_str(&format!("{e},{c}\n"));
            }
            text
        }
        Format::Markdown => {
            let mut text = format!("| n | a({m},n) |\n|---|---|\n");
            for (e, c) in series.terms() {
                text.push_str(&format!("| {e} | {c} |\n"));
            }
            text
        }
    }
}

fn render_poly(format: Format, m: u32, alpha: u32, strategy: &str, poly: &PhiPolynomial) -> String {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct PolyOut<'a> {
                m: u32,
                alpha: u32,
                strategy: &'a str,
                coeffs: &'a PhiPolynomial,
            }
            let mut text = serde_json::to_string(&PolyOut {
                m,
                alpha,
                strategy,
                coeffs: poly,
            })
            .expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("j,coefficient\n");
            for (j, d) in poly.terms() {
                text.push_str(&format!("{j},{d}\n"));
            }
            text
        }
        Format::Markdown => {
            let mut text = format!("| j | d({m},j,{alpha}) |\n|---|---|\n");
            for (j, d) in poly.terms() {
                text.push_str(&format!("| {j} | {d} |\n"));
            }
            text
        }
    }
}

/// Where the γ(m, ·) tail turns linear: for α at or past the index of the
/// leading binary digit of m, each increment of α raises γ by one, so
/// γ = α − c with c = r − γ(m, r).
fn gamma_tail(m: u64) -> (u32, i64) {
    let r = 64 - m.leading_zeros();
    let c = i64::from(r) - i64::from(gamma_binary(m, r));
    (r, c)
}

fn tail_expression(c: i64) -> String {
    if c > 0 {
        format!("alpha - {c}")
    } else if c < 0 {
        format!("alpha + {}", -c)
    } else {
        String::from("alpha")
    }
}

fn render_gamma(format: Format, m: u64, alpha_max: u32) -> String {
    let values: Vec<u32> = (0..=alpha_max).map(|a| gamma_binary(m, a)).collect();
    let (r, c) = gamma_tail(m);
    let tail = tail_expression(c);
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct GammaOut<'a> {
                m: u64,
                gamma: &'a [u32],
                tail_from_alpha: u32,
                tail_closed_form: &'a str,
            }
            let mut text = serde_json::to_string(&GammaOut {
                m,
                gamma: &values,
                tail_from_alpha: r,
                tail_closed_form: &tail,
            })
            .expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("alpha,gamma\n");
            for (a, g) in values.iter().enumerate() {
                text.push_str(&format!("{a},{g}\n"));
            }
            text.push_str(&format!("alpha >= {r},{tail}\n"));
            text
        }
        Format::Markdown => {
            let mut header = String::from("| alpha |");
            let mut sep = String::from("|---|");
            let mut row = format!("| gamma({m}, alpha) |");
            for (a, g) in values.iter().enumerate() {
                header.push_str(&format!(" {a} |"));
                sep.push_str("---|");
                row.push_str(&format!(" {g} |"));
            }
            header.push_str(" ... | alpha |");
            sep.push_str("---|---|");
            row.push_str(&format!(" ... | {tail} |"));
            format!("{header}\n{sep}\n{row}\n")
        }
    }
}

fn render_odd_coeffs(format: Format, n_max: u64, ws: &Workspace) -> String {
    let phi = ws.phi_power(1, n_max as i64 + 1);
    let odd: Vec<(i64, String)> = phi
        .terms()
        .filter(|(_, c)| c.bit(0))
        .map(|(e, c)| (e, c.to_string()))
        .collect();
    let even_count = n_max - odd.len() as u64;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Entry<'a> {
                n: i64,
                value: &'a str,
            }
            #[derive(Serialize)]
            struct OddOut<'a> {
                n_max: u64,
                odd: Vec<Entry<'a>>,
                even_count: u64,
            }
            let out = OddOut {
                n_max,
                odd: odd.iter().map(|(n, v)| Entry { n: *n, value: v }).collect(),
                even_count,
            };
            let mut text = serde_json::to_string(&out).expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("n,a(1 n)\n");
            for (n, v) in &odd {
                text.push_str(&format!("{n},{v}\n"));
            }
            text
        }
        Format::Markdown => {
            let mut text = String::from("| n | a(1,n) |\n|---|---|\n");
            for (n, v) in &odd {
                text.push_str(&format!("| {n} | {v} |\n"));
            }
            text.push_str(&format!(
                "\nAll other a(1,n) for n <= {n_max} are even ({even_count} coefficients).\n"
            ));
            text
        }
    }
}

fn render_report<R: GridRecord>(
    format: Format,
    report: VerificationReport<R>,
) -> Result<(String, i32)> {
    let code = if report.passed() { 0 } else { 1 };
    let text = match format {
        Format::Json => {
            let mut text = serde_json::to_string(&report).expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => report.to_csv(),
        Format::Markdown => {
            let mut text = format!(
                "# {}\n\ngrid: {}\n\n| points | failures | tight |\n|---|---|---|\n| {} | {} | {} |\n",
                report.theorem,
                report.grid,
                report.summary.points,
                report.summary.failures,
                report.summary.tight
            );
            for (k, v) in &report.extra {
                text.push_str(&format!("\n{k}: {v}\n"));
            }
            if !report.failures.is_empty() {
                text.push_str(&format!("\n## failures\n\n{}\n", R::csv_header()));
                for f in &report.failures {
                    text.push_str(&f.csv_row());
                    text.push('\n');
                }
            }
            text
        }
    };
    Ok((text, code))
}
