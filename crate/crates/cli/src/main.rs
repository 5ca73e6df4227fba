//! `ellreg`: command-line front end for the verification suites.
//!
//! Exit codes: 0 when every check passes, 1 on a numerical failure, 2 on a
//! configuration error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ellreg_core::characters::DirichletCharacter;
use ellreg_core::elliptic::CurveModel;
use ellreg_core::mahler::{mahler_measure, BivariatePolynomial, MahlerControl};
use ellreg_core::munits::{unit_divisor_chi, unit_divisor_chihat};
use ellreg_core::verify::{all_pass, run_suite, Suite, VerifyConfig};
use ellreg_core::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "ellreg", version, about = "Numerical checks of explicit formulas for L(E, 2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named suite of checks and print one line per check.
    Verify {
        /// thm8, cor101, thm1, thm2, thm3, mahler, appendix or all.
        suite: String,
        /// Conductor of a registry curve (11 or 17).
        #[arg(long)]
        level: Option<u64>,
        /// Explicit model `a1,a2,a3,a4,a6,N` with N the conductor.
        #[arg(long, allow_hyphen_values = true)]
        curve: Option<String>,
        /// Override every tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Number of q-expansion coefficients.
        #[arg(long)]
        terms: Option<usize>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the cuspidal divisor of the unit attached to a character as JSON.
    Units {
        #[arg(long)]
        level: u64,
        /// Character label, e.g. `11:g=2,zeta5^1`.
        #[arg(long = "char")]
        character: String,
        /// Use the Fourier transform of the character.
        #[arg(long)]
        hat: bool,
    },
    /// Mahler measure of a polynomial given as `X^i Y^j: c` terms separated by `;`.
    Mahler {
        #[arg(long)]
        poly: String,
        /// Absolute tolerance of the outer quadrature.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Config(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(format!("{e:#}"))
    }
}

fn parse_curve(text: &str) -> Result<CurveModel, Failure> {
    let parts: Vec<i64> = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("--curve expects six integers, got {text:?}")))?;
    let [a1, a2, a3, a4, a6, n] = parts[..] else {
        return Err(Failure::Config(format!("--curve expects a1,a2,a3,a4,a6,N, got {text:?}")));
    };
    if n <= 0 {
        return Err(Failure::Config("conductor must be positive".into()));
    }
    Ok(CurveModel::new(a1, a2, a3, a4, a6, n as u64)?)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    suite: &str,
    level: Option<u64>,
    curve: Option<String>,
    tolerance: Option<f64>,
    terms: Option<usize>,
    jobs: usize,
    out: Option<PathBuf>,
) -> Result<bool, Failure> {
    let suite: Suite = suite.parse()?;
    let mut cfg = match (level, curve) {
        (None, None) => VerifyConfig::default(),
        (Some(n), None) => VerifyConfig::for_level(n)?,
        (lvl, Some(text)) => {
            let c = parse_curve(&text)?;
            if let Some(n) = lvl {
                if n != c.conductor {
                    return Err(Failure::Config(format!("--level {n} disagrees with the curve conductor {}", c.conductor)));
                }
            }
            VerifyConfig::for_curve(c)
        }
    };
    cfg.tolerance = tolerance;
    if let Some(k) = terms {
        cfg.terms = k;
    }
    cfg.validate()?;
    let start = Instant::now();
    let reports = ellreg_core::par::with_jobs(jobs, || run_suite(suite, &cfg))?;
    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    println!(
        "{passed}/{} checks passed in {:.2}s ({})",
        reports.len(),
        start.elapsed().as_secs_f64(),
        if ellreg_core::par::is_parallel() { "parallel" } else { "sequential" }
    );
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&reports).context("serialising the report")?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(all_pass(&reports))
}

fn units(level: u64, label: &str, hat: bool) -> Result<bool, Failure> {
    let chi = DirichletCharacter::from_label(label)?;
    if chi.modulus() != level {
        return Err(Failure::Config(format!("character {label} has modulus {}, not {level}", chi.modulus())));
    }
    let div = if hat { unit_divisor_chihat(&chi)? } else { unit_divisor_chi(&chi)? };
    let degree = div.degree();
    let doc = json!({
        "level": level,
        "character": chi.label(),
        "unit": if hat { "u_chi_hat" } else { "u_chi" },
        "degree": { "re": degree.re, "im": degree.im },
        "cusps": div.entries(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numeric(e.to_string()))?);
    Ok(true)
}

fn mahler(poly: &str, tolerance: Option<f64>) -> Result<bool, Failure> {
    let p = BivariatePolynomial::parse(poly)?;
    let mut ctl = MahlerControl::default();
    if let Some(t) = tolerance {
        if !(t > 0.0) {
            return Err(Failure::Config("tolerance must be positive".into()));
        }
        ctl.tol = t;
    }
    let start = Instant::now();
    let r = mahler_measure(&p, &ctl)?;
    let doc = json!({
        "polynomial": p.to_string(),
        "measure": r.value,
        "breakpoints": r.breakpoints,
        "panels": r.panels,
        "tolerance": ctl.tol,
        "wall_seconds": start.elapsed().as_secs_f64(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numeric(e.to_string()))?);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify {
            suite,
            level,
            curve,
            tolerance,
            terms,
            jobs,
            out,
        } => verify(&suite, level, curve, tolerance, terms, jobs, out),
        Command::Units { level, character, hat } => units(level, &character, hat),
        Command::Mahler { poly, tolerance } => mahler(&poly, tolerance),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
