//! Command-line front end: analyze / calc / verify / generate.
//!
//! Exit codes: 0 all checks pass, 1 usage or parse failure, 2 modeling
//! failure (not normal / not definitizing / not zero-dimensional), 3 a
//! verification residual exceeded its tolerance.

use clap::{Parser, Subcommand};
use krein_calculus::error::Error;
use krein_calculus::io;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kreinfc", version, about = "Functional calculus for definitizable normal operators on Krein spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the embedding and ideal data, run the structural checks, and
    /// print a report.
    Analyze {
        /// Problem file (JSON).
        problem: PathBuf,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Tolerance overrides, e.g. --tol residual=1e-7,psd_slack=1e-8.
        #[arg(long)]
        tol: Option<String>,
    },
    /// Evaluate calculus functions against a problem.
    Calc {
        problem: PathBuf,
        /// Functions file (JSON list of function specs).
        functions: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Run the full identity suite (analysis plus calculus properties).
    Verify {
        problem: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Emit a reference-corpus problem file.
    Generate {
        /// One of ex1, ex2, ex3, jordan-at-i, degenerate, selfadjoint,
        /// unitary, random.
        name: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        dim: usize,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NotDefinitizing { .. }
        | Error::NotNormal { .. }
        | Error::NotZeroDimensional
        | Error::NotHermitian { .. }
        | Error::NotPsd { .. }
        | Error::SingularGram
        | Error::NonRationalVarietyPoint { .. } => 2,
        Error::ResidualTooLarge { .. }
        | Error::VanishingDenominator { .. }
        | Error::MultiplicityMismatch { .. }
        | Error::NotInvertible
        | Error::NotInvertibleAt { .. }
        | Error::MembershipFailed => 3,
        _ => 1,
    }
}

fn run() -> Result<u8, Error> {
    let cli = Cli::try_parse().map_err(|e| {
        // clap prints its own message; map to the usage exit code
        eprint!("{e}");
        Error::InvalidProblem("usage".into())
    })?;
    match cli.command {
        Command::Analyze { problem, report, tol } => {
            let text = std::fs::read_to_string(&problem)?;
            let spec = io::ProblemSpec::from_json(&text)?;
            let name = problem.display().to_string();
            let rep = io::analyze(&name, &spec, tol.as_deref())?;
            println!("{}", rep.summary());
            if let Some(path) = report {
                std::fs::write(path, rep.to_json()?)?;
            }
            Ok(if rep.rollup { 0 } else { 3 })
        }
        Command::Calc { problem, functions, report, tol } => {
            let text = std::fs::read_to_string(&problem)?;
            let spec = io::ProblemSpec::from_json(&text)?;
            let ftext = std::fs::read_to_string(&functions)?;
            let fns: Vec<io::FunctionSpec> = serde_json::from_str(&ftext)?;
            let name = problem.display().to_string();
            let rep = io::calc_functions(&name, &spec, &fns, tol.as_deref())?;
            for out in &rep.outputs {
                println!("{} ({}x{}):", out.function, out.dim, out.dim);
                for i in 0..out.dim {
                    let row: Vec<String> = (0..out.dim)
                        .map(|j| {
                            let [re, im] = out.matrix[i * out.dim + j];
                            format!("{re:+.6}{im:+.6}i")
                        })
                        .collect();
                    println!("  [ {} ]", row.join("  "));
                }
            }
            for chk in &rep.product_checks {
                println!(
                    "product check #{}: residual {:.3e} (tol {:.1e}) {}",
                    chk.index.unwrap_or(0),
                    chk.residual,
                    chk.tol,
                    if chk.pass { "ok" } else { "FAIL" }
                );
            }
            if let Some(path) = report {
                std::fs::write(path, serde_json::to_string_pretty(&rep)?)?;
            }
            Ok(if rep.rollup { 0 } else { 3 })
        }
        Command::Verify { problem, report, tol } => {
            let text = std::fs::read_to_string(&problem)?;
            let spec = io::ProblemSpec::from_json(&text)?;
            let name = problem.display().to_string();
            let rep = io::verify(&name, &spec, tol.as_deref())?;
            println!("{}", rep.summary());
            if let Some(path) = report {
                std::fs::write(path, rep.to_json()?)?;
            }
            Ok(if rep.rollup { 0 } else { 3 })
        }
        Command::Generate { name, seed, dim, out } => {
            let spec = io::generate(&name, seed, dim)?;
            let json = spec.to_json()?;
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            if !matches!(err, Error::InvalidProblem(ref s) if s == "usage") {
                eprintln!("error: {err}");
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}
