use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lastmult::shell::{
    bundled_corpus_dir, derive, load_problem, numcheck, run_corpus, verify, DeriveOptions, Problem, Report,
    EXIT_FAIL, EXIT_NOTHING,
};
use lastmult::symcore::set_seed;

/// Jacobi last multipliers, Lagrangians and Noether integrals for
/// second-order equations.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Seed for the randomized zero test.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full pipeline on one problem.
    Derive {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest exponent in the Noether ansatz.
        #[arg(long, default_value_t = 4)]
        degree: u32,
        /// Skip the numeric drift table.
        #[arg(long)]
        no_numeric: bool,
    },
    /// Check the goldens of one problem against the equation only.
    Verify {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive every problem in a directory.
    Corpus {
        /// Defaults to the bundled corpus.
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Directory for the reports and summary.json.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        degree: u32,
    },
    /// Drift of the golden integrals along the problem's numeric scenario.
    Numcheck {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(file: &PathBuf) -> Result<Problem, ExitCode> {
    load_problem(file).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_NOTHING as u8)
    })
}

fn emit(report: &Report, out: Option<&PathBuf>) -> ExitCode {
    let text = report.to_json();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_NOTHING as u8);
            }
        }
        None => print!("{text}"),
    }
    for f in &report.failures {
        eprintln!("FAIL {}: {f}", report.problem);
    }
    for u in &report.unknowns {
        eprintln!("UNKNOWN {}: {u}", report.problem);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL as u8)
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    if let Some(s) = cli.seed {
        set_seed(s);
    }
    Ok(match cli.cmd {
        Cmd::Derive {
            file,
            out,
            degree,
            no_numeric,
        } => {
            let p = load(&file)?;
            let opts = DeriveOptions {
                degree,
                numeric: !no_numeric,
            };
            emit(&derive(&p, &opts), out.as_ref())
        }
        Cmd::Verify { file, out } => emit(&verify(&load(&file)?), out.as_ref()),
        Cmd::Numcheck { file, out } => emit(&numcheck(&load(&file)?), out.as_ref()),
        Cmd::Corpus { dir, out, degree } => {
            let dir = dir.unwrap_or_else(bundled_corpus_dir);
            let opts = DeriveOptions {
                degree,
                ..DeriveOptions::default()
            };
            let run = run_corpus(&dir, Some(&out), &opts).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_NOTHING as u8)
            })?;
            for row in &run.summary.problems {
                println!(
                    "{} {:<20} goldens {}/{}",
                    if row.passed { "PASS" } else { "FAIL" },
                    row.name,
                    row.goldens_matched,
                    row.goldens
                );
            }
            for f in &run.summary.failing {
                eprintln!("FAIL {f}");
            }
            if run.summary.problems.is_empty() {
                eprintln!("nothing to run in {}", dir.display());
            } else {
                println!("reports in {}", out.display());
            }
            ExitCode::from(run.exit_code() as u8)
        }
    })
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}
