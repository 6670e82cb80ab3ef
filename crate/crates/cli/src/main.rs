use std::path::PathBuf;
use std::process::ExitCode;

use bismut_core::identities::Tolerances;
use bismut_core::report::error_exit_status;
use bismut_core::{run, GeometryError, RunConfig, RunReport, Suites, CATALOG};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bismut", version, about = "Curvature identities, structure classes and string equations of Hermitian manifolds with torsion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the catalog of built-in manifolds
    List,
    /// Run the selected suites on the selected manifolds
    Report {
        /// Catalog name, repeatable; `all` selects the whole catalog
        #[arg(long, short, required = true)]
        manifold: Vec<String>,
        /// Suites to run (default: all)
        #[arg(long, value_enum, value_delimiter = ',')]
        suite: Vec<Suite>,
        #[command(flatten)]
        common: Common,
    },
    /// Every manifold, every suite
    Suite {
        #[arg(long, required = true)]
        all: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Sampled points per manifold
    #[arg(long, default_value_t = 32)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    /// Tolerance for identities with second derivatives
    #[arg(long)]
    tol_identity: Option<f64>,
    /// Tolerance for identities with first derivatives only
    #[arg(long)]
    tol_first_order: Option<f64>,
    /// Threshold for structure-class flags
    #[arg(long)]
    tol_classify: Option<f64>,
    /// Write the JSON report here instead of standard output
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Identities,
    Classify,
    String,
    Dim4,
}

fn suites(selected: &[Suite]) -> Suites {
    if selected.is_empty() {
        return Suites::ALL;
    }
    Suites {
        identities: selected.contains(&Suite::Identities),
        classify: selected.contains(&Suite::Classify),
        string: selected.contains(&Suite::String),
        dim4: selected.contains(&Suite::Dim4),
    }
}

fn config(manifolds: Vec<String>, suites: Suites, common: &Common) -> RunConfig {
    let mut tolerances = Tolerances::default();
    if let Some(t) = common.tol_identity {
        tolerances.second_order = t;
    }
    if let Some(t) = common.tol_first_order {
        tolerances.first_order = t;
    }
    if let Some(t) = common.tol_classify {
        tolerances.classify = t;
    }
    RunConfig {
        manifolds,
        points: common.points,
        seed: common.seed,
        step: common.h,
        tolerances,
        suites,
    }
}

fn summarize(report: &RunReport) {
    for m in &report.manifolds {
        eprintln!("{:<16} {}", m.name, if m.pass { "pass" } else { "FAIL" });
        for e in m.failures() {
            eprintln!(
                "    {}: {:.3e} > {:.1e} at {:?}",
                e.identity_name, e.max_residual, e.tolerance, e.worst_point
            );
        }
    }
    eprintln!("overall: {}", if report.pass { "pass" } else { "FAIL" });
}

fn execute(config: RunConfig, out: Option<PathBuf>) -> ExitCode {
    let report = match run(&config) {
        Ok(r) => r,
        Err(GeometryError::UnknownManifold { name, catalog }) => {
            eprintln!("error: unknown manifold `{name}`");
            eprintln!("catalog:");
            for n in catalog {
                eprintln!("  {n}");
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_exit_status(&e));
        }
    };
    let json = report.to_json();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{json}"),
    }
    summarize(&report);
    ExitCode::from(report.exit_status())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in CATALOG {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Report { manifold, suite, common } => {
            let out = common.out.clone();
            execute(config(manifold, suites(&suite), &common), out)
        }
        Command::Suite { common, .. } => {
            let out = common.out.clone();
            execute(config(vec!["all".into()], Suites::ALL, &common), out)
        }
    }
}
