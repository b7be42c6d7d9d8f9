//! `cylinder-cm`: batch driver for spectra, reductions, orbits, conjugate flows, bore fields
//! and the acceptance suite.

mod commands;
mod config;
mod error;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use toml::{Table, Value};

use crate::config::{Application, Format};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "cylinder-cm", version, about = "Center-manifold reductions on strips: spectra, fronts, bores and checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration file, layered over the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Embedded preset name.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Comma-separated amplitudes; reals or p/q rationals.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Transversal grid size.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact formats to write; repeat or separate with commas.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
}

#[derive(Args, Clone, Default)]
struct ElasticityFlags {
    #[arg(long, allow_hyphen_values = true)]
    b1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct FkppFlags {
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<f64>,
}

/// Water-wave parameters; rationals such as `25/52` stay exact.
#[derive(Args, Clone, Default)]
struct FlowFlags {
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Leading eigenpairs of a transversal operator.
    Spectrum,
    /// Anti-plane shear fronts and pulses.
    Elasticity(ElasticityFlags),
    /// Fisher-KPP invasion fronts.
    Fkpp(FkppFlags),
    /// Two-layer bores: coefficients, reconstructed field, critical layer and streamlines.
    Waterwave(FlowFlags),
    /// Conjugate-flow branch, its slopes and exactness checks.
    Conjugate(FlowFlags),
    /// Runs the acceptance suite.
    Verify {
        /// Deliberate corruption of the dynamic polynomial (`none` or `perturb-dyn`).
        #[arg(long)]
        fault: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        draws: Option<usize>,
    },
}

fn set(table: &mut Table, section: &str, key: &str, value: Value) {
    let entry = table.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
    if let Value::Table(t) = entry {
        t.insert(key.to_string(), value);
    }
}

fn set_opt<T: Into<Value>>(table: &mut Table, section: &str, key: &str, value: Option<T>) {
    if let Some(v) = value {
        set(table, section, key, v.into());
    }
}

/// Flag values as a TOML overlay, so they pass the same validation as files.
fn overrides(common: &Common, command: &Command) -> Result<(Application, Table), CliError> {
    let mut t = Table::new();
    if let Some(eps) = &common.eps {
        let list = config::parse_eps_list(eps)?.iter().map(|s| Value::String(s.to_string())).collect();
        set(&mut t, "run", "eps", Value::Array(list));
    }
    if let Some(grid) = common.grid {
        set(&mut t, "run", "grid", Value::Integer(i64::try_from(grid).map_err(|_| CliError::Config("grid too large".into()))?));
    }
    set_opt(&mut t, "run", "out", common.out.as_ref().map(|p| p.display().to_string()));
    if !common.format.is_empty() {
        let names = common.format.iter().map(|f| Value::String(format!("{f:?}").to_lowercase())).collect();
        set(&mut t, "run", "format", Value::Array(names));
    }
    let app = match command {
        Command::Spectrum => Application::Spectrum,
        Command::Elasticity(f) => {
            for (k, v) in [("b1", f.b1), ("b2", f.b2), ("w1", f.w1), ("lambda2", f.lambda2)] {
                set_opt(&mut t, "elasticity", k, v);
            }
            Application::Elasticity
        }
        Command::Fkpp(f) => {
            set_opt(&mut t, "fkpp", "beta", f.beta);
            set_opt(&mut t, "fkpp", "lambda1", f.lambda1);
            Application::Fkpp
        }
        Command::Waterwave(f) | Command::Conjugate(f) => {
            for (k, v) in [("rho", &f.rho), ("omega", &f.omega), ("h0", &f.h0), ("c0", &f.c0)] {
                set_opt(&mut t, "waterwave", k, v.clone());
            }
            if f.rho.is_some() || f.omega.is_some() {
                // Any explicit flow parameter makes the [waterwave] section exist.
                t.entry("waterwave".to_string()).or_insert_with(|| Value::Table(Table::new()));
            }
            if matches!(command, Command::Waterwave(_)) {
                Application::Waterwave
            } else {
                Application::Conjugate
            }
        }
        Command::Verify { fault, seed, draws } => {
            set_opt(&mut t, "verify", "fault", fault.clone());
            set_opt(&mut t, "verify", "seed", seed.map(|s| s as i64));
            set_opt(&mut t, "verify", "draws", draws.map(|d| d as i64));
            Application::Verify
        }
    };
    Ok((app, t))
}

fn execute(common: &Common, command: &Command) -> Result<(), CliError> {
    let (app, over) = overrides(common, command)?;
    let cfg = config::load(app, common.preset.as_deref(), common.config.as_deref(), over)?;
    let outcome = commands::run(app, &cfg)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    let report = report::envelope(app, &cfg, outcome.results);
    let name = format!("{}.json", app.name());
    if cfg.wants(Format::Json) || app == Application::Verify {
        std::fs::write(dir.join(&name), report::canonical(&report))?;
    }
    for a in &outcome.artifacts {
        if cfg.wants(a.format) {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
    }
    if app == Application::Verify {
        for c in report["results"]["criteria"].as_array().into_iter().flatten() {
            let status = if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            println!("{status} [{}] {}", c["id"], c["name"].as_str().unwrap_or(""));
        }
    }
    println!("{}: report {} (config {})", app.name(), dir.join(&name).display(), report["config_sha256"].as_str().unwrap_or(""));
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(outcome.failures))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.common, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let diagnostic = json!({"error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}});
            eprintln!("{diagnostic}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
