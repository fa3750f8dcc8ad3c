use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gie_cli::{
    compare, render_comparison, run_scenario, write_outputs, BuiltinModel, CliError, CliResult, Scenario,
    ScenarioConfig, OUTPUT_DIR_ENV,
};

/// Entanglement between two branch-superposed masses through one mediator mode.
#[derive(Parser)]
#[command(name = "gie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config and write its CSV.
    Run {
        config: PathBuf,
        /// Override a config field, e.g. `--set lambda=0.25` or `--set newtonian.k_max=200`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run two time-series configs and print their negativities side by side.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Write the merged table here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Locality audit of a built-in model (local, diagonalized,
    /// classicalized-local, classicalized-diagonalized) or of an audit config.
    Audit {
        target: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn output_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn run(config: &Path, overrides: &[String]) -> CliResult<()> {
    let cfg = ScenarioConfig::load(config, overrides)?;
    let out = run_scenario(&cfg)?;
    for path in write_outputs(&out, output_dir().as_deref())? {
        println!("{}", path.display());
    }
    Ok(())
}

fn audit(target: &str, overrides: &[String]) -> CliResult<()> {
    let cfg = match BuiltinModel::parse(target) {
        Some(model) => {
            let mut cfg = ScenarioConfig::from_json(r#"{"scenario": "audit"}"#, overrides)?;
            cfg.model = model;
            cfg
        }
        None => {
            let cfg = ScenarioConfig::load(Path::new(target), overrides)?;
            if cfg.scenario != Scenario::Audit {
                return Err(CliError::Config(format!("{target} is a {} config, not audit", cfg.scenario.name())));
            }
            cfg
        }
    };
    let out = run_scenario(&cfg)?;
    print!("{}", out.sidecar.as_deref().unwrap_or_default());
    if BuiltinModel::parse(target).is_none() {
        for path in write_outputs(&out, output_dir().as_deref())? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn compare_cmd(a: &Path, b: &Path, output: Option<&Path>) -> CliResult<()> {
    let ca = ScenarioConfig::load(a, &[])?;
    let cb = ScenarioConfig::load(b, &[])?;
    let cmp = compare(&ca, &cb)?;
    let text = render_comparison(&ca, &cb, &cmp)?;
    match output {
        Some(path) => {
            let path = gie_cli::resolve_output(&path.to_string_lossy(), output_dir().as_deref());
            gie_cli::output::write_atomic(&path, text.as_bytes())?;
            println!("max_abs_diff: {}", gie_cli::fmt_float(cmp.max_abs_diff));
            println!("final_abs_diff: {}", gie_cli::fmt_float(cmp.final_abs_diff));
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run { config, overrides } => run(config, overrides),
        Command::Compare { a, b, output } => compare_cmd(a, b, output.as_deref()),
        Command::Audit { target, overrides } => audit(target, overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
