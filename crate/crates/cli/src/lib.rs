//! Scenario runner: binds JSON configs to the regimes of `gie-core` and writes
//! CSV tables with a commented metadata header.

pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use gie_core::audit::audit_report;
use gie_core::dynamics::{self, EvolutionConfig, FieldInit, Regime, Trajectory};
use gie_core::model::{build_diagonalized_hamiltonian, build_local_hamiltonian, classicalize, HamiltonianSpec, ModelParams};
use gie_core::newtonian::{effective_potential, fit_power_law, Dispersion, ModeGrid};
use num_complex::Complex64 as C64;

pub use config::{BuiltinModel, FieldStart, NewtonianConfig, Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use output::{fmt_float, read_config_echo, Table};

/// Environment variable that redirects every output file into a directory.
pub const OUTPUT_DIR_ENV: &str = "GIE_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOutput {
    pub config: ScenarioConfig,
    /// Extra `# ` lines after the standard header.
    pub notes: Vec<String>,
    pub table: Table,
    /// Plain-text report written next to the CSV (audit only).
    pub sidecar: Option<String>,
}

pub fn model_params(cfg: &ScenarioConfig) -> CliResult<ModelParams> {
    ModelParams::new(cfg.omega, cfg.lambda, cfg.n_cut).map_err(|e| CliError::Config(e.to_string()))
}

fn alpha0(cfg: &ScenarioConfig) -> C64 {
    C64::new(cfg.alpha0[0], cfg.alpha0[1])
}

pub fn evolution_config(cfg: &ScenarioConfig) -> CliResult<EvolutionConfig> {
    let regime = match cfg.scenario {
        Scenario::QuantumLocal => Regime::QuantumLocal,
        Scenario::ClassicalLocal => Regime::ClassicalLocal,
        Scenario::ClassicalNonlocal => Regime::ClassicalNonlocal,
        Scenario::MeanfieldLocal => Regime::MeanFieldLocal,
        Scenario::MeasuredMediator => Regime::MeasuredMediator,
        other => return Err(CliError::Config(format!("{} is not a time evolution", other.name()))),
    };
    let mut evo = EvolutionConfig::new(regime, cfg.t_max, cfg.n_steps);
    evo.alpha0 = alpha0(cfg);
    evo.field_init = match cfg.field_init {
        FieldStart::Vacuum => FieldInit::Vacuum,
        FieldStart::Coherent => FieldInit::Coherent { re: cfg.alpha0[0], im: cfg.alpha0[1] },
    };
    evo.field_rule = cfg.field_rule;
    evo.dephasing = cfg.dephasing;
    if let Some(m) = cfg.mass_init {
        evo.mass_init = m.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    }
    Ok(evo)
}

pub fn builtin_spec(model: BuiltinModel, cfg: &ScenarioConfig) -> CliResult<HamiltonianSpec> {
    let p = model_params(cfg)?;
    Ok(match model {
        BuiltinModel::Local => build_local_hamiltonian(&p)?,
        BuiltinModel::Diagonalized => build_diagonalized_hamiltonian(&p)?,
        BuiltinModel::ClassicalizedLocal => classicalize(&build_local_hamiltonian(&p)?, alpha0(cfg))?.0,
        BuiltinModel::ClassicalizedDiagonalized => classicalize(&build_diagonalized_hamiltonian(&p)?, alpha0(cfg))?.0,
    })
}

pub fn run_trajectory(cfg: &ScenarioConfig) -> CliResult<Trajectory> {
    let p = model_params(cfg)?;
    let evo = evolution_config(cfg)?;
    evo.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(dynamics::run(&p, &evo)?)
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let first = &traj.samples[0];
    let mut columns = vec!["t", "negativity_mass_mass"];
    if first.entropy_masses_vs_field.is_some() {
        columns.push("entropy_masses_vs_field");
    }
    if first.fock_tail.is_some() {
        columns.push("fock_tail");
    }
    if first.alpha.is_some() {
        columns.extend(["alpha_re", "alpha_im"]);
    }
    let mut table = Table::new(columns);
    for s in &traj.samples {
        let mut row = vec![s.t, s.negativity];
        row.extend(s.entropy_masses_vs_field);
        row.extend(s.fock_tail);
        if let Some(a) = s.alpha {
            row.extend([a.re, a.im]);
        }
        table.push_floats(&row);
    }
    table
}

pub fn radii(n: &NewtonianConfig) -> Vec<f64> {
    (0..n.n_r).map(|i| n.r_min * (n.r_max / n.r_min).powf(i as f64 / (n.n_r - 1) as f64)).collect()
}

fn newtonian_scan(cfg: &ScenarioConfig) -> CliResult<(Table, Vec<String>)> {
    let n = &cfg.newtonian;
    let dispersion = match n.mass {
        None => Dispersion::Massless,
        Some(mass) => Dispersion::Massive { mass },
    };
    let grid = match n.n_k {
        Some(n_k) => ModeGrid::new(n.k_max, n_k, dispersion, n.g),
        None => ModeGrid::resolved(n.k_max, n.r_max, dispersion, n.g),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let rs = radii(n);
    let vs = rs.iter().map(|r| effective_potential(*r, &grid)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(vec!["r", "potential"]);
    for (r, v) in rs.iter().zip(&vs) {
        table.push_floats(&[*r, *v]);
    }
    let mut notes = vec![format!("quadrature intervals: {}", grid.n_k)];
    match fit_power_law(&rs, &vs) {
        Ok(fit) => notes.push(format!(
            "fit: exponent={} prefactor={} r_squared={}",
            fmt_float(fit.exponent),
            fmt_float(fit.prefactor),
            fmt_float(fit.r_squared)
        )),
        Err(e) => notes.push(format!("fit: unavailable ({e})")),
    }
    Ok((table, notes))
}

fn audit_outputs(cfg: &ScenarioConfig) -> CliResult<(Table, String)> {
    let spec = builtin_spec(cfg.model, cfg)?;
    let report = audit_report(&spec)?;
    let mut table = Table::new(vec!["term", "coefficient", "support", "joint_mass"]);
    for t in &report.terms {
        table.push(vec![t.index.to_string(), fmt_float(t.coefficient), t.support.join(";"), t.joint_mass.to_string()]);
    }
    let mut text = report.to_string();
    text.push('\n');
    for (k, v) in report.key_values() {
        text.push_str(&format!("{k}={v}\n"));
    }
    Ok((table, text))
}

/// Runs one scenario in memory.
pub fn run_scenario(cfg: &ScenarioConfig) -> CliResult<ScenarioOutput> {
    cfg.validate()?;
    let (table, notes, sidecar) = match cfg.scenario {
        Scenario::NewtonianScan => {
            let (t, n) = newtonian_scan(cfg)?;
            (t, n, None)
        }
        Scenario::Audit => {
            let (t, s) = audit_outputs(cfg)?;
            (t, vec![format!("model: {}", cfg.model.name())], Some(s))
        }
        _ => (trajectory_table(&run_trajectory(cfg)?), Vec::new(), None),
    };
    Ok(ScenarioOutput { config: cfg.clone(), notes, table, sidecar })
}

/// Where a file named by the config ends up: inside `dir_override` when given,
/// else the path as written.
pub fn resolve_output(output_path: &str, dir_override: Option<&Path>) -> PathBuf {
    let path = PathBuf::from(output_path);
    match dir_override {
        Some(dir) => dir.join(path.file_name().unwrap_or(path.as_os_str())),
        None => path,
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("audit.txt")
}

/// Writes the CSV (and sidecar) atomically; returns the written paths.
pub fn write_outputs(out: &ScenarioOutput, dir_override: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    let path = resolve_output(&out.config.output_path, dir_override);
    let mut header = output::standard_header(&out.config);
    header.extend(out.notes.iter().cloned());
    output::write_atomic(&path, output::render_csv(&header, &out.table)?.as_bytes())?;
    let mut written = vec![path.clone()];
    if let Some(text) = &out.sidecar {
        let side = sidecar_path(&path);
        output::write_atomic(&side, text.as_bytes())?;
        written.push(side);
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub table: Table,
    pub max_abs_diff: f64,
    pub final_abs_diff: f64,
}

/// Runs two time-series scenarios on the same time grid and lines up their
/// mass-mass negativities.
pub fn compare(a: &ScenarioConfig, b: &ScenarioConfig) -> CliResult<Comparison> {
    for cfg in [a, b] {
        if !cfg.scenario.is_time_series() {
            return Err(CliError::Config(format!("compare needs time-series scenarios, got {}", cfg.scenario.name())));
        }
    }
    if a.t_max != b.t_max || a.n_steps != b.n_steps {
        return Err(CliError::Config(format!(
            "grid mismatch: (t_max, n_steps) = ({}, {}) vs ({}, {})",
            a.t_max, a.n_steps, b.t_max, b.n_steps
        )));
    }
    let ta = run_trajectory(a)?;
    let tb = run_trajectory(b)?;
    let mut table = Table::new(vec!["t", "negativity_a", "negativity_b", "abs_diff"]);
    let mut max_abs_diff = 0.0f64;
    let mut final_abs_diff = 0.0;
    for (sa, sb) in ta.samples.iter().zip(&tb.samples) {
        let d = (sa.negativity - sb.negativity).abs();
        max_abs_diff = max_abs_diff.max(d);
        final_abs_diff = d;
        table.push_floats(&[sa.t, sa.negativity, sb.negativity, d]);
    }
    Ok(Comparison { table, max_abs_diff, final_abs_diff })
}

pub fn render_comparison(a: &ScenarioConfig, b: &ScenarioConfig, cmp: &Comparison) -> CliResult<String> {
    let header = vec![
        output::version_line(),
        format!("a: {} {}", a.scenario.name(), a.to_json()),
        format!("b: {} {}", b.scenario.name(), b.to_json()),
        format!("max_abs_diff: {}", fmt_float(cmp.max_abs_diff)),
        format!("final_abs_diff: {}", fmt_float(cmp.final_abs_diff)),
    ];
    output::render_csv(&header, &cmp.table)
}
