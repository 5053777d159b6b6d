//! Experiment runner behind the `qbdissim` binary.

mod experiments;
mod params;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub use experiments::Experiment;
pub use params::{Kind, ParamSpec};

use crate::error::Error;

/// One run: which experiment, its parameters, where the CSV goes and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    pub output_path: String,
    #[serde(default)]
    pub seed: u64,
}

/// Failure of a CLI command, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Config(_) | Error::Json(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn unknown_experiment(name: &str) -> String {
    let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
    format!("unknown experiment `{name}`; available: {}", names.join(", "))
}

/// Problems with `config`, empty when it can be run.
pub fn validate(config: &ExperimentConfig) -> Vec<String> {
    let Some(exp) = Experiment::from_name(&config.experiment) else {
        return vec![unknown_experiment(&config.experiment)];
    };
    let mut problems = match params::resolve(exp.params(), &config.parameters) {
        Ok(_) => Vec::new(),
        Err(p) => p,
    };
    if config.output_path.trim().is_empty() {
        problems.push("`output_path` is empty".into());
    }
    problems
}

/// Catalog entry for `qbdissim list`.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub figure: &'static str,
    pub summary: &'static str,
    pub required: Vec<&'static str>,
    pub optional: Vec<(&'static str, &'static str)>,
    pub header: &'static [&'static str],
}

pub fn list_experiments() -> Vec<CatalogEntry> {
    Experiment::ALL
        .iter()
        .map(|e| CatalogEntry {
            name: e.name(),
            figure: e.figure(),
            summary: e.summary(),
            required: e.params().iter().filter(|p| p.default.is_none()).map(|p| p.key).collect(),
            optional: e.params().iter().filter_map(|p| p.default.map(|d| (p.key, d))).collect(),
            header: e.header(),
        })
        .collect()
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub rows: usize,
    pub converged: bool,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Runs `config`, writing the CSV (relative paths resolve against `out_dir`)
/// and a JSON sidecar next to it.
pub fn run(config: &ExperimentConfig, out_dir: Option<&Path>, threads: Option<usize>) -> Result<RunSummary, CliError> {
    let exp = Experiment::from_name(&config.experiment)
        .ok_or_else(|| CliError::Config(unknown_experiment(&config.experiment)))?;
    let problems = validate(config);
    if !problems.is_empty() {
        return Err(CliError::Config(problems.join("; ")));
    }
    let resolved = params::resolve(exp.params(), &config.parameters).map_err(|p| CliError::Config(p.join("; ")))?;
    let csv = match out_dir {
        Some(dir) if Path::new(&config.output_path).is_relative() => dir.join(&config.output_path),
        _ => PathBuf::from(&config.output_path),
    };
    let sidecar = sidecar_path(&csv);
    if let Some(parent) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    log::info!("running {} -> {}", exp.name(), csv.display());
    let result = pool.install(|| exp.run(&resolved, config.seed));

    let mut meta = json!({
        "experiment": exp.name(),
        "seed": config.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": resolved.as_map(),
        "output_path": csv.display().to_string(),
        "header": exp.header(),
    });
    let write_sidecar = |meta: &Value| -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(meta).expect("sidecar serializes");
        fs::write(&sidecar, text + "\n")
            .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", sidecar.display())))
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let err = CliError::from(e);
            meta["converged"] = json!(false);
            meta["error"] = json!(err.to_string());
            write_sidecar(&meta)?;
            return Err(err);
        }
    };

    let mut writer = csv::Writer::from_path(&csv)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", csv.display())))?;
    let io = |e: csv::Error| CliError::Numerical(format!("cannot write {}: {e}", csv.display()));
    writer.write_record(exp.header()).map_err(io)?;
    for row in &outcome.rows {
        writer.write_record(row).map_err(io)?;
    }
    writer.flush().map_err(|e| CliError::Numerical(e.to_string()))?;

    meta["rows"] = json!(outcome.rows.len());
    meta["converged"] = json!(outcome.converged);
    meta["diagnostics"] = outcome.diagnostics;
    write_sidecar(&meta)?;
    Ok(RunSummary { csv, sidecar, rows: outcome.rows.len(), converged: outcome.converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(exp: &str, params: Value) -> ExperimentConfig {
        ExperimentConfig {
            experiment: exp.into(),
            parameters: params.as_object().unwrap().clone(),
            output_path: "out.csv".into(),
            seed: 1,
        }
    }

    #[test]
    fn validate_reports() {
        let ok = config("collective-advantage", json!({"epsilon": 3.1, "omega": 1.5, "beta": [1.0], "n": [2]}));
        assert!(validate(&ok).is_empty());
        let missing = config(
            "cycle-sweep",
            json!({"omega_c": 1, "epsilon": 0.5, "t_d": 2, "t_cycle": 20, "omega_h": [2], "beta_h": [0.1]}),
        );
        let report = validate(&missing);
        assert_eq!(report.len(), 1);
        assert!(report[0].contains("`beta_c`"));
        let unknown = validate(&config("collective-advantge", json!({})));
        assert!(unknown[0].contains("collective-advantage"));
    }

    #[test]
    fn catalog_lists_everything() {
        let cat = list_experiments();
        assert_eq!(cat.len(), 8);
        let cycle = cat.iter().find(|c| c.name == "cycle-sweep").unwrap();
        assert!(cycle.required.contains(&"beta_c"));
        assert_eq!(cycle.header.join(","), "omega_h,beta_h,variant,eta,power,C_max,W1,W2,W4,W5,Qh,Qc");
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::InvalidParameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Numerical("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Unreachable("x".into())).exit_code(), 3);
    }
}
