use std::path::{Path, PathBuf};

use qdae::models::{ModelKind, ModelSpec, PfqModel, RotationAxis};
use qdae::systems::{DaeSystem, SmibParams, SmibSystem, WsccSystem};
use qdae::training::TrainingConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Overrides `output_dir` from the configuration file when set.
pub const OUTPUT_DIR_ENV: &str = "QDAE_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Smib,
    Wscc,
}

/// Circuit shape; which fields matter depends on `model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzOptions {
    pub layers: usize,
    pub qubits: usize,
    pub rotations: Vec<RotationAxis>,
    pub train_scale: bool,
}

impl Default for AnsatzOptions {
    fn default() -> Self {
        let spec = ModelSpec::default();
        AnsatzOptions {
            layers: spec.layers,
            qubits: spec.qubits,
            rotations: PfqModel::default_rotations(),
            train_scale: spec.train_scale,
        }
    }
}

/// One run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    pub model: ModelKind,
    /// Simulated interval `[0, span]`, s. Defaults to 8 (SMIB) or 20 (WSCC).
    pub span: Option<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Also write per-variable QNN/reference pairs and `mse.csv` after a solve.
    #[serde(default)]
    pub emit_plots: bool,
    /// Spacing of the rows in `trajectory.csv` and `oracle.csv`, s.
    #[serde(default = "default_output_step")]
    pub output_step: f64,
    /// RK4 step of the reference solver, s.
    #[serde(default = "default_oracle_step")]
    pub oracle_step: f64,
    /// Replacement for the bundled WSCC data, relative to the config file.
    pub system_file: Option<PathBuf>,
    /// SMIB coefficients and initial state.
    pub smib: Option<SmibParams>,
    #[serde(default)]
    pub ansatz: AnsatzOptions,
    #[serde(default)]
    pub training: TrainingConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_output_step() -> f64 {
    1e-2
}

fn default_oracle_step() -> f64 {
    1e-4
}

impl RunConfig {
    /// A config with every optional field at its default.
    pub fn new(system: SystemKind, model: ModelKind) -> Self {
        let text = format!(
            "system = \"{}\"\nmodel = \"{}\"\n",
            match system {
                SystemKind::Smib => "smib",
                SystemKind::Wscc => "wscc",
            },
            model.name()
        );
        Self::parse(&text).expect("minimal config is valid")
    }

    /// Parses, fills system-dependent defaults, and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("config error: {e}")))?;
        config.resolve()?;
        Ok(config)
    }

    /// Reads a config file. Relative `system_file` paths are taken from the
    /// file's directory, and the output directory environment override is
    /// applied.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let Some(file) = &config.system_file {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.system_file = Some(base.join(file));
            }
        }
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            config.output_dir = PathBuf::from(dir);
        }
        Ok(config)
    }

    fn resolve(&mut self) -> Result<()> {
        let span = *self.span.get_or_insert(match self.system {
            SystemKind::Smib => 8.0,
            SystemKind::Wscc => 20.0,
        });
        let bad = |key: &str, why: &str| Err(CliError::Config(format!("config error: `{key}` {why}")));
        if !(span > 0.0 && span.is_finite()) {
            return bad("span", "must be positive");
        }
        if !(self.output_step > 0.0) {
            return bad("output_step", "must be positive");
        }
        if !(self.oracle_step > 0.0) {
            return bad("oracle_step", "must be positive");
        }
        if self.ansatz.layers == 0 {
            return bad("ansatz.layers", "must be at least 1");
        }
        if self.ansatz.qubits == 0 {
            return bad("ansatz.qubits", "must be at least 1");
        }
        match self.system {
            SystemKind::Smib => {
                if self.system_file.is_some() {
                    return bad("system_file", "applies to the wscc system only");
                }
                let params = *self.smib.get_or_insert_with(SmibParams::default);
                params
                    .validate()
                    .map_err(|e| CliError::Config(format!("config error: `smib`: {e}")))?;
            }
            SystemKind::Wscc => {
                if self.smib.is_some() {
                    return bad("smib", "applies to the smib system only");
                }
            }
        }
        self.training
            .validate()
            .map_err(|e| CliError::Config(format!("config error: `training`: {}", e.root())))
    }

    pub fn span(&self) -> f64 {
        self.span.unwrap_or(8.0)
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.model,
            layers: self.ansatz.layers,
            qubits: self.ansatz.qubits,
            rotations: self.ansatz.rotations.clone(),
            train_scale: self.ansatz.train_scale,
        }
    }

    pub fn build_system(&self) -> Result<Box<dyn DaeSystem>> {
        Ok(match self.system {
            SystemKind::Smib => Box::new(SmibSystem::new(self.smib.unwrap_or_default())?),
            SystemKind::Wscc => {
                let system = match &self.system_file {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                        WsccSystem::from_toml_str(&text)
                            .map_err(|e| CliError::Config(format!("system file {}: {}", path.display(), e.root())))?
                    }
                    None => WsccSystem::standard(),
                };
                let (start, end) = system.span();
                if self.span() > end - start + 1e-9 {
                    return Err(CliError::Config(format!(
                        "config error: `span` = {} exceeds the network schedule [{start}, {end}] s",
                        self.span()
                    )));
                }
                Box::new(system)
            }
        })
    }

    /// The config with every default spelled out, as TOML.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
