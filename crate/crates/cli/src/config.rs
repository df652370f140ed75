//! Flat `key = value` experiment configuration.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Unknown and repeated keys are rejected. Command-line overrides use the
//! same keys. Every run writes the fully resolved configuration, which can be
//! fed back with `--config` to reproduce it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use swae::nn::{Activation, OptimizerKind, ReconLoss};
use swae::{PriorKind, PriorSpec, RngSeed, TrainConfig};

use crate::error::{CliError, CliResult};

/// Known keys and their defaults, in the order the resolved file lists them.
pub const KEYS: &[(&str, &str)] = &[
    ("dataset", "swiss_roll"),
    ("dataset.n", "5000"),
    ("dataset.noise", "0"),
    ("dataset.heldout", "2000"),
    ("prior.kind", "uniform_box"),
    ("prior.half_width", "1"),
    ("prior.r_inner", "0.5"),
    ("prior.r_outer", "1"),
    ("prior.radius", "1"),
    ("prior.sigma", "0.02"),
    ("prior.exponent", "2"),
    ("latent_dim", "2"),
    ("lambda", "10"),
    ("projections", "50"),
    ("batch_size", "500"),
    ("epochs", "200"),
    ("optimizer", "rmsprop"),
    ("learning_rate", "0.001"),
    ("rmsprop.rho", "0.9"),
    ("rmsprop.eps", "1e-8"),
    ("recon_loss", "squared"),
    ("hidden", "64,64"),
    ("hidden_activation", "leaky_relu:0.2"),
    ("encoder_output", "identity"),
    ("decoder_output", "identity"),
    ("seed", "0"),
    ("eval_interval", "100"),
    ("eval_projections", "200"),
    ("patience", "0"),
    ("grid_side", "25"),
    ("output_dir", "swae_run"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            values: KEYS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl ExperimentConfig {
    /// Defaults overlaid with the settings in `text`.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(line)
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value", no + 1)))?;
            if !seen.insert(k.to_string()) {
                return Err(CliError::Usage(format!(
                    "line {}: duplicate key {k:?}",
                    no + 1
                )));
            }
            cfg.set(k, v)
                .map_err(|e| CliError::Usage(format!("line {}: {e}", no + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = split_assignment(assignment)
            .ok_or_else(|| CliError::Usage(format!("override {assignment:?} is not key=value")))?;
        self.set(k, v)
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn parse_value<V: FromStr>(&self, key: &str) -> CliResult<V>
    where
        V::Err: std::fmt::Display,
    {
        self.get(key)
            .parse()
            .map_err(|e| CliError::Usage(format!("config key {key}: {e}")))
    }

    /// Renders every key in canonical order.
    pub fn render(&self) -> String {
        let mut out = String::from("# resolved swae configuration\n");
        for (k, _) in KEYS {
            let _ = writeln!(out, "{k} = {}", self.get(k));
        }
        out
    }

    pub fn prior(&self) -> CliResult<PriorSpec> {
        let dim: usize = self.parse_value("latent_dim")?;
        let kind = match self.get("prior.kind") {
            "uniform_box" => PriorKind::UniformBox {
                half_width: self.parse_value("prior.half_width")?,
            },
            "ring" => PriorKind::Ring {
                inner: self.parse_value("prior.r_inner")?,
                outer: self.parse_value("prior.r_outer")?,
            },
            "circle" => PriorKind::Circle {
                radius: self.parse_value("prior.radius")?,
                sigma: self.parse_value("prior.sigma")?,
            },
            "bowl" => PriorKind::Bowl {
                exponent: self.parse_value("prior.exponent")?,
            },
            other => return Err(CliError::Usage(format!("unknown prior.kind {other:?}"))),
        };
        let spec = PriorSpec { kind, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dataset(&self) -> CliResult<Dataset> {
        let raw = self.get("dataset");
        if raw == "swiss_roll" {
            Ok(Dataset::SwissRoll {
                n: self.parse_value("dataset.n")?,
                noise: self.parse_value("dataset.noise")?,
                heldout: self.parse_value("dataset.heldout")?,
            })
        } else if let Some(path) = raw.strip_prefix("csv:") {
            Ok(Dataset::Csv(PathBuf::from(path)))
        } else {
            Err(CliError::Usage(format!(
                "dataset must be swiss_roll or csv:<path>, got {raw:?}"
            )))
        }
    }

    pub fn train_config(&self) -> CliResult<TrainConfig> {
        let optimizer = match self.get("optimizer") {
            "sgd" => OptimizerKind::Sgd,
            "rmsprop" => OptimizerKind::RmsProp {
                rho: self.parse_value("rmsprop.rho")?,
                eps: self.parse_value("rmsprop.eps")?,
            },
            other => return Err(CliError::Usage(format!("unknown optimizer {other:?}"))),
        };
        let hidden = self
            .get("hidden")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|e| CliError::Usage(format!("config key hidden: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let cfg = TrainConfig {
            lambda: self.parse_value("lambda")?,
            num_projections: self.parse_value("projections")?,
            batch_size: self.parse_value("batch_size")?,
            epochs: self.parse_value("epochs")?,
            latent_dim: self.parse_value("latent_dim")?,
            prior: self.prior()?,
            recon_loss: self.parse_value::<ReconLoss>("recon_loss")?,
            optimizer,
            learning_rate: self.parse_value("learning_rate")?,
            seed: RngSeed(self.parse_value("seed")?),
            eval_interval: self.parse_value("eval_interval")?,
            eval_projections: self.parse_value("eval_projections")?,
            patience: self.parse_value("patience")?,
            hidden,
            hidden_activation: self.parse_value::<Activation>("hidden_activation")?,
            encoder_output: self.parse_value::<Activation>("encoder_output")?,
            decoder_output: self.parse_value::<Activation>("decoder_output")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid_side(&self) -> CliResult<usize> {
        let n: usize = self.parse_value("grid_side")?;
        if n == 0 {
            return Err(CliError::Usage("grid_side must be at least 1".into()));
        }
        Ok(n)
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.get("output_dir"))
    }
}

fn split_assignment(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    SwissRoll {
        n: usize,
        noise: f64,
        heldout: usize,
    },
    Csv(PathBuf),
}
