//! Run configuration: one JSON document, unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use reldyad_core::augment::ChainConfig;
use reldyad_core::events::{CovariateKind, EventSchema};
use reldyad_core::model::{check_identifiable, ModelSpec};
use reldyad_core::netstats::StatisticSpec;
use reldyad_core::ppois::FitOptions;
use reldyad_core::simulate::GeneratorSpec;
use reldyad_core::smooth::SplineConfig;
use reldyad_core::study::{Dg, Scale};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fit,
    Simulate,
    Study,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateFile {
    pub path: PathBuf,
    /// Columns not listed here are read as continuous.
    #[serde(default)]
    pub kinds: BTreeMap<String, CovariateKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicFile {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
    #[serde(default)]
    pub schema: EventSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariates: Option<CovariateFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dyadic: Vec<DyadicFile>,
    /// `actor_a,actor_b` pairs; all pairs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_set: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrueModel {
    #[serde(default)]
    pub statistics: Vec<StatisticSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyBlock {
    pub dg: Dg,
    pub scale: Scale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
}

fn default_spline() -> Option<SplineConfig> {
    Some(SplineConfig::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub io: IoConfig,
    #[serde(default)]
    pub true_model: TrueModel,
    /// Absent: plain REM. Present: REMSE with this spurious intensity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spurious_model: Option<ModelSpec>,
    /// Baseline of the true intensity; `null` for a constant baseline.
    #[serde(default = "default_spline")]
    pub spline: Option<SplineConfig>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyBlock>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: None,
            io: IoConfig::default(),
            true_model: TrueModel::default(),
            spurious_model: None,
            spline: default_spline(),
            fit: FitOptions::default(),
            chain: ChainConfig::default(),
            generator: None,
            study: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::input(format!("invalid config {}: {e}", path.display())))?;
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(parent).unwrap_or_else(|_| parent.to_path_buf());
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    /// Makes relative input paths relative to the config file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.io.events.as_mut() {
            fix(p);
        }
        if let Some(c) = self.io.covariates.as_mut() {
            fix(&mut c.path);
        }
        for d in &mut self.io.dyadic {
            fix(&mut d.path);
        }
        if let Some(p) = self.io.risk_set.as_mut() {
            fix(p);
        }
    }

    /// Fixes the seed: flag, then top-level `seed`, then `chain.seed`.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> u64 {
        let seed = flag.or(self.seed).unwrap_or(self.chain.seed);
        self.seed = Some(seed);
        self.chain.seed = seed;
        seed
    }

    pub fn check_command(&self, cmd: Command) -> Result<(), Failure> {
        match self.command {
            Some(c) if c != cmd => Err(Failure::input(format!(
                "config is for `{}` but `{}` was invoked",
                name(c),
                name(cmd)
            ))),
            _ => Ok(()),
        }
    }

    pub fn true_spec(&self) -> ModelSpec {
        ModelSpec {
            statistics: self.true_model.statistics.clone(),
            spline: self.spline,
        }
    }

    /// Structural checks that need no data.
    pub fn validate_models(&self) -> Result<(), Failure> {
        let t = self.true_spec();
        t.validate().map_err(Failure::from_core)?;
        if let Some(s) = &self.spurious_model {
            s.validate().map_err(Failure::from_core)?;
            check_identifiable(&t, s).map_err(Failure::from_core)?;
        }
        Ok(())
    }
}

fn name(c: Command) -> &'static str {
    match c {
        Command::Fit => "fit",
        Command::Simulate => "simulate",
        Command::Study => "study",
    }
}
