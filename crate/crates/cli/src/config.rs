use selberg_lab::{LabError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Degree,
    Validate,
    Eval,
    GammaAsym,
    GammaSets,
    Detect,
    Classify,
    ProbePrimitivity,
    Zeros,
    CompareZeros,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything that determines a run. Hashed to tag the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Bundled spec names or paths to JSON specs.
    pub specs: Vec<String>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
    /// Smoothing length X for `eval` (default max(|t|,2)^{4/3}).
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    /// t values for `eval` and `gamma-asym`, T values for `detect`.
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// σ_min, σ_max, t_min, t_max.
    #[serde(default)]
    pub rectangle: Option<[f64; 4]>,
    #[serde(default)]
    pub shift_a: Option<f64>,
    #[serde(default)]
    pub period_q: Option<u64>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub q_max: Option<u64>,
    /// t_min, t_max, step for the primitivity probe.
    #[serde(default)]
    pub t_grid: Option<[f64; 3]>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| LabError::Parse(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Spec paths and the output path are taken relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        for s in &mut self.specs {
            if selberg_lab::corpus::bundled(s).is_none() && Path::new(s).is_relative() {
                *s = base.join(&*s).to_string_lossy().into_owned();
            }
        }
        if let Some(o) = &mut self.output {
            if Path::new(o).is_relative() {
                *o = base.join(&*o).to_string_lossy().into_owned();
            }
        }
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check(&self) -> Result<()> {
        let ok = match self.command {
            Command::Validate => !self.specs.is_empty(),
            Command::CompareZeros => self.specs.len() == 2,
            _ => self.specs.len() == 1,
        };
        if !ok {
            return Err(LabError::Invalid(format!("wrong number of specs ({}) for {:?}", self.specs.len(), self.command)));
        }
        if self.threads == Some(0) {
            return Err(LabError::Invalid("threads must be positive".into()));
        }
        Ok(())
    }
}
