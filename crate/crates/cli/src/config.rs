//! Run configuration files.
//!
//! A run config is TOML. Every key is optional and command-line flags take
//! precedence. Relative paths are resolved against the config file's
//! directory. See `camdepth.example.toml` at the repository root.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use camdepth_core::NoisePipelineConfig;
use serde::Deserialize;

/// Environment variable consulted for the worker count when no flag is given.
pub const WORKERS_ENV: &str = "CAMDEPTH_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub noise: NoisePipelineConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).context("parsing run config")?;
        cfg.noise.validate().context("invalid [noise] section")?;
        if cfg.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        for p in [&mut cfg.manifest, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base).with_context(|| format!("in {}", path.display()))
    }

    /// `--workers` (or `CAMDEPTH_WORKERS`, which clap folds into the flag),
    /// then the config file, then available parallelism.
    pub fn resolve_workers(&self, flag: Option<usize>) -> Result<usize> {
        let n = flag.or(self.workers).unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        });
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        Ok(n)
    }

    /// Noise config with the global seed applied, if any.
    pub fn noise_with_seed(&self, flag: Option<u64>) -> NoisePipelineConfig {
        let mut noise = self.noise.clone();
        if let Some(seed) = flag.or(self.seed) {
            noise.seed = seed;
        }
        noise
    }

    pub fn formats_or(&self, flag: &[ReportFormat]) -> Vec<ReportFormat> {
        if !flag.is_empty() {
            flag.to_vec()
        } else if !self.formats.is_empty() {
            self.formats.clone()
        } else {
            vec![ReportFormat::Json, ReportFormat::Csv]
        }
    }
}
