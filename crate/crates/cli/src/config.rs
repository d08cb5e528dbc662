use std::path::{Path, PathBuf};

use fracspline::NumericConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20240607;
pub const DEFAULT_SIGNALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Zeta,
    Symbol,
    SupportBound,
    Coeffs,
    Fundamental,
    Synth,
    Sample,
    Reconstruct,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Prefilter,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffKind {
    #[default]
    Prefilter,
    Samples,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub sigma: Option<f64>,
    pub kernel: Option<String>,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub seed: u64,
    pub signals: usize,
    pub noise: f64,
    pub mode: Mode,
    pub coeff_kind: CoeffKind,
    pub override_support: bool,
    pub range: Option<String>,
    pub t_grid: Option<String>,
    pub points: Option<PathBuf>,
    pub signal: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub numeric: NumericConfig,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            sigma: None,
            kernel: None,
            s: None,
            a: None,
            tol: None,
            grid: None,
            seed: DEFAULT_SEED,
            signals: DEFAULT_SIGNALS,
            noise: 0.0,
            mode: Mode::default(),
            coeff_kind: CoeffKind::default(),
            override_support: false,
            range: None,
            t_grid: None,
            points: None,
            signal: None,
            samples: None,
            out: None,
            numeric: NumericConfig::default(),
        }
    }

    /// TOML text that parses back to an equal config.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    #[cfg(test)]
    pub fn from_canonical(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("bad canonical config: {e}")))
    }

    pub fn sigma(&self) -> Result<f64, CliError> {
        self.sigma.ok_or_else(|| CliError::config("--sigma is required"))
    }
}

/// Defaults read from `--config`; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub sigma: Option<f64>,
    pub kernel: Option<String>,
    pub seed: Option<u64>,
    pub signals: Option<usize>,
    pub noise: Option<f64>,
    pub mode: Option<Mode>,
    pub override_support: Option<bool>,
    pub threads: Option<usize>,
    pub numeric: Option<NumericConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let mut cfg = RunConfig::new(Command::Verify);
        cfg.sigma = Some(2.5);
        cfg.kernel = Some("rect:0.3".into());
        cfg.out = Some("report.json".into());
        cfg.numeric.trunc_tol = 1e-12;
        let text = cfg.canonical();
        assert_eq!(RunConfig::from_canonical(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_canonical(&text).unwrap().canonical(), text);
    }

    #[test]
    fn file_config_accepts_partial_numeric_table() {
        let f: FileConfig = toml::from_str("seed = 3\n[numeric]\ntrunc_tol = 1e-9\n").unwrap();
        assert_eq!(f.seed, Some(3));
        let n = f.numeric.unwrap();
        assert_eq!(n.trunc_tol, 1e-9);
        assert_eq!(n.zeta_tol, NumericConfig::default().zeta_tol);
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
