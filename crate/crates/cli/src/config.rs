use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bcoutage::{FadingModel64, SystemSpec64};
use serde::{Deserialize, Serialize};

/// One receiver: its fading law in textual form and its outage target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub fading: String,
    pub epsilon: f64,
}

/// Run configuration read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Average power constraint in dB.
    pub rho_db: f64,
    pub users: Vec<UserConfig>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Directory that relative `empirical(path=...)` entries resolve against.
    #[serde(skip)]
    pub base: Option<PathBuf>,
}

fn default_grid() -> usize {
    401
}

fn default_mc_samples() -> usize {
    100_000
}

fn default_seed() -> u64 {
    1
}

impl Default for RunConfig {
    /// Two users with mean gains 10 and 1, 1% outage each, 20 dB.
    fn default() -> Self {
        Self {
            rho_db: 20.0,
            users: vec![
                UserConfig {
                    fading: "exp(mean=10)".into(),
                    epsilon: 0.01,
                },
                UserConfig {
                    fading: "exp(mean=1)".into(),
                    epsilon: 0.01,
                },
            ],
            grid: default_grid(),
            mc_samples: default_mc_samples(),
            seed: default_seed(),
            out: None,
            base: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read configuration {}", path.display()))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.rho_db.is_finite(), "rho_db must be finite");
        anyhow::ensure!(!self.users.is_empty(), "at least one user is required");
        anyhow::ensure!(self.grid >= 2, "grid must be at least 2");
        anyhow::ensure!(self.mc_samples >= 1, "mc_samples must be at least 1");
        Ok(())
    }

    /// Linear power constraint `10^(rho_db / 10)`.
    pub fn rho(&self) -> f64 {
        10f64.powf(self.rho_db / 10.0)
    }

    pub fn models(&self) -> Result<Vec<FadingModel64>> {
        self.users
            .iter()
            .map(|u| {
                FadingModel64::parse_with_base(&u.fading, self.base.as_deref())
                    .with_context(|| format!("invalid fading '{}'", u.fading))
            })
            .collect()
    }

    /// Users sorted by quantile gain, with the original order recorded.
    pub fn spec(&self) -> Result<SystemSpec64> {
        let users = self
            .models()?
            .into_iter()
            .zip(self.users.iter().map(|u| u.epsilon))
            .collect();
        Ok(SystemSpec64::new(self.rho(), users)?)
    }
}
