use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    FigGmmContractIv,
    FigGmmRepeated,
    EtcRegret,
    EpochGreedyRegret,
    OlsBias,
    RobustnessSuite,
    UniformityGrid,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::FigGmmContractIv,
        Preset::FigGmmRepeated,
        Preset::EtcRegret,
        Preset::EpochGreedyRegret,
        Preset::OlsBias,
        Preset::RobustnessSuite,
        Preset::UniformityGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FigGmmContractIv => "fig-gmm-contract-iv",
            Preset::FigGmmRepeated => "fig-gmm-repeated",
            Preset::EtcRegret => "etc-regret",
            Preset::EpochGreedyRegret => "epoch-greedy-regret",
            Preset::OlsBias => "ols-bias",
            Preset::RobustnessSuite => "robustness-suite",
            Preset::UniformityGrid => "uniformity-grid",
        }
    }

    /// Horizons of the seed × horizon lattice. Presets without a time axis
    /// use a single placeholder horizon.
    pub fn default_horizons(self) -> Vec<usize> {
        match self {
            Preset::FigGmmContractIv | Preset::FigGmmRepeated => half_decades(2, 5),
            Preset::EtcRegret => vec![2_500, 10_000, 40_000],
            Preset::EpochGreedyRegret => vec![1 << 13, 1 << 14, 1 << 15],
            Preset::OlsBias => vec![1_000, 10_000, 100_000],
            Preset::RobustnessSuite | Preset::UniformityGrid => Vec::new(),
        }
    }

    pub fn uses_horizons(self) -> bool {
        !matches!(self, Preset::RobustnessSuite | Preset::UniformityGrid)
    }
}

/// `10^lo, 10^(lo+½), …, 10^hi`, rounded to integers.
pub fn half_decades(lo: u32, hi: u32) -> Vec<usize> {
    (2 * lo..=2 * hi).map(|k| 10f64.powf(k as f64 / 2.0).round() as usize).collect()
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub sigma: f64,
    pub seeds: Vec<u64>,
    pub horizons: Vec<usize>,
    /// Confidence level for attached error bounds and epoch schedules.
    pub delta: f64,
    /// Grid step of the worst-case oracle in the robustness suite.
    pub resolution: f64,
    pub cell_budget: Duration,
    /// Record wall-clock time per cell. Off by default so output bytes only
    /// depend on the configuration.
    pub timing: bool,
    pub exec: Exec,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            preset,
            sigma: 1.0,
            seeds: (0..20).collect(),
            horizons: preset.default_horizons(),
            delta: 0.05,
            resolution: 0.05,
            cell_budget: Duration::from_secs(60),
            timing: false,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma {} must be >= 0", self.sigma)));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()));
        }
        if self.preset.uses_horizons() {
            if self.horizons.is_empty() {
                return Err(Error::InvalidParameter("horizon list is empty".into()));
            }
            if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter("horizons must be strictly increasing".into()));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {} must lie in (0, 1)", self.delta)));
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        for (row, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Schema { row: row + 1, msg: format!("expected key = value, got {line:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |msg: String| Error::Schema { row: row + 1, msg };
            match key {
                "sigma" => self.sigma = value.parse().map_err(|_| bad(format!("sigma {value:?}")))?,
                "delta" => self.delta = value.parse().map_err(|_| bad(format!("delta {value:?}")))?,
                "resolution" => self.resolution = value.parse().map_err(|_| bad(format!("resolution {value:?}")))?,
                "seeds" => self.seeds = parse_seeds(value).map_err(|e| bad(e.to_string()))?,
                "horizons" => self.horizons = parse_list(value).map_err(|e| bad(e.to_string()))?,
                "cell_budget_secs" => {
                    let secs: f64 = value.parse().map_err(|_| bad(format!("cell_budget_secs {value:?}")))?;
                    self.cell_budget = Duration::from_secs_f64(secs);
                }
                "timing" => self.timing = value.parse().map_err(|_| bad(format!("timing {value:?}")))?,
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn apply_override_file(&mut self, path: &Path) -> Result<()> {
        self.apply_overrides(&std::fs::read_to_string(path)?)
    }
}

/// Comma list of integers or a half-open range `a..b`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| Error::InvalidParameter(format!("seed range {text:?}")))?;
        let b: u64 = b.trim().parse().map_err(|_| Error::InvalidParameter(format!("seed range {text:?}")))?;
        return Ok((a..b).collect());
    }
    parse_list(text)
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::InvalidParameter(format!("cannot parse {s:?} in list {text:?}"))))
        .collect()
}
