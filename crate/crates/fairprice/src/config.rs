//! Experiment description, read from TOML with dotted sections:
//!
//! ```toml
//! environment.preset = "example1"
//! agent.kind = "fpa"
//! agent.mode = "scaled"
//! agent.scale_factor = 2.0
//! agent.kappa_r = 0.5
//! agent.kappa_s = 0.45
//! sweep.horizons = [10000, 100000, 1000000]
//! sweep.count = 10
//! output.dir = "out"
//! ```

use std::path::{Path, PathBuf};

use fairprice_core::fpa::{
    ConstantsMode, FpaConfig, DEFAULT_ERROR_PROB, DEFAULT_RELAXATION, DEFAULT_SCALE,
    SCALED_KAPPA_R, SCALED_KAPPA_S,
};
use fairprice_core::sim::{example1_market, example_eps_market, lowerbound_family_market};
use fairprice_core::{AcceptanceModel, MarketConfig, PriceGrid};
use serde::{Deserialize, Serialize};

use crate::error::{io_at, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Example1,
    ExampleEps,
    Lowerbound,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub preset: Preset,
    /// Perturbation for `example-eps`.
    pub eps: f64,
    /// Bumped index `j` for `lowerbound` (0 = flat).
    pub bump: usize,
    /// Number of prices for `lowerbound`.
    pub dimension: usize,
    /// Inline market for `custom`.
    pub prices: Option<Vec<f64>>,
    pub accept1: Option<Vec<f64>>,
    pub accept2: Option<Vec<f64>>,
    pub q: Option<f64>,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        EnvironmentSpec {
            preset: Preset::Example1,
            eps: 0.0,
            bump: 0,
            dimension: 3,
            prices: None,
            accept1: None,
            accept2: None,
            q: None,
        }
    }
}

impl EnvironmentSpec {
    /// The market for a run of length `horizon`; only the lower-bound family
    /// depends on it.
    pub fn market(&self, horizon: u64) -> Result<MarketConfig> {
        Ok(match self.preset {
            Preset::Example1 => example1_market(),
            Preset::ExampleEps => example_eps_market(self.eps)?,
            Preset::Lowerbound => lowerbound_family_market(self.bump, self.dimension, horizon)?,
            Preset::Custom => {
                let missing = |key: &str| Error::Config(format!("environment.{key} is required for the custom preset"));
                let prices = self.prices.clone().ok_or_else(|| missing("prices"))?;
                let f1 = self.accept1.clone().ok_or_else(|| missing("accept1"))?;
                let f2 = self.accept2.clone().ok_or_else(|| missing("accept2"))?;
                let q = self.q.ok_or_else(|| missing("q"))?;
                let model = AcceptanceModel::from_estimates(f1, f2)?;
                MarketConfig::new(PriceGrid::new(prices)?, model, q)?
            }
        })
    }

    /// Whether the closed-form optimum applies.
    pub fn in_example_family(&self) -> Option<f64> {
        match self.preset {
            Preset::Example1 => Some(0.0),
            Preset::ExampleEps => Some(self.eps),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Fpa,
    BestFixedOracle,
    UcbFixed,
    GroupwiseUnconstrainedOracle,
    FairOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSpec {
    pub kind: AgentKind,
    pub mode: ConstantsMode,
    pub scale_factor: f64,
    /// Scaled-mode radius multipliers.
    pub kappa_r: f64,
    pub kappa_s: f64,
    pub error_prob: f64,
    pub relaxation: f64,
}

impl Default for AgentSpec {
    fn default() -> Self {
        AgentSpec {
            kind: AgentKind::Fpa,
            mode: ConstantsMode::Scaled,
            scale_factor: DEFAULT_SCALE,
            kappa_r: SCALED_KAPPA_R,
            kappa_s: SCALED_KAPPA_S,
            error_prob: DEFAULT_ERROR_PROB,
            relaxation: DEFAULT_RELAXATION,
        }
    }
}

impl AgentSpec {
    pub fn fpa_config(&self, market: &MarketConfig, horizon: u64, seed: u64) -> FpaConfig {
        let mut cfg = FpaConfig::new(market.grid.clone(), market.q, horizon, seed);
        cfg.constants_mode = self.mode;
        cfg.scale_factor = self.scale_factor;
        cfg.kappa_r = self.kappa_r;
        cfg.kappa_s = self.kappa_s;
        cfg.error_prob = self.error_prob;
        cfg.relaxation_constant = self.relaxation;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub horizons: Vec<u64>,
    /// Explicit seeds; overrides `base_seed` and `count`.
    pub seeds: Option<Vec<u64>>,
    pub base_seed: u64,
    pub count: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { horizons: vec![10_000], seeds: None, base_seed: 0, count: 1 }
    }
}

impl SweepSpec {
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.count).map(|k| self.base_seed + k).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub trace_csv: bool,
    pub summary_json: bool,
    pub curve_csv: bool,
    /// Keep every n-th round in traces; 0 keeps none.
    pub record_every: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            trace_csv: true,
            summary_json: true,
            curve_csv: true,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub environment: EnvironmentSpec,
    pub agent: AgentSpec,
    pub sweep: SweepSpec,
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.horizons.is_empty() {
            return Err(Error::Config("sweep.horizons must not be empty".into()));
        }
        if self.sweep.horizons.contains(&0) {
            return Err(Error::Config("sweep.horizons must be at least 1".into()));
        }
        if self.sweep.seed_list().is_empty() {
            return Err(Error::Config("sweep needs at least one seed".into()));
        }
        let probe = self.sweep.horizons[0];
        let market = self.environment.market(probe)?;
        self.agent.fpa_config(&market, probe, 0).validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_parse() {
        let spec = ExperimentSpec::from_toml_str(
            "environment.preset = \"example-eps\"\nenvironment.eps = 0.01\nagent.mode = \"paper\"\nsweep.horizons = [100, 1000]\nsweep.count = 3\nsweep.base_seed = 5\n",
        )
        .unwrap();
        assert_eq!(spec.environment.preset, Preset::ExampleEps);
        assert_eq!(spec.agent.mode, ConstantsMode::Paper);
        assert_eq!(spec.sweep.seed_list(), vec![5, 6, 7]);
        let again = ExperimentSpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentSpec::from_toml_str("agent.scale_factor = \"big\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("scale_factor") && msg.contains("line 1"), "{msg}");
        let err = ExperimentSpec::from_toml_str("agent.colour = 1\n").unwrap_err();
        assert!(err.to_string().contains("colour"));
        assert!(ExperimentSpec::from_toml_str("sweep.horizons = []\n").is_err());
        assert!(ExperimentSpec::from_toml_str("agent.scale_factor = -1.0\n").is_err());
    }

    #[test]
    fn custom_market_requires_all_fields() {
        let err = ExperimentSpec::from_toml_str("environment.preset = \"custom\"\n").unwrap_err();
        assert!(err.to_string().contains("prices"));
        let spec = ExperimentSpec::from_toml_str(
            "[environment]\npreset = \"custom\"\nprices = [0.5, 1.0]\naccept1 = [0.9, 0.4]\naccept2 = [0.7, 0.3]\nq = 0.4\n",
        )
        .unwrap();
        assert_eq!(spec.environment.market(10).unwrap().dim(), 2);
    }
}
