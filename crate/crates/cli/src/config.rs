use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use cocreate_core::agent::{ActionMode, PpoConfig};
use cocreate_core::baselines::{FixedPlanSpec, PlanKind};
use cocreate_core::behavior::{
    default_population, Emulator, ExtrasCoupling, ScenarioEmulator, ScenarioKind, ScenarioSpec,
    UserProfile,
};
use cocreate_core::env::{EnvSpec, ServiceParams};
use cocreate_core::neural::NetworkConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Epochs per phase; defaults to a third of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<f64>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::E2,
            phase_length: None,
            multipliers: None,
        }
    }
}

impl ScenarioConfig {
    pub fn spec(&self, kind: ScenarioKind, horizon: usize) -> ScenarioSpec {
        let mut spec = ScenarioSpec::new(kind, horizon);
        if let Some(len) = self.phase_length {
            spec.phase_length = len;
        }
        if let Some(m) = &self.multipliers {
            spec.multipliers = m.clone();
        }
        spec
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    /// Profiles written by `ingest`; the default is a synthetic cohort.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<PathBuf>,
    #[serde(default)]
    pub coupling: ExtrasCoupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkWidths {
    pub lstm_hidden: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
}

impl Default for NetworkWidths {
    fn default() -> Self {
        let d = NetworkConfig::new(1, 1);
        Self {
            lstm_hidden: d.lstm_hidden,
            actor_hidden: d.actor_hidden,
            critic_hidden: d.critic_hidden,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub episodes: usize,
    pub mode: ActionMode,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            episodes: 20,
            mode: ActionMode::Greedy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub scenarios: Vec<ScenarioKind>,
    pub baselines: Vec<FixedPlanSpec>,
    /// Directory holding `checkpoint_<scenario>_seed<N>.json`; when absent
    /// the adaptive policy is trained inline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            scenarios: ScenarioKind::ALL.to_vec(),
            baselines: PlanKind::FIXED
                .iter()
                .map(|k| FixedPlanSpec::new(*k))
                .collect(),
            checkpoint_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "alpha1")]
    Alpha1,
    #[serde(rename = "alpha2")]
    Alpha2,
    #[serde(rename = "B", alias = "budget")]
    Budget,
    #[serde(rename = "beta")]
    Beta,
}

impl SweepParam {
    pub fn label(self) -> &'static str {
        match self {
            SweepParam::Alpha1 => "alpha1",
            SweepParam::Alpha2 => "alpha2",
            SweepParam::Budget => "B",
            SweepParam::Beta => "beta",
        }
    }

    pub fn apply(self, params: &mut ServiceParams, value: f64) {
        match self {
            SweepParam::Alpha1 => params.alpha1 = value,
            SweepParam::Alpha2 => params.alpha2 = value,
            SweepParam::Budget => params.budget = value,
            SweepParam::Beta => params.beta = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<SweepParam>,
    #[serde(default)]
    pub values: Vec<f64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

fn default_split() -> f64 {
    0.8
}

/// Everything a command needs; the `service` block is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub service: ServiceParams,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default)]
    pub network: NetworkWidths,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_split")]
    pub train_split: f64,
}

impl RunConfig {
    /// Parses and validates. Error messages carry the TOML line and column.
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| Err(CliError::Config(m));
        if let Err(e) = self.service.validate() {
            return cfg(format!("[service] {e}"));
        }
        if let Err(e) = self
            .scenario
            .spec(self.scenario.kind, self.service.horizon)
            .validate()
        {
            return cfg(format!("[scenario] {e}"));
        }
        if let Err(e) = self.ppo.validate() {
            return cfg(format!("[ppo] {e}"));
        }
        if let Err(e) = self.network_config().validate() {
            return cfg(format!("[network] {e}"));
        }
        if let Err(e) = self.population.coupling.validate() {
            return cfg(format!("[population.coupling] {e}"));
        }
        for b in &self.compare.baselines {
            if let Err(e) = b.validate() {
                return cfg(format!("[compare] {e}"));
            }
        }
        if self.seeds.is_empty() {
            return cfg("seeds: at least one seed is required".into());
        }
        if self.evaluation.episodes == 0 {
            return cfg("[evaluation] episodes must be positive".into());
        }
        if !(self.train_split > 0.0 && self.train_split < 1.0) {
            return cfg(format!(
                "train_split must lie in (0, 1), got {}",
                self.train_split
            ));
        }
        if self.service.n_extras > 4 {
            return cfg("[service] n_extras: at most 4 auxiliary channels exist".into());
        }
        Ok(())
    }

    pub fn network_config(&self) -> NetworkConfig {
        let p = &self.service;
        let mut net = NetworkConfig::new(p.observation_len(), p.n_levels() + p.n_users);
        net.lstm_hidden = self.network.lstm_hidden;
        net.actor_hidden = self.network.actor_hidden.clone();
        net.critic_hidden = self.network.critic_hidden.clone();
        net
    }

    pub fn profiles(&self) -> Result<Vec<UserProfile>, CliError> {
        let n = self.service.n_users;
        let Some(path) = &self.population.profiles else {
            return Ok(default_population(n));
        };
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let map: BTreeMap<String, UserProfile> = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if map.len() != n {
            return Err(CliError::Config(format!(
                "{}: {} profiles for {n} users",
                path.display(),
                map.len()
            )));
        }
        Ok(map.into_values().collect())
    }

    /// Environment for `kind` with `params` in place of the service block.
    pub fn env_spec_with(
        &self,
        params: ServiceParams,
        kind: ScenarioKind,
    ) -> Result<EnvSpec, CliError> {
        let emulator = Emulator::Scenario(ScenarioEmulator {
            profiles: self.profiles()?,
            scenario: self.scenario.spec(kind, params.horizon),
            coupling: self.population.coupling.clone(),
        });
        let spec = EnvSpec::new(params, emulator);
        spec.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn env_spec(&self, kind: ScenarioKind) -> Result<EnvSpec, CliError> {
        self.env_spec_with(self.service.clone(), kind)
    }
}
