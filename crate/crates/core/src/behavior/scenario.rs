use serde::{Deserialize, Serialize};

use super::BehaviorError;

/// Scripted evolution of user engagement over the service horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Engagement stays flat.
    E1,
    /// Engagement rises by 40% after the first phase.
    E2,
    /// Engagement doubles after the first phase.
    E3,
    /// Engagement drops by 20% in the first phase, returns to baseline in the
    /// second and sits at 1.6x baseline in the third.
    E4,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::E1,
        ScenarioKind::E2,
        ScenarioKind::E3,
        ScenarioKind::E4,
    ];

    pub fn default_multipliers(self) -> Vec<f64> {
        match self {
            ScenarioKind::E1 => vec![1.0],
            ScenarioKind::E2 => vec![1.0, 1.4],
            ScenarioKind::E3 => vec![1.0, 2.0],
            ScenarioKind::E4 => vec![0.8, 1.0, 1.6],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::E1 => "E1",
            ScenarioKind::E2 => "E2",
            ScenarioKind::E3 => "E3",
            ScenarioKind::E4 => "E4",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = BehaviorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E1" => Ok(ScenarioKind::E1),
            "E2" => Ok(ScenarioKind::E2),
            "E3" => Ok(ScenarioKind::E3),
            "E4" => Ok(ScenarioKind::E4),
            other => Err(BehaviorError::InvalidScenario(format!(
                "unknown scenario {other:?}"
            ))),
        }
    }
}

/// A scenario with its phase schedule.
///
/// Phase boundaries are expressed in epochs; the default phase length is a
/// third of the horizon so that every regime appears in any horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub phase_length: usize,
    pub multipliers: Vec<f64>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, horizon: usize) -> Self {
        Self {
            kind,
            phase_length: (horizon / 3).max(1),
            multipliers: kind.default_multipliers(),
        }
    }

    pub fn validate(&self) -> Result<(), BehaviorError> {
        if self.phase_length == 0 {
            return Err(BehaviorError::InvalidScenario(
                "phase_length must be positive".into(),
            ));
        }
        if self.multipliers.is_empty() {
            return Err(BehaviorError::InvalidScenario(
                "multipliers must not be empty".into(),
            ));
        }
        if let Some(m) = self
            .multipliers
            .iter()
            .find(|m| !m.is_finite() || **m <= 0.0)
        {
            return Err(BehaviorError::InvalidScenario(format!(
                "multiplier {m} must be positive"
            )));
        }
        Ok(())
    }
}

/// Engagement multiplier in effect at epoch `t`. Epochs past the last phase
/// keep the last multiplier.
pub fn scenario_multiplier(spec: &ScenarioSpec, t: usize) -> f64 {
    let phase = (t / spec.phase_length.max(1)).min(spec.multipliers.len() - 1);
    spec.multipliers[phase]
}
