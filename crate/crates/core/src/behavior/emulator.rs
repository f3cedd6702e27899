use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::scenario::{scenario_multiplier, ScenarioSpec};
use super::BehaviorError;

/// Engagement (readiness) scale.
pub const ENGAGEMENT_MIN: f64 = 0.0;
pub const ENGAGEMENT_MAX: f64 = 10.0;

/// Auxiliary indicator channel with its admissible range and the nominal
/// scale used when encoding observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrasChannel {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub obs_scale: f64,
}

/// Auxiliary channels in observation order.
pub const EXTRAS_CHANNELS: [ExtrasChannel; 4] = [
    ExtrasChannel {
        name: "calories",
        min: 1374.0,
        max: 11185.0,
        obs_scale: 12000.0,
    },
    ExtrasChannel {
        name: "fatigue",
        min: 1.0,
        max: 5.0,
        obs_scale: 5.0,
    },
    ExtrasChannel {
        name: "mood",
        min: 1.0,
        max: 5.0,
        obs_scale: 5.0,
    },
    ExtrasChannel {
        name: "srpe",
        min: 30.0,
        max: 1800.0,
        obs_scale: 1800.0,
    },
];

/// Per-user distribution parameters for readiness and auxiliary indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub readiness_mean: f64,
    pub readiness_std: f64,
    pub fatigue_mean: f64,
    pub fatigue_std: f64,
    pub mood_mean: f64,
    pub mood_std: f64,
    pub calories_mean: f64,
    pub calories_std: f64,
    pub srpe_mean: f64,
    pub srpe_std: f64,
}

impl Default for UserProfile {
    /// Pooled statistics of the reference lifelog cohort.
    fn default() -> Self {
        Self {
            readiness_mean: 5.17,
            readiness_std: 1.66,
            fatigue_mean: 2.71,
            fatigue_std: 0.62,
            mood_mean: 3.20,
            mood_std: 0.63,
            calories_mean: 3044.0,
            calories_std: 867.0,
            srpe_mean: 379.0,
            srpe_std: 265.0,
        }
    }
}

impl UserProfile {
    /// Mean and standard deviation of each auxiliary channel, in
    /// [`EXTRAS_CHANNELS`] order.
    pub fn extras_moments(&self) -> [(f64, f64); 4] {
        [
            (self.calories_mean, self.calories_std),
            (self.fatigue_mean, self.fatigue_std),
            (self.mood_mean, self.mood_std),
            (self.srpe_mean, self.srpe_std),
        ]
    }

    pub fn validate(&self) -> Result<(), BehaviorError> {
        let check = |name: &str, mean: f64, std: f64, lo: f64, hi: f64| {
            if !(mean.is_finite() && std.is_finite()) {
                return Err(BehaviorError::InvalidProfile(format!(
                    "{name} is not finite"
                )));
            }
            if std < 0.0 {
                return Err(BehaviorError::InvalidProfile(format!(
                    "{name}_std must be >= 0"
                )));
            }
            if mean < lo || mean > hi {
                return Err(BehaviorError::InvalidProfile(format!(
                    "{name}_mean {mean} outside [{lo}, {hi}]"
                )));
            }
            Ok(())
        };
        check(
            "readiness",
            self.readiness_mean,
            self.readiness_std,
            ENGAGEMENT_MIN,
            ENGAGEMENT_MAX,
        )?;
        let names = ["calories", "fatigue", "mood", "srpe"];
        for ((mean, std), (ch, name)) in self
            .extras_moments()
            .into_iter()
            .zip(EXTRAS_CHANNELS.iter().zip(names))
        {
            check(name, mean, std, ch.min, ch.max)?;
        }
        Ok(())
    }
}

/// Linear-gaussian coupling of auxiliary indicators to engagement.
///
/// For standardized engagement `z = (x - readiness_mean) / readiness_std`,
/// channel `k` is drawn as
/// `mean_k + std_k * (rho_k * z + noise * sqrt(1 - rho_k^2) * eps_k)`
/// with `eps_k ~ N(0, 1)`, then clamped to the channel range. With `noise = 1`
/// the within-user correlation between engagement and channel `k` is `rho_k`
/// (before clamping).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtrasCoupling {
    pub calories: f64,
    pub fatigue: f64,
    pub mood: f64,
    pub srpe: f64,
    pub noise: f64,
}

impl Default for ExtrasCoupling {
    fn default() -> Self {
        Self {
            calories: 0.35,
            fatigue: -0.5,
            mood: 0.6,
            srpe: 0.35,
            noise: 1.0,
        }
    }
}

impl ExtrasCoupling {
    fn rhos(&self) -> [f64; 4] {
        [self.calories, self.fatigue, self.mood, self.srpe]
    }

    pub fn validate(&self) -> Result<(), BehaviorError> {
        if self.rhos().iter().any(|r| !(-1.0..=1.0).contains(r)) {
            return Err(BehaviorError::InvalidProfile(
                "coupling coefficients must lie in [-1, 1]".into(),
            ));
        }
        if !(self.noise >= 0.0) {
            return Err(BehaviorError::InvalidProfile(
                "coupling noise must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Draws one engagement level: normal around the profile's readiness, scaled
/// by the scenario multiplier and clamped to the readiness scale.
pub fn sample_engagement(
    profile: &UserProfile,
    spec: &ScenarioSpec,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let raw = profile.readiness_mean + profile.readiness_std * z;
    (raw * scenario_multiplier(spec, t)).clamp(ENGAGEMENT_MIN, ENGAGEMENT_MAX)
}

/// Draws the auxiliary indicators for one user, in [`EXTRAS_CHANNELS`] order.
pub fn sample_extras(
    profile: &UserProfile,
    engagement: f64,
    coupling: &ExtrasCoupling,
    rng: &mut ChaCha8Rng,
) -> [f64; 4] {
    let z = if profile.readiness_std > 0.0 {
        ((engagement - profile.readiness_mean) / profile.readiness_std).clamp(-4.0, 4.0)
    } else {
        0.0
    };
    let moments = profile.extras_moments();
    let rhos = coupling.rhos();
    let mut out = [0.0; 4];
    for k in 0..4 {
        let eps: f64 = rng.sample(StandardNormal);
        let rho = rhos[k];
        let (mean, std) = moments[k];
        let ch = &EXTRAS_CHANNELS[k];
        let v = mean + std * (rho * z + coupling.noise * (1.0 - rho * rho).sqrt() * eps);
        out[k] = v.clamp(ch.min, ch.max);
    }
    out
}

/// Synthetic cohort whose readiness means are spread over normal quantiles
/// around 5.17 (between-user sd 1.25, within-user sd 1.1, pooled close to
/// 1.66). Auxiliary channels use the pooled cohort statistics.
pub fn default_population(n: usize) -> Vec<UserProfile> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (0..n)
        .map(|i| {
            let q = normal.inverse_cdf((i as f64 + 0.5) / n as f64);
            UserProfile {
                readiness_mean: (5.17 + 1.25 * q).clamp(ENGAGEMENT_MIN, ENGAGEMENT_MAX),
                readiness_std: 1.1,
                ..UserProfile::default()
            }
        })
        .collect()
}

/// Stochastic emulator driven by per-user profiles and a scenario schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEmulator {
    pub profiles: Vec<UserProfile>,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub coupling: ExtrasCoupling,
}

/// Deterministic engagement schedule, one row per epoch. Epochs past the last
/// row reuse it. Auxiliary indicators are all zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedSchedule {
    pub engagement: Vec<Vec<f64>>,
}

impl FixedSchedule {
    pub fn row(&self, t: usize) -> &[f64] {
        &self.engagement[t.min(self.engagement.len() - 1)]
    }
}

/// Source of per-epoch engagement and auxiliary indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Emulator {
    Scenario(ScenarioEmulator),
    Schedule(FixedSchedule),
}

impl Emulator {
    pub fn n_users(&self) -> usize {
        match self {
            Emulator::Scenario(s) => s.profiles.len(),
            Emulator::Schedule(s) => s.engagement.first().map_or(0, Vec::len),
        }
    }

    /// Largest number of auxiliary channels this emulator can supply.
    pub fn max_extras(&self) -> usize {
        match self {
            Emulator::Scenario(_) => EXTRAS_CHANNELS.len(),
            Emulator::Schedule(_) => usize::MAX,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Emulator::Schedule(_))
    }

    pub fn validate(&self) -> Result<(), BehaviorError> {
        match self {
            Emulator::Scenario(s) => {
                s.scenario.validate()?;
                s.coupling.validate()?;
                s.profiles.iter().try_for_each(UserProfile::validate)
            }
            Emulator::Schedule(s) => {
                let n = self.n_users();
                if s.engagement.is_empty() || n == 0 {
                    return Err(BehaviorError::InvalidScenario(
                        "engagement schedule is empty".into(),
                    ));
                }
                for row in &s.engagement {
                    if row.len() != n {
                        return Err(BehaviorError::InvalidScenario(
                            "ragged engagement schedule".into(),
                        ));
                    }
                    if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                        return Err(BehaviorError::InvalidScenario(
                            "engagement must be finite and >= 0".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Engagement vector and `n_extras x n` indicator matrix for epoch `t`.
    pub fn draw(
        &self,
        t: usize,
        n_extras: usize,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<f64>, Vec<Vec<f64>>) {
        match self {
            Emulator::Scenario(s) => {
                let n = s.profiles.len();
                let mut engagement = Vec::with_capacity(n);
                let mut extras = vec![vec![0.0; n]; n_extras];
                for (i, p) in s.profiles.iter().enumerate() {
                    let x = sample_engagement(p, &s.scenario, t, rng);
                    let e = sample_extras(p, x, &s.coupling, rng);
                    for (k, row) in extras.iter_mut().enumerate() {
                        row[i] = e[k];
                    }
                    engagement.push(x);
                }
                (engagement, extras)
            }
            Emulator::Schedule(s) => {
                let row = s.row(t).to_vec();
                let n = row.len();
                (row, vec![vec![0.0; n]; n_extras])
            }
        }
    }
}
