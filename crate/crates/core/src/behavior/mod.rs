//! User behavior: scenario emulators, lifelog ingestion, imputation and
//! correlation statistics.

mod emulator;
mod lifelog;
mod scenario;
mod stats;

pub use emulator::{
    default_population, sample_engagement, sample_extras, Emulator, ExtrasCoupling, FixedSchedule,
    ScenarioEmulator, UserProfile, EXTRAS_CHANNELS,
};
pub use lifelog::{
    correlate_readiness, fit_profiles, ingest_lifelog, parse_lifelog, split_chronological,
    synthesize_lifelog, write_lifelog, Channel, CorrelationRow, DuplicateRecord, LifelogData,
    LifelogRecord, RangeViolation, LIFELOG_HEADER,
};
pub use scenario::{scenario_multiplier, ScenarioKind, ScenarioSpec};
pub use stats::{impute_missing, mean_std, pearson_correlation, ImputeMethod};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BehaviorError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("series has no present values")]
    AllMissing,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error(
        "participant {participant}: insufficient data for {channel} ({present} present values)"
    )]
    InsufficientData {
        participant: String,
        channel: &'static str,
        present: usize,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header { found: String, expected: String },
    #[error("line {line}: cannot parse {column} value {value:?}")]
    BadCell {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("lifelog file contains no records")]
    Empty,
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BehaviorError {
    fn from(e: std::io::Error) -> Self {
        BehaviorError::Io(e.to_string())
    }
}
