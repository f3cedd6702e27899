use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::emulator::{sample_extras, ExtrasCoupling, UserProfile};
use super::stats::{impute_missing, mean_std, pearson_correlation, ImputeMethod};
use super::BehaviorError;

/// Exact header of a lifelog CSV file.
pub const LIFELOG_HEADER: [&str; 7] = [
    "participant_id",
    "date",
    "readiness",
    "calories",
    "fatigue",
    "mood",
    "srpe",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Readiness,
    Calories,
    Fatigue,
    Mood,
    Srpe,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::Readiness,
        Channel::Calories,
        Channel::Fatigue,
        Channel::Mood,
        Channel::Srpe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Readiness => "readiness",
            Channel::Calories => "calories",
            Channel::Fatigue => "fatigue",
            Channel::Mood => "mood",
            Channel::Srpe => "srpe",
        }
    }

    /// Admissible value range (inclusive).
    pub fn range(self) -> (f64, f64) {
        match self {
            Channel::Readiness => (1.0, 10.0),
            Channel::Calories => (1374.0, 11185.0),
            Channel::Fatigue | Channel::Mood => (1.0, 5.0),
            Channel::Srpe => (30.0, 1800.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifelogRecord {
    pub participant_id: String,
    pub date: NaiveDate,
    pub readiness: Option<f64>,
    pub calories: Option<f64>,
    pub fatigue: Option<f64>,
    pub mood: Option<f64>,
    pub srpe: Option<f64>,
}

impl LifelogRecord {
    pub fn get(&self, ch: Channel) -> Option<f64> {
        match ch {
            Channel::Readiness => self.readiness,
            Channel::Calories => self.calories,
            Channel::Fatigue => self.fatigue,
            Channel::Mood => self.mood,
            Channel::Srpe => self.srpe,
        }
    }

    fn slot(&mut self, ch: Channel) -> &mut Option<f64> {
        match ch {
            Channel::Readiness => &mut self.readiness,
            Channel::Calories => &mut self.calories,
            Channel::Fatigue => &mut self.fatigue,
            Channel::Mood => &mut self.mood,
            Channel::Srpe => &mut self.srpe,
        }
    }
}

/// A present value outside its channel range. The value is dropped from the
/// record (treated as missing).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeViolation {
    pub line: u64,
    pub channel: Channel,
    pub value: f64,
}

/// A `(participant, date)` pair seen more than once; the later row wins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplicateRecord {
    pub line: u64,
    pub participant_id: String,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LifelogData {
    pub records: Vec<LifelogRecord>,
    pub violations: Vec<RangeViolation>,
    pub duplicates: Vec<DuplicateRecord>,
}

/// Parses lifelog CSV from any reader.
pub fn parse_lifelog<R: Read>(reader: R) -> Result<LifelogData, BehaviorError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found.iter().all(|h| h.is_empty()) {
        return Err(BehaviorError::Empty);
    }
    if found != LIFELOG_HEADER {
        return Err(BehaviorError::Header {
            found: found.join(","),
            expected: LIFELOG_HEADER.join(","),
        });
    }

    let mut data = LifelogData::default();
    let mut index: HashMap<(String, NaiveDate), usize> = HashMap::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let id = row[0].trim();
        if id.is_empty() {
            return Err(BehaviorError::BadCell {
                line,
                column: "participant_id",
                value: String::new(),
            });
        }
        let date = NaiveDate::parse_from_str(row[1].trim(), "%Y-%m-%d").map_err(|_| {
            BehaviorError::BadCell {
                line,
                column: "date",
                value: row[1].to_string(),
            }
        })?;
        let mut rec = LifelogRecord {
            participant_id: id.to_string(),
            date,
            readiness: None,
            calories: None,
            fatigue: None,
            mood: None,
            srpe: None,
        };
        for (k, ch) in Channel::ALL.into_iter().enumerate() {
            let cell = row[k + 2].trim();
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| BehaviorError::BadCell {
                    line,
                    column: ch.name(),
                    value: cell.to_string(),
                })?;
            let (lo, hi) = ch.range();
            if v < lo || v > hi {
                data.violations.push(RangeViolation {
                    line,
                    channel: ch,
                    value: v,
                });
            } else {
                *rec.slot(ch) = Some(v);
            }
        }
        let key = (rec.participant_id.clone(), rec.date);
        if let Some(&pos) = index.get(&key) {
            data.duplicates.push(DuplicateRecord {
                line,
                participant_id: key.0,
                date: key.1,
            });
            data.records[pos] = rec;
        } else {
            index.insert(key, data.records.len());
            data.records.push(rec);
        }
    }
    if data.records.is_empty() {
        return Err(BehaviorError::Empty);
    }
    Ok(data)
}

fn csv_error(e: csv::Error) -> BehaviorError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => BehaviorError::Io(io.to_string()),
        _ => BehaviorError::Malformed {
            line,
            message: e.to_string(),
        },
    }
}

/// Reads and parses a lifelog CSV file.
pub fn ingest_lifelog(path: &Path) -> Result<LifelogData, BehaviorError> {
    let file = std::fs::File::open(path)?;
    parse_lifelog(std::io::BufReader::new(file))
}

/// Writes records in the lifelog CSV schema; missing cells are left empty.
pub fn write_lifelog<W: Write>(records: &[LifelogRecord], writer: W) -> Result<(), BehaviorError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LIFELOG_HEADER).map_err(csv_error)?;
    for r in records {
        let mut row = vec![
            r.participant_id.clone(),
            r.date.format("%Y-%m-%d").to_string(),
        ];
        row.extend(
            Channel::ALL
                .iter()
                .map(|ch| r.get(*ch).map(|v| v.to_string()).unwrap_or_default()),
        );
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn group_by_participant(records: &[LifelogRecord]) -> BTreeMap<&str, Vec<&LifelogRecord>> {
    let mut groups: BTreeMap<&str, Vec<&LifelogRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.participant_id.as_str()).or_default().push(r);
    }
    for rows in groups.values_mut() {
        rows.sort_by_key(|r| r.date);
    }
    groups
}

/// Fits one profile per participant from date-ordered, linearly imputed
/// channel series.
///
/// Readiness needs at least two present values per participant. An auxiliary
/// channel with fewer than two present values falls back to the pooled cohort
/// statistics of [`UserProfile::default`].
pub fn fit_profiles(
    records: &[LifelogRecord],
) -> Result<BTreeMap<String, UserProfile>, BehaviorError> {
    let fallback = UserProfile::default();
    let mut out = BTreeMap::new();
    for (id, rows) in group_by_participant(records) {
        let mut fitted = [(0.0, 0.0); 5];
        for (k, ch) in Channel::ALL.into_iter().enumerate() {
            let series: Vec<Option<f64>> = rows.iter().map(|r| r.get(ch)).collect();
            let present = series.iter().filter(|v| v.is_some()).count();
            if present < 2 {
                if ch == Channel::Readiness {
                    return Err(BehaviorError::InsufficientData {
                        participant: id.to_string(),
                        channel: ch.name(),
                        present,
                    });
                }
                log::warn!(
                    "participant {id}: {} has {present} present values, using cohort statistics",
                    ch.name()
                );
                fitted[k] = match ch {
                    Channel::Calories => (fallback.calories_mean, fallback.calories_std),
                    Channel::Fatigue => (fallback.fatigue_mean, fallback.fatigue_std),
                    Channel::Mood => (fallback.mood_mean, fallback.mood_std),
                    _ => (fallback.srpe_mean, fallback.srpe_std),
                };
                continue;
            }
            let filled = impute_missing(&series, ImputeMethod::Linear)?;
            let (mean, std) = mean_std(&filled)?;
            let (lo, hi) = ch.range();
            fitted[k] = (mean.clamp(lo, hi), std);
        }
        out.insert(
            id.to_string(),
            UserProfile {
                readiness_mean: fitted[0].0,
                readiness_std: fitted[0].1,
                calories_mean: fitted[1].0,
                calories_std: fitted[1].1,
                fatigue_mean: fitted[2].0,
                fatigue_std: fitted[2].1,
                mood_mean: fitted[3].0,
                mood_std: fitted[3].1,
                srpe_mean: fitted[4].0,
                srpe_std: fitted[4].1,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub indicator: &'static str,
    pub r: Option<f64>,
    pub n: usize,
}

/// Pooled Pearson correlation of readiness against each auxiliary channel,
/// over rows where both values are present.
pub fn correlate_readiness(records: &[LifelogRecord]) -> Vec<CorrelationRow> {
    Channel::ALL[1..]
        .iter()
        .map(|&ch| {
            let (a, b): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter_map(|r| Some((r.readiness?, r.get(ch)?)))
                .unzip();
            CorrelationRow {
                indicator: ch.name(),
                r: pearson_correlation(&a, &b).ok(),
                n: a.len(),
            }
        })
        .collect()
}

/// Splits each participant's records chronologically: the first
/// `ceil(fraction * len)` days go to the first set.
pub fn split_chronological(
    records: &[LifelogRecord],
    fraction: f64,
) -> (Vec<LifelogRecord>, Vec<LifelogRecord>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for rows in group_by_participant(records).into_values() {
        let cut = ((rows.len() as f64) * fraction).ceil() as usize;
        for (i, r) in rows.into_iter().enumerate() {
            if i < cut {
                train.push(r.clone());
            } else {
                test.push(r.clone());
            }
        }
    }
    (train, test)
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (v * p).round() / p
}

/// Generates daily lifelog records for the given participants using the
/// readiness model and the auxiliary-indicator coupling. Each cell is dropped
/// independently with probability `missing_rate`.
pub fn synthesize_lifelog(
    participants: &[(String, UserProfile)],
    start: NaiveDate,
    days: usize,
    coupling: &ExtrasCoupling,
    missing_rate: f64,
    seed: u64,
) -> Vec<LifelogRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(participants.len() * days);
    for (id, profile) in participants {
        for d in 0..days {
            let z: f64 = rng.sample(StandardNormal);
            let (lo, hi) = Channel::Readiness.range();
            let readiness = round_to(
                (profile.readiness_mean + profile.readiness_std * z).clamp(lo, hi),
                2,
            );
            let e = sample_extras(profile, readiness, coupling, &mut rng);
            let mut keep = |v: f64| (rng.gen::<f64>() >= missing_rate).then_some(v);
            out.push(LifelogRecord {
                participant_id: id.clone(),
                date: start + Duration::days(d as i64),
                readiness: keep(readiness),
                calories: keep(e[0].round()),
                fatigue: keep(round_to(e[1], 2)),
                mood: keep(round_to(e[2], 2)),
                srpe: keep(e[3].round()),
            });
        }
    }
    out
}
