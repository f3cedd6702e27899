use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use cocreate_core::agent::{evaluate, train, AdaptivePolicy, Policy, TrainOutcome};
use cocreate_core::baselines::{compare_policies, ComparisonTable, FixedPlanPolicy, Improvement};
use cocreate_core::behavior::{
    correlate_readiness, fit_profiles, ingest_lifelog, split_chronological, ScenarioKind,
};
use cocreate_core::env::EnvSpec;
use cocreate_core::neural::{Checkpoint, NetworkParams};

use crate::config::RunConfig;
use crate::output::{
    curve_csv, totals_csv, OutputDir, AGGREGATE_ROW, COMPARE_HEADER, CORRELATION_HEADER,
    SWEEP_HEADER,
};
use crate::CliError;

/// Environment variable capping the number of parallel workers.
pub const THREADS_ENV: &str = "COCREATE_SIM_THREADS";

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Runs `f` for every item on the worker pool, keeping input order.
fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, CliError> + Sync + Send,
{
    worker_pool()?.install(|| items.par_iter().map(&f).collect())
}

fn checkpoint_for(
    cfg: &RunConfig,
    outcome: &TrainOutcome,
    seed: u64,
    scenario: ScenarioKind,
) -> Result<Vec<u8>, CliError> {
    // The output location is not part of the model; leaving it out keeps
    // checkpoints from identical runs byte-identical.
    let mut echo = serde_json::to_value(cfg)?;
    if let Some(obj) = echo.as_object_mut() {
        obj.remove("output_dir");
    }
    let mut ck = Checkpoint::from_params(&outcome.params, echo);
    ck.metadata.insert("seed".into(), seed.to_string());
    ck.metadata
        .insert("scenario".into(), scenario.label().to_string());
    ck.metadata
        .insert("return_scale".into(), outcome.return_scale.to_string());
    let mut bytes = ck.to_json_bytes()?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn load_params(path: &Path, cfg: &RunConfig) -> Result<NetworkParams, CliError> {
    if !path.exists() {
        return Err(CliError::Runtime(format!(
            "missing checkpoint {}",
            path.display()
        )));
    }
    let ck = Checkpoint::load(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let expected = cfg.network_config();
    let got = &ck.network;
    if got.input_dim != expected.input_dim || got.actor_outputs != expected.actor_outputs {
        return Err(CliError::Runtime(format!(
            "{}: dimension mismatch, checkpoint has {} inputs and {} actor outputs, config needs {} and {}",
            path.display(),
            got.input_dim,
            got.actor_outputs,
            expected.input_dim,
            expected.actor_outputs
        )));
    }
    Ok(ck.to_params()?)
}

fn train_one(cfg: &RunConfig, spec: &EnvSpec, seed: u64) -> Result<TrainOutcome, CliError> {
    log::info!("training seed {seed}");
    let out = train(spec, &cfg.network_config(), &cfg.ppo, seed)?;
    if let Some(last) = out.curve.last() {
        log::info!(
            "seed {seed}: final batch mean objective {:.3}",
            last.mean_objective
        );
    }
    Ok(out)
}

pub fn checkpoint_name(seed: u64) -> String {
    format!("checkpoint_seed{seed}.json")
}

/// One training run per seed: checkpoint, curve CSV, manifest.
pub fn cmd_train(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let kind = cfg.scenario.kind;
    let spec = cfg.env_spec(kind)?;
    let outcomes = par_map(&cfg.seeds, |&seed| train_one(cfg, &spec, seed))?;
    let mut out = OutputDir::new(cfg.output_dir.clone());
    for (seed, outcome) in cfg.seeds.iter().zip(&outcomes) {
        out.write(
            &checkpoint_name(*seed),
            &checkpoint_for(cfg, outcome, *seed, kind)?,
        )?;
        out.write(
            &format!("curve_seed{seed}.csv"),
            curve_csv(&outcome.curve).as_bytes(),
        )?;
    }
    Ok(out.finish("train", cfg, &cfg.seeds, start.elapsed().as_secs_f64())?)
}

#[derive(Debug, Serialize)]
struct EvaluationSummary {
    seed: u64,
    checkpoint: String,
    episodes: usize,
    mean_objective: f64,
    std_objective: f64,
    aggregate: f64,
}

/// Per-user totals for each seed's checkpoint (or one explicit checkpoint).
pub fn cmd_evaluate(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let spec = cfg.env_spec(cfg.scenario.kind)?;
    let mut out = OutputDir::new(cfg.output_dir.clone());
    let mut summary = Vec::new();
    for &seed in &cfg.seeds {
        let path = checkpoint.map_or_else(|| out.path(&checkpoint_name(seed)), Path::to_path_buf);
        let params = load_params(&path, cfg)?;
        let mut policy = AdaptivePolicy::new(params, cfg.evaluation.mode);
        let report = evaluate(&mut policy, &spec, cfg.evaluation.episodes, seed)?;
        out.write(
            &format!("totals_seed{seed}.csv"),
            totals_csv(&report.per_user).as_bytes(),
        )?;
        summary.push(EvaluationSummary {
            seed,
            checkpoint: path.display().to_string(),
            episodes: report.episodes,
            mean_objective: report.mean_objective,
            std_objective: report.std_objective,
            aggregate: report.aggregate,
        });
    }
    out.write("evaluation.json", &json_bytes(&summary)?)?;
    Ok(out.finish("evaluate", cfg, &cfg.seeds, start.elapsed().as_secs_f64())?)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Serialize)]
pub struct ScenarioComparison {
    pub scenario: ScenarioKind,
    pub table: ComparisonTable,
    /// Improvement of the adaptive policy over each baseline.
    pub improvements: BTreeMap<String, Improvement>,
}

/// Table-style CSV: one row per user plus an aggregate row.
pub fn compare_csv(table: &ComparisonTable) -> String {
    let adaptive = table.get("adaptive");
    let n = adaptive.map_or(0, |a| a.per_user.len());
    let mut s = format!("{COMPARE_HEADER}\n");
    let cell = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    for row in 0..=n {
        let pick = |name: &str| {
            table.get(name).map(|p| {
                if row < n {
                    p.per_user[row]
                } else {
                    p.aggregate
                }
            })
        };
        let a = pick("adaptive");
        let label = if row < n {
            (row + 1).to_string()
        } else {
            AGGREGATE_ROW.to_string()
        };
        let _ = write!(s, "{label},{}", cell(a));
        for plan in ["plan1", "plan2", "plan3"] {
            let b = pick(plan);
            let imp = a
                .zip(b)
                .map(|(a, b)| cocreate_core::agent::improvement_pct(a, b));
            let _ = write!(s, ",{},{}", cell(b), cell(imp));
        }
        s.push('\n');
    }
    s
}

/// Adaptive policy against every configured baseline in every configured
/// scenario.
pub fn cmd_compare(cfg: &RunConfig) -> Result<(PathBuf, Vec<ScenarioComparison>), CliError> {
    let start = Instant::now();
    let mut out = OutputDir::new(cfg.output_dir.clone());
    let mut results = Vec::new();
    for &kind in &cfg.compare.scenarios {
        let spec = cfg.env_spec(kind)?;
        let label = kind.label().to_lowercase();
        let adaptive: Vec<NetworkParams> = match &cfg.compare.checkpoint_dir {
            Some(dir) => cfg
                .seeds
                .iter()
                .map(|s| load_params(&dir.join(format!("checkpoint_{label}_seed{s}.json")), cfg))
                .collect::<Result<_, _>>()?,
            None => {
                let outcomes = par_map(&cfg.seeds, |&seed| train_one(cfg, &spec, seed))?;
                for (seed, o) in cfg.seeds.iter().zip(&outcomes) {
                    out.write(
                        &format!("checkpoint_{label}_seed{seed}.json"),
                        &checkpoint_for(cfg, o, *seed, kind)?,
                    )?;
                }
                outcomes.into_iter().map(|o| o.params).collect()
            }
        };
        let mut names = vec!["adaptive"];
        for b in &cfg.compare.baselines {
            if !names.contains(&b.plan.label()) {
                names.push(b.plan.label());
            }
        }
        let table = compare_policies(
            &names,
            &spec,
            &cfg.seeds,
            cfg.evaluation.episodes,
            |name, seed| {
                if name == "adaptive" {
                    let i = cfg.seeds.iter().position(|s| *s == seed).unwrap_or(0);
                    return Ok(Box::new(AdaptivePolicy::new(
                        adaptive[i].clone(),
                        cfg.evaluation.mode,
                    )) as Box<dyn Policy>);
                }
                let b = cfg
                    .compare
                    .baselines
                    .iter()
                    .find(|b| b.plan.label() == name)
                    .copied()
                    .expect("names come from the baseline list");
                Ok(Box::new(FixedPlanPolicy::new(b)?))
            },
        )?;
        out.write(
            &format!("compare_{label}.csv"),
            compare_csv(&table).as_bytes(),
        )?;
        let improvements = names[1..]
            .iter()
            .filter_map(|b| Some((b.to_string(), table.improvement("adaptive", b)?)))
            .collect();
        results.push(ScenarioComparison {
            scenario: kind,
            table,
            improvements,
        });
    }
    out.write("summary.json", &json_bytes(&results)?)?;
    let manifest = out.finish("compare", cfg, &cfg.seeds, start.elapsed().as_secs_f64())?;
    Ok((manifest, results))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub seed: u64,
    pub mean_total_reward: f64,
}

/// Trains and evaluates the adaptive policy at every valid grid point.
/// Points that break a parameter invariant are skipped with a warning.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(PathBuf, Vec<SweepRow>), CliError> {
    let start = Instant::now();
    let param = cfg
        .sweep
        .param
        .ok_or_else(|| CliError::Config("[sweep] param is required".into()))?;
    if cfg.sweep.values.is_empty() {
        return Err(CliError::Config("[sweep] values must not be empty".into()));
    }
    let mut jobs = Vec::new();
    for &value in &cfg.sweep.values {
        let mut params = cfg.service.clone();
        param.apply(&mut params, value);
        if let Err(e) = params.validate() {
            log::warn!("skipping {param} = {value}: {e}");
            continue;
        }
        let spec = cfg.env_spec_with(params, cfg.scenario.kind)?;
        for &seed in &cfg.seeds {
            jobs.push((value, seed, spec.clone()));
        }
    }
    let rows = par_map(&jobs, |(value, seed, spec)| {
        let outcome = train_one(cfg, spec, *seed)?;
        let mut policy = AdaptivePolicy::new(outcome.params, cfg.evaluation.mode);
        let report = evaluate(&mut policy, spec, cfg.evaluation.episodes, *seed)?;
        Ok(SweepRow {
            param: param.label().to_string(),
            value: *value,
            seed: *seed,
            mean_total_reward: report.mean_objective,
        })
    })?;
    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.param, r.value, r.seed, r.mean_total_reward
        );
    }
    let mut out = OutputDir::new(cfg.output_dir.clone());
    out.write("sweep.csv", csv.as_bytes())?;
    let manifest = out.finish("sweep", cfg, &cfg.seeds, start.elapsed().as_secs_f64())?;
    Ok((manifest, rows))
}

#[derive(Debug, Serialize)]
struct IngestEcho<'a> {
    input: &'a Path,
    train_split: f64,
    records: usize,
    training_records: usize,
    range_violations: usize,
    duplicates: usize,
}

/// Fits per-participant profiles on the chronological training share of a
/// lifelog and reports readiness correlations over all records. Nothing is
/// written unless parsing and fitting succeed.
pub fn cmd_ingest(input: &Path, output_dir: &Path, train_split: f64) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    if !(train_split > 0.0 && train_split < 1.0) {
        return Err(CliError::Config(format!(
            "train_split must lie in (0, 1), got {train_split}"
        )));
    }
    let data = ingest_lifelog(input)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", input.display())))?;
    for d in &data.duplicates {
        log::warn!(
            "line {}: duplicate record for {} on {}, keeping the later row",
            d.line,
            d.participant_id,
            d.date
        );
    }
    for v in &data.violations {
        log::warn!(
            "line {}: {} = {} out of range, treated as missing",
            v.line,
            v.channel.name(),
            v.value
        );
    }
    let (training, _) = split_chronological(&data.records, train_split);
    let profiles = fit_profiles(&training)?;
    let correlations = correlate_readiness(&data.records);

    let mut csv = format!("{CORRELATION_HEADER}\n");
    for row in &correlations {
        let r = row.r.map_or_else(String::new, |r| r.to_string());
        let _ = writeln!(csv, "{},{r},{}", row.indicator, row.n);
    }
    let mut out = OutputDir::new(output_dir.to_path_buf());
    out.write("profiles.json", &json_bytes(&profiles)?)?;
    out.write("correlations.csv", csv.as_bytes())?;
    let echo = IngestEcho {
        input,
        train_split,
        records: data.records.len(),
        training_records: training.len(),
        range_violations: data.violations.len(),
        duplicates: data.duplicates.len(),
    };
    Ok(out.finish("ingest", &echo, &[], start.elapsed().as_secs_f64())?)
}
