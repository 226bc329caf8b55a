//! Experiment orchestration: configs, ensembles of tempered trainings,
//! success statistics, sweeps and on-disk logs.

mod config;
mod plot;
mod run;
mod stats;

pub use config::{
    ExperimentConfig, OracleLevel, SampledProtocol, SuccessRule, SweepAxis, SweepSpec, TemperingConfig, Threshold,
};
pub use plot::{
    emit_plot_data, running_mean, success_curve, swap_history, swap_running_averages, write_plot_data, EnergyRow,
    PlotData, SuccessRow, SwapRunningRow, TemperatureRow, SWAP_WINDOW,
};
pub use run::{
    derive_seed, detect_success_sampled, exact_energy, resample_check, run_single, Event, RunRecord, SampledCheck,
    SampledDetector,
};
pub use stats::{bootstrap_ci, mean_std, FrequencyEstimate, DEFAULT_RESAMPLES, TWO_SIGMA_LEVEL};

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::model::AnsatzShape;
use crate::sampler::SamplerSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub runs: usize,
    pub failed: usize,
    pub threshold: Option<f64>,
    /// Over non-failed runs; `None` when every run failed.
    pub success: Option<FrequencyEstimate>,
    pub mean_final_energy: Option<f64>,
    pub std_final_energy: Option<f64>,
    /// Mean swap probability per pair over the last [`SWAP_WINDOW`]
    /// attempts, averaged over runs.
    pub final_swap_probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: ExperimentSummary,
}

/// Runs `config.runs` independent trainings in parallel and summarizes them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let h = config.build_hamiltonian()?;
    let judge = run::Judge::new(config)?;
    let records: Vec<RunRecord> =
        (0..config.runs).into_par_iter().map(|r| run::run_with_judge(config, &h, &judge, r)).collect::<Result<_>>()?;
    let summary = summarize(config, &records, judge.threshold)?;
    Ok(ExperimentResult { records, summary })
}

fn summarize(config: &ExperimentConfig, records: &[RunRecord], threshold: f64) -> Result<ExperimentSummary> {
    let valid: Vec<&RunRecord> = records.iter().filter(|r| !r.failed()).collect();
    let flags: Vec<bool> = valid.iter().map(|r| r.succeeded()).collect();
    let success = if flags.is_empty() || matches!(config.success, SuccessRule::None) {
        None
    } else {
        Some(bootstrap_ci(&flags, DEFAULT_RESAMPLES, TWO_SIGMA_LEVEL, derive_seed(config.seed, &[u64::MAX]))?)
    };
    let finals: Vec<f64> = valid.iter().filter_map(|r| r.final_energy).collect();
    let (mean, std) = mean_std(&finals);
    let mut per_pair: Vec<Vec<f64>> = Vec::new();
    for r in &valid {
        for (pair, series) in swap_history(r).iter().enumerate() {
            if series.is_empty() {
                continue;
            }
            let tail = &series[series.len().saturating_sub(SWAP_WINDOW)..];
            if per_pair.len() <= pair {
                per_pair.resize(pair + 1, Vec::new());
            }
            per_pair[pair].push(tail.iter().map(|a| a.1).sum::<f64>() / tail.len() as f64);
        }
    }
    Ok(ExperimentSummary {
        name: config.name.clone(),
        runs: records.len(),
        failed: records.len() - valid.len(),
        threshold: threshold.is_finite().then_some(threshold),
        success,
        mean_final_energy: (!finals.is_empty()).then_some(mean),
        std_final_energy: (!finals.is_empty()).then_some(std),
        final_swap_probabilities: per_pair.iter().map(|v| mean_std(v).0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct SummaryRow<'a> {
    run: usize,
    seed: u64,
    succeeded: bool,
    success_step: Option<usize>,
    final_energy: Option<f64>,
    failure: Option<&'a str>,
    final_temperatures: String,
}

/// Writes `events.jsonl`, `summary.csv`, `summary.json`, `config.toml` and
/// `plot/*.csv` under `dir`.
pub fn write_experiment(config: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut events = std::io::BufWriter::new(std::fs::File::create(dir.join("events.jsonl"))?);
    for r in &result.records {
        for e in &r.events {
            let mut line = serde_json::to_value(e)?;
            line["run"] = r.run.into();
            serde_json::to_writer(&mut events, &line)?;
            events.write_all(b"\n")?;
        }
    }
    events.flush()?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for r in &result.records {
        w.serialize(SummaryRow {
            run: r.run,
            seed: r.seed,
            succeeded: r.succeeded(),
            success_step: r.success_step,
            final_energy: r.final_energy,
            failure: r.failure.as_deref(),
            final_temperatures: r.final_temperatures.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "),
        })?;
    }
    w.flush()?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&result.summary)?)?;
    std::fs::write(dir.join("config.toml"), config.to_toml()?)?;
    write_plot_data(&emit_plot_data(&result.records, config.total_updates), &dir.join("plot"))
}

#[derive(Deserialize)]
struct SummaryLine {
    run: usize,
    seed: u64,
    success_step: Option<usize>,
    final_energy: Option<f64>,
    failure: Option<String>,
    final_temperatures: String,
}

/// Reads back the config and run records written by [`write_experiment`].
pub fn read_experiment(dir: &Path) -> Result<(ExperimentConfig, Vec<RunRecord>)> {
    let config: ExperimentConfig = toml::from_str(&std::fs::read_to_string(dir.join("config.toml"))?)?;
    let mut records = Vec::new();
    for line in csv::Reader::from_path(dir.join("summary.csv"))?.deserialize() {
        let line: SummaryLine = line?;
        let final_temperatures = line
            .final_temperatures
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| crate::Error::Config(format!("bad temperature {t}: {e}"))))
            .collect::<Result<_>>()?;
        records.push(RunRecord {
            run: line.run,
            seed: line.seed,
            events: Vec::new(),
            success_step: line.success_step,
            final_energy: line.final_energy,
            final_temperatures,
            failure: line.failure.filter(|f| !f.is_empty()),
        });
    }
    let text = std::fs::read_to_string(dir.join("events.jsonl"))?;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut value: serde_json::Value = serde_json::from_str(line)?;
        let run = value.get("run").and_then(|r| r.as_u64()).map(|r| r as usize);
        if let Some(obj) = value.as_object_mut() {
            obj.remove("run");
        }
        let Some(record) = run.and_then(|r| records.iter_mut().find(|rec| rec.run == r)) else {
            return config_err(format!("event without a matching run: {line}"));
        };
        record.events.push(serde_json::from_value(value)?);
    }
    Ok((config, records))
}

/// Output directory of an experiment: `<base>/runs/<name>`.
pub fn experiment_dir(base: &Path, name: &str) -> PathBuf {
    base.join("runs").join(name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: ExperimentSummary,
}

/// Copy of `template` with one axis set to `value`.
pub fn sweep_point_config(template: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut c = template.clone();
    c.sweep = None;
    let as_count = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            config_err(format!("sweep value {v} must be a positive integer"))
        }
    };
    match axis {
        SweepAxis::Samples => match &mut c.training.sampler {
            SamplerSpec::Metropolis { samples, .. } => *samples = as_count(value)?,
            _ => return config_err("the samples axis needs a metropolis sampler"),
        },
        SweepAxis::Replicas => match &mut c.tempering {
            Some(t) => t.n_replicas = as_count(value)?,
            None => return config_err("the replicas axis needs a tempering section"),
        },
        SweepAxis::TMax => match &mut c.tempering {
            Some(t) => t.t_max = value,
            None => return config_err("the t_max axis needs a tempering section"),
        },
        SweepAxis::NetworkSize => {
            let m = as_count(value)?;
            c.ansatz = match c.ansatz {
                AnsatzShape::Rbm { n, .. } => AnsatzShape::Rbm { n, hidden: m },
                AnsatzShape::SymmetricRbm { n, .. } => AnsatzShape::SymmetricRbm { n, hidden: m },
                AnsatzShape::FeedForward { n, .. } => {
                    AnsatzShape::FeedForward { n, hidden: [m, (m / 2).max(1), (m / 2).max(1)] }
                }
            };
        }
    }
    c.name = format!("{}-{:?}-{}", template.name, axis, value).to_lowercase();
    c.validate()?;
    Ok(c)
}

/// Runs the experiment once per value of the config's sweep axis.
pub fn sweep(template: &ExperimentConfig) -> Result<Vec<(ExperimentConfig, ExperimentResult)>> {
    let Some(spec) = &template.sweep else {
        return Ok(vec![(template.clone(), run_experiment(template)?)]);
    };
    spec.values
        .iter()
        .map(|&v| {
            let c = sweep_point_config(template, spec.axis, v)?;
            let r = run_experiment(&c)?;
            Ok((c, r))
        })
        .collect()
}
