use std::path::Path;

use serde::Serialize;

use super::run::{Event, RunRecord};
use crate::error::Result;

/// Swap attempts per running-average window.
pub const SWAP_WINDOW: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapRunningRow {
    pub run: usize,
    /// Lower slot of the pair.
    pub pair: usize,
    /// Step of the last attempt in the window.
    pub step: usize,
    pub mean_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyRow {
    pub run: usize,
    pub step: usize,
    pub slot: usize,
    pub replica: usize,
    pub temperature: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperatureRow {
    pub run: usize,
    pub step: usize,
    pub slot: usize,
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessRow {
    pub step: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlotData {
    pub swap_running: Vec<SwapRunningRow>,
    pub energies: Vec<EnergyRow>,
    pub temperatures: Vec<TemperatureRow>,
    pub success_curve: Vec<SuccessRow>,
}

/// Per pair (indexed by lower slot), the `(step, probability)` of every
/// attempt on that pair, in order.
pub fn swap_history(record: &RunRecord) -> Vec<Vec<(usize, f64)>> {
    let mut pairs: Vec<Vec<(usize, f64)>> = Vec::new();
    for e in &record.events {
        if let Event::Swap { step, slot, probability, .. } = e {
            if pairs.len() <= *slot {
                pairs.resize(slot + 1, Vec::new());
            }
            pairs[*slot].push((*step, *probability));
        }
    }
    pairs
}

/// Trailing means over `window` consecutive values; empty when there are
/// fewer values than `window`.
pub fn running_mean(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut sum: f64 = values[..window].iter().sum();
    out.push(sum / window as f64);
    for i in window..values.len() {
        sum += values[i] - values[i - window];
        out.push(sum / window as f64);
    }
    out
}

/// Per-pair running means of the swap probability over `window` attempts.
pub fn swap_running_averages(record: &RunRecord, window: usize) -> Vec<Vec<(usize, f64)>> {
    swap_history(record)
        .into_iter()
        .map(|attempts| {
            let probs: Vec<f64> = attempts.iter().map(|a| a.1).collect();
            running_mean(&probs, window)
                .into_iter()
                .enumerate()
                .map(|(i, m)| (attempts[i + window - 1].0, m))
                .collect()
        })
        .collect()
}

/// Fraction of non-failed runs that have succeeded by each step of `steps`.
pub fn success_curve(records: &[RunRecord], steps: &[usize]) -> Vec<SuccessRow> {
    let valid: Vec<&RunRecord> = records.iter().filter(|r| !r.failed()).collect();
    steps
        .iter()
        .map(|&step| {
            let hits = valid.iter().filter(|r| r.success_step.is_some_and(|s| s <= step)).count();
            let frequency = if valid.is_empty() { 0.0 } else { hits as f64 / valid.len() as f64 };
            SuccessRow { step, frequency }
        })
        .collect()
}

/// The series behind the swap, energy, temperature and success plots.
pub fn emit_plot_data(records: &[RunRecord], total_updates: usize) -> PlotData {
    let mut data = PlotData::default();
    for r in records {
        for (pair, series) in swap_running_averages(r, SWAP_WINDOW).into_iter().enumerate() {
            for (step, mean_probability) in series {
                data.swap_running.push(SwapRunningRow { run: r.run, pair, step, mean_probability });
            }
        }
        for e in &r.events {
            match e {
                Event::Update { step, slot, replica, temperature, energy, .. } => data.energies.push(EnergyRow {
                    run: r.run,
                    step: *step,
                    slot: *slot,
                    replica: *replica,
                    temperature: *temperature,
                    energy: *energy,
                }),
                Event::Temperatures { step, temperatures } => {
                    for (slot, t) in temperatures.iter().enumerate() {
                        data.temperatures.push(TemperatureRow { run: r.run, step: *step, slot, temperature: *t });
                    }
                }
                _ => {}
            }
        }
    }
    if !records.is_empty() {
        let points = 100.min(total_updates.max(1));
        let steps: Vec<usize> = (1..=points).map(|i| i * total_updates / points).collect();
        data.success_curve = success_curve(records, &steps);
    }
    data
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `swap_running.csv`, `energies.csv`, `temperatures.csv` and
/// `success_curve.csv` into `dir`.
pub fn write_plot_data(data: &PlotData, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(&dir.join("swap_running.csv"), &data.swap_running)?;
    write_csv(&dir.join("energies.csv"), &data.energies)?;
    write_csv(&dir.join("temperatures.csv"), &data.temperatures)?;
    write_csv(&dir.join("success_curve.csv"), &data.success_curve)?;
    Ok(())
}
