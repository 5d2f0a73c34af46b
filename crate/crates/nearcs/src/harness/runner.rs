//! Trial pipeline and sweep executor.
//!
//! Each trial owns an [`RngStream`] keyed by `(master_seed, trial index)`
//! only, so every sweep point sees the same scenario draws (common random
//! numbers: estimators that ignore the swept quantity produce exactly flat
//! curves) and results are independent of worker count and schedule.

use super::config::write_manifest;
use super::{
    nmse, prob_accurate, support_accuracy, ExperimentConfig, HarnessError, MetricRecord,
    NmseConvention, Result, CSV_HEADER,
};
use crate::channel::{
    gen_angular_channel, gen_measurement, gen_sub6_channel, gen_support, AngularChannel,
    Measurement, SupportChannel, SystemParams,
};
use crate::estimators::{
    bomp, cslw_bomp, cslw_omp, genie_bound, ls_estimate, omp, EstimatorConfig, EstimatorKind,
    KRule,
};
use crate::numerics::{mix_ids, RngStream};
use crate::sideinfo::{block_norms, probability_map_minmax, DMode, DParams, PriorVector};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Stream tag for trial scenario generation.
const TRIAL_TAG: u64 = 0x7261_6c73;

/// Everything an estimator sees in one trial.
#[derive(Debug, Clone)]
pub struct TrialScenario {
    pub params: SystemParams,
    pub channel: AngularChannel,
    pub support_channel: SupportChannel,
    pub measurement: Measurement,
}

/// Out-of-band priors at the two selection granularities.
#[derive(Debug, Clone)]
pub struct TrialPriors {
    pub block: PriorVector,
    pub tap: PriorVector,
}

/// Per-trial, per-estimator metrics.
#[derive(Debug, Clone, Copy)]
pub struct TrialMetrics {
    pub nmse: f64,
    pub nmse_energy: f64,
    pub support_accuracy: f64,
}

/// Generates the full dual-band scenario for one trial.
pub fn build_scenario(
    params: &SystemParams,
    master_seed: u64,
    trial_idx: usize,
) -> Result<TrialScenario> {
    let stream = RngStream::new(master_seed, mix_ids(&[TRIAL_TAG, trial_idx as u64]));
    let support = gen_support(params, stream.substream(0))?;
    let channel = gen_angular_channel(params, &support, stream.substream(1))?;
    let support_channel = gen_sub6_channel(&channel, params, stream.substream(2))?;
    let measurement = gen_measurement(&channel, params, stream.substream(3))?;
    Ok(TrialScenario { params: params.clone(), channel, support_channel, measurement })
}

/// Min-max priors of the scenario's support channel at block and tap
/// granularity.
pub fn trial_priors(scenario: &TrialScenario) -> Result<TrialPriors> {
    let block = probability_map_minmax(
        &block_norms(&scenario.support_channel.x_sub, scenario.params.d)
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?,
    )
    .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let tap = probability_map_minmax(
        &block_norms(&scenario.support_channel.x_sub, 1)
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?,
    )
    .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    Ok(TrialPriors { block, tap })
}

/// Runs one estimator on a prepared scenario. Estimator failures come back
/// as `Err(String)` so the caller can count them without aborting the trial.
pub fn run_estimator_on(
    scenario: &TrialScenario,
    priors: &TrialPriors,
    kind: EstimatorKind,
    d_mode: DMode,
    k_rule: KRule,
) -> std::result::Result<TrialMetrics, String> {
    let p = &scenario.params;
    let meas = &scenario.measurement;
    let truth = &scenario.channel;
    let dparams = DParams {
        m: p.m,
        s_taps: p.s_taps,
        d: kind.selection_d(p.d),
        k_eff: p.k,
        g: p.g,
        sigma2: meas.sigma2,
        mode: d_mode,
    };
    let mut cfg = EstimatorConfig::new(kind, p.d, p.s_taps);
    cfg.d_mode = d_mode;
    cfg.k_rule = k_rule;

    let (x_hat, est_support) = match kind {
        EstimatorKind::Omp => {
            let r = omp(&meas.y, &meas.a, &cfg).map_err(|e| e.to_string())?;
            (r.x_hat, Some(r.support))
        }
        EstimatorKind::Bomp => {
            let r = bomp(&meas.y, &meas.a, &cfg).map_err(|e| e.to_string())?;
            (r.x_hat, Some(r.support))
        }
        EstimatorKind::CslwOmp | EstimatorKind::ClwOmp => {
            let r = cslw_omp(&meas.y, &meas.a, &priors.tap, &cfg, &dparams)
                .map_err(|e| e.to_string())?;
            (r.x_hat, Some(r.support))
        }
        EstimatorKind::CslwBomp | EstimatorKind::ClwBomp => {
            let r = cslw_bomp(&meas.y, &meas.a, &priors.block, &cfg, &dparams)
                .map_err(|e| e.to_string())?;
            (r.x_hat, Some(r.support))
        }
        EstimatorKind::Ls => {
            let x = ls_estimate(&meas.y, &meas.a).map_err(|e| e.to_string())?;
            (x, None)
        }
        EstimatorKind::Genie => {
            let r = genie_bound(&meas.y, &meas.a, &truth.support).map_err(|e| e.to_string())?;
            (r.x_hat, Some(r.support))
        }
    };
    let nm = nmse(&x_hat, &truth.x, NmseConvention::Paper).map_err(|e| e.to_string())?;
    let nm_e = nmse(&x_hat, &truth.x, NmseConvention::EnergyNormalized)
        .map_err(|e| e.to_string())?;
    let acc = match est_support {
        // LS estimates every tap; its support trivially covers the truth.
        None => 1.0,
        Some(s) => support_accuracy(&s, &truth.support),
    };
    Ok(TrialMetrics { nmse: nm, nmse_energy: nm_e, support_accuracy: acc })
}

/// One full pipeline pass for every configured estimator.
pub fn run_trial(
    cfg: &ExperimentConfig,
    point_params: &SystemParams,
    trial_idx: usize,
) -> Result<Vec<(EstimatorKind, std::result::Result<TrialMetrics, String>)>> {
    let scenario = build_scenario(point_params, cfg.master_seed, trial_idx)?;
    let priors = trial_priors(&scenario)?;
    Ok(cfg
        .estimators
        .iter()
        .map(|&kind| (kind, run_estimator_on(&scenario, &priors, kind, cfg.d_mode, cfg.k_rule)))
        .collect())
}

type TrialRow = Vec<(EstimatorKind, std::result::Result<TrialMetrics, String>)>;

#[cfg(feature = "parallel")]
fn execute_trials(cfg: &ExperimentConfig, params: &SystemParams) -> Result<Vec<TrialRow>> {
    use rayon::prelude::*;
    if cfg.workers == 1 {
        return (0..cfg.trials).map(|t| run_trial(cfg, params, t)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, params, t))
            .collect::<Result<Vec<_>>>()
    })
}

#[cfg(not(feature = "parallel"))]
fn execute_trials(cfg: &ExperimentConfig, params: &SystemParams) -> Result<Vec<TrialRow>> {
    (0..cfg.trials).map(|t| run_trial(cfg, params, t)).collect()
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<MetricRecord>,
    pub csv: String,
    pub csv_path: Option<PathBuf>,
    pub manifest_path: Option<PathBuf>,
}

impl SweepResult {
    pub fn record(&self, sweep_value: f64, kind: EstimatorKind) -> Option<&MetricRecord> {
        self.records
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.estimator == kind)
    }
}

/// Runs every sweep point, aggregates metrics, renders the CSV and (when an
/// output directory is configured) writes `results.csv` plus
/// `run_manifest.cfg` next to it.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let axis_name = cfg.sweep.name().to_string();
    let mut records: Vec<MetricRecord> = Vec::new();
    for value in cfg.sweep.values() {
        let params = cfg.sweep.apply(&cfg.base, value);
        let start = Instant::now();
        let rows = execute_trials(cfg, &params)?;
        let elapsed = start.elapsed().as_secs_f64();
        for (slot, &kind) in cfg.estimators.iter().enumerate() {
            let mut nmses = Vec::with_capacity(cfg.trials);
            let mut nmses_energy = Vec::with_capacity(cfg.trials);
            let mut accs = Vec::with_capacity(cfg.trials);
            let mut failures = 0usize;
            for row in &rows {
                debug_assert_eq!(row[slot].0, kind);
                match &row[slot].1 {
                    Ok(m) => {
                        nmses.push(m.nmse);
                        nmses_energy.push(m.nmse_energy);
                        accs.push(m.support_accuracy);
                    }
                    Err(_) => failures += 1,
                }
            }
            let successes = nmses.len();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let (nmse_mean, nmse_energy_norm, support_acc, pa) = if successes > 0 {
                (mean(&nmses), mean(&nmses_energy), mean(&accs), prob_accurate(&nmses, cfg.theta))
            } else {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            };
            records.push(MetricRecord {
                sweep_axis: axis_name.clone(),
                sweep_value: value,
                estimator: kind,
                trials: successes,
                failures,
                nmse_mean,
                nmse_db: 10.0 * nmse_mean.log10(),
                nmse_energy_norm,
                support_accuracy: support_acc,
                prob_accurate: pa,
                wallclock_s: elapsed,
            });
        }
    }
    records.sort_by(|a, b| {
        a.sweep_value
            .partial_cmp(&b.sweep_value)
            .unwrap()
            .then_with(|| a.estimator.name().cmp(b.estimator.name()))
    });

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }

    let (mut csv_path, mut manifest_path) = (None, None);
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
        let cp = dir.join("results.csv");
        std::fs::write(&cp, &csv)
            .map_err(|source| HarnessError::Io { path: cp.clone(), source })?;
        let mp = dir.join("run_manifest.cfg");
        write_manifest(cfg, &mp)?;
        csv_path = Some(cp);
        manifest_path = Some(mp);
    }
    Ok(SweepResult { records, csv, csv_path, manifest_path })
}

/// Re-runs a sweep from its manifest, writing into `out_dir`; the CSV bytes
/// reproduce the original run exactly.
pub fn run_from_manifest(manifest: &Path, out_dir: Option<PathBuf>) -> Result<SweepResult> {
    let mut cfg = super::config::load_config(manifest)?;
    cfg.out_dir = out_dir;
    run_sweep(&cfg)
}
