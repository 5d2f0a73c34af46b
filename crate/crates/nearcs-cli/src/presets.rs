//! Committed per-figure experiment presets. The files under `configs/`
//! mirror these exactly (a test keeps them in sync); `--config` swaps in a
//! file, and individual flags override single fields.

use nearcs::estimators::EstimatorKind;
use nearcs::harness::{ExperimentConfig, SweepAxis};

fn snr_grid() -> Vec<f64> {
    (0..=10).map(|i| 2.0 * i as f64).collect()
}

/// On-grid NMSE versus SNR at M = 25, S/d = 5 with every benchmark.
pub fn nmse_vs_snr() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults();
    cfg.estimators = vec![
        EstimatorKind::Omp,
        EstimatorKind::Bomp,
        EstimatorKind::CslwOmp,
        EstimatorKind::CslwBomp,
        EstimatorKind::Ls,
        EstimatorKind::Genie,
    ];
    cfg.sweep = SweepAxis::Snr(snr_grid());
    cfg.trials = 500;
    cfg
}

/// Support recovery accuracy versus SNR for the greedy family.
pub fn support_accuracy() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults();
    cfg.sweep = SweepAxis::Snr(snr_grid());
    cfg.trials = 500;
    cfg
}

/// Probability of accurate estimation versus sparsity at M = 50,
/// SNR = 10 dB.
pub fn sparsity_sweep() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults();
    cfg.base.m = 50;
    cfg.estimators = vec![
        EstimatorKind::Omp,
        EstimatorKind::Bomp,
        EstimatorKind::CslwOmp,
        EstimatorKind::CslwBomp,
        EstimatorKind::Genie,
    ];
    cfg.sweep = SweepAxis::SparsityBlocks((1..=10).collect());
    cfg.trials = 200;
    cfg
}

/// Probability of accurate estimation versus compression rate at
/// SNR = 10 dB.
pub fn compression_sweep() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults();
    cfg.sweep = SweepAxis::CompressionM(vec![15, 30, 45, 60, 75]);
    cfg.trials = 200;
    cfg
}

/// NMSE versus the Sub-6GHz amplitude ratio C at M = 25, SNR = 10 dB.
pub fn perturbation_sweep() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults();
    cfg.sweep = SweepAxis::AmplitudeRatioC(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    cfg.trials = 500;
    cfg
}
