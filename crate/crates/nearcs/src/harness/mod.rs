//! Seeded Monte Carlo experiment engine: trial pipeline, sweep execution,
//! metrics, CSV artifacts and reproducibility manifests.

use crate::channel::SystemParams;
use crate::estimators::{EstimatorKind, KRule};
use crate::numerics::ComplexMatrix;
use crate::sideinfo::DMode;
use std::path::PathBuf;
use thiserror::Error;

pub mod config;
mod runner;

pub use config::{dump_config, load_config, parse_config, write_manifest, ARTIFACT_VERSION};
pub use runner::{
    build_scenario, run_estimator_on, run_from_manifest, run_sweep, run_trial, trial_priors,
    SweepResult, TrialMetrics, TrialPriors, TrialScenario,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// The swept experiment axis; exactly one per experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Snr(Vec<f64>),
    SparsityBlocks(Vec<usize>),
    CompressionM(Vec<usize>),
    AmplitudeRatioC(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Snr(_) => "snr",
            SweepAxis::SparsityBlocks(_) => "sparsity_blocks",
            SweepAxis::CompressionM(_) => "compression_m",
            SweepAxis::AmplitudeRatioC(_) => "amplitude_ratio_c",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepAxis::Snr(v) | SweepAxis::AmplitudeRatioC(v) => v.clone(),
            SweepAxis::SparsityBlocks(v) | SweepAxis::CompressionM(v) => {
                v.iter().map(|&x| x as f64).collect()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    /// Applies the sweep value to the base parameters.
    pub fn apply(&self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = base.clone();
        match self {
            SweepAxis::Snr(_) => p.snr_db = value,
            SweepAxis::SparsityBlocks(_) => p.s_taps = (value as usize) * p.d,
            SweepAxis::CompressionM(_) => p.m = value as usize,
            SweepAxis::AmplitudeRatioC(_) => p.c_ratio = value,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub base: SystemParams,
    pub estimators: Vec<EstimatorKind>,
    pub d_mode: DMode,
    pub k_rule: KRule,
    pub sweep: SweepAxis,
    pub trials: usize,
    pub master_seed: u64,
    /// Accuracy threshold for `prob_accurate`.
    pub theta: f64,
    /// Worker count; 0 selects the executor default.
    pub workers: usize,
    /// Output directory for the CSV and manifest.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults() -> Self {
        Self {
            base: SystemParams::defaults(),
            estimators: vec![
                EstimatorKind::Omp,
                EstimatorKind::Bomp,
                EstimatorKind::CslwOmp,
                EstimatorKind::CslwBomp,
            ],
            d_mode: DMode::Exact,
            k_rule: KRule::PaperLiteral,
            sweep: SweepAxis::Snr((0..=10).map(|i| 2.0 * i as f64).collect()),
            trials: 1000,
            master_seed: 1,
            theta: 1e-2,
            workers: 0,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(HarnessError::InvalidConfig("sweep must be nonempty".into()));
        }
        if self.estimators.is_empty() {
            return Err(HarnessError::InvalidConfig("estimator list must be nonempty".into()));
        }
        if !(self.theta > 0.0) {
            return Err(HarnessError::InvalidConfig("theta must be positive".into()));
        }
        for v in self.sweep.values() {
            self.sweep
                .apply(&self.base, v)
                .validate()
                .map_err(|e| HarnessError::InvalidConfig(format!("at sweep value {v}: {e}")))?;
        }
        Ok(())
    }
}

/// Aggregated metrics of one (sweep value, estimator) cell.
#[derive(Debug, Clone)]
pub struct MetricRecord {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub estimator: EstimatorKind,
    /// Successful trials entering the means.
    pub trials: usize,
    pub failures: usize,
    pub nmse_mean: f64,
    pub nmse_db: f64,
    pub nmse_energy_norm: f64,
    pub support_accuracy: f64,
    pub prob_accurate: f64,
    /// Measured wall time of the sweep cell. Reported on stdout only; the
    /// CSV column is pinned to 0.000 so that re-runs are byte-identical.
    pub wallclock_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmseConvention {
    /// `‖X̂−X‖_F²/(N·K)`.
    Paper,
    /// `‖X̂−X‖_F²/‖X‖_F²`.
    EnergyNormalized,
}

/// Normalized mean-square error between an estimate and the truth.
pub fn nmse(x_hat: &ComplexMatrix, x: &ComplexMatrix, convention: NmseConvention) -> Result<f64> {
    if x_hat.rows() != x.rows() || x_hat.cols() != x.cols() {
        return Err(HarnessError::InvalidConfig("nmse: dimension mismatch".into()));
    }
    let err = x_hat.sub(x)?.frobenius_norm().powi(2);
    match convention {
        NmseConvention::Paper => Ok(err / (x.rows() * x.cols()) as f64),
        NmseConvention::EnergyNormalized => {
            let denom = x.frobenius_norm().powi(2);
            if denom == 0.0 {
                return Err(HarnessError::UndefinedMetric(
                    "energy-normalized NMSE of a zero channel".into(),
                ));
            }
            Ok(err / denom)
        }
    }
}

/// Fraction of the true support recovered: `|est ∩ true| / |true|`.
pub fn support_accuracy(est_support: &[usize], true_support: &[usize]) -> f64 {
    assert!(!true_support.is_empty(), "true support must be nonempty");
    let mut est = est_support.to_vec();
    est.sort_unstable();
    let hits = true_support.iter().filter(|t| est.binary_search(t).is_ok()).count();
    hits as f64 / true_support.len() as f64
}

/// Fraction of values strictly below `theta`.
pub fn prob_accurate(nmse_values: &[f64], theta: f64) -> f64 {
    assert!(!nmse_values.is_empty(), "need at least one value");
    nmse_values.iter().filter(|&&v| v < theta).count() as f64 / nmse_values.len() as f64
}

/// CSV header shared by every sweep artifact.
pub const CSV_HEADER: &str = "sweep_axis,sweep_value,estimator,trials,failures,nmse_mean,\
nmse_db,nmse_energy_norm,support_accuracy,prob_accurate,wallclock_s";

impl MetricRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{},{:e},{},{},0.000",
            self.sweep_axis,
            self.sweep_value,
            self.estimator.name(),
            self.trials,
            self.failures,
            self.nmse_mean,
            self.nmse_db,
            self.nmse_energy_norm,
            self.support_accuracy,
            self.prob_accurate,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_complex_gaussian, RngStream};
    use num_complex::Complex64;

    #[test]
    fn nmse_reference_values() {
        let x = sample_complex_gaussian(8, 4, 1.0, RngStream::new(1, 0)).unwrap();
        assert_eq!(nmse(&x, &x, NmseConvention::Paper).unwrap(), 0.0);

        // Zero estimate of a constant-modulus channel: S g² / N.
        let mut cm = ComplexMatrix::zeros(16, 4);
        for t in 0..6 {
            for k in 0..4 {
                cm.set(t, k, Complex64::from_polar(2.0, 0.3 * (t + k) as f64));
            }
        }
        let zero = ComplexMatrix::zeros(16, 4);
        let v = nmse(&zero, &cm, NmseConvention::Paper).unwrap();
        assert!((v - 6.0 * 4.0 / 16.0).abs() < 1e-12);

        // Against an independent entrywise sum.
        let a = sample_complex_gaussian(5, 3, 1.0, RngStream::new(2, 0)).unwrap();
        let b = sample_complex_gaussian(5, 3, 1.0, RngStream::new(3, 0)).unwrap();
        let mut acc = 0.0;
        for i in 0..5 {
            for j in 0..3 {
                acc += (a.get(i, j) - b.get(i, j)).norm_sqr();
            }
        }
        let v = nmse(&a, &b, NmseConvention::Paper).unwrap();
        assert!((v - acc / 15.0).abs() < 1e-12);
        let v = nmse(&a, &b, NmseConvention::EnergyNormalized).unwrap();
        assert!((v - acc / b.frobenius_norm().powi(2)).abs() < 1e-12);

        assert!(matches!(
            nmse(&zero, &zero, NmseConvention::EnergyNormalized),
            Err(HarnessError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn support_accuracy_counts() {
        assert_eq!(support_accuracy(&[1, 2, 3], &[1, 2, 3]), 1.0);
        assert_eq!(support_accuracy(&[4, 5], &[1, 2]), 0.0);
        let est: Vec<usize> = (0..10).collect();
        let truth: Vec<usize> = (5..25).collect();
        assert_eq!(support_accuracy(&est, &truth), 0.25);
    }

    #[test]
    fn prob_accurate_counts() {
        assert!((prob_accurate(&[1e-3, 2e-2, 5e-3], 1e-2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(prob_accurate(&[0.5, 0.9], 1e-2), 0.0);
        assert_eq!(prob_accurate(&[0.5, 0.9], f64::INFINITY), 1.0);
        // Strictly below: a value equal to theta does not count.
        assert_eq!(prob_accurate(&[1e-2], 1e-2), 0.0);
    }

    #[test]
    fn sweep_axis_applies_values() {
        let base = SystemParams::defaults();
        let p = SweepAxis::Snr(vec![0.0]).apply(&base, 4.0);
        assert_eq!(p.snr_db, 4.0);
        let p = SweepAxis::SparsityBlocks(vec![1]).apply(&base, 7.0);
        assert_eq!(p.s_taps, 28);
        let p = SweepAxis::CompressionM(vec![1]).apply(&base, 45.0);
        assert_eq!(p.m, 45);
        let p = SweepAxis::AmplitudeRatioC(vec![1.0]).apply(&base, 2.0);
        assert_eq!(p.c_ratio, 2.0);
    }

    #[test]
    fn config_validation_catches_bad_sweeps() {
        let mut cfg = ExperimentConfig::defaults();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults();
        cfg.sweep = SweepAxis::Snr(vec![]);
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults();
        // d = 5 does not divide N = 256 once applied.
        cfg.base.d = 5;
        assert!(cfg.validate().is_err());
    }
}
