//! Error-probability validation of the optimal prior factor and
//! theoretical-vs-empirical distribution checks.

use super::dist::{
    gamma_diff_pdf, gamma_diff_window, ks_distance_sorted, patnaik, pdf_t_single,
    sample_block_statistic, sample_gamma_diff, sample_single_tap_statistic,
    scaled_noncentral_chi2_cdf, GammaParams, NumericCdf, SelectionDistParams, t_single_window,
};
use super::special::marcum_q1;
use super::TheoryError;
use crate::numerics::RngStream;
use crate::sideinfo::{coefficient_d_theorem1, coefficient_d_theorem2, DMode, DParams};
use rand::Rng;
use rand_distr::StandardNormal;

/// Which selection statistic the error probability is computed over.
#[derive(Debug, Clone)]
pub enum SelectionDist {
    SingleTap(SelectionDistParams),
    Block(GammaParams, GammaParams),
}

/// Precomputed CDF of the selection-statistic difference `T = T₁ − T₂`.
pub struct SelectionStatistic {
    cdf: NumericCdf,
}

impl SelectionStatistic {
    pub fn new(dist: &SelectionDist) -> Result<Self, TheoryError> {
        let cdf = match dist {
            SelectionDist::SingleTap(p) => {
                let (lo, hi) = t_single_window(p, 45.0);
                let p = *p;
                NumericCdf::build(move |t| Ok(pdf_t_single(t, &p)), lo, hi, 8192)?
            }
            SelectionDist::Block(g1, g2) => {
                let (lo, hi) = gamma_diff_window(g1, g2, 45.0);
                let (g1, g2) = (*g1, *g2);
                NumericCdf::build(move |t| gamma_diff_pdf(t, &g1, &g2), lo, hi, 8192)?
            }
        };
        Ok(Self { cdf })
    }

    pub fn prob_below(&self, x: f64) -> f64 {
        self.cdf.eval(x)
    }

    pub fn total_mass(&self) -> f64 {
        self.cdf.total_mass()
    }
}

/// Error probability of a pairwise selection between a nonzero block with
/// prior `p1` and a zero block with prior `p2`, at prior-value difference
/// `Δv = v₂ − v₁`:
/// `P_e = p1(1−p2)·P(T < Δv) + p2(1−p1)·P(T < −Δv)`.
pub fn selection_error_probability(
    delta_v: f64,
    p1: f64,
    p2: f64,
    dist: &SelectionDist,
) -> Result<f64, TheoryError> {
    if !(0.0 < p1 && p1 < 1.0 && 0.0 < p2 && p2 < 1.0) {
        return Err(TheoryError::InvalidParameter("p1, p2 must lie in (0,1)".into()));
    }
    let stat = SelectionStatistic::new(dist)?;
    Ok(selection_error_probability_with(&stat, delta_v, p1, p2))
}

fn selection_error_probability_with(
    stat: &SelectionStatistic,
    delta_v: f64,
    p1: f64,
    p2: f64,
) -> f64 {
    p1 * (1.0 - p2) * stat.prob_below(delta_v) + p2 * (1.0 - p1) * stat.prob_below(-delta_v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Theorem1,
    Theorem2,
}

/// One `Δp` entry of the optimal-prior validation.
#[derive(Debug, Clone)]
pub struct OptimalPriorEntry {
    pub delta_p: f64,
    pub d_coeff: f64,
    pub dv_theory: f64,
    pub pe_theory: f64,
    pub dv_grid: f64,
    pub pe_grid: f64,
    /// `pe_theory/pe_grid − 1`.
    pub rel_gap: f64,
}

#[derive(Debug, Clone)]
pub struct OptimalPriorReport {
    pub regime: Regime,
    pub p: f64,
    pub entries: Vec<OptimalPriorEntry>,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Builds the selection distribution and theorem coefficient for a regime.
pub fn regime_setup(
    regime: Regime,
    dparams: &DParams,
) -> Result<(SelectionDist, f64), TheoryError> {
    let exact = DParams { mode: DMode::Exact, ..*dparams };
    match regime {
        Regime::Theorem1 => {
            let d = coefficient_d_theorem1(&exact)
                .map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
            let p = SelectionDistParams {
                m: dparams.m,
                g: dparams.g,
                sigma2: dparams.sigma2,
                s_taps: dparams.s_taps,
                d: 1,
                k: 1,
            };
            Ok((SelectionDist::SingleTap(p), d))
        }
        Regime::Theorem2 => {
            let d = coefficient_d_theorem2(&exact)
                .map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
            let p = SelectionDistParams {
                m: dparams.m,
                g: dparams.g,
                sigma2: dparams.sigma2,
                s_taps: dparams.s_taps,
                d: dparams.d,
                k: dparams.k_eff,
            };
            Ok((SelectionDist::Block(p.block_nonzero_gamma(), p.block_zero_gamma()), d))
        }
    }
}

/// Grid-searches the error-minimizing `Δv` for pairs `(p, p+Δp)` and
/// compares against the theoretical `Δv = D·(logit(p+Δp) − logit(p))`.
pub fn validate_optimal_prior(
    regime: Regime,
    dparams: &DParams,
    p: f64,
    delta_ps: &[f64],
) -> Result<OptimalPriorReport, TheoryError> {
    let (dist, d_coeff) = regime_setup(regime, dparams)?;
    let stat = SelectionStatistic::new(&dist)?;
    let mut entries = Vec::new();
    for &dp in delta_ps {
        let p1 = p;
        let p2 = p + dp;
        let dv_theory = if dp == 0.0 { 0.0 } else { d_coeff * (logit(p2) - logit(p1)) };
        let pe_theory = selection_error_probability_with(&stat, dv_theory, p1, p2);
        // Coarse scan bracketing the optimum, then one refinement pass.
        let span = dv_theory.abs().max(d_coeff * 4.0 * dp.abs()).max(1e-9);
        let (mut best_dv, mut best_pe) = (0.0, f64::INFINITY);
        let lo = -0.5 * span;
        let hi = 3.0 * span;
        let coarse = 601;
        for i in 0..coarse {
            let dv = lo + (hi - lo) * i as f64 / (coarse - 1) as f64;
            let pe = selection_error_probability_with(&stat, dv, p1, p2);
            if pe < best_pe {
                best_pe = pe;
                best_dv = dv;
            }
        }
        let step = (hi - lo) / (coarse - 1) as f64;
        for i in 0..401 {
            let dv = best_dv - step + 2.0 * step * i as f64 / 400.0;
            let pe = selection_error_probability_with(&stat, dv, p1, p2);
            if pe < best_pe {
                best_pe = pe;
                best_dv = dv;
            }
        }
        entries.push(OptimalPriorEntry {
            delta_p: dp,
            d_coeff,
            dv_theory,
            pe_theory,
            dv_grid: best_dv,
            pe_grid: best_pe,
            rel_gap: pe_theory / best_pe - 1.0,
        });
    }
    Ok(OptimalPriorReport { regime, p, entries })
}

/// Theoretical-vs-empirical check of one distribution family.
#[derive(Debug, Clone)]
pub struct KsEntry {
    pub family: String,
    pub ks: f64,
    pub samples: usize,
}

/// Full distribution validation report at one parameter set.
#[derive(Debug, Clone)]
pub struct DistributionReport {
    pub params: SelectionDistParams,
    pub ks: Vec<KsEntry>,
    pub pdf_t_mass: f64,
    pub gamma_diff_mass: f64,
    pub patnaik_sup_gap: f64,
    pub patnaik_mean_residual: f64,
    pub patnaik_var_residual: f64,
}

impl DistributionReport {
    pub fn ks_value(&self, family: &str) -> Option<f64> {
        self.ks.iter().find(|e| e.family == family).map(|e| e.ks)
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Runs every distribution check at the given parameter set.
///
/// Empirical samples come from the explicit Gaussian constructions of the
/// selection statistics, so the comparisons isolate the analytic densities
/// themselves.
pub fn validate_distributions(
    params: &SelectionDistParams,
    samples: usize,
    seed: u64,
) -> Result<DistributionReport, TheoryError> {
    let stride = (samples / 4096).max(1);
    let mut ks = Vec::new();

    let s1 = params.sigma1_sq();
    let s2 = params.sigma2_sq();
    let mg = params.m as f64 * params.g;

    // Single-tap statistic, nonzero branch: σ₁²·χ′²(2, (Mg/σ₁)²); the CDF is
    // 1 − Q₁(Mg/σ₁, √(x/σ₁²)).
    {
        let mut rng = RngStream::new(seed, 1).rng();
        let v = sorted(
            (0..samples).map(|_| sample_single_tap_statistic(true, params, &mut rng)).collect(),
        );
        let a = mg / s1.sqrt();
        let d = ks_distance_sorted(
            &v,
            |x| if x <= 0.0 { 0.0 } else { 1.0 - marcum_q1(a, (x / s1).sqrt()) },
            stride,
        );
        ks.push(KsEntry { family: "single_tap_nonzero".into(), ks: d, samples });
    }

    // Single-tap statistic, zero branch: exponential with mean 2σ₂².
    {
        let mut rng = RngStream::new(seed, 2).rng();
        let v = sorted(
            (0..samples).map(|_| sample_single_tap_statistic(false, params, &mut rng)).collect(),
        );
        let d = ks_distance_sorted(
            &v,
            |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x / (2.0 * s2)).exp() },
            stride,
        );
        ks.push(KsEntry { family: "single_tap_zero".into(), ks: d, samples });
    }

    // Block statistic, nonzero case: (σ_nz²/2)·χ′²(2dK, λ).
    {
        let mut rng = RngStream::new(seed, 3).rng();
        let v = sorted(
            (0..samples).map(|_| sample_block_statistic(true, params, &mut rng)).collect(),
        );
        let dof = params.block_dof();
        let lambda = params.block_noncentrality();
        let scale = params.sigma_nz2() / 2.0;
        let d = ks_distance_sorted(
            &v,
            |x| scaled_noncentral_chi2_cdf(x, dof, lambda, scale),
            stride,
        );
        ks.push(KsEntry { family: "block_nonzero".into(), ks: d, samples });
    }

    // Block statistic, zero case: Γ(dK, 1/σ_zero²).
    {
        let mut rng = RngStream::new(seed, 4).rng();
        let v = sorted(
            (0..samples).map(|_| sample_block_statistic(false, params, &mut rng)).collect(),
        );
        let gz = params.block_zero_gamma();
        let d = ks_distance_sorted(&v, |x| gz.cdf(x), stride);
        ks.push(KsEntry { family: "block_zero".into(), ks: d, samples });
    }

    // Gamma-difference density against direct Gamma sampling.
    let g1 = params.block_nonzero_gamma();
    let g2 = params.block_zero_gamma();
    let (lo, hi) = gamma_diff_window(&g1, &g2, 45.0);
    let gd_cdf = NumericCdf::build(|t| gamma_diff_pdf(t, &g1, &g2), lo, hi, 16384)?;
    let gamma_diff_mass = gd_cdf.total_mass();
    {
        let mut rng = RngStream::new(seed, 5).rng();
        let v = sorted((0..samples).map(|_| sample_gamma_diff(&g1, &g2, &mut rng)).collect());
        let d = ks_distance_sorted(&v, |x| gd_cdf.eval(x), stride);
        ks.push(KsEntry { family: "gamma_diff".into(), ks: d, samples });
    }

    // Two-branch density of the single-tap difference.
    let (tlo, thi) = t_single_window(params, 45.0);
    let t_cdf = NumericCdf::build(|t| Ok(pdf_t_single(t, params)), tlo, thi, 16384)?;
    let pdf_t_mass = t_cdf.total_mass();
    {
        let mut rng = RngStream::new(seed, 6).rng();
        let v = sorted(
            (0..samples)
                .map(|_| {
                    sample_single_tap_statistic(true, params, &mut rng)
                        - sample_single_tap_statistic(false, params, &mut rng)
                })
                .collect(),
        );
        let d = ks_distance_sorted(&v, |x| t_cdf.eval(x), stride);
        ks.push(KsEntry { family: "pdf_t".into(), ks: d, samples });
    }

    // Patnaik approximation quality: CDF of ρχ²(τ) against Monte Carlo
    // χ′²(2dK, λ).
    let dof = params.block_dof();
    let lambda = params.block_noncentrality();
    let (rho, tau) = patnaik(dof, lambda);
    let patnaik_sup_gap = {
        let mut rng = RngStream::new(seed, 7).rng();
        let per = (lambda / dof).sqrt();
        let v = sorted(
            (0..samples)
                .map(|_| {
                    let mut acc = 0.0;
                    for _ in 0..dof as usize {
                        let z: f64 = per + rng.sample::<f64, _>(StandardNormal);
                        acc += z * z;
                    }
                    acc
                })
                .collect(),
        );
        ks_distance_sorted(&v, |x| super::special::gamma_p(tau / 2.0, x / (2.0 * rho)), stride)
    };
    let patnaik_mean_residual = (rho * tau - (dof + lambda)).abs();
    let patnaik_var_residual =
        (2.0 * rho * rho * tau - 2.0 * (dof + 2.0 * lambda)).abs();

    Ok(DistributionReport {
        params: *params,
        ks,
        pdf_t_mass,
        gamma_diff_mass,
        patnaik_sup_gap,
        patnaik_mean_residual,
        patnaik_var_residual,
    })
}

/// Empirical distribution of the selection statistics generated through the
/// full channel + measurement pipeline (rather than the explicit Gaussian
/// construction). Returns KS distances for the single-tap branches. The
/// analytic densities are large-`M` approximations, so these distances do
/// not vanish with sample count; they measure the modeling error.
pub fn through_channel_ks(
    params: &SelectionDistParams,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64), TheoryError> {
    use crate::channel::{gen_angular_channel, GridMode, SystemParams};
    let n = 2 * params.s_taps.max(8);
    let sys = SystemParams {
        n,
        n_sub: 4,
        k: 1,
        m: params.m,
        d: 1,
        s_taps: params.s_taps,
        g: params.g,
        snr_db: 0.0,
        f_m: 28e9,
        f_s: 3.5e9,
        c_ratio: 3.0,
        grid_mode: GridMode::OffGrid,
    };
    let sigma2 = params.sigma2;
    let mut nz = Vec::with_capacity(trials);
    let mut zero = Vec::with_capacity(trials);
    for t in 0..trials {
        let stream = RngStream::new(seed, t as u64);
        let support: Vec<usize> = (0..params.s_taps).collect();
        let x = gen_angular_channel(&sys, &support, stream.substream(1))
            .map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
        // Noise variance is pinned directly rather than via the SNR mapping.
        let a = crate::numerics::sample_complex_gaussian(sys.m, sys.n, 1.0, stream.substream(2))
            .map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
        let noise =
            crate::numerics::sample_complex_gaussian(sys.m, 1, sigma2, stream.substream(3))
                .map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
        let mut y = a.mul(&x.x).map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
        for i in 0..sys.m {
            let v = y.get(i, 0) + noise.get(i, 0);
            y.set(i, 0, v);
        }
        let corr = a.conj_mul(&y).map_err(|e| TheoryError::InvalidParameter(e.to_string()))?;
        nz.push(corr.get(0, 0).norm_sqr());
        zero.push(corr.get(sys.n - 1, 0).norm_sqr());
    }
    let nz = sorted(nz);
    let zero = sorted(zero);
    let s1 = params.sigma1_sq();
    let s2 = params.sigma2_sq();
    let a_param = params.m as f64 * params.g / s1.sqrt();
    let stride = (trials / 4096).max(1);
    let ks_nz = ks_distance_sorted(
        &nz,
        |x| if x <= 0.0 { 0.0 } else { 1.0 - marcum_q1(a_param, (x / s1).sqrt()) },
        stride,
    );
    let ks_zero = ks_distance_sorted(
        &zero,
        |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x / (2.0 * s2)).exp() },
        stride,
    );
    Ok((ks_nz, ks_zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theorem1_dparams() -> DParams {
        DParams { m: 25, s_taps: 5, d: 1, k_eff: 1, g: 1.0, sigma2: 1.0, mode: DMode::Exact }
    }

    fn theorem2_dparams() -> DParams {
        DParams { m: 25, s_taps: 20, d: 4, k_eff: 32, g: 1.0, sigma2: 1.0, mode: DMode::Exact }
    }

    #[test]
    fn pe_collapses_symmetrically_at_zero_dv() {
        let (dist, _) = regime_setup(Regime::Theorem1, &theorem1_dparams()).unwrap();
        let stat = SelectionStatistic::new(&dist).unwrap();
        let p = 0.4;
        let pe = selection_error_probability_with(&stat, 0.0, p, p);
        let expect = 2.0 * p * (1.0 - p) * stat.prob_below(0.0);
        assert!((pe - expect).abs() < 1e-12);
    }

    #[test]
    fn pe_limit_large_dv() {
        let (dist, _) = regime_setup(Regime::Theorem1, &theorem1_dparams()).unwrap();
        let (p1, p2) = (0.45, 0.55);
        let (lo, hi) = {
            let DParams { m, s_taps, g, sigma2, .. } = theorem1_dparams();
            let p = SelectionDistParams { m, g, sigma2, s_taps, d: 1, k: 1 };
            t_single_window(&p, 44.0)
        };
        let pe = selection_error_probability(hi * 1.5, p1, p2, &dist).unwrap();
        assert!((pe - p1 * (1.0 - p2)).abs() < 1e-3);
        let pe = selection_error_probability(lo.min(-1.0) * 1.5, p1, p2, &dist).unwrap();
        assert!((pe - p2 * (1.0 - p1)).abs() < 1e-3);
    }

    #[test]
    fn pe_has_interior_minimum() {
        let (dist, d) = regime_setup(Regime::Theorem1, &theorem1_dparams()).unwrap();
        let stat = SelectionStatistic::new(&dist).unwrap();
        let (p1, p2) = (0.5, 0.52);
        let dv_th = d * (logit(p2) - logit(p1));
        let pe_mid = selection_error_probability_with(&stat, dv_th, p1, p2);
        let pe_lo = selection_error_probability_with(&stat, -10.0 * dv_th, p1, p2);
        let pe_hi = selection_error_probability_with(&stat, 30.0 * dv_th, p1, p2);
        assert!(pe_mid < pe_lo && pe_mid < pe_hi);
    }

    #[test]
    fn optimal_prior_theorem1_matches_grid() {
        let report =
            validate_optimal_prior(Regime::Theorem1, &theorem1_dparams(), 0.5, &[1e-3, 1e-2])
                .unwrap();
        for e in &report.entries {
            assert!(
                e.rel_gap.abs() < 5e-3,
                "dp={}: rel gap {} (theory {} vs grid {})",
                e.delta_p,
                e.rel_gap,
                e.pe_theory,
                e.pe_grid
            );
        }
    }

    #[test]
    fn optimal_prior_theorem2_matches_grid() {
        let report =
            validate_optimal_prior(Regime::Theorem2, &theorem2_dparams(), 0.5, &[1e-3, 1e-2])
                .unwrap();
        for e in &report.entries {
            assert!(e.rel_gap.abs() < 5e-3, "dp={}: rel gap {}", e.delta_p, e.rel_gap);
        }
    }

    #[test]
    fn scaled_coefficient_performs_worse() {
        let dp = theorem1_dparams();
        let (dist, d) = regime_setup(Regime::Theorem1, &dp).unwrap();
        let stat = SelectionStatistic::new(&dist).unwrap();
        let (p1, delta_p) = (0.5, 1e-2);
        let p2 = p1 + delta_p;
        let dv_opt = d * (logit(p2) - logit(p1));
        let dv_bad = 10.0 * dv_opt;
        let pe_opt = selection_error_probability_with(&stat, dv_opt, p1, p2);
        let pe_bad = selection_error_probability_with(&stat, dv_bad, p1, p2);
        assert!(pe_bad > pe_opt);
    }

    #[test]
    fn zero_delta_p_is_symmetric() {
        let report =
            validate_optimal_prior(Regime::Theorem1, &theorem1_dparams(), 0.5, &[0.0]).unwrap();
        let e = &report.entries[0];
        assert_eq!(e.dv_theory, 0.0);
        // The grid optimum sits at zero up to grid resolution.
        assert!(e.pe_theory <= e.pe_grid * (1.0 + 1e-9));
    }

    #[test]
    fn distribution_report_small_run() {
        let params = SelectionDistParams { m: 100, g: 1.0, sigma2: 1.0, s_taps: 5, d: 2, k: 4 };
        let report = validate_distributions(&params, 40_000, 99).unwrap();
        for e in &report.ks {
            assert!(e.ks < 0.02, "{}: KS = {}", e.family, e.ks);
        }
        assert!((report.pdf_t_mass - 1.0).abs() < 1e-4);
        assert!((report.gamma_diff_mass - 1.0).abs() < 1e-4);
        assert!(report.patnaik_mean_residual < 1e-12 * 336.0);
        assert!(report.patnaik_var_residual < 1e-12 * 1312.0);
        assert!(report.patnaik_sup_gap < 0.02);
    }
}
