//! Distribution theory of the greedy selection statistics: special
//! functions, exact and approximate densities, and error-probability
//! validation of the optimal prior coefficient.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature failed to converge (achieved {achieved})")]
    QuadratureAccuracy { achieved: f64 },
}

pub mod dist;
pub mod quad;
pub mod special;
pub mod validate;

pub use dist::{
    cdf_t_single, cf_t, gamma_diff_pdf, gamma_diff_window, ks_distance_sorted, patnaik,
    pdf_t_single, sample_block_statistic, sample_gamma_diff, sample_single_tap_statistic,
    scaled_chi2_cdf, scaled_noncentral_chi2_cdf, t_single_window, GammaParams, NumericCdf,
    SelectionDistParams,
};
pub use special::{
    bessel_i0, bessel_i0_scaled, gamma_p, marcum_q1, marcum_q1_smallb_approx, whittaker_w,
};
pub use validate::{
    selection_error_probability, through_channel_ks, validate_distributions,
    validate_optimal_prior, DistributionReport, KsEntry, OptimalPriorEntry, OptimalPriorReport,
    Regime, SelectionDist, SelectionStatistic,
};
