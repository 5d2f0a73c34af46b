//! Out-of-band prior construction: block norms of the Sub-6GHz channel, the
//! min-max probability map, the logit prior factor and its optimal scale `D`.
//!
//! The variance roles are named by what they measure rather than by
//! subscript: `sigma_zero2` is the correlation variance of a zero block and
//! `sigma_nz2` that of a nonzero block (the source material swaps the
//! subscripts between statement and derivation).

use crate::numerics::ComplexMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SideinfoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coefficient formula outside its derivation regime: {0}")]
    RegimeInvalid(String),
}

pub type Result<T> = std::result::Result<T, SideinfoError>;

/// Per-block nonzero probabilities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector {
    pub p: Vec<f64>,
}

/// Logit prior weights `v_i = D·ln(p_i/(1−p_i))` over the extended reals.
#[derive(Debug, Clone)]
pub struct PriorWeights {
    pub v: Vec<f64>,
    pub d_coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DMode {
    Exact,
    Simplified,
}

/// Scalars feeding the optimal prior coefficient.
#[derive(Debug, Clone, Copy)]
pub struct DParams {
    pub m: usize,
    pub s_taps: usize,
    pub d: usize,
    pub k_eff: usize,
    pub g: f64,
    pub sigma2: f64,
    pub mode: DMode,
}

impl DParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.s_taps == 0 || self.d == 0 || self.k_eff == 0 {
            return Err(SideinfoError::InvalidParameter(
                "m, s_taps, d, k_eff must be positive".into(),
            ));
        }
        if self.g <= 0.0 || self.sigma2 <= 0.0 {
            return Err(SideinfoError::InvalidParameter("g and sigma2 must be positive".into()));
        }
        Ok(())
    }

    /// Zero-block per-entry correlation variance `M(S·g² + σ²)`.
    pub fn sigma_zero2(&self) -> f64 {
        self.m as f64 * (self.s_taps as f64 * self.g * self.g + self.sigma2)
    }

    /// Nonzero-block per-entry correlation variance `M((S−1)·g² + σ²)`.
    pub fn sigma_nz2(&self) -> f64 {
        self.m as f64 * ((self.s_taps as f64 - 1.0) * self.g * self.g + self.sigma2)
    }
}

/// Frobenius norm of each aligned `d`-row block.
pub fn block_norms(x_sub: &ComplexMatrix, d: usize) -> Result<Vec<f64>> {
    if d == 0 || x_sub.rows() % d != 0 {
        return Err(SideinfoError::InvalidParameter(format!(
            "block length {d} must divide row count {}",
            x_sub.rows()
        )));
    }
    let nb = x_sub.rows() / d;
    let mut out = Vec::with_capacity(nb);
    for b in 0..nb {
        let mut acc = 0.0;
        for row in b * d..(b + 1) * d {
            for col in 0..x_sub.cols() {
                acc += x_sub.get(row, col).norm_sqr();
            }
        }
        out.push(acc.sqrt());
    }
    Ok(out)
}

/// Min-max map `p_i = (x̲_i − x̲_min)/(x̲_max − x̲_min)`.
///
/// When all norms coincide there is no ranking information and every entry
/// maps to 1/2.
pub fn probability_map_minmax(norms: &[f64]) -> Result<PriorVector> {
    if norms.len() < 2 {
        return Err(SideinfoError::InvalidParameter("need at least two blocks".into()));
    }
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(PriorVector { p: vec![0.5; norms.len()] });
    }
    let span = hi - lo;
    Ok(PriorVector { p: norms.iter().map(|x| (x - lo) / span).collect() })
}

/// Optimal prior coefficient for single-subcarrier, single-tap selection
/// (`K = d = 1`).
///
/// Exact mode uses the characteristic-function result
/// `D = 1/(A − B)` with `σ₁² = (M/2)((S−1)g²+σ²)`, `σ₂² = (M/2)(Sg²+σ²)`;
/// simplified mode collapses `σ₁² ≈ σ₂² = σ₀²` into
/// `D = σ₀²/(1 − e^{−M²g²/(4σ₀²)})`.
pub fn coefficient_d_theorem1(params: &DParams) -> Result<f64> {
    params.validate()?;
    let m = params.m as f64;
    let s = params.s_taps as f64;
    let g2 = params.g * params.g;
    let s1 = m / 2.0 * ((s - 1.0) * g2 + params.sigma2);
    let s2 = m / 2.0 * (s * g2 + params.sigma2);
    match params.mode {
        DMode::Exact => {
            let a = 1.0 / s2;
            let b = 0.5
                * (-(m * m * g2 * s2) / (2.0 * s1 * (s1 + s2))).exp()
                * (s1 + s2)
                / (s1 * s2);
            if a <= b {
                return Err(SideinfoError::RegimeInvalid(format!("A = {a} <= B = {b}")));
            }
            Ok(1.0 / (a - b))
        }
        DMode::Simplified => {
            let s0 = s2;
            Ok(s0 / (1.0 - (-(m * m * g2) / (4.0 * s0)).exp()))
        }
    }
}

/// Optimal prior coefficient for the block multi-subcarrier selection
/// statistic, via the Patnaik approximation of the noncentral χ² term.
///
/// `D = 1/(β₂ − β₁)` with `β₂ = 1/σ_zero²`, `β₁ = 1/(ρ·σ_nz²)` and
/// `ρ = (σ_nz² + 2M²g²)/(σ_nz² + M²g²)`; simplified mode uses
/// `D = (σ₀² + 2M²g²)/(M²g²)·σ₀²` with `σ₀² = σ_zero²`.
pub fn coefficient_d_theorem2(params: &DParams) -> Result<f64> {
    params.validate()?;
    let m = params.m as f64;
    let g2 = params.g * params.g;
    let m2g2 = m * m * g2;
    let sigma_zero2 = params.sigma_zero2();
    let sigma_nz2 = params.sigma_nz2();
    match params.mode {
        DMode::Exact => {
            let ratio = m2g2 / sigma_nz2;
            let dk = (2 * params.d * params.k_eff) as f64;
            let rho = (dk + 2.0 * dk * ratio) / (dk + dk * ratio);
            let beta1 = 1.0 / (rho * sigma_nz2);
            let beta2 = 1.0 / sigma_zero2;
            if beta2 <= beta1 {
                return Err(SideinfoError::RegimeInvalid(format!(
                    "beta2 = {beta2} <= beta1 = {beta1}"
                )));
            }
            Ok(1.0 / (beta2 - beta1))
        }
        DMode::Simplified => {
            let s0 = sigma_zero2;
            Ok((s0 + 2.0 * m2g2) / m2g2 * s0)
        }
    }
}

/// Tap-wise multi-subcarrier coefficient: theorem-2 machinery at `d = 1`.
pub fn coefficient_d_corollary(params: &DParams) -> Result<f64> {
    coefficient_d_theorem2(&DParams { d: 1, ..*params })
}

/// Elementwise extended-real logit scaled by `D`: `p = 1 → +∞` (forced
/// selection), `p = 0 → −∞` (permanent exclusion).
pub fn prior_factor(p: &PriorVector, d_coeff: f64) -> Result<PriorWeights> {
    if d_coeff <= 0.0 {
        return Err(SideinfoError::InvalidParameter("D must be positive".into()));
    }
    let v = p
        .p
        .iter()
        .map(|&pi| {
            if pi <= 0.0 {
                f64::NEG_INFINITY
            } else if pi >= 1.0 {
                f64::INFINITY
            } else {
                d_coeff * (pi / (1.0 - pi)).ln()
            }
        })
        .collect();
    Ok(PriorWeights { v, d_coeff })
}
