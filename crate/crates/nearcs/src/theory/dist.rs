//! Distributions of the greedy selection statistics: the two-branch density
//! of the single-tap statistic difference, its characteristic function, the
//! Patnaik second-moment approximation and the Whittaker-based density of a
//! difference of Gamma variates.

use super::quad::integrate;
use super::special::{bessel_i0_scaled, gamma_p, lgamma, ln_whittaker_w};
use super::TheoryError;
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};

/// Scalars defining the selection-statistic distributions.
#[derive(Debug, Clone, Copy)]
pub struct SelectionDistParams {
    pub m: usize,
    pub g: f64,
    pub sigma2: f64,
    pub s_taps: usize,
    pub d: usize,
    pub k: usize,
}

impl SelectionDistParams {
    /// Per-component variance of the single-tap statistic on the support:
    /// `σ₁² = (M/2)((S−1)g² + σ²)`.
    pub fn sigma1_sq(&self) -> f64 {
        self.m as f64 / 2.0 * ((self.s_taps as f64 - 1.0) * self.g * self.g + self.sigma2)
    }

    /// Per-component variance off the support: `σ₂² = (M/2)(Sg² + σ²)`.
    pub fn sigma2_sq(&self) -> f64 {
        self.m as f64 / 2.0 * (self.s_taps as f64 * self.g * self.g + self.sigma2)
    }

    /// Per-entry correlation variance of a nonzero block, `M((S−1)g² + σ²)`.
    pub fn sigma_nz2(&self) -> f64 {
        2.0 * self.sigma1_sq()
    }

    /// Per-entry correlation variance of a zero block, `M(Sg² + σ²)`.
    pub fn sigma_zero2(&self) -> f64 {
        2.0 * self.sigma2_sq()
    }

    /// Degrees of freedom of the block statistic.
    pub fn block_dof(&self) -> f64 {
        2.0 * (self.d * self.k) as f64
    }

    /// Noncentrality of the block statistic, `λ = 2dK·M²g²/σ_nz²`.
    pub fn block_noncentrality(&self) -> f64 {
        let m = self.m as f64;
        self.block_dof() * m * m * self.g * self.g / self.sigma_nz2()
    }

    /// Gamma parameters of the zero-block statistic: `Γ(dK, 1/σ_zero²)`.
    pub fn block_zero_gamma(&self) -> GammaParams {
        GammaParams { alpha: (self.d * self.k) as f64, beta: 1.0 / self.sigma_zero2() }
    }

    /// Gamma parameters of the nonzero-block statistic after the Patnaik
    /// approximation: `Γ(τ/2, 1/(ρ·σ_nz²))`.
    pub fn block_nonzero_gamma(&self) -> GammaParams {
        let (rho, tau) = patnaik(self.block_dof(), self.block_noncentrality());
        GammaParams { alpha: tau / 2.0, beta: 1.0 / (rho * self.sigma_nz2()) }
    }
}

/// Reconciled two-branch density of `T = T₁ − T₂`, the difference between
/// the on-support and off-support single-tap statistics.
///
/// For `t < 0` the density is the plain exponential branch
/// `e^{t/(2σ₂²)}·e^{−M²g²/(2(σ₁²+σ₂²))}/(2(σ₁²+σ₂²))`; for `t ≥ 0` the
/// same expression carries the Marcum factor
/// `Q₁((Mg/σ₁)√(σ₂²/(σ₁²+σ₂²)), √(t(σ₁²+σ₂²)/(σ₁²σ₂²)))`. (The printed
/// source swaps the two branches, which cannot normalize; this assignment
/// integrates to one and matches Monte Carlo.) The `t ≥ 0` branch is
/// evaluated through the defining convolution to stay finite for large `t`.
pub fn pdf_t_single(t: f64, params: &SelectionDistParams) -> f64 {
    let s1 = params.sigma1_sq();
    let s2 = params.sigma2_sq();
    let mg = params.m as f64 * params.g;
    if t < 0.0 {
        let pref = (-(mg * mg) / (2.0 * (s1 + s2))).exp() / (2.0 * (s1 + s2));
        pref * (t / (2.0 * s2)).exp()
    } else {
        // f(t) = 1/(4σ₁²σ₂²) ∫_t^∞ e^{−(√u−Mg)²/(2σ₁²)} i0e(Mg√u/σ₁²)
        //        · e^{−(u−t)/(2σ₂²)} du, every factor ≤ 1.
        let phi = |u: f64| -> f64 {
            if u <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let ru = u.sqrt();
            -(ru - mg) * (ru - mg) / (2.0 * s1) - (u - t) / (2.0 * s2)
        };
        let f = |u: f64| {
            let e = phi(u);
            if e < -745.0 {
                0.0
            } else {
                e.exp() * bessel_i0_scaled(mg * u.sqrt() / s1)
            }
        };
        let center = (mg * mg).max(t);
        let width = 45.0 * (2.0 * s1.max(s2) * (center.max(1.0))).sqrt() + 90.0 * s2;
        let hi = center + width;
        let val = integrate(f, t, hi, 1e-14, 1e-9).unwrap_or(0.0);
        (val / (4.0 * s1 * s2)).max(0.0)
    }
}

/// CDF of the single-tap difference statistic.
pub fn cdf_t_single(t: f64, params: &SelectionDistParams) -> Result<f64, TheoryError> {
    let s1 = params.sigma1_sq();
    let s2 = params.sigma2_sq();
    let mg = params.m as f64 * params.g;
    let mass_neg = s2 / (s1 + s2) * (-(mg * mg) / (2.0 * (s1 + s2))).exp();
    if t <= 0.0 {
        Ok(mass_neg * (t / (2.0 * s2)).exp())
    } else {
        let pos = integrate(|u| pdf_t_single(u, params), 0.0, t, 1e-11, 1e-8)?;
        Ok((mass_neg + pos).min(1.0))
    }
}

/// Characteristic function of `T`:
/// `φ(ω) = e^{jωM²g²/(1−2jωσ₁²)} / ((1−2jωσ₁²)(1+2jωσ₂²))`.
pub fn cf_t(omega: f64, params: &SelectionDistParams) -> num_complex::Complex64 {
    use num_complex::Complex64;
    let s1 = params.sigma1_sq();
    let s2 = params.sigma2_sq();
    let mg2 = (params.m as f64 * params.g).powi(2);
    let jw = Complex64::new(0.0, omega);
    let d1 = Complex64::new(1.0, 0.0) - 2.0 * jw * s1;
    let d2 = Complex64::new(1.0, 0.0) + 2.0 * jw * s2;
    (jw * mg2 / d1).exp() / (d1 * d2)
}

/// Patnaik second-moment reduction of `χ′²(n, λ)` to `ρ·χ²(τ)`:
/// `ρ = (n+2λ)/(n+λ)`, `τ = (n+λ)²/(n+2λ)`.
pub fn patnaik(n: f64, lambda: f64) -> (f64, f64) {
    let rho = (n + 2.0 * lambda) / (n + lambda);
    let tau = (n + lambda) * (n + lambda) / (n + 2.0 * lambda);
    (rho, tau)
}

/// Shape–rate Gamma parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha / (self.beta * self.beta)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gamma_p(self.alpha, self.beta * x)
    }
}

/// Whittaker-based density of `T = T₁ − T₂` with `T₁ ~ Γ(α₁, β₁)`,
/// `T₂ ~ Γ(α₂, β₂)`:
///
/// `t ≥ 0`: `c̃/Γ(α₁)·t^{(α₁+α₂)/2−1}·e^{(β₂−β₁)t/2}·
///           W_{(α₁−α₂)/2, (1−α₁−α₂)/2}((β₁+β₂)t)`
/// and symmetrically (α-roles swapped, |t|) for `t < 0`, where
/// `c̃ = β₁^{α₁}β₂^{α₂}/(β₁+β₂)^{(α₁+α₂)/2}`.
pub fn gamma_diff_pdf(t: f64, g1: &GammaParams, g2: &GammaParams) -> Result<f64, TheoryError> {
    if g1.alpha <= 0.0 || g1.beta <= 0.0 || g2.alpha <= 0.0 || g2.beta <= 0.0 {
        return Err(TheoryError::InvalidParameter("gamma parameters must be positive".into()));
    }
    let (a1, b1, a2, b2) = (g1.alpha, g1.beta, g2.alpha, g2.beta);
    let half_sum = (a1 + a2) / 2.0;
    let ln_c = a1 * b1.ln() + a2 * b2.ln() - half_sum * (b1 + b2).ln();
    let mu = (1.0 - a1 - a2) / 2.0;
    if t == 0.0 {
        // Continuous limit from either side.
        let ln_v = ln_c + lgamma(a1 + a2 - 1.0) - lgamma(a1) - lgamma(a2)
            + (1.0 - half_sum) * (b1 + b2).ln();
        return Ok(ln_v.exp());
    }
    let (kappa, ln_gamma_term, z) = if t > 0.0 {
        ((a1 - a2) / 2.0, lgamma(a1), (b1 + b2) * t)
    } else {
        ((a2 - a1) / 2.0, lgamma(a2), -(b1 + b2) * t)
    };
    let ln_w = ln_whittaker_w(kappa, mu, z)?;
    let ln_pdf = ln_c - ln_gamma_term
        + (half_sum - 1.0) * t.abs().ln()
        + (b2 - b1) / 2.0 * t
        + ln_w;
    if ln_pdf < -745.0 {
        return Ok(0.0);
    }
    Ok(ln_pdf.exp())
}

/// Draws the single-tap statistic `|aᴴy|²` from its explicit Gaussian
/// construction: two squared reals with means `(M·Re x, M·Im x)`, `|x| = g`,
/// per-component variance σ₁² (support) or zero mean with σ₂² (off support).
pub fn sample_single_tap_statistic(
    nonzero: bool,
    params: &SelectionDistParams,
    rng: &mut impl Rng,
) -> f64 {
    let (mean, var) = if nonzero {
        (params.m as f64 * params.g, params.sigma1_sq())
    } else {
        (0.0, params.sigma2_sq())
    };
    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let (mre, mim) = (mean * phi.cos(), mean * phi.sin());
    let s = var.sqrt();
    let re: f64 = mre + s * rng.sample::<f64, _>(StandardNormal);
    let im: f64 = mim + s * rng.sample::<f64, _>(StandardNormal);
    re * re + im * im
}

/// Draws the block statistic `‖A_iᴴY‖_F²` from its explicit construction:
/// the sum over `dK` entries of squared complex Gaussians with per-entry
/// mean modulus `Mg` (support case) and per-entry complex variance σ_nz²
/// or σ_zero².
pub fn sample_block_statistic(
    nonzero: bool,
    params: &SelectionDistParams,
    rng: &mut impl Rng,
) -> f64 {
    let entries = params.d * params.k;
    let (mean, var) = if nonzero {
        (params.m as f64 * params.g, params.sigma_nz2())
    } else {
        (0.0, params.sigma_zero2())
    };
    let s = (var / 2.0).sqrt();
    let mut acc = 0.0;
    for _ in 0..entries {
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let re: f64 = mean * phi.cos() + s * rng.sample::<f64, _>(StandardNormal);
        let im: f64 = mean * phi.sin() + s * rng.sample::<f64, _>(StandardNormal);
        acc += re * re + im * im;
    }
    acc
}

/// Draws `Γ(α₁,β₁) − Γ(α₂,β₂)`.
pub fn sample_gamma_diff(g1: &GammaParams, g2: &GammaParams, rng: &mut impl Rng) -> f64 {
    let d1 = GammaDist::new(g1.alpha, 1.0 / g1.beta).expect("valid gamma");
    let d2 = GammaDist::new(g2.alpha, 1.0 / g2.beta).expect("valid gamma");
    d1.sample(rng) - d2.sample(rng)
}

/// CDF of the scaled noncentral χ²: `P(v·χ′²(n, λ) ≤ x)` via the Poisson
/// mixture of central χ² CDFs.
pub fn scaled_noncentral_chi2_cdf(x: f64, dof: f64, lambda: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let y = x / scale / 2.0; // gamma_p argument: chi2(k) CDF = P(k/2, x/2)
    let half_l = lambda / 2.0;
    // Poisson weights around j ≈ λ/2, truncated at negligible mass.
    let j_center = half_l.floor() as i64;
    let spread = (10.0 * half_l.sqrt()).ceil() as i64 + 30;
    let j_lo = (j_center - spread).max(0);
    let j_hi = j_center + spread;
    let mut total = 0.0;
    for j in j_lo..=j_hi {
        let jf = j as f64;
        let ln_w = -half_l + jf * half_l.ln() - lgamma(jf + 1.0);
        let w = ln_w.exp();
        if w < 1e-18 && j > j_center {
            break;
        }
        total += w * gamma_p(dof / 2.0 + jf, y);
    }
    total.clamp(0.0, 1.0)
}

/// CDF of the scaled central χ²: `P(v·χ²(n) ≤ x)`.
pub fn scaled_chi2_cdf(x: f64, dof: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_p(dof / 2.0, x / scale / 2.0)
    }
}

/// Kolmogorov–Smirnov distance between sorted samples and a reference CDF,
/// evaluated on a quantile subgrid (`stride` samples apart); the subgrid
/// approximation errs by at most `stride/n` in probability.
pub fn ks_distance_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64, stride: usize) -> f64 {
    let n = sorted.len();
    let stride = stride.max(1);
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let f = cdf(sorted[i]);
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        d = d.max((f - lo).abs()).max((hi - f).abs());
        i += stride;
    }
    let f_last = cdf(sorted[n - 1]);
    d.max((1.0 - f_last).abs())
}

/// Builds a cumulative CDF lookup for a density on `[lo, hi]` with `n`
/// trapezoid cells; returns the grid and CDF values (normalized only by the
/// density itself, so the last value doubles as a normalization check).
pub struct NumericCdf {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl NumericCdf {
    pub fn build(
        pdf: impl Fn(f64) -> Result<f64, TheoryError>,
        lo: f64,
        hi: f64,
        n: usize,
    ) -> Result<Self, TheoryError> {
        let mut grid = Vec::with_capacity(n + 1);
        let mut vals = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            grid.push(x);
            vals.push(pdf(x)?);
        }
        let mut cdf = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..=n {
            acc += 0.5 * (vals[i - 1] + vals[i]) * (grid[i] - grid[i - 1]);
            cdf.push(acc);
        }
        Ok(Self { grid, cdf })
    }

    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= *self.grid.last().unwrap() {
            return self.total_mass();
        }
        let idx = match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.cdf[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }
}

/// Integration window covering the bulk of the single-tap difference
/// distribution: mean ± `n_sigmas` standard deviations.
pub fn t_single_window(params: &SelectionDistParams, n_sigmas: f64) -> (f64, f64) {
    let s1 = params.sigma1_sq();
    let s2 = params.sigma2_sq();
    let mg2 = (params.m as f64 * params.g).powi(2);
    let mean = mg2 + 2.0 * s1 - 2.0 * s2;
    let var = 4.0 * s1 * s1 + 4.0 * s1 * mg2 + 4.0 * s2 * s2;
    let sd = var.sqrt();
    (mean - n_sigmas * sd, mean + n_sigmas * sd)
}

/// Same for the Gamma-difference distribution.
pub fn gamma_diff_window(g1: &GammaParams, g2: &GammaParams, n_sigmas: f64) -> (f64, f64) {
    let mean = g1.mean() - g2.mean();
    let sd = (g1.variance() + g2.variance()).sqrt();
    (mean - n_sigmas * sd, mean + n_sigmas * sd)
}
