//! Dual-band scenario generation: the mmWave block-sparse angular channel,
//! the Sub-6GHz support channel, steering vectors and the pilot measurement
//! model.

use crate::numerics::{sample_complex_gaussian, ComplexMatrix, RngStream};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use thiserror::Error;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    OnGrid,
    OffGrid,
}

/// Scenario scalars for the dual-band system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// mmWave antenna count.
    pub n: usize,
    /// Sub-6GHz antenna count.
    pub n_sub: usize,
    /// Subcarrier count.
    pub k: usize,
    /// Pilot transmissions.
    pub m: usize,
    /// Block length (taps).
    pub d: usize,
    /// Total nonzero taps.
    pub s_taps: usize,
    /// Nonzero-tap modulus.
    pub g: f64,
    /// Per-measurement SNR in dB.
    pub snr_db: f64,
    /// mmWave carrier frequency (Hz).
    pub f_m: f64,
    /// Sub-6GHz carrier frequency (Hz).
    pub f_s: f64,
    /// Variance amplitude ratio between nonzero- and zero-tap perturbations.
    pub c_ratio: f64,
    pub grid_mode: GridMode,
}

impl SystemParams {
    /// Table I / default scenario.
    pub fn defaults() -> Self {
        Self {
            n: 256,
            n_sub: 32,
            k: 32,
            m: 25,
            d: 4,
            s_taps: 20,
            g: 1.0,
            snr_db: 10.0,
            f_m: 28e9,
            f_s: 3.5e9,
            c_ratio: 3.0,
            grid_mode: GridMode::OnGrid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(ChannelError::InvalidParameters(msg));
        if self.n == 0 || self.d == 0 || self.k == 0 || self.m == 0 {
            return fail("n, d, k, m must be positive".into());
        }
        if self.n % self.d != 0 {
            return fail(format!("d = {} must divide n = {}", self.d, self.n));
        }
        if self.grid_mode == GridMode::OnGrid && self.s_taps % self.d != 0 {
            return fail(format!(
                "s_taps = {} must be a multiple of d = {} in on-grid mode",
                self.s_taps, self.d
            ));
        }
        if self.s_taps > self.n {
            return fail(format!("s_taps = {} exceeds n = {}", self.s_taps, self.n));
        }
        if self.m > self.n {
            return fail(format!("m = {} exceeds n = {}", self.m, self.n));
        }
        if self.c_ratio <= 0.0 {
            return fail("c_ratio must be positive".into());
        }
        if !(self.f_m > self.f_s && self.f_s > 0.0) {
            return fail("carrier frequencies must satisfy f_m > f_s > 0".into());
        }
        if self.g <= 0.0 {
            return fail("g must be positive".into());
        }
        Ok(())
    }

    /// Frequency-separation factor `γ = |f_m − f_s| / max(f_m, f_s)`.
    pub fn gamma(&self) -> f64 {
        (self.f_m - self.f_s).abs() / self.f_m.max(self.f_s)
    }

    /// Noise variance per complex entry implied by the SNR convention
    /// `σ² = S·g²·10^(−snr/10)` (per-measurement signal power is `S·g²`).
    pub fn noise_variance(&self) -> f64 {
        self.s_taps as f64 * self.g * self.g * 10f64.powf(-self.snr_db / 10.0)
    }
}

/// mmWave angular-domain channel with block-sparse rows.
#[derive(Debug, Clone)]
pub struct AngularChannel {
    pub x: ComplexMatrix,
    /// Sorted tap indices of the nonzero rows.
    pub support: Vec<usize>,
    pub d: usize,
    pub grid_mode: GridMode,
}

/// Sub-6GHz angular-domain channel plus the perturbation scalars it carries.
#[derive(Debug, Clone)]
pub struct SupportChannel {
    pub x_sub: ComplexMatrix,
    pub gamma: f64,
    /// Zero-block perturbation variance `γ²/C`.
    pub sigma_n2: f64,
}

/// Pilot measurement: `Y = A·X + N`.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub a: ComplexMatrix,
    pub y: ComplexMatrix,
    pub sigma2: f64,
}

/// One physical propagation path.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalPath {
    /// Sine-space angle in [−1, 1].
    pub theta: f64,
    /// Radial distance in meters.
    pub r: f64,
    pub gain: Complex64,
}

/// Draws the support set: aligned blocks on-grid, disjoint length-`d` runs at
/// arbitrary offsets off-grid (rejection sampled).
pub fn gen_support(params: &SystemParams, stream: RngStream) -> Result<Vec<usize>> {
    params.validate()?;
    let nb = params.s_taps / params.d;
    if params.s_taps == 0 {
        return Ok(Vec::new());
    }
    let mut rng = stream.rng();
    match params.grid_mode {
        GridMode::OnGrid => {
            let total_blocks = params.n / params.d;
            // Partial Fisher-Yates over block indices.
            let mut idx: Vec<usize> = (0..total_blocks).collect();
            for i in 0..nb {
                let j = rng.gen_range(i..total_blocks);
                idx.swap(i, j);
            }
            let mut taps: Vec<usize> = idx[..nb]
                .iter()
                .flat_map(|&b| (b * params.d)..(b * params.d + params.d))
                .collect();
            taps.sort_unstable();
            Ok(taps)
        }
        GridMode::OffGrid => {
            if nb * params.d > params.n {
                return Err(ChannelError::InvalidParameters(
                    "off-grid runs cannot fit".into(),
                ));
            }
            let max_start = params.n - params.d;
            loop {
                let mut starts: Vec<usize> =
                    (0..nb).map(|_| rng.gen_range(0..=max_start)).collect();
                starts.sort_unstable();
                let disjoint =
                    starts.windows(2).all(|w| w[1] - w[0] >= params.d);
                if disjoint {
                    let taps: Vec<usize> = starts
                        .iter()
                        .flat_map(|&s| s..s + params.d)
                        .collect();
                    return Ok(taps);
                }
            }
        }
    }
}

/// Fills the supported rows with constant-modulus entries `g·e^{jφ}`,
/// φ i.i.d. uniform per entry and subcarrier.
pub fn gen_angular_channel(
    params: &SystemParams,
    support: &[usize],
    stream: RngStream,
) -> Result<AngularChannel> {
    params.validate()?;
    if support.iter().any(|&t| t >= params.n) {
        return Err(ChannelError::InvalidParameters("support index out of range".into()));
    }
    let mut rng = stream.rng();
    let mut x = ComplexMatrix::zeros(params.n, params.k);
    for &t in support {
        for k in 0..params.k {
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            x.set(t, k, Complex64::from_polar(params.g, phi));
        }
    }
    Ok(AngularChannel {
        x,
        support: support.to_vec(),
        d: params.d,
        grid_mode: params.grid_mode,
    })
}

/// Unit-norm uniform-linear-array response, half-wavelength spacing:
/// entry `n = e^{−jπnθ}/√N`.
pub fn far_field_steering(theta: f64, n: usize) -> Vec<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| Complex64::from_polar(scale, -PI * i as f64 * theta))
        .collect()
}

/// Spherical-wavefront array response with exact per-element distances.
///
/// Element `n` sits at `n·s` along the array (`s` = half wavelength); the
/// phase carries the exact distance difference `r⁽ⁿ⁾ − r` with
/// `r⁽ⁿ⁾ = sqrt(r² + n²s² − 2·r·n·s·θ)`, which reduces to
/// [`far_field_steering`] as `r → ∞`.
pub fn near_field_steering(theta: f64, r: f64, n: usize, wavelength: f64) -> Vec<Complex64> {
    let s = wavelength / 2.0;
    let kwave = 2.0 * PI / wavelength;
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| {
            let x = i as f64 * s;
            let dist = (r * r + x * x - 2.0 * r * x * theta).sqrt();
            Complex64::from_polar(scale, kwave * (dist - r))
        })
        .collect()
}

/// Near/far boundary `2·D²/λ`.
pub fn rayleigh_distance(aperture_m: f64, wavelength_m: f64) -> f64 {
    2.0 * aperture_m * aperture_m / wavelength_m
}

/// N×N unitary DFT codebook whose column `c` is the far-field steering
/// vector at the grid angle `θ_c = 2c/N` (mapped to [−1, 1)).
pub fn dft_codebook(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |m, c| {
        Complex64::from_polar(scale, -2.0 * PI * (m as f64) * (c as f64) / n as f64)
    })
}

/// Sub-6GHz codebook: the same spatial grid sampled with `n_sub` antenna
/// rows, unit-norm columns.
pub fn sub6_codebook(n_sub: usize, n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n_sub as f64).sqrt();
    ComplexMatrix::from_fn(n_sub, n, |m, c| {
        Complex64::from_polar(scale, -2.0 * PI * (m as f64) * (c as f64) / n as f64)
    })
}

/// Derives the Sub-6GHz angular channel from the mmWave channel.
///
/// Supported entries are multiplied by the frequency-separation perturbation
/// `Q = (1 + γ·R₁·δ)·e^{j2πγR₂δ}` with `δ ~ U(0,1)` and `R₁, R₂ = ±1`
/// equiprobable, drawn independently per entry; unsupported entries carry
/// i.i.d. complex Gaussian perturbations of variance `σ_n² = γ²/C`.
pub fn gen_sub6_channel(
    x: &AngularChannel,
    params: &SystemParams,
    stream: RngStream,
) -> Result<SupportChannel> {
    params.validate()?;
    let gamma = params.gamma();
    let sigma_n2 = gamma * gamma / params.c_ratio;
    let mut rng = stream.rng();
    let n = x.x.rows();
    let k = x.x.cols();
    let mut supported = vec![false; n];
    for &t in &x.support {
        supported[t] = true;
    }
    let mut x_sub = ComplexMatrix::zeros(n, k);
    let noise_s = (sigma_n2 / 2.0).sqrt();
    for row in 0..n {
        for col in 0..k {
            if supported[row] {
                let delta: f64 = rng.gen_range(0.0..1.0);
                let r1: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let r2: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let q = Complex64::from_polar(
                    1.0 + gamma * r1 * delta,
                    2.0 * PI * gamma * r2 * delta,
                );
                x_sub.set(row, col, q * x.x.get(row, col));
            } else {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                x_sub.set(row, col, Complex64::new(noise_s * re, noise_s * im));
            }
        }
    }
    Ok(SupportChannel { x_sub, gamma, sigma_n2 })
}

/// Draws the Gaussian measurement matrix and the noisy received matrix
/// `Y = A·X + N` with `σ² = S·g²·10^(−snr/10)` per complex entry.
pub fn gen_measurement(
    x: &AngularChannel,
    params: &SystemParams,
    stream: RngStream,
) -> Result<Measurement> {
    params.validate()?;
    let sigma2 = params.noise_variance();
    let a = sample_complex_gaussian(params.m, params.n, 1.0, stream.substream(0))?;
    let noise = sample_complex_gaussian(params.m, params.k, sigma2, stream.substream(1))?;
    let mut y = a.mul(&x.x)?;
    y = ComplexMatrix::from_fn(params.m, params.k, |i, j| y.get(i, j) + noise.get(i, j));
    Ok(Measurement { a, y, sigma2 })
}

/// Multi-path spherical-wave channel matrix, one column per subcarrier:
/// `h_k = √(N/L)·Σ_l g_l·e^{−j k_k r_l}·b(θ_l, r_l)`.
pub fn gen_physical_channel(
    paths: &[PhysicalPath],
    n: usize,
    k: usize,
    wavelength: f64,
    subcarrier_spacing: f64,
) -> Result<ComplexMatrix> {
    if paths.is_empty() {
        return Err(ChannelError::InvalidParameters("need at least one path".into()));
    }
    let l = paths.len() as f64;
    let amp = (n as f64 / l).sqrt();
    let f_c = SPEED_OF_LIGHT / wavelength;
    let mut h = ComplexMatrix::zeros(n, k);
    let steering: Vec<Vec<Complex64>> =
        paths.iter().map(|p| near_field_steering(p.theta, p.r, n, wavelength)).collect();
    for (kk, col) in (0..k).enumerate() {
        let f_k = f_c + (kk as f64 - (k as f64 / 2.0).ceil()) * subcarrier_spacing;
        let wavenumber = 2.0 * PI * f_k / SPEED_OF_LIGHT;
        for (p, b) in paths.iter().zip(&steering) {
            let c = p.gain * Complex64::from_polar(amp, -wavenumber * p.r);
            for row in 0..n {
                let cur = h.get(row, col);
                h.set(row, col, cur + c * b[row]);
            }
        }
    }
    Ok(h)
}
