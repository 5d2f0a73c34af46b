//! Complex linear-algebra and random-sampling substrate.
//!
//! Everything here is deterministic: a [`RngStream`] identifies a random
//! sequence by `(master_seed, stream_id)` and always reproduces it exactly,
//! and the solvers are plain sequential Householder QR.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank-deficient system: {deficient_columns} column(s) below tolerance")]
    RankDeficient { deficient_columns: usize },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Relative diagonal tolerance below which a triangular factor is treated as
/// rank-deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of integers into a single stream id.
pub fn mix_ids(ids: &[u64]) -> u64 {
    let mut state = 0x243f_6a88_85a3_08d3;
    let mut acc = 0u64;
    for &id in ids {
        state ^= id;
        acc ^= splitmix64(&mut state);
    }
    acc
}

/// Identifier of a reproducible random sequence.
///
/// Identical `(master_seed, stream_id)` pairs yield bitwise-identical sample
/// sequences on all platforms; distinct ids give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Derives an independent child stream tagged by `tag`.
    pub fn substream(&self, tag: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: mix_ids(&[self.stream_id, 0x5b5a_u64, tag]),
        }
    }

    /// Instantiates the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut state = self.master_seed ^ 0x9e37_79b9_7f4a_7c15;
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        state ^= self.stream_id.rotate_left(17);
        seed[16..24].copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        seed[24..32].copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        ChaCha8Rng::from_seed(seed)
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix with the listed columns of `self`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            let src = self.row(i);
            let dst = out.row_mut(i);
            for (jj, &j) in cols.iter().enumerate() {
                dst[jj] = src[j];
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for j in 0..other.cols {
                    dst[j] += a * src[j];
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ · other` without forming the transpose.
    pub fn conj_mul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "conj_mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for m in 0..self.rows {
            let a_row = self.row(m);
            let b_row = other.row(m);
            for n in 0..self.cols {
                let a = a_row[n].conj();
                let dst = out.row_mut(n);
                for k in 0..other.cols {
                    dst[k] += a * b_row[k];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::DimensionMismatch("sub".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }
}

/// Draws a matrix of i.i.d. circularly-symmetric complex Gaussian entries
/// with mean zero and total per-entry variance `variance`.
pub fn sample_complex_gaussian(
    rows: usize,
    cols: usize,
    variance: f64,
    stream: RngStream,
) -> Result<ComplexMatrix> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(NumericsError::InvalidParameter(format!(
            "variance must be finite and nonnegative, got {variance}"
        )));
    }
    let mut rng = stream.rng();
    let s = (variance / 2.0).sqrt();
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        data.push(Complex64::new(s * re, s * im));
    }
    Ok(ComplexMatrix { rows, cols, data })
}

/// Conjugate transpose as a free function mirroring the `·ᴴ` operator.
pub fn conj_transpose(m: &ComplexMatrix) -> ComplexMatrix {
    m.conj_transpose()
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm()
}

struct HouseholderQr {
    /// Packed factorization: reflectors below the diagonal, R on and above.
    qr: ComplexMatrix,
    /// Householder scalars.
    tau: Vec<Complex64>,
    diag: Vec<Complex64>,
}

/// Householder QR of a tall matrix (rows >= cols).
fn householder_qr(a: &ComplexMatrix) -> HouseholderQr {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut qr = a.clone();
    let mut tau = vec![Complex64::new(0.0, 0.0); n];
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        // Norm of the trailing part of column k.
        let mut norm_sq = 0.0;
        for i in k..m {
            norm_sq += qr.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        let x0 = qr.get(k, k);
        if norm == 0.0 {
            diag[k] = Complex64::new(0.0, 0.0);
            continue;
        }
        // alpha = -exp(i arg(x0)) * norm, so that v = x - alpha e1 is stable.
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let v0 = x0 - alpha;
        let mut vnorm_sq = v0.norm_sqr();
        for i in k + 1..m {
            vnorm_sq += qr.get(i, k).norm_sqr();
        }
        if vnorm_sq == 0.0 {
            diag[k] = alpha;
            continue;
        }
        qr.set(k, k, v0);
        tau[k] = Complex64::new(2.0 / vnorm_sq, 0.0);
        diag[k] = alpha;
        // Apply I - tau v v^H to the remaining columns.
        for j in k + 1..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in k..m {
                dot += qr.get(i, k).conj() * qr.get(i, j);
            }
            let f = tau[k] * dot;
            for i in k..m {
                let v = qr.get(i, k);
                let cur = qr.get(i, j);
                qr.set(i, j, cur - f * v);
            }
        }
    }
    HouseholderQr { qr, tau, diag }
}

impl HouseholderQr {
    fn cols(&self) -> usize {
        self.qr.cols()
    }

    fn rank_check(&self) -> Result<()> {
        let max_diag = self.diag.iter().map(|d| d.norm()).fold(0.0_f64, f64::max);
        let deficient =
            self.diag.iter().filter(|d| d.norm() <= RANK_TOLERANCE * max_diag).count();
        if max_diag == 0.0 || deficient > 0 {
            return Err(NumericsError::RankDeficient {
                deficient_columns: if max_diag == 0.0 { self.cols() } else { deficient },
            });
        }
        Ok(())
    }

    /// Applies Qᴴ to `y` in place.
    fn apply_qh(&self, y: &mut ComplexMatrix) {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        for k in 0..n {
            if self.tau[k].re == 0.0 {
                continue;
            }
            for j in 0..y.cols() {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in k..m {
                    dot += self.qr.get(i, k).conj() * y.get(i, j);
                }
                let f = self.tau[k] * dot;
                for i in k..m {
                    let v = self.qr.get(i, k);
                    let cur = y.get(i, j);
                    y.set(i, j, cur - f * v);
                }
            }
        }
    }

    /// Solves R x = b for the top n rows of b (back substitution).
    fn solve_r(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.qr.cols();
        let mut x = ComplexMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            for i in (0..n).rev() {
                let mut acc = b.get(i, j);
                for k in i + 1..n {
                    acc -= self.r_entry(i, k) * x.get(k, j);
                }
                x.set(i, j, acc / self.diag[i]);
            }
        }
        x
    }

    /// Solves Rᴴ z = b (forward substitution).
    fn solve_rh(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.qr.cols();
        let mut z = ComplexMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            for i in 0..n {
                let mut acc = b.get(i, j);
                for k in 0..i {
                    acc -= self.r_entry(k, i).conj() * z.get(k, j);
                }
                z.set(i, j, acc / self.diag[i].conj());
            }
        }
        z
    }

    #[inline]
    fn r_entry(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            self.diag[i]
        } else {
            self.qr.get(i, j)
        }
    }

    /// Applies Q to a tall matrix whose top n rows are z and the rest zero.
    fn apply_q_thin(&self, z: &ComplexMatrix) -> ComplexMatrix {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        let mut out = ComplexMatrix::zeros(m, z.cols());
        for i in 0..n {
            for j in 0..z.cols() {
                out.set(i, j, z.get(i, j));
            }
        }
        for k in (0..n).rev() {
            if self.tau[k].re == 0.0 {
                continue;
            }
            for j in 0..out.cols() {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in k..m {
                    dot += self.qr.get(i, k).conj() * out.get(i, j);
                }
                let f = self.tau[k] * dot;
                for i in k..m {
                    let v = self.qr.get(i, k);
                    let cur = out.get(i, j);
                    out.set(i, j, cur - f * v);
                }
            }
        }
        out
    }
}

/// Least-squares solve of `min ‖Y − A·X‖_F` for tall `A` via Householder QR.
///
/// Fails with [`NumericsError::RankDeficient`] when any triangular-factor
/// diagonal falls below [`RANK_TOLERANCE`] times the largest one.
pub fn least_squares(a_sub: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a_sub.rows() < a_sub.cols() {
        return Err(NumericsError::InvalidParameter(format!(
            "least_squares needs rows >= cols, got {}x{}",
            a_sub.rows(),
            a_sub.cols()
        )));
    }
    if a_sub.rows() != y.rows() {
        return Err(NumericsError::DimensionMismatch("least_squares: A and Y rows".into()));
    }
    let qr = householder_qr(a_sub);
    qr.rank_check()?;
    let mut qty = y.clone();
    qr.apply_qh(&mut qty);
    Ok(qr.solve_r(&qty))
}

/// Minimum-norm solution of an underdetermined system (rows < cols), i.e.
/// `X = Aᴴ(AAᴴ)⁻¹Y`, computed through the QR factorization of `Aᴴ`.
pub fn min_norm_least_squares(a: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() > a.cols() {
        return Err(NumericsError::InvalidParameter(
            "min_norm_least_squares needs rows <= cols".into(),
        ));
    }
    let qr = householder_qr(&a.conj_transpose());
    qr.rank_check()?;
    let z = qr.solve_rh(y);
    Ok(qr.apply_q_thin(&z))
}
