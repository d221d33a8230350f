//! Correlated source sampling, additive noise and the one-bit quantizer.
//!
//! The source covariance is tridiagonal Toeplitz, so its Cholesky factor is
//! lower bidiagonal and a draw costs `O(n)`:
//!
//! ```text
//! d_1 = sqrt(σ_s²),  e_i = r / d_i,  d_{i+1} = sqrt(σ_s² - e_i²)
//! s_1 = d_1 g_1,     s_{i+1} = e_i g_i + d_{i+1} g_{i+1}
//! ```

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::model::{Hypothesis, ModelParams};

/// Maps an analog sample to a bit.
pub type Quantizer = fn(f64) -> u8;

/// One-bit quantizer: `1` for `x >= 0`, `0` otherwise.
#[inline]
pub fn quantize(x: f64) -> u8 {
    u8::from(x >= 0.0)
}

/// Lower-bidiagonal Cholesky factor `L` of the source covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalFactor {
    diag: Vec<f64>,
    subdiag: Vec<f64>,
}

impl BidiagonalFactor {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn subdiag(&self) -> &[f64] {
        &self.subdiag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Dense `L·Lᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            let below = if i > 0 { self.subdiag[i - 1] } else { 0.0 };
            out[i][i] = below * below + self.diag[i] * self.diag[i];
            if i + 1 < n {
                let off = self.subdiag[i] * self.diag[i];
                out[i][i + 1] = off;
                out[i + 1][i] = off;
            }
        }
        out
    }
}

/// Factors the `n × n` tridiagonal Toeplitz covariance with diagonal `σ_s²`
/// and off-diagonal `r`.
pub fn factor_covariance(params: &ModelParams) -> Result<BidiagonalFactor, Error> {
    factor_tridiagonal_toeplitz(params.n, params.sigma_s2, params.r)
}

pub fn factor_tridiagonal_toeplitz(n: usize, variance: f64, off_diag: f64) -> Result<BidiagonalFactor, Error> {
    let mut diag = Vec::with_capacity(n);
    let mut subdiag = Vec::with_capacity(n.saturating_sub(1));
    let mut radicand = variance;
    for index in 0..n {
        if !(radicand > 0.0) {
            return Err(Error::NonPositiveDefinite { index, radicand });
        }
        let d = radicand.sqrt();
        diag.push(d);
        if index + 1 < n {
            let e = off_diag / d;
            subdiag.push(e);
            radicand = variance - e * e;
        }
    }
    Ok(BidiagonalFactor { diag, subdiag })
}

/// Draws `s = L·g` with `g` iid standard normal.
pub fn sample_signal<R: Rng + ?Sized>(factor: &BidiagonalFactor, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(factor.len());
    sample_signal_into(factor, rng, &mut out);
    out
}

pub fn sample_signal_into<R: Rng + ?Sized>(factor: &BidiagonalFactor, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let mut prev_g = 0.0;
    for (i, &d) in factor.diag.iter().enumerate() {
        let g: f64 = rng.sample(StandardNormal);
        let carried = if i > 0 { factor.subdiag[i - 1] * prev_g } else { 0.0 };
        out.push(carried + d * g);
        prev_g = g;
    }
}

/// `N × n` matrix of one-bit observations, row `k` holding sensor `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    bits: Vec<u8>,
    sensors: usize,
    samples: usize,
}

impl BitMatrix {
    pub fn zeros(sensors: usize, samples: usize) -> Self {
        Self { bits: vec![0; sensors * samples], sensors, samples }
    }

    /// Builds a matrix from rows; every row must have the same length and only
    /// hold 0 or 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, Error> {
        let sensors = rows.len();
        let samples = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(sensors * samples);
        for row in rows {
            let row = row.as_ref();
            if row.len() != samples || row.iter().any(|&b| b > 1) {
                return Err(Error::DimensionMismatch {
                    rows: sensors,
                    cols: row.len(),
                    expected_rows: sensors,
                    expected_cols: samples,
                });
            }
            bits.extend_from_slice(row);
        }
        Ok(Self { bits, sensors, samples })
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn row(&self, k: usize) -> &[u8] {
        &self.bits[k * self.samples..(k + 1) * self.samples]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks_exact(self.samples.max(1)).take(self.sensors)
    }

    pub fn get(&self, k: usize, i: usize) -> u8 {
        self.bits[k * self.samples + i]
    }

    /// Every entry flipped.
    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| b ^ 1).collect(), ..*self }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }
}

/// Scratch buffers for repeated observation draws.
#[derive(Debug, Clone)]
pub struct Observer {
    params: ModelParams,
    factor: BidiagonalFactor,
    noise_std: f64,
    quantizer: Quantizer,
    signal: Vec<f64>,
}

impl Observer {
    pub fn new(params: &ModelParams) -> Result<Self, Error> {
        Self::with_quantizer(params, quantize)
    }

    pub fn with_quantizer(params: &ModelParams, quantizer: Quantizer) -> Result<Self, Error> {
        params.validate().into_result()?;
        Ok(Self {
            params: *params,
            factor: factor_covariance(params)?,
            noise_std: params.sigma2.sqrt(),
            quantizer,
            signal: Vec::with_capacity(params.n),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Draws one observation into `out`, reusing its allocation.
    ///
    /// Under H1 the source is drawn first (`n` normals) and shared by all
    /// sensors; noise follows sensor by sensor (`N·n` normals).
    pub fn observe_into<R: Rng + ?Sized>(&mut self, h: Hypothesis, rng: &mut R, out: &mut BitMatrix) {
        let ModelParams { n, num_sensors, .. } = self.params;
        if out.sensors != num_sensors || out.samples != n {
            *out = BitMatrix::zeros(num_sensors, n);
        }
        match h {
            Hypothesis::H0 => {
                for bit in out.bits.iter_mut() {
                    let w: f64 = rng.sample(StandardNormal);
                    *bit = (self.quantizer)(self.noise_std * w);
                }
            }
            Hypothesis::H1 => {
                sample_signal_into(&self.factor, rng, &mut self.signal);
                for row in out.bits.chunks_exact_mut(n) {
                    for (bit, &s) in row.iter_mut().zip(&self.signal) {
                        let w: f64 = rng.sample(StandardNormal);
                        *bit = (self.quantizer)(s + self.noise_std * w);
                    }
                }
            }
        }
    }

    pub fn observe<R: Rng + ?Sized>(&mut self, h: Hypothesis, rng: &mut R) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.params.num_sensors, self.params.n);
        self.observe_into(h, rng, &mut out);
        out
    }
}

/// Draws one `N × n` observation under hypothesis `h`.
pub fn observe<R: Rng + ?Sized>(params: &ModelParams, h: Hypothesis, rng: &mut R) -> Result<BitMatrix, Error> {
    Ok(Observer::new(params)?.observe(h, rng))
}
