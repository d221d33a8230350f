//! Agreement-count statistic and threshold decision.
//!
//! Taking the log of the likelihood ratio and dropping terms that do not
//! depend on the data leaves the number of consecutive-in-time agreements,
//! summed over sensors:
//!
//! ```text
//! Y = Σ_k Σ_{i=1}^{n-1} 1[y_{k,i+1} = y_{k,i}]
//! ```
//!
//! With `p > 1/2` large `Y` favours H1; with `p < 1/2` the test flips.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{DetectorDirection, ModelParams};
use crate::signal::BitMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DetectionStatistic(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    H0,
    H1,
}

impl Decision {
    /// `1` when H1 is declared.
    pub fn bit(self) -> u8 {
        match self {
            Decision::H0 => 0,
            Decision::H1 => 1,
        }
    }
}

/// Agreement count of a single bit sequence.
pub fn row_agreements(row: &[u8]) -> u32 {
    row.windows(2).map(|w| u32::from(w[0] == w[1])).sum()
}

/// Detection statistic of an `N × n` observation.
pub fn statistic(bits: &BitMatrix) -> Result<DetectionStatistic, Error> {
    if bits.sensors() < 1 || bits.samples() < 2 {
        return Err(Error::TooSmall { rows: bits.sensors(), cols: bits.samples() });
    }
    Ok(DetectionStatistic(bits.rows().map(row_agreements).sum()))
}

/// Statistic of an observation that must match the model dimensions.
pub fn statistic_for(params: &ModelParams, bits: &BitMatrix) -> Result<DetectionStatistic, Error> {
    if bits.sensors() != params.num_sensors || bits.samples() != params.n {
        return Err(Error::DimensionMismatch {
            rows: bits.sensors(),
            cols: bits.samples(),
            expected_rows: params.num_sensors,
            expected_cols: params.n,
        });
    }
    statistic(bits)
}

/// Threshold test. Ties (`Y = η`) declare H1 in both directions.
pub fn decide(stat: DetectionStatistic, eta: f64, direction: DetectorDirection) -> Decision {
    let y = f64::from(stat.0);
    let fires = match direction {
        DetectorDirection::GreaterIsH1 => y >= eta,
        DetectorDirection::LessIsH1 => y <= eta,
    };
    if fires {
        Decision::H1
    } else {
        Decision::H0
    }
}

/// Half-integer grid `-0.5, 0.5, …, (n-1)N + 0.5`: one threshold between every
/// pair of achievable statistic values plus one beyond each end.
pub fn sweep_thresholds(params: &ModelParams) -> Vec<f64> {
    (0..=params.pair_count() + 1).map(|k| k as f64 - 0.5).collect()
}
