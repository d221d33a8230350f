//! Model parameters shared by every other module.
//!
//! A sensing run is described by the per-sensor sample count `n`, the number
//! of sensors `N`, the source variance `σ_s²`, the lag-1 source covariance
//! `r = E[s_i s_{i+1}]` and the noise variance `σ²`. The source covariance is
//! the `n × n` tridiagonal Toeplitz matrix with `σ_s²` on the diagonal and `r`
//! on the first off-diagonals.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Error;

/// Full parameterization of the one-bit sensing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Samples per sensor.
    pub n: usize,
    /// Number of sensors observing the common source.
    pub num_sensors: usize,
    /// Source variance `σ_s²`.
    pub sigma_s2: f64,
    /// Lag-1 source covariance `r`.
    pub r: f64,
    /// Noise variance `σ²`.
    pub sigma2: f64,
}

impl ModelParams {
    /// Builds parameters and rejects any set with a hard violation.
    ///
    /// `r = 0` is accepted (it is only a warning, see [`ModelParams::validate`]).
    pub fn new(n: usize, num_sensors: usize, sigma_s2: f64, r: f64, sigma2: f64) -> Result<Self, Error> {
        let params = Self { n, num_sensors, sigma_s2, r, sigma2 };
        params.validate().into_result()?;
        Ok(params)
    }

    /// Single-sensor parameters with the noise given as a standard deviation.
    pub fn with_noise_std(n: usize, num_sensors: usize, sigma_s2: f64, r: f64, noise_std: f64) -> Result<Self, Error> {
        Self::new(n, num_sensors, sigma_s2, r, noise_std * noise_std)
    }

    /// Checks every model invariant and collects the results.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n < 2 {
            report.violations.push(Violation::TooFewSamples { n: self.n });
        }
        if self.num_sensors < 1 {
            report.violations.push(Violation::NoSensors);
        }
        if !(self.sigma_s2.is_finite() && self.sigma_s2 > 0.0) {
            report.violations.push(Violation::NonPositiveSignalVariance { sigma_s2: self.sigma_s2 });
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            report.violations.push(Violation::NonPositiveNoiseVariance { sigma2: self.sigma2 });
        }
        if !self.r.is_finite() {
            report.violations.push(Violation::NonFiniteCorrelation);
        } else if !(self.sigma_s2 > self.r.abs() * pd_bound_factor(self.n)) {
            report.violations.push(Violation::NotPositiveDefinite { sigma_s2: self.sigma_s2, r: self.r });
        }
        if self.r == 0.0 {
            report.warnings.push(Warning::Uncorrelated);
        }
        report
    }

    /// Smallest eigenvalue of the source covariance,
    /// `σ_s² - 2|r|·cos(π/(n+1))`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.sigma_s2 - self.r.abs() * pd_bound_factor(self.n)
    }

    /// Variance of each analog sample `z = s + w` under H1.
    pub fn total_variance(&self) -> f64 {
        self.sigma_s2 + self.sigma2
    }

    /// Normalized correlation of two consecutive analog samples under H1.
    pub fn rho(&self) -> f64 {
        self.r / self.total_variance()
    }

    /// Number of consecutive-pair indicators summed into the statistic.
    pub fn pair_count(&self) -> usize {
        (self.n - 1) * self.num_sensors
    }
}

/// `2·cos(π/(n+1))`: the tridiagonal Toeplitz covariance has eigenvalues
/// `σ_s² + 2r·cos(kπ/(n+1))`, `k = 1..n`, so it is positive definite iff
/// `σ_s² > |r|·pd_bound_factor(n)`. The factor approaches 2 from below.
pub fn pd_bound_factor(n: usize) -> f64 {
    2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos()
}

/// Outcome of [`ModelParams::validate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Vec<Warning>, Error> {
        if self.violations.is_empty() {
            Ok(self.warnings)
        } else {
            Err(Error::InvalidParams(self.violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewSamples { n: usize },
    NoSensors,
    NonPositiveSignalVariance { sigma_s2: f64 },
    NonPositiveNoiseVariance { sigma2: f64 },
    NonFiniteCorrelation,
    /// `σ_s² > 2|r|·cos(π/(n+1))` does not hold.
    NotPositiveDefinite { sigma_s2: f64, r: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewSamples { n } => write!(f, "n = {n} but at least 2 samples are required"),
            Violation::NoSensors => write!(f, "at least one sensor is required"),
            Violation::NonPositiveSignalVariance { sigma_s2 } => {
                write!(f, "signal variance must be positive, got {sigma_s2}")
            }
            Violation::NonPositiveNoiseVariance { sigma2 } => {
                write!(f, "noise variance must be positive, got {sigma2}")
            }
            Violation::NonFiniteCorrelation => write!(f, "lag-1 covariance must be finite"),
            Violation::NotPositiveDefinite { sigma_s2, r } => write!(
                f,
                "covariance not positive definite: need signal variance > 2|r|cos(pi/(n+1)), got {sigma_s2} with r = {r}"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warning {
    /// `r = 0`: one-bit samples carry no information about the source.
    Uncorrelated,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Uncorrelated => write!(f, "no correlation, detector uninformative"),
        }
    }
}

/// Which hypothesis generated an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Noise only.
    H0,
    /// Source plus noise.
    H1,
}

impl Hypothesis {
    /// Stable numeric tag, used when deriving random streams.
    pub fn tag(self) -> u64 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// Which side of the threshold declares the source present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorDirection {
    /// Declare H1 when `Y >= η` (positive lag-1 covariance).
    GreaterIsH1,
    /// Declare H1 when `Y <= η` (negative lag-1 covariance).
    LessIsH1,
}

impl DetectorDirection {
    /// Direction implied by the sign of `r`. Fails for `r = 0`, where agreement
    /// counts carry no information.
    pub fn from_correlation(r: f64) -> Result<Self, Error> {
        if r > 0.0 {
            Ok(DetectorDirection::GreaterIsH1)
        } else if r < 0.0 {
            Ok(DetectorDirection::LessIsH1)
        } else {
            Err(Error::Uninformative)
        }
    }
}
