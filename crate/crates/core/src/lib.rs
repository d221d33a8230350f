//! One-bit spectrum sensing with a likelihood-ratio detector.
//!
//! A source with lag-1 correlated Gaussian samples is observed by `N` sensors
//! through additive noise and a one-bit comparator. Because the source is
//! correlated only between neighbouring samples, the likelihood ratio reduces
//! to counting how often consecutive bits agree. This crate provides:
//!
//! * [`model`]: parameters and their validation,
//! * [`signal`]: source sampling, noise and quantization,
//! * [`detector`]: the agreement-count statistic and threshold test,
//! * [`analytic`]: agreement probability, moments, Gaussian-approximation and
//!   exact false-alarm rates,
//! * [`montecarlo`]: a deterministic parallel ROC engine,
//! * [`selfcheck`]: the built-in oracle suite.
//!
//! ```
//! use onebit::prelude::*;
//!
//! let params = ModelParams::with_noise_std(20, 1, 1.0, 0.5, 1e-2)?;
//! let p = agreement_prob(&params);
//! assert!((p.p - 0.66665).abs() < 1e-4);
//!
//! let curve = estimate_rates(&RunConfig::new(params).with_trials(2_000))?;
//! assert!(curve.is_monotone());
//! # Ok::<(), onebit::Error>(())
//! ```

pub mod analytic;
pub mod detector;
mod error;
pub mod model;
pub mod montecarlo;
pub mod roc;
pub mod selfcheck;
pub mod signal;

pub use error::Error;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/detector.md")]
    mod detector {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod montecarlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

pub mod prelude {
    pub use crate::analytic::{agreement_prob, exact_h0_tail, moments, q_function, theory_roc, TheoryMode};
    pub use crate::detector::{decide, statistic, sweep_thresholds, Decision, DetectionStatistic};
    pub use crate::model::{DetectorDirection, Hypothesis, ModelParams};
    pub use crate::montecarlo::{estimate_rates, Parallelism, RunConfig, Simulator};
    pub use crate::roc::{RocCurve, RocPoint};
    pub use crate::signal::{observe, quantize, BitMatrix};
    pub use crate::Error;
}
