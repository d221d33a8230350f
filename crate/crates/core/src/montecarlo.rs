//! Deterministic Monte Carlo ROC engine.
//!
//! Every trial draws from its own ChaCha8 stream: the key comes from the
//! master seed, and the 64-bit stream id is `(trial << 1) | hypothesis`. A
//! trial therefore sees the same random numbers whatever order it runs in and
//! however many workers share the load, so serial and parallel runs are
//! bit-identical.
//!
//! Each trial's statistic is computed once. The per-hypothesis samples are
//! sorted and every threshold reads its tail count with a binary search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, TheoryMode};
use crate::detector::{self, row_agreements};
use crate::error::Error;
use crate::model::{DetectorDirection, Hypothesis, ModelParams};
use crate::roc::{CurveSource, RocCurve, RocPoint};
use crate::signal::{quantize, BitMatrix, Observer, Quantizer};

pub type RandomStream = ChaCha8Rng;

/// Identifier of the stream derivation, echoed in manifests.
pub const RNG_SCHEME: &str = "chacha8-rand_chacha0.9:key=seed_from_u64(master_seed):stream=(trial<<1)|hypothesis";

pub const DEFAULT_TRIALS: u64 = 20_000;
pub const DEFAULT_SEED: u64 = 0x0b17_5e45_2019;

/// Environment variable that caps the worker count.
pub const WORKERS_ENV: &str = "ONEBIT_WORKERS";

/// Derives the independent stream for one trial.
pub fn seed_for_trial(master_seed: u64, h: Hypothesis, trial_index: u64) -> RandomStream {
    StreamFactory::new(master_seed).stream(h, trial_index)
}

/// Caches the key expansion of a master seed.
#[derive(Debug, Clone)]
pub struct StreamFactory {
    key: <ChaCha8Rng as SeedableRng>::Seed,
}

impl StreamFactory {
    pub fn new(master_seed: u64) -> Self {
        Self { key: ChaCha8Rng::seed_from_u64(master_seed).get_seed() }
    }

    /// # Panics
    /// If `trial_index >= 2^63`.
    pub fn stream(&self, h: Hypothesis, trial_index: u64) -> RandomStream {
        assert!(trial_index < 1 << 63, "trial index out of range");
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream((trial_index << 1) | h.tag());
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub trials: u64,
    pub master_seed: u64,
    pub thresholds: Vec<f64>,
    pub theory_mode: TheoryMode,
    /// Detector orientation. `None` derives it from the sign of `r`.
    pub direction: Option<DetectorDirection>,
}

impl RunConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            thresholds: detector::sweep_thresholds(&params),
            theory_mode: TheoryMode::Consistent,
            direction: None,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_mode(mut self, mode: TheoryMode) -> Self {
        self.theory_mode = mode;
        self
    }

    pub fn with_direction(mut self, direction: DetectorDirection) -> Self {
        self.direction = Some(direction);
        self
    }

    pub fn with_thresholds(mut self, thresholds: Vec<f64>) -> Self {
        self.thresholds = thresholds;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.params.validate().into_result()?;
        if self.trials < 1 {
            return Err(Error::NoTrials);
        }
        let increasing = self.thresholds.windows(2).all(|w| w[0] < w[1]);
        if self.thresholds.is_empty() || !increasing || self.thresholds.iter().any(|t| t.is_nan()) {
            return Err(Error::BadThresholds);
        }
        self.resolved_direction()?;
        Ok(())
    }

    pub fn resolved_direction(&self) -> Result<DetectorDirection, Error> {
        match self.direction {
            Some(d) => Ok(d),
            None => DetectorDirection::from_correlation(self.params.r),
        }
    }
}

/// How trials are spread over threads. Results never depend on this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Serial,
    Threads(usize),
    /// All available cores, or the `ONEBIT_WORKERS` override.
    #[default]
    Auto,
}

impl Parallelism {
    pub fn from_env() -> Self {
        match std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) | None => Parallelism::Auto,
            Some(1) => Parallelism::Serial,
            Some(n) => Parallelism::Threads(n),
        }
    }

    fn threads(self) -> usize {
        match self {
            Parallelism::Serial => 1,
            Parallelism::Threads(n) => n.max(1),
            Parallelism::Auto => match Self::from_env() {
                Parallelism::Auto => std::thread::available_parallelism().map_or(1, usize::from),
                other => other.threads(),
            },
        }
    }
}

/// Sorted detection statistics from one hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatisticSample {
    sorted: Vec<u32>,
}

impl StatisticSample {
    pub fn from_unsorted(mut values: Vec<u32>) -> Self {
        values.sort_unstable();
        Self { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.sorted
    }

    /// Fraction of trials on which the detector fires at `eta`.
    pub fn fire_rate(&self, eta: f64, direction: DetectorDirection) -> f64 {
        let count = match direction {
            DetectorDirection::GreaterIsH1 => {
                self.sorted.len() - self.sorted.partition_point(|&y| f64::from(y) < eta)
            }
            DetectorDirection::LessIsH1 => self.sorted.partition_point(|&y| f64::from(y) <= eta),
        };
        count as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().map(|&y| f64::from(y)).sum::<f64>() / self.sorted.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.sorted.iter().map(|&y| (f64::from(y) - m).powi(2)).sum();
        ss / (self.sorted.len() as f64 - 1.0)
    }
}

/// Both hypotheses' samples for one configuration.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub config: RunConfig,
    pub direction: DetectorDirection,
    pub h0: StatisticSample,
    pub h1: StatisticSample,
}

impl SimulationOutput {
    pub fn empirical_curve(&self) -> RocCurve {
        let points = self
            .config
            .thresholds
            .iter()
            .map(|&eta| RocPoint {
                eta,
                pfa: self.h0.fire_rate(eta, self.direction),
                pd: self.h1.fire_rate(eta, self.direction),
            })
            .collect();
        RocCurve { points, source: CurveSource::Empirical, direction: self.direction, trials_used: self.config.trials }
    }

    /// Exact binomial false-alarm rate with the empirical detection rate.
    pub fn hybrid_curve(&self) -> RocCurve {
        let params = &self.config.params;
        let points = self
            .config
            .thresholds
            .iter()
            .map(|&eta| RocPoint {
                eta,
                pfa: analytic::exact_h0_fire_prob(params, eta, self.direction),
                pd: self.h1.fire_rate(eta, self.direction),
            })
            .collect();
        RocCurve { points, source: CurveSource::ExactH0Hybrid, direction: self.direction, trials_used: self.config.trials }
    }

    /// Joins empirical, Gaussian-approximation and exact rates per threshold.
    pub fn compare_theory(&self) -> TheoryComparison {
        self.compare_theory_in(self.config.theory_mode)
    }

    pub fn compare_theory_in(&self, mode: TheoryMode) -> TheoryComparison {
        let params = &self.config.params;
        let h0 = analytic::moments(params, Hypothesis::H0, mode);
        let h1 = analytic::moments(params, Hypothesis::H1, mode);
        let rows = self
            .config
            .thresholds
            .iter()
            .map(|&eta| {
                let pfa_emp = self.h0.fire_rate(eta, self.direction);
                let pd_emp = self.h1.fire_rate(eta, self.direction);
                let pfa_theory = analytic::gaussian_fire_prob(&h0, eta, self.direction)
                    .expect("H0 variance is positive");
                let pd_theory = analytic::gaussian_fire_prob(&h1, eta, self.direction).ok();
                let pfa_exact = analytic::exact_h0_fire_prob(params, eta, self.direction);
                ComparisonRow { eta, pfa_emp, pfa_theory, pfa_exact, pd_emp, pd_theory }
            })
            .collect();
        TheoryComparison { mode, h0_moments: h0, h1_moments: h1, trials: self.config.trials, rows }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub eta: f64,
    pub pfa_emp: f64,
    pub pfa_theory: f64,
    pub pfa_exact: f64,
    pub pd_emp: f64,
    /// `None` when the H1 variance of the chosen mode is negative.
    pub pd_theory: Option<f64>,
}

impl ComparisonRow {
    pub fn negative_variance(&self) -> bool {
        self.pd_theory.is_none()
    }

    pub fn pfa_theory_dev(&self) -> f64 {
        (self.pfa_theory - self.pfa_emp).abs()
    }

    pub fn pfa_exact_dev(&self) -> f64 {
        (self.pfa_exact - self.pfa_emp).abs()
    }

    pub fn pd_theory_dev(&self) -> Option<f64> {
        self.pd_theory.map(|pd| (pd - self.pd_emp).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryComparison {
    pub mode: TheoryMode,
    pub h0_moments: analytic::TheoryMoments,
    pub h1_moments: analytic::TheoryMoments,
    pub trials: u64,
    pub rows: Vec<ComparisonRow>,
}

/// Runs a [`RunConfig`] with a chosen degree of parallelism.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: RunConfig,
    parallelism: Parallelism,
    quantizer: Quantizer,
}

impl Simulator {
    pub fn new(config: RunConfig) -> Self {
        Self { config, parallelism: Parallelism::Auto, quantizer: quantize }
    }

    pub fn parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    /// Replaces the one-bit quantizer. Only useful for fault injection.
    pub fn quantizer(mut self, quantizer: Quantizer) -> Self {
        self.quantizer = quantizer;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Raw per-trial statistics under `h`, in trial order.
    pub fn statistics(&self, h: Hypothesis) -> Result<Vec<u32>, Error> {
        self.config.validate()?;
        let observer = Observer::with_quantizer(&self.config.params, self.quantizer)?;
        let factory = StreamFactory::new(self.config.master_seed);
        let trials = self.config.trials;
        let run_trial = |(obs, bits): &mut (Observer, BitMatrix), t: u64| {
            let mut rng = factory.stream(h, t);
            obs.observe_into(h, &mut rng, bits);
            bits.rows().map(row_agreements).sum::<u32>()
        };
        let init = || (observer.clone(), BitMatrix::zeros(self.config.params.num_sensors, self.config.params.n));
        let threads = self.parallelism.threads();
        if threads <= 1 {
            let mut state = init();
            return Ok((0..trials).map(|t| run_trial(&mut state, t)).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to start worker pool");
        Ok(pool.install(|| (0..trials).into_par_iter().map_init(init, run_trial).collect()))
    }

    pub fn run(&self) -> Result<SimulationOutput, Error> {
        let direction = self.config.resolved_direction()?;
        let h0 = StatisticSample::from_unsorted(self.statistics(Hypothesis::H0)?);
        let h1 = StatisticSample::from_unsorted(self.statistics(Hypothesis::H1)?);
        Ok(SimulationOutput { config: self.config.clone(), direction, h0, h1 })
    }
}

/// Empirical ROC for a configuration, using every available worker.
pub fn estimate_rates(config: &RunConfig) -> Result<RocCurve, Error> {
    Ok(Simulator::new(config.clone()).run()?.empirical_curve())
}

/// Runs the configuration and compares it with theory.
pub fn compare_theory(config: &RunConfig) -> Result<TheoryComparison, Error> {
    Ok(Simulator::new(config.clone()).run()?.compare_theory())
}

/// Everything needed to replay a run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub label: String,
    pub config: RunConfig,
    pub noise_interpretation: String,
    pub noise_std: f64,
    pub noise_variance: f64,
    pub artifact_version: String,
    pub h0_trials: u64,
    pub h1_trials: u64,
    pub wall_clock_seconds: f64,
    pub rng_scheme: String,
}

impl RunManifest {
    pub fn new(label: impl Into<String>, config: &RunConfig, wall_clock_seconds: f64) -> Self {
        Self {
            label: label.into(),
            config: config.clone(),
            noise_interpretation: "noise_std is the standard deviation σ; noise_variance = σ²".to_owned(),
            noise_std: config.params.sigma2.sqrt(),
            noise_variance: config.params.sigma2,
            artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
            h0_trials: config.trials,
            h1_trials: config.trials,
            wall_clock_seconds,
            rng_scheme: RNG_SCHEME.to_owned(),
        }
    }
}
