//! Built-in oracle suite.
//!
//! Each check pairs a production code path with an independent reference:
//!
//! * `orthant`: closed-form agreement probability vs. adaptive quadrature of
//!   the orthant integral,
//! * `h0-binomial`: simulated false-alarm rates vs. the exact binomial tail,
//! * `determinism`: serial vs. multi-threaded replay of the same run,
//! * `detector-enumeration`: the threshold test over every small bit matrix
//!   vs. a literal double sum.

use serde::Serialize;

use crate::analytic;
use crate::detector::{decide, statistic, Decision};
use crate::model::{DetectorDirection, Hypothesis, ModelParams};
use crate::montecarlo::{Parallelism, RunConfig, Simulator, DEFAULT_SEED};
use crate::signal::{quantize, BitMatrix, Quantizer};

pub const ORTHANT_TOL: f64 = 1e-6;
pub const ORTHANT_RHO_GRID: [f64; 6] = [-0.49, -0.25, 0.0, 0.1, 0.25, 0.49];
pub const ORTHANT_NOISE_GRID: [f64; 3] = [1e-4, 1e-2, 1.0];
/// Master seeds averaged by the binomial check.
pub const BINOMIAL_SEEDS: [u64; 5] = [DEFAULT_SEED, 1, 2, 3, 4];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelfCheck {
    pub trials: u64,
    pub quantizer: Quantizer,
}

impl Default for SelfCheck {
    fn default() -> Self {
        Self { trials: 20_000, quantizer: quantize }
    }
}

impl SelfCheck {
    /// Reduced suite with 2000 trials per hypothesis.
    pub fn quick() -> Self {
        Self { trials: 2_000, ..Self::default() }
    }

    pub fn run(&self) -> Vec<CheckResult> {
        vec![check_orthant(), self.check_h0_binomial(), self.check_determinism(), check_detector_enumeration()]
    }

    fn check_h0_binomial(&self) -> CheckResult {
        let name = "h0-binomial";
        let params = ModelParams { n: 20, num_sensors: 1, sigma_s2: 1.0, r: 0.5, sigma2: 1e-4 };
        let base = RunConfig::new(params).with_trials(self.trials);
        let direction = DetectorDirection::GreaterIsH1;
        let mut sums = vec![0.0; base.thresholds.len()];
        for &seed in &BINOMIAL_SEEDS {
            let sim = Simulator::new(base.clone().with_seed(seed)).quantizer(self.quantizer);
            let out = match sim.run() {
                Ok(out) => out,
                Err(e) => return CheckResult { name, passed: false, detail: e.to_string() },
            };
            for (acc, &eta) in sums.iter_mut().zip(&base.thresholds) {
                *acc += out.h0.fire_rate(eta, direction);
            }
        }
        // worst (eta, mean pfa, |deviation| / band)
        let mut worst = (f64::NAN, f64::NAN, 0.0);
        let mut failures = 0;
        for (sum, &eta) in sums.iter().zip(&base.thresholds) {
            let mean = sum / BINOMIAL_SEEDS.len() as f64;
            let q = analytic::exact_h0_fire_prob(&params, eta, direction);
            let band = 3.0 * (q * (1.0 - q) / self.trials as f64).sqrt();
            let dev = (mean - q).abs();
            if dev > band {
                failures += 1;
            }
            let ratio = if band > 0.0 { dev / band } else if dev > 0.0 { f64::INFINITY } else { 0.0 };
            if ratio >= worst.2 {
                worst = (eta, mean, ratio);
            }
        }
        CheckResult {
            name,
            passed: failures == 0,
            detail: format!(
                "{failures} of {} thresholds outside the 3-sigma band; worst eta={} (mean pfa {:.6}, {:.2} of band)",
                sums.len(),
                worst.0,
                worst.1,
                worst.2
            ),
        }
    }

    fn check_determinism(&self) -> CheckResult {
        let name = "determinism";
        let params = ModelParams { n: 20, num_sensors: 3, sigma_s2: 1.0, r: 0.5, sigma2: 1e-4 };
        let cfg = RunConfig::new(params).with_trials(self.trials.min(5_000));
        let run = |par| {
            Simulator::new(cfg.clone())
                .parallelism(par)
                .quantizer(self.quantizer)
                .run()
                .map(|o| o.empirical_curve())
        };
        match (run(Parallelism::Serial), run(Parallelism::Threads(8))) {
            (Ok(a), Ok(b)) => {
                let same = a.points.iter().zip(&b.points).all(|(x, y)| {
                    x.pfa.to_bits() == y.pfa.to_bits() && x.pd.to_bits() == y.pd.to_bits()
                });
                CheckResult { name, passed: same, detail: format!("serial vs 8 workers, {} thresholds", a.points.len()) }
            }
            (Err(e), _) | (_, Err(e)) => CheckResult { name, passed: false, detail: e.to_string() },
        }
    }
}

fn check_orthant() -> CheckResult {
    let mut worst: f64 = 0.0;
    for rho in ORTHANT_RHO_GRID {
        for sigma2 in ORTHANT_NOISE_GRID {
            let c = 1.0 + sigma2;
            let params = ModelParams { n: 2, num_sensors: 1, sigma_s2: 1.0, r: rho * c, sigma2 };
            let closed = analytic::agreement_prob(&params).p;
            let quad = match analytic::orthant_prob_quadrature(c, rho * c, c) {
                Ok(v) => 2.0 * v,
                Err(e) => return CheckResult { name: "orthant", passed: false, detail: e.to_string() },
            };
            worst = worst.max((closed - quad).abs());
        }
    }
    CheckResult {
        name: "orthant",
        passed: worst <= ORTHANT_TOL,
        detail: format!("max |closed - quadrature| = {worst:.3e} (tol {ORTHANT_TOL:e})"),
    }
}

/// Literal double sum and threshold, written independently of `detector`.
pub fn reference_decision(rows: &[Vec<u8>], eta: f64, direction: DetectorDirection) -> Decision {
    let mut y = 0u32;
    for row in rows {
        for i in 0..row.len() - 1 {
            if row[i + 1] == row[i] {
                y += 1;
            }
        }
    }
    let fire = match direction {
        DetectorDirection::GreaterIsH1 => y as f64 >= eta,
        DetectorDirection::LessIsH1 => y as f64 <= eta,
    };
    if fire {
        Decision::H1
    } else {
        Decision::H0
    }
}

/// Enumerates all `2^(n·N)` bit matrices and counts disagreements between
/// [`decide`]`∘`[`statistic`] and [`reference_decision`] over integer and
/// half-integer thresholds in both directions.
pub fn enumerate_detector(n: usize, sensors: usize) -> (u64, u64) {
    let cells = n * sensors;
    let mut checked = 0;
    let mut mismatches = 0;
    for mask in 0u64..(1 << cells) {
        let rows: Vec<Vec<u8>> = (0..sensors)
            .map(|k| (0..n).map(|i| ((mask >> (k * n + i)) & 1) as u8).collect())
            .collect();
        let bits = BitMatrix::from_rows(&rows).expect("rectangular");
        let stat = statistic(&bits).expect("valid dimensions");
        let max = ((n - 1) * sensors) as i64;
        for twice_eta in -1..=(2 * max + 1) {
            let eta = twice_eta as f64 / 2.0;
            for direction in [DetectorDirection::GreaterIsH1, DetectorDirection::LessIsH1] {
                checked += 1;
                if decide(stat, eta, direction) != reference_decision(&rows, eta, direction) {
                    mismatches += 1;
                }
            }
        }
    }
    (checked, mismatches)
}

fn check_detector_enumeration() -> CheckResult {
    let mut checked = 0;
    let mut mismatches = 0;
    for (n, sensors) in [(3, 1), (4, 1), (3, 2)] {
        let (c, m) = enumerate_detector(n, sensors);
        checked += c;
        mismatches += m;
    }
    CheckResult {
        name: "detector-enumeration",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in {checked} decisions"),
    }
}

/// Mean and unbiased variance of `Y` under H1 for a configuration.
pub fn h1_sample_moments(config: &RunConfig) -> Result<(f64, f64), crate::Error> {
    let stats = Simulator::new(config.clone()).statistics(Hypothesis::H1)?;
    let t = stats.len() as f64;
    let mean = stats.iter().map(|&y| f64::from(y)).sum::<f64>() / t;
    let var = stats.iter().map(|&y| (f64::from(y) - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok((mean, var))
}
