//! Reproduction presets for the single-sensor and sensor-network ROC
//! experiments: `n = 20`, `σ_s² = 1`, noise standard deviation `1e-2`,
//! 20000 trials per hypothesis.

use onebit::model::ModelParams;
use onebit::montecarlo::RunConfig;

use crate::config::NamedRun;
use crate::CliError;

pub const SAMPLES: usize = 20;
pub const SIGNAL_VARIANCE: f64 = 1.0;
pub const NOISE_STD: f64 = 1e-2;
pub const TRIALS: u64 = 20_000;

pub const FIG2_CORRELATIONS: [f64; 3] = [0.1, 0.3, 0.5];
pub const FIG3_SENSORS: [usize; 3] = [1, 2, 3];
pub const FIG3_CORRELATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// One sensor, `r ∈ {0.1, 0.3, 0.5}`.
    Fig2,
    /// `r = 0.5`, `N ∈ {1, 2, 3}`.
    Fig3,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(CliError::Usage(format!("unknown preset {other:?}, expected fig2 or fig3"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn expand(self) -> Vec<NamedRun> {
        let run = |label: String, r: f64, sensors: usize| {
            let params = ModelParams {
                n: SAMPLES,
                num_sensors: sensors,
                sigma_s2: SIGNAL_VARIANCE,
                r,
                sigma2: NOISE_STD * NOISE_STD,
            };
            NamedRun { label, config: RunConfig::new(params).with_trials(TRIALS) }
        };
        match self {
            Preset::Fig2 => FIG2_CORRELATIONS.iter().map(|&r| run(format!("fig2_r{r}"), r, 1)).collect(),
            Preset::Fig3 => {
                FIG3_SENSORS.iter().map(|&k| run(format!("fig3_N{k}"), FIG3_CORRELATION, k)).collect()
            }
        }
    }
}
