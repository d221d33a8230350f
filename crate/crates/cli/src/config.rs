//! Flat `key = value` run configuration files.
//!
//! ```text
//! # samples per sensor
//! n = 20
//! num_sensors = 1
//! # σ_s², unitless power
//! signal_variance = 1.0
//! # r = E[s_i s_{i+1}], same units as signal_variance
//! lag1_covariance = 0.5
//! # σ, a standard deviation; the noise variance is σ²
//! noise_std = 0.01
//! # per hypothesis
//! trials = 20000
//! seed = 0x0b175e452019
//! # consistent | paper
//! mode = consistent
//! # auto | greater | less
//! direction = auto
//! # sweep | comma-separated thresholds
//! thresholds = sweep
//! ```
//!
//! `#` starts a comment anywhere on a line. Unknown keys are rejected.

use onebit::analytic::TheoryMode;
use onebit::detector::sweep_thresholds;
use onebit::model::{DetectorDirection, ModelParams};
use onebit::montecarlo::{RunConfig, DEFAULT_SEED, DEFAULT_TRIALS};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::CliError;

const KEYS: [&str; 11] = [
    "label",
    "n",
    "num_sensors",
    "signal_variance",
    "lag1_covariance",
    "noise_std",
    "trials",
    "seed",
    "mode",
    "direction",
    "thresholds",
];

/// A labelled run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedRun {
    pub label: String,
    pub config: RunConfig,
}

pub fn parse_mode(s: &str) -> Result<TheoryMode, CliError> {
    match s {
        "paper" | "paper-literal" => Ok(TheoryMode::PaperLiteral),
        "consistent" => Ok(TheoryMode::Consistent),
        other => Err(CliError::Usage(format!("unknown mode {other:?}, expected paper or consistent"))),
    }
}

pub fn mode_name(mode: TheoryMode) -> &'static str {
    match mode {
        TheoryMode::PaperLiteral => "paper",
        TheoryMode::Consistent => "consistent",
    }
}

fn parse_seed(s: &str) -> Result<u64, CliError> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    parsed.map_err(|_| CliError::Usage(format!("seed {s:?} is not a 64-bit integer")))
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse {s:?}")))
}

/// Parses a configuration file body.
pub fn parse_config(text: &str) -> Result<NamedRun, CliError> {
    let mut values = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if values.insert(key.to_owned(), value.trim().to_owned()).is_some() {
            return Err(CliError::Usage(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    let get = |k: &str| values.get(k).map(String::as_str);
    let required = |k: &str| get(k).ok_or_else(|| CliError::Usage(format!("missing key {k:?}")));

    let n = parse_num("n", required("n")?)?;
    let num_sensors = get("num_sensors").map_or(Ok(1), |v| parse_num("num_sensors", v))?;
    let sigma_s2 = get("signal_variance").map_or(Ok(1.0), |v| parse_num("signal_variance", v))?;
    let r = parse_num("lag1_covariance", required("lag1_covariance")?)?;
    let noise_std: f64 = parse_num("noise_std", required("noise_std")?)?;
    let params = ModelParams { n, num_sensors, sigma_s2, r, sigma2: noise_std * noise_std };

    let trials: u64 = get("trials").map_or(Ok(DEFAULT_TRIALS), |v| parse_num("trials", v))?;
    let master_seed = get("seed").map_or(Ok(DEFAULT_SEED), parse_seed)?;
    let theory_mode = get("mode").map_or(Ok(TheoryMode::Consistent), parse_mode)?;
    let direction = match get("direction").unwrap_or("auto") {
        "auto" => None,
        "greater" => Some(DetectorDirection::GreaterIsH1),
        "less" => Some(DetectorDirection::LessIsH1),
        other => return Err(CliError::Usage(format!("unknown direction {other:?}"))),
    };
    let thresholds = match get("thresholds").unwrap_or("sweep") {
        "sweep" => sweep_thresholds(&params),
        list => list
            .split(',')
            .map(|t| parse_num::<f64>("thresholds", t.trim()))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let label = get("label").unwrap_or("run").to_owned();
    Ok(NamedRun { label, config: RunConfig { params, trials, master_seed, thresholds, theory_mode, direction } })
}

/// Renders a configuration in the file format accepted by [`parse_config`].
pub fn render_config(run: &NamedRun) -> String {
    let c = &run.config;
    let mut out = String::new();
    let _ = writeln!(out, "label = {}", run.label);
    let _ = writeln!(out, "n = {}", c.params.n);
    let _ = writeln!(out, "num_sensors = {}", c.params.num_sensors);
    let _ = writeln!(out, "signal_variance = {:?}", c.params.sigma_s2);
    let _ = writeln!(out, "lag1_covariance = {:?}", c.params.r);
    let _ = writeln!(out, "noise_std = {:?}  # noise variance {:?}", c.params.sigma2.sqrt(), c.params.sigma2);
    let _ = writeln!(out, "trials = {}", c.trials);
    let _ = writeln!(out, "seed = {:#x}", c.master_seed);
    let _ = writeln!(out, "mode = {}", mode_name(c.theory_mode));
    let direction = match c.direction {
        None => "auto",
        Some(DetectorDirection::GreaterIsH1) => "greater",
        Some(DetectorDirection::LessIsH1) => "less",
    };
    let _ = writeln!(out, "direction = {direction}");
    if c.thresholds == sweep_thresholds(&c.params) {
        let _ = writeln!(out, "thresholds = sweep");
    } else {
        let list: Vec<String> = c.thresholds.iter().map(|t| format!("{t:?}")).collect();
        let _ = writeln!(out, "thresholds = {}", list.join(", "));
    }
    out
}
