use onebit::analytic::TheoryMode;
use onebit::montecarlo::{Parallelism, RunManifest, Simulator};
use onebit::selfcheck::{CheckResult, SelfCheck};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{parse_config, render_config, NamedRun};
use crate::output::{self, ManifestEntry, ManifestFile};
use crate::preset::Preset;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Usage(format!("unknown format {other:?}, expected csv or json"))),
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Where run configurations come from.
#[derive(Debug, Clone, PartialEq)]
pub enum RunSource {
    Preset(Preset),
    /// A flat config file or a previously written `manifest.json`.
    File(PathBuf),
}

/// Per-invocation overrides applied to every run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<TheoryMode>,
}

pub fn load_runs(source: &RunSource, overrides: Overrides) -> Result<Vec<NamedRun>, CliError> {
    let mut runs = match source {
        RunSource::Preset(p) => p.expand(),
        RunSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            if text.trim_start().starts_with('{') {
                let manifest: ManifestFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))?;
                manifest.runs()
            } else {
                vec![parse_config(&text)?]
            }
        }
    };
    for run in &mut runs {
        if let Some(t) = overrides.trials {
            run.config.trials = t;
        }
        if let Some(s) = overrides.seed {
            run.config.master_seed = s;
        }
        if let Some(m) = overrides.mode {
            run.config.theory_mode = m;
        }
        run.config.validate().map_err(|e| CliError::Usage(format!("{}: {e}", run.label)))?;
    }
    Ok(runs)
}

#[derive(Debug, Clone)]
pub struct RocRequest {
    pub source: RunSource,
    pub out_dir: PathBuf,
    pub format: Format,
    pub overrides: Overrides,
    pub parallelism: Parallelism,
}

/// Simulates every run and writes one curve file per run plus the manifest.
/// Returns the curve file paths.
pub fn cmd_roc(req: &RocRequest) -> Result<Vec<PathBuf>, CliError> {
    let runs = load_runs(&req.source, req.overrides)?;
    fs::create_dir_all(&req.out_dir).map_err(|e| CliError::io(&req.out_dir, e))?;
    let mut written = Vec::with_capacity(runs.len());
    let mut entries = Vec::with_capacity(runs.len());
    for run in &runs {
        let started = Instant::now();
        let sim = Simulator::new(run.config.clone()).parallelism(req.parallelism).run()?;
        let file_name = format!("{}.{}", run.label, req.format.extension());
        let path = req.out_dir.join(&file_name);
        let body = match req.format {
            Format::Csv => output::curve_csv(&sim.compare_theory()),
            Format::Json => to_json(&output::curve_document(&run.label, &sim))?,
        };
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        entries.push(ManifestEntry {
            manifest: RunManifest::new(run.label.clone(), &run.config, started.elapsed().as_secs_f64()),
            output_file: file_name,
            config_text: render_config(run),
        });
        written.push(path);
    }
    let manifest = ManifestFile {
        tool: format!("onebit {}", env!("CARGO_PKG_VERSION")),
        format: req.format.extension().to_owned(),
        runs: entries,
    };
    let manifest_path = req.out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, to_json(&manifest)?).map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct TheoryRequest {
    pub source: RunSource,
    pub out: PathBuf,
    pub format: Format,
    pub overrides: Overrides,
}

/// Writes agreement probability, both moment sets and theoretical rates for
/// every run and threshold.
pub fn cmd_theory(req: &TheoryRequest) -> Result<PathBuf, CliError> {
    let runs = load_runs(&req.source, req.overrides)?;
    let mut rows = Vec::new();
    for run in &runs {
        let direction = run.config.resolved_direction()?;
        rows.extend(output::theory_rows(run, direction));
    }
    let body = match req.format {
        Format::Csv => output::theory_csv(&rows),
        Format::Json => to_json(&rows)?,
    };
    if let Some(parent) = req.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(&req.out, body).map_err(|e| CliError::io(&req.out, e))?;
    Ok(req.out.clone())
}

/// Runs the oracle suite and writes a report. The returned flag is true when
/// every check passed.
pub fn cmd_validate(out: &Path, suite: &SelfCheck) -> Result<(bool, Vec<CheckResult>), CliError> {
    let results = suite.run();
    let report = validation_report(&results, suite.trials);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(out, report).map_err(|e| CliError::io(out, e))?;
    Ok((results.iter().all(|r| r.passed), results))
}

pub fn validation_report(results: &[CheckResult], trials: u64) -> String {
    let mut out = format!("onebit self-check ({trials} trials per hypothesis)\n");
    for r in results {
        let _ = writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(out, "{passed}/{} checks passed", results.len());
    out
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
