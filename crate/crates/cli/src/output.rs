//! CSV and JSON writers.

use onebit::analytic::{self, TheoryMode};
use onebit::model::{DetectorDirection, Hypothesis};
use onebit::montecarlo::{ComparisonRow, RunManifest, SimulationOutput, TheoryComparison};
use onebit::roc::RocCurve;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::config::{mode_name, NamedRun};

pub const CURVE_HEADER: &str = "eta,pfa_emp,pd_emp,pfa_theory,pd_theory,pfa_exact,mode";

pub const THEORY_HEADER: &str = "run,n,num_sensors,signal_variance,lag1_covariance,noise_variance,p,rho,mode,\
mean_h0,var_h0,mean_h1,var_h1,h1_variance_flag,eta,pfa_theory,pd_theory,pfa_exact";

/// Formats a float with 9 significant digits, `%g` style.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{x:.*}", (8 - exp) as usize);
        trim_zeros(&fixed).to_owned()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV row per threshold for the run's theory mode. When that mode's H1
/// variance is negative the `pd_theory` cell is empty and the mode cell reads
/// `paper-negvar`.
pub fn curve_csv(cmp: &TheoryComparison) -> String {
    let mut out = String::with_capacity(64 * (cmp.rows.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for row in &cmp.rows {
        let (pd_theory, mode) = match row.pd_theory {
            Some(pd) => (fmt_sig9(pd), mode_name(cmp.mode).to_owned()),
            None => (String::new(), format!("{}-negvar", mode_name(cmp.mode))),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sig9(row.eta),
            fmt_sig9(row.pfa_emp),
            fmt_sig9(row.pd_emp),
            fmt_sig9(row.pfa_theory),
            pd_theory,
            fmt_sig9(row.pfa_exact),
            mode
        );
    }
    out
}

/// A theory curve, or the reason it does not exist.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryCurve {
    Curve(RocCurve),
    NegativeVariance { h1_variance: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveDocument {
    pub label: String,
    pub p: f64,
    pub rho: f64,
    pub empirical: RocCurve,
    pub exact_h0_hybrid: RocCurve,
    pub theory_consistent: TheoryCurve,
    pub theory_paper_literal: TheoryCurve,
    pub comparison: TheoryComparison,
}

pub fn curve_document(label: &str, out: &SimulationOutput) -> CurveDocument {
    let params = &out.config.params;
    let agreement = analytic::agreement_prob(params);
    let theory = |mode| match analytic::theory_roc(params, mode, out.direction, &out.config.thresholds) {
        Ok(curve) => TheoryCurve::Curve(curve),
        Err(_) => TheoryCurve::NegativeVariance {
            h1_variance: analytic::moments(params, Hypothesis::H1, mode).variance,
        },
    };
    CurveDocument {
        label: label.to_owned(),
        p: agreement.p,
        rho: agreement.rho,
        empirical: out.empirical_curve(),
        exact_h0_hybrid: out.hybrid_curve(),
        theory_consistent: theory(TheoryMode::Consistent),
        theory_paper_literal: theory(TheoryMode::PaperLiteral),
        comparison: out.compare_theory(),
    }
}

/// The single manifest written into every output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub tool: String,
    pub format: String,
    pub runs: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub manifest: RunManifest,
    pub output_file: String,
    /// The same configuration in the flat text format.
    pub config_text: String,
}

impl ManifestFile {
    pub fn runs(&self) -> Vec<NamedRun> {
        self.runs
            .iter()
            .map(|e| NamedRun { label: e.manifest.label.clone(), config: e.manifest.config.clone() })
            .collect()
    }
}

/// Rows of the theory table for one run, both modes.
pub fn theory_rows(run: &NamedRun, direction: DetectorDirection) -> Vec<TheoryRow> {
    let params = &run.config.params;
    let agreement = analytic::agreement_prob(params);
    let mut rows = Vec::new();
    for mode in [TheoryMode::PaperLiteral, TheoryMode::Consistent] {
        let h0 = analytic::moments(params, Hypothesis::H0, mode);
        let h1 = analytic::moments(params, Hypothesis::H1, mode);
        for &eta in &run.config.thresholds {
            rows.push(TheoryRow {
                run: run.label.clone(),
                n: params.n,
                num_sensors: params.num_sensors,
                signal_variance: params.sigma_s2,
                lag1_covariance: params.r,
                noise_variance: params.sigma2,
                p: agreement.p,
                rho: agreement.rho,
                mode,
                mean_h0: h0.mean,
                var_h0: h0.variance,
                mean_h1: h1.mean,
                var_h1: h1.variance,
                h1_variance_negative: h1.variance < 0.0,
                eta,
                pfa_theory: analytic::gaussian_fire_prob(&h0, eta, direction).expect("H0 variance is positive"),
                pd_theory: analytic::gaussian_fire_prob(&h1, eta, direction).ok(),
                pfa_exact: analytic::exact_h0_fire_prob(params, eta, direction),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryRow {
    pub run: String,
    pub n: usize,
    pub num_sensors: usize,
    pub signal_variance: f64,
    pub lag1_covariance: f64,
    pub noise_variance: f64,
    pub p: f64,
    pub rho: f64,
    pub mode: TheoryMode,
    pub mean_h0: f64,
    pub var_h0: f64,
    pub mean_h1: f64,
    pub var_h1: f64,
    pub h1_variance_negative: bool,
    pub eta: f64,
    pub pfa_theory: f64,
    pub pd_theory: Option<f64>,
    pub pfa_exact: f64,
}

pub fn theory_csv(rows: &[TheoryRow]) -> String {
    let mut out = String::new();
    out.push_str(THEORY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.n,
            r.num_sensors,
            fmt_sig9(r.signal_variance),
            fmt_sig9(r.lag1_covariance),
            fmt_sig9(r.noise_variance),
            fmt_sig9(r.p),
            fmt_sig9(r.rho),
            mode_name(r.mode),
            fmt_sig9(r.mean_h0),
            fmt_sig9(r.var_h0),
            fmt_sig9(r.mean_h1),
            fmt_sig9(r.var_h1),
            if r.h1_variance_negative { "NEGATIVE" } else { "OK" },
            fmt_sig9(r.eta),
            fmt_sig9(r.pfa_theory),
            r.pd_theory.map(fmt_sig9).unwrap_or_default(),
            fmt_sig9(r.pfa_exact),
        );
    }
    out
}

/// Absolute deviations for one comparison row, for reports.
pub fn deviations(row: &ComparisonRow) -> (f64, f64, Option<f64>) {
    (row.pfa_theory_dev(), row.pfa_exact_dev(), row.pd_theory_dev())
}
