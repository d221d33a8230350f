//! ROC curve container shared by the theory and Monte Carlo paths.

use serde::{Deserialize, Serialize};

use crate::model::DetectorDirection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub eta: f64,
    pub pfa: f64,
    pub pd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSource {
    Empirical,
    TheoryPaperLiteral,
    TheoryConsistent,
    /// Exact binomial false-alarm rate paired with the empirical detection rate.
    ExactH0Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub source: CurveSource,
    pub direction: DetectorDirection,
    /// Trials per hypothesis; zero for purely analytic curves.
    pub trials_used: u64,
}

impl RocCurve {
    /// True when both rates move monotonically with `η` in the direction the
    /// detector implies: non-increasing for `GreaterIsH1`, non-decreasing for
    /// `LessIsH1`.
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| match self.direction {
            DetectorDirection::GreaterIsH1 => w[1].pfa <= w[0].pfa && w[1].pd <= w[0].pd,
            DetectorDirection::LessIsH1 => w[1].pfa >= w[0].pfa && w[1].pd >= w[0].pd,
        })
    }

    /// The point whose false-alarm rate is closest to `target`; ties go to the
    /// smaller threshold.
    pub fn nearest_pfa(&self, target: f64) -> Option<&RocPoint> {
        self.points.iter().min_by(|a, b| {
            (a.pfa - target).abs().total_cmp(&(b.pfa - target).abs())
        })
    }

    /// Trapezoidal area under the curve in the (Pfa, Pd) plane.
    pub fn auc(&self) -> f64 {
        let mut pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.pfa, p.pd)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
    }
}
