//! Metric-depth scorecard, distance-binned accuracy, and the training losses
//! exposed as scoring utilities.

mod binned;
mod loss;

pub use binned::{binned_accuracy, BinStats, BinnedReport};
pub use loss::{bce_hole_loss, disparity_l1, grad_loss, l1_normalized_loss, total_loss};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ensure_same_dims, DepthMap};

/// δ thresholds are `1.25^t` for these exponents.
pub const DELTA_BASE: f64 = 1.25;

/// Which pixels a report is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidPolicy {
    /// Pixels valid in both maps.
    #[default]
    Intersection,
    /// All ground-truth-valid pixels; missing predictions fail every δ test
    /// and are left out of the error means.
    GtValidStrict,
}

impl fmt::Display for ValidPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidPolicy::Intersection => "intersection",
            ValidPolicy::GtValidStrict => "gt-valid-strict",
        })
    }
}

impl FromStr for ValidPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(ValidPolicy::Intersection),
            "gt-valid-strict" | "strict" => Ok(ValidPolicy::GtValidStrict),
            other => Err(Error::Unknown {
                kind: "policy",
                name: other.to_owned(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub l1: f64,
    pub rmse: f64,
    pub abs_rel: f64,
    pub delta_half: f64,
    pub delta_one: f64,
    pub coverage: f64,
    pub n_pixels: usize,
    pub policy: ValidPolicy,
}

/// Fraction-free δ test: `max(p/g, g/p) < 1.25^t`.
pub fn within_delta(pred: f64, gt: f64, exponent: f64) -> bool {
    (pred / gt).max(gt / pred) < DELTA_BASE.powf(exponent)
}

/// L1, RMSE, AbsRel (meters / unitless), δ₀.₅, δ₁ and coverage of `pred`
/// against `gt`.
pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap, policy: ValidPolicy) -> Result<MetricReport> {
    ensure_same_dims(pred.dims(), gt.dims())?;
    let mut gt_valid = 0usize;
    let mut both = 0usize;
    let (mut abs, mut sq, mut rel) = (0.0, 0.0, 0.0);
    let (mut d_half, mut d_one) = (0usize, 0usize);
    for i in 0..gt.len() {
        let Some(z) = gt.get(i) else { continue };
        gt_valid += 1;
        let Some(p) = pred.get(i) else { continue };
        both += 1;
        let e = p - z;
        abs += e.abs();
        sq += e * e;
        rel += e.abs() / z;
        d_half += usize::from(within_delta(p, z, 0.5));
        d_one += usize::from(within_delta(p, z, 1.0));
    }
    if both == 0 {
        return Err(Error::NoValidPixels("metric evaluation set"));
    }
    let n = both as f64;
    let delta_denom = match policy {
        ValidPolicy::Intersection => n,
        ValidPolicy::GtValidStrict => gt_valid as f64,
    };
    Ok(MetricReport {
        l1: abs / n,
        rmse: (sq / n).sqrt(),
        abs_rel: rel / n,
        delta_half: d_half as f64 / delta_denom,
        delta_one: d_one as f64 / delta_denom,
        coverage: n / gt_valid as f64,
        n_pixels: match policy {
            ValidPolicy::Intersection => both,
            ValidPolicy::GtValidStrict => gt_valid,
        },
        policy,
    })
}

/// Column names of the scorecard, in emission order.
pub const METRIC_COLUMNS: [&str; 5] = ["L1", "RMSE", "AbsRel", "delta_0.5", "delta_1"];

impl MetricReport {
    pub fn metric_values(&self) -> [f64; 5] {
        [self.l1, self.rmse, self.abs_rel, self.delta_half, self.delta_one]
    }

    /// Unweighted mean of per-sample reports (coverage and counts included).
    pub fn mean_of(reports: &[MetricReport]) -> Option<MetricReport> {
        let first = reports.first()?;
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(MetricReport {
            l1: avg(|r| r.l1),
            rmse: avg(|r| r.rmse),
            abs_rel: avg(|r| r.abs_rel),
            delta_half: avg(|r| r.delta_half),
            delta_one: avg(|r| r.delta_one),
            coverage: avg(|r| r.coverage),
            n_pixels: reports.iter().map(|r| r.n_pixels).sum(),
            policy: first.policy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn perfect_prediction() {
        let gt = DepthMap::from_meters(3, 2, vec![1.0, 2.0, 3.0, 0.5, 0.7, 9.0]).unwrap();
        let r = depth_metrics(&gt, &gt, ValidPolicy::Intersection).unwrap();
        assert_eq!((r.l1, r.rmse, r.abs_rel), (0.0, 0.0, 0.0));
        assert_eq!((r.delta_half, r.delta_one, r.coverage), (1.0, 1.0, 1.0));
        assert_eq!(r.n_pixels, 6);
    }

    #[test]
    fn uniform_offset() {
        let gt = DepthMap::constant(4, 4, 1.0).unwrap();
        let pred = DepthMap::constant(4, 4, 1.5).unwrap();
        let r = depth_metrics(&pred, &gt, ValidPolicy::Intersection).unwrap();
        assert!(close(r.l1, 0.5) && close(r.rmse, 0.5) && close(r.abs_rel, 0.5));
        assert_eq!((r.delta_half, r.delta_one), (0.0, 0.0));
    }

    #[test]
    fn ten_percent_scale() {
        let gt = DepthMap::from_meters(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let pred = gt.scaled(1.1);
        let r = depth_metrics(&pred, &gt, ValidPolicy::Intersection).unwrap();
        assert!((r.abs_rel - 0.1).abs() < 1e-12);
        // 1.25^0.5 = 1.1180..
        assert!(1.1 < 1.25f64.sqrt());
        assert_eq!((r.delta_half, r.delta_one), (1.0, 1.0));
    }

    #[test]
    fn holes_under_each_policy() {
        let gt = DepthMap::constant(2, 2, 2.0).unwrap();
        let pred = DepthMap::from_options(2, 2, &[Some(2.0), Some(2.0), Some(2.0), None]).unwrap();
        let a = depth_metrics(&pred, &gt, ValidPolicy::Intersection).unwrap();
        assert_eq!((a.delta_one, a.coverage, a.n_pixels), (1.0, 0.75, 3));
        let b = depth_metrics(&pred, &gt, ValidPolicy::GtValidStrict).unwrap();
        assert_eq!((b.delta_one, b.coverage, b.n_pixels), (0.75, 0.75, 4));
        assert_eq!(b.l1, 0.0);
    }

    #[test]
    fn empty_set_and_mismatch() {
        let gt = DepthMap::constant(2, 2, 2.0).unwrap();
        let pred = DepthMap::empty(2, 2).unwrap();
        assert!(depth_metrics(&pred, &gt, ValidPolicy::Intersection).is_err());
        let small = DepthMap::constant(1, 2, 2.0).unwrap();
        assert!(matches!(
            depth_metrics(&small, &gt, ValidPolicy::Intersection),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("intersection".parse::<ValidPolicy>().unwrap(), ValidPolicy::Intersection);
        assert_eq!("gt-valid-strict".parse::<ValidPolicy>().unwrap(), ValidPolicy::GtValidStrict);
        assert!("loose".parse::<ValidPolicy>().is_err());
        assert_eq!(ValidPolicy::GtValidStrict.to_string(), "gt-valid-strict");
    }
}
