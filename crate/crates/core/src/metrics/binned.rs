use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{ensure_same_dims, DepthMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinStats {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// `None` for empty bins.
    pub l1: Option<f64>,
    pub abs_rel: Option<f64>,
}

/// Accuracy versus ground-truth distance over jointly valid pixels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedReport {
    pub bin_edges: Vec<f64>,
    pub bins: Vec<BinStats>,
}

impl BinnedReport {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.n).sum()
    }

    /// Count-weighted mean of per-bin L1.
    pub fn pooled_l1(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| {
            self.bins
                .iter()
                .filter_map(|b| b.l1.map(|l| l * b.n as f64))
                .sum::<f64>()
                / total as f64
        })
    }

    /// CSV with header `bin_lo,bin_hi,n,l1,abs_rel`; empty bins leave the
    /// metric cells blank.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,n,l1,abs_rel\n");
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.bins {
            s.push_str(&format!("{},{},{},{},{}\n", b.lo, b.hi, b.n, cell(b.l1), cell(b.abs_rel)));
        }
        s
    }
}

/// Bins jointly valid pixels by ground-truth depth into
/// `[k * bin_width, (k + 1) * bin_width)` for `k < ceil(max_range / bin_width)`.
/// Pixels at or beyond the last edge are left out.
pub fn binned_accuracy(
    pred: &DepthMap,
    gt: &DepthMap,
    bin_width: f64,
    max_range: f64,
) -> Result<BinnedReport> {
    ensure_same_dims(pred.dims(), gt.dims())?;
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::param("bin_width", format!("{bin_width} must be positive")));
    }
    if !(max_range > 0.0 && max_range.is_finite()) {
        return Err(Error::param("max_range", format!("{max_range} must be positive")));
    }
    let count = (max_range / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=count).map(|k| k as f64 * bin_width).collect();
    let mut n = vec![0usize; count];
    let mut abs = vec![0.0; count];
    let mut rel = vec![0.0; count];
    for i in 0..gt.len() {
        let (Some(z), Some(p)) = (gt.get(i), pred.get(i)) else {
            continue;
        };
        let k = (z / bin_width).floor() as usize;
        if k >= count {
            continue;
        }
        let e = (p - z).abs();
        n[k] += 1;
        abs[k] += e;
        rel[k] += e / z;
    }
    let bins = (0..count)
        .map(|k| {
            let m = n[k] as f64;
            BinStats {
                lo: edges[k],
                hi: edges[k + 1],
                n: n[k],
                l1: (n[k] > 0).then(|| abs[k] / m),
                abs_rel: (n[k] > 0).then(|| rel[k] / m),
            }
        })
        .collect();
    Ok(BinnedReport {
        bin_edges: edges,
        bins,
    })
}
