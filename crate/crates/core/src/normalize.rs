//! Affine-invariant normalization in disparity space and metric recovery
//! against a reference depth map.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{ensure_same_dims, DepthMap, ScalarField};

/// Smallest depth used when inverting to disparity (meters).
pub const DEFAULT_DEPTH_FLOOR: f64 = 1e-6;
/// Smallest disparity used when inverting back to depth (1/m).
pub const MIN_DISPARITY: f64 = 1e-6;
/// Lower bound on the normalization scale (disparity units).
pub const SCALE_FLOOR: f64 = 1e-8;
/// Fraction of worst residuals dropped by the robust re-fit.
pub const TRIM_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormParams {
    pub shift: f64,
    pub scale: f64,
    pub degenerate: bool,
}

/// Valid pixels map to `1 / max(depth, depth_floor)`.
pub fn to_disparity(d: &DepthMap, depth_floor: f64) -> ScalarField {
    let values = d
        .values()
        .iter()
        .zip(d.mask())
        .map(|(&z, &ok)| if ok { 1.0 / z.max(depth_floor) } else { 0.0 })
        .collect();
    ScalarField::from_parts(d.width(), d.height(), values, d.mask().to_vec())
        .expect("dimensions come from a valid depth map")
}

/// Inverse of [`to_disparity`]: disparity is clamped to `MIN_DISPARITY`
/// before inversion so every valid input yields a positive depth.
pub fn disparity_to_depth(field: &ScalarField) -> DepthMap {
    let mut out = DepthMap::empty(field.width(), field.height()).expect("valid dims");
    for (i, v) in field.iter_valid() {
        out.set(i, 1.0 / v.max(MIN_DISPARITY));
    }
    out
}

/// Median with the mean of the two middle elements for even counts.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    let n = values.len();
    let mid = n / 2;
    let (_, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Normalizes a disparity field: `(x - median) / mean|x - median|`.
pub fn normalize_field(x: &ScalarField) -> Result<(ScalarField, NormParams)> {
    let mut vals: Vec<f64> = x.iter_valid().map(|(_, v)| v).collect();
    if vals.is_empty() {
        return Err(Error::NoValidPixels("affine normalization"));
    }
    let shift = median(&mut vals);
    let mad = vals.iter().map(|v| (v - shift).abs()).sum::<f64>() / vals.len() as f64;
    let degenerate = mad < SCALE_FLOOR;
    let scale = mad.max(SCALE_FLOOR);
    let out = x.map_valid(|v| (v - shift) / scale);
    Ok((
        out,
        NormParams {
            shift,
            scale,
            degenerate,
        },
    ))
}

/// Affine-invariant normalization of a depth map in disparity space.
pub fn affine_normalize(d: &DepthMap) -> Result<(ScalarField, NormParams)> {
    normalize_field(&to_disparity(d, DEFAULT_DEPTH_FLOOR))
}

/// Scale and shift mapping a relative field onto reference disparity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineFit {
    pub scale: f64,
    pub shift: f64,
    /// True when the relative values were constant and only a shift was fit.
    pub shift_only: bool,
}

impl AffineFit {
    pub fn apply(&self, v: f64) -> f64 {
        self.scale * v + self.shift
    }
}

fn least_squares(pairs: &[(f64, f64)]) -> Option<AffineFit> {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || pairs.iter().all(|p| p.0 == pairs[0].0) {
        return None;
    }
    let scale = sxy / sxx;
    Some(AffineFit {
        scale,
        shift: my - scale * mx,
        shift_only: false,
    })
}

/// Fits `scale * rel + shift ≈ disparity(reference)` over jointly valid
/// pixels: ordinary least squares, then one re-fit on the 80% of pixels with
/// the smallest residuals. Constant `rel` falls back to a shift-only fit at
/// the median reference disparity.
pub fn fit_affine(rel: &ScalarField, reference: &DepthMap) -> Result<AffineFit> {
    ensure_same_dims(rel.dims(), reference.dims())?;
    let disp = to_disparity(reference, DEFAULT_DEPTH_FLOOR);
    let pairs: Vec<(f64, f64)> = (0..rel.len())
        .filter_map(|i| Some((rel.get(i)?, disp.get(i)?)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoValidPixels("affine recovery overlap"));
    }

    let Some(initial) = least_squares(&pairs) else {
        let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        return Ok(AffineFit {
            scale: 0.0,
            shift: median(&mut ys),
            shift_only: true,
        });
    };

    let drop = (pairs.len() as f64 * TRIM_FRACTION).floor() as usize;
    if drop == 0 {
        return Ok(initial);
    }
    let mut ranked: Vec<(f64, usize)> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| ((initial.apply(x) - y).abs(), i))
        .collect();
    // ties resolved by index so the kept subset is deterministic
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let kept: Vec<(f64, f64)> = ranked[..pairs.len() - drop]
        .iter()
        .map(|&(_, i)| pairs[i])
        .collect();
    Ok(least_squares(&kept).unwrap_or(initial))
}

/// Recovers metric depth from a relative field using `reference` for scale.
/// Output is valid wherever `rel` is valid.
pub fn affine_recover(rel: &ScalarField, reference: &DepthMap) -> Result<DepthMap> {
    let fit = fit_affine(rel, reference)?;
    let mut out = DepthMap::empty(rel.width(), rel.height())?;
    for (i, v) in rel.iter_valid() {
        out.set(i, 1.0 / fit.apply(v).max(MIN_DISPARITY));
    }
    Ok(out)
}
