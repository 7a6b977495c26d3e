use crate::error::{Error, Result};
use crate::normalize::{affine_normalize, to_disparity, DEFAULT_DEPTH_FLOOR};
use crate::types::{ensure_same_dims, DepthMap, ScalarField};

const LOGIT_CLAMP: f64 = 30.0;

/// Hole-mask binary cross-entropy: target 1 where `gt` is a hole, mean
/// negative log-likelihood over valid logits. Logits are clamped to ±30.
pub fn bce_hole_loss(logits: &ScalarField, gt: &DepthMap) -> Result<f64> {
    ensure_same_dims(logits.dims(), gt.dims())?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, x) in logits.iter_valid() {
        let x = x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
        let y = if gt.is_valid(i) { 0.0 } else { 1.0 };
        // -[y log σ(x) + (1-y) log(1-σ(x))] = softplus(x) - y x
        let softplus = x.max(0.0) + (-x.abs()).exp().ln_1p();
        sum += softplus - y * x;
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoValidPixels("hole-mask loss"));
    }
    Ok(sum / n as f64)
}

/// Mean absolute difference between a relative prediction and the
/// affine-normalized ground truth, over pixels valid in both.
pub fn l1_normalized_loss(pred_rel: &ScalarField, gt: &DepthMap) -> Result<f64> {
    ensure_same_dims(pred_rel.dims(), gt.dims())?;
    let (target, _) = affine_normalize(gt)?;
    mean_abs_diff(pred_rel, &target, "normalized l1 loss")
}

fn mean_abs_diff(a: &ScalarField, b: &ScalarField, what: &'static str) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..a.len() {
        if let (Some(p), Some(q)) = (a.get(i), b.get(i)) {
            sum += (p - q).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoValidPixels(what));
    }
    Ok(sum / n as f64)
}

/// Mean absolute disparity error over jointly valid pixels.
pub fn disparity_l1(pred: &DepthMap, gt: &DepthMap) -> Result<f64> {
    ensure_same_dims(pred.dims(), gt.dims())?;
    let p = to_disparity(pred, DEFAULT_DEPTH_FLOOR);
    let g = to_disparity(gt, DEFAULT_DEPTH_FLOOR);
    mean_abs_diff(&p, &g, "disparity l1")
}

/// Gradient loss on the disparity error `e = disp(pred) - disp(gt)`:
/// mean |forward x-difference| plus mean |forward y-difference|, each over
/// the pairs whose two pixels are jointly valid.
pub fn grad_loss(pred: &DepthMap, gt: &DepthMap) -> Result<f64> {
    ensure_same_dims(pred.dims(), gt.dims())?;
    let (w, h) = gt.dims();
    let p = to_disparity(pred, DEFAULT_DEPTH_FLOOR);
    let g = to_disparity(gt, DEFAULT_DEPTH_FLOOR);
    let err = |i: usize| Some(p.get(i)? - g.get(i)?);

    let (mut sx, mut nx, mut sy, mut ny) = (0.0, 0usize, 0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let Some(e) = err(i) else { continue };
            if x + 1 < w {
                if let Some(r) = err(i + 1) {
                    sx += (r - e).abs();
                    nx += 1;
                }
            }
            if y + 1 < h {
                if let Some(d) = err(i + w) {
                    sy += (d - e).abs();
                    ny += 1;
                }
            }
        }
    }
    if nx == 0 && ny == 0 {
        return Err(Error::NoValidPixels("gradient loss pairs"));
    }
    let term = |s: f64, n: usize| if n > 0 { s / n as f64 } else { 0.0 };
    Ok(term(sx, nx) + term(sy, ny))
}

/// Disparity L1 plus gradient loss, unweighted.
pub fn total_loss(pred: &DepthMap, gt: &DepthMap) -> Result<f64> {
    Ok(disparity_l1(pred, gt)? + grad_loss(pred, gt)?)
}
