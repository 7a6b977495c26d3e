use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::fill::fill_holes_nearest;
use super::holes::bilinear_grid;
use crate::error::{Error, Result};
use crate::normalize::{to_disparity, DEFAULT_DEPTH_FLOOR};
use crate::rng::StageRng;
use crate::types::{ensure_same_dims, DepthMap, ImageRGB, ScalarField};

/// One value-noise stage, applied in disparity space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueStage {
    /// Stereo disparity quantization of a virtual rig: pixel disparity
    /// `focal * baseline / z` is rounded to multiples of `subpixel_step`.
    Quantization {
        virtual_focal: f64,
        virtual_baseline: f64,
        subpixel_step: f64,
    },
    /// Depth jitter with standard deviation `sigma0 + sigma1 * z²` meters.
    DepthGaussian { sigma0: f64, sigma1: f64 },
    /// Resampling along smooth random pixel offsets of up to `amplitude`
    /// pixels, interpolated from a coarse grid with `grid`-pixel cells.
    LateralWarp { amplitude: f64, grid: usize },
}

impl ValueStage {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be positive")))
            }
        };
        let non_negative = |name: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be >= 0")))
            }
        };
        match *self {
            ValueStage::Quantization {
                virtual_focal,
                virtual_baseline,
                subpixel_step,
            } => {
                positive("virtual_focal", virtual_focal)?;
                positive("virtual_baseline", virtual_baseline)?;
                positive("subpixel_step", subpixel_step)
            }
            ValueStage::DepthGaussian { sigma0, sigma1 } => {
                non_negative("sigma0", sigma0)?;
                non_negative("sigma1", sigma1)
            }
            ValueStage::LateralWarp { amplitude, grid } => {
                non_negative("amplitude", amplitude)?;
                if grid == 0 {
                    return Err(Error::param("grid", "must be positive"));
                }
                Ok(())
            }
        }
    }

    fn apply(&self, disp: &mut [f64], w: usize, h: usize, rng: &mut StageRng) {
        match *self {
            ValueStage::Quantization {
                virtual_focal,
                virtual_baseline,
                subpixel_step,
            } => {
                let fb = virtual_focal * virtual_baseline;
                for d in disp.iter_mut() {
                    let px = fb * *d;
                    let q = ((px / subpixel_step).round() * subpixel_step).max(subpixel_step);
                    *d = q / fb;
                }
            }
            ValueStage::DepthGaussian { sigma0, sigma1 } => {
                for d in disp.iter_mut() {
                    let z = 1.0 / *d;
                    let n: f64 = StandardNormal.sample(&mut *rng);
                    let jittered = (z + (sigma0 + sigma1 * z * z) * n).max(DEFAULT_DEPTH_FLOOR);
                    *d = 1.0 / jittered;
                }
            }
            ValueStage::LateralWarp { amplitude, grid } => {
                let gw = w.div_ceil(grid) + 1;
                let gh = h.div_ceil(grid) + 1;
                let mut offsets = Vec::with_capacity(2 * gw * gh);
                offsets.extend((0..2 * gw * gh).map(|_| amplitude * (2.0 * rng.random::<f64>() - 1.0)));
                let (ox, oy) = offsets.split_at(gw * gh);
                let src = disp.to_vec();
                for y in 0..h {
                    for x in 0..w {
                        let (gx, gy) = (x as f64 / grid as f64, y as f64 / grid as f64);
                        let sx = (x as f64 + bilinear_grid(ox, gw, gx, gy)).clamp(0.0, (w - 1) as f64);
                        let sy = (y as f64 + bilinear_grid(oy, gw, gx, gy)).clamp(0.0, (h - 1) as f64);
                        disp[y * w + x] = sample_bilinear(&src, w, h, sx, sy);
                    }
                }
            }
        }
    }
}

fn sample_bilinear(src: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x0 = (x.floor() as usize).min(w - 1);
    let y0 = (y.floor() as usize).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = src[y0 * w + x0] * (1.0 - fx) + src[y0 * w + x1] * fx;
    let bottom = src[y1 * w + x0] * (1.0 - fx) + src[y1 * w + x1] * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Applies the value-noise stages to `disparity(gt)` and returns the noisy
/// disparity field, valid exactly where `gt` is valid. Holes in `gt` are
/// nearest-filled before the stages run so warps never sample them.
pub fn gen_value_noise(
    rgb: &ImageRGB,
    gt: &DepthMap,
    stages: &[ValueStage],
    rng: &mut StageRng,
) -> Result<ScalarField> {
    ensure_same_dims(rgb.dims(), gt.dims())?;
    for s in stages {
        s.validate()?;
    }
    let base = to_disparity(gt, DEFAULT_DEPTH_FLOOR);
    if stages.is_empty() {
        if gt.valid_count() == 0 {
            return Err(Error::NoValidPixels("value noise"));
        }
        return Ok(base);
    }
    let filled = fill_holes_nearest(gt)?;
    let (w, h) = gt.dims();
    let mut disp = to_disparity(&filled, DEFAULT_DEPTH_FLOOR).values().to_vec();
    for s in stages {
        s.apply(&mut disp, w, h, rng);
    }
    ScalarField::from_parts(w, h, disp, gt.mask().to_vec())
}
