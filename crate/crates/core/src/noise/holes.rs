use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::HoleProbField;
use crate::error::{Error, Result};
use crate::gfilter::box_stats;
use crate::normalize::{to_disparity, DEFAULT_DEPTH_FLOOR};
use crate::rng::StageRng;
use crate::types::{ensure_same_dims, luminance, DepthMap, ImageRGB, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandSide {
    Left,
    Right,
    Top,
    Bottom,
}

/// One source of hole probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HoleLayer {
    /// Depth discontinuities: disparity-gradient magnitude above
    /// `grad_threshold` (1/m per pixel), dilated by `dilate_radius`.
    Edge {
        grad_threshold: f64,
        dilate_radius: usize,
        prob: f64,
    },
    /// Dark surfaces: BT.601 luminance below `lum_threshold`.
    Dark { lum_threshold: f64, prob: f64 },
    /// Blobs where a bilinearly upsampled unit-Gaussian grid with `grid`-pixel
    /// cells exceeds `threshold`.
    Speckle { grid: usize, threshold: f64, prob: f64 },
    /// Certain holes in a `width`-pixel band along one image side.
    BorderBand { side: BandSide, width: usize },
}

fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(name, format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl HoleLayer {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HoleLayer::Edge {
                grad_threshold,
                prob,
                ..
            } => {
                if !(grad_threshold > 0.0) {
                    return Err(Error::param("grad_threshold", "must be positive"));
                }
                check_prob("edge.prob", prob)
            }
            HoleLayer::Dark { lum_threshold, prob } => {
                if !(lum_threshold > 0.0) {
                    return Err(Error::param("lum_threshold", "must be positive"));
                }
                check_prob("dark.prob", prob)
            }
            HoleLayer::Speckle {
                grid,
                threshold,
                prob,
            } => {
                if grid == 0 {
                    return Err(Error::param("speckle.grid", "must be positive"));
                }
                if !threshold.is_finite() {
                    return Err(Error::param("speckle.threshold", "must be finite"));
                }
                check_prob("speckle.prob", prob)
            }
            HoleLayer::BorderBand { width, .. } => {
                if width == 0 {
                    return Err(Error::param("border_band.width", "must be positive"));
                }
                Ok(())
            }
        }
    }

    fn probabilities(
        &self,
        rgb: &ImageRGB,
        disparity: &ScalarField,
        rng: &mut StageRng,
    ) -> Vec<f64> {
        let (w, h) = rgb.dims();
        match *self {
            HoleLayer::Edge {
                grad_threshold,
                dilate_radius,
                prob,
            } => {
                let g = gradient_magnitude(disparity);
                let marks: Vec<f64> = (0..w * h)
                    .map(|i| match g[i] {
                        Some(m) if m > grad_threshold => 1.0,
                        _ => 0.0,
                    })
                    .collect();
                let marks = ScalarField::dense(w, h, marks).expect("valid dims");
                let dilated = box_stats(&marks, dilate_radius).sum;
                dilated
                    .values()
                    .iter()
                    .map(|&s| if s > 0.5 { prob } else { 0.0 })
                    .collect()
            }
            HoleLayer::Dark { lum_threshold, prob } => luminance(rgb)
                .values()
                .iter()
                .map(|&l| if l < lum_threshold { prob } else { 0.0 })
                .collect(),
            HoleLayer::Speckle {
                grid,
                threshold,
                prob,
            } => {
                let gw = w.div_ceil(grid) + 1;
                let gh = h.div_ceil(grid) + 1;
                let coarse: Vec<f64> = (0..gw * gh)
                    .map(|_| StandardNormal.sample(&mut *rng))
                    .collect();
                let mut out = Vec::with_capacity(w * h);
                for y in 0..h {
                    for x in 0..w {
                        let v = bilinear_grid(&coarse, gw, x as f64 / grid as f64, y as f64 / grid as f64);
                        out.push(if v > threshold { prob } else { 0.0 });
                    }
                }
                out
            }
            HoleLayer::BorderBand { side, width } => {
                let mut out = vec![0.0; w * h];
                for y in 0..h {
                    for x in 0..w {
                        let inside = match side {
                            BandSide::Left => x < width,
                            BandSide::Right => x + width >= w,
                            BandSide::Top => y < width,
                            BandSide::Bottom => y + width >= h,
                        };
                        if inside {
                            out[y * w + x] = 1.0;
                        }
                    }
                }
                out
            }
        }
    }
}

/// Bilinear lookup in a row-major `gw`-wide coarse grid; coordinates are in
/// grid cells and stay inside the grid by construction.
pub(crate) fn bilinear_grid(grid: &[f64], gw: usize, gx: f64, gy: f64) -> f64 {
    let x0 = gx.floor() as usize;
    let y0 = gy.floor() as usize;
    let (fx, fy) = (gx - x0 as f64, gy - y0 as f64);
    let at = |x: usize, y: usize| grid[y * gw + x];
    let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
    let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Central-difference gradient magnitude over valid pixels. Falls back to a
/// one-sided difference when a neighbour is missing; `None` on invalid pixels.
fn gradient_magnitude(f: &ScalarField) -> Vec<Option<f64>> {
    let (w, h) = f.dims();
    let axis = |i: usize, prev: Option<usize>, next: Option<usize>| -> f64 {
        let c = f.values()[i];
        match (prev.and_then(|p| f.get(p)), next.and_then(|n| f.get(n))) {
            (Some(a), Some(b)) => 0.5 * (b - a),
            (Some(a), None) => c - a,
            (None, Some(b)) => b - c,
            (None, None) => 0.0,
        }
    };
    (0..w * h)
        .map(|i| {
            if !f.is_valid(i) {
                return None;
            }
            let (x, y) = (i % w, i / w);
            let gx = axis(i, x.checked_sub(1).map(|_| i - 1), (x + 1 < w).then_some(i + 1));
            let gy = axis(i, y.checked_sub(1).map(|_| i - w), (y + 1 < h).then_some(i + w));
            Some(gx.hypot(gy))
        })
        .collect()
}

/// Combines hole layers into one probability map by independent union,
/// `H = 1 - Π (1 - h_j)`.
pub fn gen_hole_map(
    rgb: &ImageRGB,
    gt: &DepthMap,
    layers: &[HoleLayer],
    rng: &mut StageRng,
) -> Result<HoleProbField> {
    ensure_same_dims(rgb.dims(), gt.dims())?;
    let (w, h) = gt.dims();
    let disparity = to_disparity(gt, DEFAULT_DEPTH_FLOOR);
    let mut out = HoleProbField::zeros(w, h)?;
    for layer in layers {
        layer.validate()?;
        out.union_with(&layer.probabilities(rgb, &disparity, rng));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;

    fn rng() -> StageRng {
        derive_rng(5, 0, "hole")
    }

    #[test]
    fn flat_bright_scene_has_no_holes() {
        let rgb = ImageRGB::filled(12, 9, [200, 200, 200]).unwrap();
        let gt = DepthMap::constant(12, 9, 1.5).unwrap();
        let layers = [
            HoleLayer::Edge {
                grad_threshold: 0.01,
                dilate_radius: 2,
                prob: 1.0,
            },
            HoleLayer::Dark {
                lum_threshold: 30.0,
                prob: 1.0,
            },
        ];
        let hmap = gen_hole_map(&rgb, &gt, &layers, &mut rng()).unwrap();
        assert!(hmap.values().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn black_image_all_holes() {
        let rgb = ImageRGB::filled(4, 4, [0, 0, 0]).unwrap();
        let gt = DepthMap::constant(4, 4, 1.0).unwrap();
        let layers = [HoleLayer::Dark {
            lum_threshold: 20.0,
            prob: 1.0,
        }];
        let hmap = gen_hole_map(&rgb, &gt, &layers, &mut rng()).unwrap();
        assert!(hmap.values().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn union_of_two_halves() {
        let rgb = ImageRGB::filled(4, 4, [10, 10, 10]).unwrap();
        let gt = DepthMap::constant(4, 4, 1.0).unwrap();
        let half = HoleLayer::Dark {
            lum_threshold: 256.0,
            prob: 0.5,
        };
        let hmap = gen_hole_map(&rgb, &gt, &[half.clone(), half], &mut rng()).unwrap();
        assert!(hmap.values().iter().all(|&p| (p - 0.75).abs() < 1e-15));
    }

    #[test]
    fn edge_layer_marks_step_and_dilates() {
        // left half 1 m, right half 2 m
        let (w, h) = (10, 3);
        let vals: Vec<f64> = (0..w * h).map(|i| if i % w < 5 { 1.0 } else { 2.0 }).collect();
        let gt = DepthMap::from_meters(w, h, vals).unwrap();
        let rgb = ImageRGB::filled(w, h, [255, 255, 255]).unwrap();
        let layer = HoleLayer::Edge {
            grad_threshold: 0.1,
            dilate_radius: 1,
            prob: 0.9,
        };
        let hmap = gen_hole_map(&rgb, &gt, &[layer], &mut rng()).unwrap();
        for y in 0..h {
            let row: Vec<f64> = (0..w).map(|x| hmap.values()[y * w + x]).collect();
            // step between x=4 and x=5 marks both, dilation adds x=3 and x=6
            assert_eq!(row, vec![0.0, 0.0, 0.0, 0.9, 0.9, 0.9, 0.9, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn border_band_columns() {
        let rgb = ImageRGB::filled(6, 2, [255, 255, 255]).unwrap();
        let gt = DepthMap::constant(6, 2, 1.0).unwrap();
        let layer = HoleLayer::BorderBand {
            side: BandSide::Right,
            width: 2,
        };
        let hmap = gen_hole_map(&rgb, &gt, &[layer], &mut rng()).unwrap();
        assert_eq!(&hmap.values()[..6], &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn speckle_is_seeded() {
        let rgb = ImageRGB::filled(32, 24, [255, 255, 255]).unwrap();
        let gt = DepthMap::constant(32, 24, 1.0).unwrap();
        let layer = HoleLayer::Speckle {
            grid: 6,
            threshold: 0.8,
            prob: 1.0,
        };
        let a = gen_hole_map(&rgb, &gt, std::slice::from_ref(&layer), &mut rng()).unwrap();
        let b = gen_hole_map(&rgb, &gt, std::slice::from_ref(&layer), &mut rng()).unwrap();
        assert_eq!(a, b);
        let holes = a.count_at_least(0.5);
        assert!(holes > 0 && holes < 32 * 24);
    }

    #[test]
    fn adding_layers_is_monotone() {
        let rgb = ImageRGB::new(8, 8, (0..64).map(|i| [(i * 4) as u8, 0, 0]).collect()).unwrap();
        let gt = DepthMap::from_meters(8, 8, (0..64).map(|i| 1.0 + (i % 3) as f64).collect()).unwrap();
        let mut layers = vec![HoleLayer::Dark {
            lum_threshold: 40.0,
            prob: 0.3,
        }];
        let before = gen_hole_map(&rgb, &gt, &layers, &mut rng()).unwrap();
        layers.push(HoleLayer::Edge {
            grad_threshold: 0.2,
            dilate_radius: 0,
            prob: 0.4,
        });
        let after = gen_hole_map(&rgb, &gt, &layers, &mut rng()).unwrap();
        for (a, b) in before.values().iter().zip(after.values()) {
            assert!(b >= a);
        }
    }

    #[test]
    fn rejects_bad_layers() {
        let rgb = ImageRGB::filled(2, 2, [0, 0, 0]).unwrap();
        let gt = DepthMap::constant(2, 2, 1.0).unwrap();
        let bad = HoleLayer::Dark {
            lum_threshold: 10.0,
            prob: 1.5,
        };
        assert!(gen_hole_map(&rgb, &gt, &[bad], &mut rng()).is_err());
        let small = ImageRGB::filled(1, 2, [0, 0, 0]).unwrap();
        assert!(gen_hole_map(&small, &gt, &[], &mut rng()).is_err());
    }

    #[test]
    fn unknown_kind_fails_to_parse() {
        let err = toml::from_str::<HoleLayer>("kind = \"glare\"\nprob = 1.0\n");
        assert!(err.is_err());
    }
}
