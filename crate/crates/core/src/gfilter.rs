//! Masked box statistics and the guided filter.
//!
//! The guided filter models the output as a local linear transform of the
//! guide, `b_i = x_k * g_i + y_k`, with `(x_k, y_k)` minimizing
//! `Σ_{i∈ω_k} (x_k g_i + y_k - a_i)² + ε x_k²` over each window `ω_k`. The
//! closed form is `x_k = cov(g, a) / (var(g) + ε)`, `y_k = mean(a) - x_k mean(g)`
//! with population moments over the jointly valid pixels of the window.
//! Every box sum goes through integral images, so cost does not depend on
//! the radius.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::{to_disparity, DEFAULT_DEPTH_FLOOR};
use crate::rng::StageRng;
use crate::types::{ensure_same_dims, DepthMap, ScalarField};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_MIN_VALID: usize = 4;
pub const DEFAULT_RADII: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// Summed-area table over a `width x height` grid, padded with a zero row
/// and column.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub fn new(width: usize, height: usize, values: impl IntoIterator<Item = f64>) -> Self {
        let stride = width + 1;
        let mut table = vec![0.0; stride * (height + 1)];
        let mut it = values.into_iter();
        for y in 0..height {
            let mut row = 0.0;
            for x in 0..width {
                row += it.next().expect("too few values for integral image");
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        Self {
            width,
            height,
            table,
        }
    }

    /// Sum over the inclusive rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let s = self.width + 1;
        let t = &self.table;
        t[(y1 + 1) * s + x1 + 1] - t[y0 * s + x1 + 1] - t[(y1 + 1) * s + x0] + t[y0 * s + x0]
    }

    /// Sum over the `(2r+1)²` window centred on `(x, y)`, clipped to bounds.
    pub fn window_sum(&self, x: usize, y: usize, radius: usize) -> f64 {
        let (x0, y0, x1, y1) = window_bounds(x, y, radius, self.width, self.height);
        self.rect_sum(x0, y0, x1, y1)
    }
}

#[inline]
fn window_bounds(x: usize, y: usize, r: usize, w: usize, h: usize) -> (usize, usize, usize, usize) {
    (
        x.saturating_sub(r),
        y.saturating_sub(r),
        (x + r).min(w - 1),
        (y + r).min(h - 1),
    )
}

/// Windowed sums and valid counts of a masked field.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub sum: ScalarField,
    pub count: Vec<u32>,
}

pub fn box_stats(field: &ScalarField, radius: usize) -> BoxStats {
    let (w, h) = field.dims();
    let sums = IntegralImage::new(w, h, field.values().iter().copied());
    let counts = IntegralImage::new(w, h, field.mask().iter().map(|&ok| f64::from(u8::from(ok))));
    let mut sum = Vec::with_capacity(w * h);
    let mut count = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            sum.push(sums.window_sum(x, y, radius));
            count.push(counts.window_sum(x, y, radius).round() as u32);
        }
    }
    BoxStats {
        sum: ScalarField::dense(w, h, sum).expect("finite sums"),
        count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidedFilterParams {
    pub radius: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_min_valid")]
    pub min_valid: usize,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_min_valid() -> usize {
    DEFAULT_MIN_VALID
}

impl GuidedFilterParams {
    pub fn new(radius: usize, epsilon: f64) -> Self {
        Self {
            radius,
            epsilon,
            min_valid: DEFAULT_MIN_VALID,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("{} must be >= 0", self.epsilon)));
        }
        if self.min_valid == 0 {
            return Err(Error::param("min_valid", "must be at least 1"));
        }
        Ok(())
    }
}

/// Guided filter over the jointly valid pixels of `guide` and `input`.
///
/// Output pixels take `mean(x_k) * g_i + mean(y_k)` over every window
/// covering them that holds at least `min_valid` jointly valid pixels. A
/// pixel with no such window, or with an invalid guide value, copies the
/// input through (and stays invalid if the input is invalid). An input hole
/// under a valid guide gets the local linear estimate.
pub fn guided_filter(
    guide: &ScalarField,
    input: &ScalarField,
    params: &GuidedFilterParams,
) -> Result<ScalarField> {
    ensure_same_dims(guide.dims(), input.dims())?;
    params.validate()?;
    let (w, h) = guide.dims();
    let r = params.radius;
    let n = w * h;

    let joint: Vec<bool> = (0..n).map(|i| guide.is_valid(i) && input.is_valid(i)).collect();
    let joint_count = joint.iter().filter(|&&ok| ok).count();
    if joint_count == 0 {
        return Ok(input.clone());
    }

    // The filter is shift-invariant in the guide and shift-equivariant in the
    // input; centring both keeps the second moments well conditioned.
    let mean_over_joint = |f: &ScalarField| {
        (0..n).filter(|&i| joint[i]).map(|i| f.values()[i]).sum::<f64>() / joint_count as f64
    };
    let g_off = mean_over_joint(guide);
    let a_off = mean_over_joint(input);
    let g: Vec<f64> = (0..n).map(|i| if joint[i] { guide.values()[i] - g_off } else { 0.0 }).collect();
    let a: Vec<f64> = (0..n).map(|i| if joint[i] { input.values()[i] - a_off } else { 0.0 }).collect();

    let cnt = IntegralImage::new(w, h, joint.iter().map(|&ok| f64::from(u8::from(ok))));
    let sg = IntegralImage::new(w, h, g.iter().copied());
    let sa = IntegralImage::new(w, h, a.iter().copied());
    let sgg = IntegralImage::new(w, h, g.iter().map(|v| v * v));
    let sga = IntegralImage::new(w, h, g.iter().zip(&a).map(|(p, q)| p * q));

    let mut coef_x = vec![0.0; n];
    let mut coef_y = vec![0.0; n];
    let mut usable = vec![0.0; n];
    for y in 0..h {
        for x in 0..w {
            let (x0, y0, x1, y1) = window_bounds(x, y, r, w, h);
            let count = cnt.rect_sum(x0, y0, x1, y1).round();
            if (count as usize) < params.min_valid {
                continue;
            }
            let mg = sg.rect_sum(x0, y0, x1, y1) / count;
            let ma = sa.rect_sum(x0, y0, x1, y1) / count;
            let var = (sgg.rect_sum(x0, y0, x1, y1) / count - mg * mg).max(0.0);
            let cov = sga.rect_sum(x0, y0, x1, y1) / count - mg * ma;
            let denom = var + params.epsilon;
            let xk = if denom > 0.0 { cov / denom } else { 0.0 };
            let k = y * w + x;
            coef_x[k] = xk;
            coef_y[k] = ma - xk * mg;
            usable[k] = 1.0;
        }
    }

    let sx = IntegralImage::new(w, h, coef_x);
    let sy = IntegralImage::new(w, h, coef_y);
    let su = IntegralImage::new(w, h, usable);

    let mut out = input.clone();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !guide.is_valid(i) {
                continue;
            }
            let (x0, y0, x1, y1) = window_bounds(x, y, r, w, h);
            let windows = su.rect_sum(x0, y0, x1, y1).round();
            if windows < 1.0 {
                continue;
            }
            let mx = sx.rect_sum(x0, y0, x1, y1) / windows;
            let my = sy.rect_sum(x0, y0, x1, y1) / windows;
            let gi = guide.values()[i] - g_off;
            out.set(i, mx * gi + my + a_off);
        }
    }
    Ok(out)
}

/// Guided filter on depth maps, carried out in disparity space.
///
/// Holes in `input` stay holes, and so do pixels whose filtered disparity
/// comes out non-positive (no depth corresponds to them).
pub fn guided_filter_depth(
    guide: &DepthMap,
    input: &DepthMap,
    params: &GuidedFilterParams,
) -> Result<DepthMap> {
    guided_filter_depth_by(&to_disparity(guide, DEFAULT_DEPTH_FLOOR), input, params)
}

/// Like [`guided_filter_depth`] with an arbitrary scalar guide, e.g. image
/// luminance.
pub fn guided_filter_depth_by(
    guide: &ScalarField,
    input: &DepthMap,
    params: &GuidedFilterParams,
) -> Result<DepthMap> {
    let a = to_disparity(input, DEFAULT_DEPTH_FLOOR);
    let filtered = guided_filter(guide, &a, params)?;
    let mut out = DepthMap::empty(input.width(), input.height())?;
    for (i, d) in filtered.iter_valid() {
        if input.is_valid(i) && d > 0.0 {
            out.set(i, 1.0 / d);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleAugmentParams {
    pub radii_pool: Vec<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_min_valid")]
    pub min_valid: usize,
    #[serde(default = "default_rescale_tag")]
    pub seed_tag: String,
}

fn default_rescale_tag() -> String {
    "rescale".to_owned()
}

impl Default for RescaleAugmentParams {
    fn default() -> Self {
        Self {
            radii_pool: DEFAULT_RADII.to_vec(),
            epsilon: DEFAULT_EPSILON,
            min_valid: DEFAULT_MIN_VALID,
            seed_tag: default_rescale_tag(),
        }
    }
}

impl RescaleAugmentParams {
    /// Default pool with radii above `min(width, height) / 8` dropped
    /// (radius 1 is always kept).
    pub fn default_for(width: usize, height: usize) -> Self {
        let mut p = Self::default();
        p.cap_radii(width, height);
        p
    }

    /// Drops radii larger than `min(width, height) / 8`, keeping at least the
    /// smallest entry.
    pub fn cap_radii(&mut self, width: usize, height: usize) {
        let cap = (width.min(height) / 8).max(1);
        let smallest = self.radii_pool.first().copied();
        self.radii_pool.retain(|&r| r <= cap);
        if self.radii_pool.is_empty() {
            self.radii_pool.extend(smallest);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii_pool.is_empty() {
            return Err(Error::param("radii_pool", "must not be empty"));
        }
        if self.radii_pool.contains(&0) {
            return Err(Error::param("radii_pool", "radii must be >= 1"));
        }
        if self.radii_pool.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::param("radii_pool", "must be sorted ascending"));
        }
        self.filter_params(self.radii_pool[0]).validate()
    }

    pub fn filter_params(&self, radius: usize) -> GuidedFilterParams {
        GuidedFilterParams {
            radius,
            epsilon: self.epsilon,
            min_valid: self.min_valid,
        }
    }

    pub fn draw_radius(&self, rng: &mut StageRng) -> Result<usize> {
        self.validate()?;
        Ok(self.radii_pool[rng.random_range(0..self.radii_pool.len())])
    }
}

/// Result of a guided rescale: the rescaled disparity field and the radius
/// drawn for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub field: ScalarField,
    pub radius: usize,
}

/// Stamps the metric scale of `gt` onto a value-noise disparity field by
/// guided-filtering `disparity(gt)` with the noise field as guide, at a
/// radius drawn uniformly from the pool.
pub fn guided_rescale_augment(
    value_noise: &ScalarField,
    gt: &DepthMap,
    params: &RescaleAugmentParams,
    rng: &mut StageRng,
) -> Result<Rescaled> {
    let radius = params.draw_radius(rng)?;
    let target = to_disparity(gt, DEFAULT_DEPTH_FLOOR);
    let field = guided_filter(value_noise, &target, &params.filter_params(radius))?;
    Ok(Rescaled { field, radius })
}
