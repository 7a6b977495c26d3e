//! Image-grid containers shared by every stage of the pipeline.
//!
//! All grids are row-major with index `y * width + x`. Invalid pixels always
//! store `0.0` so masked arithmetic can skip the mask lookup when it only
//! needs to sum values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::param("dimensions", format!("{width}x{height} has a zero side")));
    }
    if width * height != len {
        return Err(Error::param(
            "dimensions",
            format!("{width}x{height} needs {} pixels, got {len}", width * height),
        ));
    }
    Ok(())
}

pub(crate) fn ensure_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            left_w: a.0,
            left_h: a.1,
            right_w: b.0,
            right_h: b.1,
        });
    }
    Ok(())
}

/// Dense metric depth in meters with an explicit validity mask.
///
/// `values[i] > 0` holds exactly when `valid[i]`; holes store `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// A fully invalid map.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height, width * height)?;
        Ok(Self {
            width,
            height,
            values: vec![0.0; width * height],
            valid: vec![false; width * height],
        })
    }

    /// Builds a map from raw meters. Zero marks a hole; negative or
    /// non-finite entries are rejected.
    pub fn from_meters(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(
                    "depth",
                    format!("pixel ({}, {}) holds {v}", i % width, i / width),
                ));
            }
        }
        let valid = values.iter().map(|&v| v > 0.0).collect();
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    /// Builds a map from per-pixel options, `None` being a hole.
    pub fn from_options(width: usize, height: usize, values: &[Option<f64>]) -> Result<Self> {
        let raw = values.iter().map(|v| v.unwrap_or(0.0)).collect();
        Self::from_meters(width, height, raw)
    }

    pub fn constant(width: usize, height: usize, depth: f64) -> Result<Self> {
        Self::from_meters(width, height, vec![depth; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw values; holes read as `0.0`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.valid[index].then_some(self.values[index])
    }

    pub fn at(&self, x: usize, y: usize) -> Option<f64> {
        self.get(y * self.width + x)
    }

    /// Writes a pixel. Non-positive or non-finite depths become holes.
    pub fn set(&mut self, index: usize, depth: f64) {
        if depth.is_finite() && depth > 0.0 {
            self.values[index] = depth;
            self.valid[index] = true;
        } else {
            self.values[index] = 0.0;
            self.valid[index] = false;
        }
    }

    pub fn invalidate(&mut self, index: usize) {
        self.values[index] = 0.0;
        self.valid[index] = false;
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Multiplies every valid depth by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for (v, &ok) in out.values.iter_mut().zip(&self.valid) {
            if ok {
                *v *= factor;
            }
        }
        out
    }

    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.valid
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .map(|(i, _)| (i, self.values[i]))
    }
}

/// 8-bit RGB image aligned with a depth grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRGB {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ImageRGB {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, index: usize) -> [u8; 3] {
        self.pixels[index]
    }
}

/// Per-pixel real field with a validity mask (disparity, normalized depth,
/// probabilities, logits). Invalid entries store `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl ScalarField {
    /// A fully valid field. Non-finite entries are rejected.
    pub fn dense(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let valid = vec![true; values.len()];
        Self::from_parts(width, height, values, valid)
    }

    /// A field with an explicit mask. Values under invalid entries are
    /// zeroed; valid entries must be finite.
    pub fn from_parts(
        width: usize,
        height: usize,
        mut values: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        check_dims(width, height, values.len())?;
        check_dims(width, height, valid.len())?;
        for (i, (v, &ok)) in values.iter_mut().zip(&valid).enumerate() {
            if !ok {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::param(
                    "field",
                    format!("pixel ({}, {}) holds {v}", i % width, i / width),
                ));
            }
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn invalid(width: usize, height: usize) -> Result<Self> {
        Self::from_parts(
            width,
            height,
            vec![0.0; width * height],
            vec![false; width * height],
        )
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::dense(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.valid[index].then_some(self.values[index])
    }

    pub fn at(&self, x: usize, y: usize) -> Option<f64> {
        self.get(y * self.width + x)
    }

    /// Writes a valid value; non-finite input invalidates the pixel.
    pub fn set(&mut self, index: usize, value: f64) {
        if value.is_finite() {
            self.values[index] = value;
            self.valid[index] = true;
        } else {
            self.invalidate(index);
        }
    }

    pub fn invalidate(&mut self, index: usize) {
        self.values[index] = 0.0;
        self.valid[index] = false;
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.valid
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .map(|(i, _)| (i, self.values[i]))
    }

    /// Applies `f` to every valid value, keeping the mask.
    pub fn map_valid(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.values.len() {
            if out.valid[i] {
                out.set(i, f(self.values[i]));
            }
        }
        out
    }
}

/// Pinhole camera model. `depth_scale` is stored units per meter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_depth_scale")]
    pub depth_scale: f64,
}

pub const DEFAULT_DEPTH_SCALE: f64 = 1000.0;

fn default_depth_scale() -> f64 {
    DEFAULT_DEPTH_SCALE
}

impl Intrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::param("intrinsics", "focal lengths must be positive"));
        }
        if !(self.depth_scale > 0.0 && self.depth_scale.is_finite()) {
            return Err(Error::param("intrinsics", "depth_scale must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("intrinsics", "resolution must be non-zero"));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return Err(Error::param("intrinsics", format!("cx {} outside [0, {})", self.cx, self.width)));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(Error::param("intrinsics", format!("cy {} outside [0, {})", self.cy, self.height)));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let k: Intrinsics = serde_json::from_str(text).map_err(|e| Error::Malformed {
            what: "intrinsics json",
            message: e.to_string(),
        })?;
        k.validate()?;
        Ok(k)
    }

    pub fn load_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}

/// BT.601 luma per pixel, in [0, 255]. Every pixel is valid.
pub fn luminance(img: &ImageRGB) -> ScalarField {
    let values = img
        .pixels()
        .iter()
        .map(|&[r, g, b]| 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b))
        .collect();
    ScalarField::dense(img.width(), img.height(), values).expect("dimensions come from a valid image")
}
