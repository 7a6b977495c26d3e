//! Camera-style depth noise: hole-probability layers, value-noise stages,
//! high-frequency augmentation, composition into a holed depth map, and the
//! nearest-valid hole filling used for the "filled" evaluation protocol.

mod field_io;
mod fill;
mod holes;
mod pipeline;
mod value;

pub use field_io::{
    export_field_png, export_field_raw, export_prob_png, export_prob_raw, import_hole_prob,
    import_scalar_field, RAW_MAGIC,
};
pub use fill::fill_holes_nearest;
pub use holes::{gen_hole_map, BandSide, HoleLayer};
pub use pipeline::{
    add_high_freq_noise, compose_camera_depth, synthesize, HighFreqParams, NoisePipelineConfig,
    Synthesis, DEFAULT_HOLE_THRESHOLD,
};
pub use value::{gen_value_noise, ValueStage};

use crate::error::{Error, Result};

/// Per-pixel hole probability in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleProbField {
    width: usize,
    height: usize,
    prob: Vec<f64>,
}

impl HoleProbField {
    pub fn new(width: usize, height: usize, prob: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != prob.len() {
            return Err(Error::param(
                "dimensions",
                format!("{width}x{height} with {} probabilities", prob.len()),
            ));
        }
        for (i, &p) in prob.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange {
                    x: i % width,
                    y: i / width,
                    value: p,
                });
            }
        }
        Ok(Self {
            width,
            height,
            prob,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn constant(width: usize, height: usize, p: f64) -> Result<Self> {
        Self::new(width, height, vec![p; width * height])
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

    pub fn values(&self) -> &[f64] {
        &self.prob
    }

    /// Independent union with another layer: `1 - (1 - p)(1 - q)`.
    pub fn union_with(&mut self, layer: &[f64]) {
        for (p, &q) in self.prob.iter_mut().zip(layer) {
            *p = 1.0 - (1.0 - *p) * (1.0 - q);
        }
    }

    /// Count of pixels at or above `threshold`.
    pub fn count_at_least(&self, threshold: f64) -> usize {
        self.prob.iter().filter(|&&p| p >= threshold).count()
    }
}
