use rand::Rng;
use serde::{Deserialize, Serialize};

use super::holes::{gen_hole_map, HoleLayer};
use super::value::{gen_value_noise, ValueStage};
use super::HoleProbField;
use crate::error::{Error, Result};
use crate::gfilter::{guided_rescale_augment, RescaleAugmentParams};
use crate::normalize::{DEFAULT_DEPTH_FLOOR, MIN_DISPARITY};
use crate::rng::{derive_rng, StageRng};
use crate::types::{ensure_same_dims, DepthMap, ImageRGB, ScalarField};

pub const DEFAULT_HOLE_THRESHOLD: f64 = 0.5;

pub const TAG_VALUE: &str = "value";
pub const TAG_HIGH_FREQ: &str = "high_freq";
pub const TAG_HOLE: &str = "hole";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighFreqParams {
    pub amplitude: f64,
    pub probability: f64,
}

impl HighFreqParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::param("high_freq.amplitude", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::param("high_freq.probability", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Declarative synthesis chain:
/// value stages → guided rescale → high-frequency noise → hole layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisePipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub value_stages: Vec<ValueStage>,
    /// `None` skips the guided rescale. An empty `radii_pool` selects the
    /// default pool capped to the image size.
    #[serde(default)]
    pub rescale: Option<RescaleAugmentParams>,
    #[serde(default)]
    pub high_freq: Option<HighFreqParams>,
    #[serde(default)]
    pub hole_layers: Vec<HoleLayer>,
    #[serde(default = "default_threshold")]
    pub hole_threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_HOLE_THRESHOLD
}

impl Default for NoisePipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            value_stages: Vec::new(),
            rescale: None,
            high_freq: None,
            hole_layers: Vec::new(),
            hole_threshold: DEFAULT_HOLE_THRESHOLD,
        }
    }
}

impl NoisePipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for s in &self.value_stages {
            s.validate()?;
        }
        if let Some(r) = &self.rescale {
            if !r.radii_pool.is_empty() {
                r.validate()?;
            }
        }
        if let Some(hf) = &self.high_freq {
            hf.validate()?;
        }
        for l in &self.hole_layers {
            l.validate()?;
        }
        check_threshold(self.hole_threshold)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Malformed {
            what: "noise config",
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rescale parameters with an empty pool replaced by the size-capped default.
    pub fn rescale_for(&self, width: usize, height: usize) -> Option<RescaleAugmentParams> {
        self.rescale.as_ref().map(|r| {
            if r.radii_pool.is_empty() {
                let mut p = RescaleAugmentParams {
                    radii_pool: crate::gfilter::DEFAULT_RADII.to_vec(),
                    ..r.clone()
                };
                p.cap_radii(width, height);
                p
            } else {
                r.clone()
            }
        })
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::param("hole_threshold", format!("{t} outside (0, 1]")));
    }
    Ok(())
}

/// Multiplies each valid pixel, with probability `probability`, by
/// `1 + U(-amplitude, amplitude)`. Two uniforms are drawn per pixel in
/// row-major order whatever the outcome, so the stream layout does not
/// depend on the mask or the parameters.
pub fn add_high_freq_noise(
    field: &ScalarField,
    amplitude: f64,
    probability: f64,
    rng: &mut StageRng,
) -> Result<ScalarField> {
    HighFreqParams {
        amplitude,
        probability,
    }
    .validate()?;
    let mut out = field.clone();
    for i in 0..field.len() {
        let hit: f64 = rng.random();
        let u: f64 = rng.random();
        if let Some(v) = field.get(i) {
            if hit < probability {
                out.set(i, v * (1.0 + amplitude * (2.0 * u - 1.0)));
            }
        }
    }
    Ok(out)
}

/// Applies the hole mask to a disparity field: pixels with hole probability
/// strictly below `threshold` keep `1 / disparity` (clamped to at least
/// `DEFAULT_DEPTH_FLOOR` meters); the rest become holes.
pub fn compose_camera_depth(
    value_field: &ScalarField,
    hole: &HoleProbField,
    threshold: f64,
) -> Result<DepthMap> {
    ensure_same_dims(value_field.dims(), hole.dims())?;
    check_threshold(threshold)?;
    let mut out = DepthMap::empty(value_field.width(), value_field.height())?;
    for (i, disp) in value_field.iter_valid() {
        if hole.values()[i] < threshold {
            let d = disp.clamp(MIN_DISPARITY, 1.0 / DEFAULT_DEPTH_FLOOR);
            out.set(i, 1.0 / d);
        }
    }
    Ok(out)
}

/// A synthesized camera-style depth map with the intermediates worth logging.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub depth: DepthMap,
    pub hole_prob: HoleProbField,
    /// Guided-filter radius drawn for this sample, if the rescale ran.
    pub radius: Option<usize>,
}

/// Runs the full chain for one sample. Every stage draws from its own stream
/// keyed by `(cfg.seed, sample_index, stage)`.
pub fn synthesize(
    rgb: &ImageRGB,
    gt: &DepthMap,
    cfg: &NoisePipelineConfig,
    sample_index: u64,
) -> Result<Synthesis> {
    cfg.validate()?;
    ensure_same_dims(rgb.dims(), gt.dims())?;
    let (w, h) = gt.dims();

    let mut value_rng = derive_rng(cfg.seed, sample_index, TAG_VALUE);
    let mut field = gen_value_noise(rgb, gt, &cfg.value_stages, &mut value_rng)?;

    let mut radius = None;
    if let Some(params) = cfg.rescale_for(w, h) {
        let mut rng = derive_rng(cfg.seed, sample_index, &params.seed_tag);
        let rescaled = guided_rescale_augment(&field, gt, &params, &mut rng)?;
        radius = Some(rescaled.radius);
        field = rescaled.field;
    }

    if let Some(hf) = cfg.high_freq {
        let mut rng = derive_rng(cfg.seed, sample_index, TAG_HIGH_FREQ);
        field = add_high_freq_noise(&field, hf.amplitude, hf.probability, &mut rng)?;
    }

    let mut hole_rng = derive_rng(cfg.seed, sample_index, TAG_HOLE);
    let hole_prob = gen_hole_map(rgb, gt, &cfg.hole_layers, &mut hole_rng)?;
    let depth = compose_camera_depth(&field, &hole_prob, cfg.hole_threshold)?;
    Ok(Synthesis {
        depth,
        hole_prob,
        radius,
    })
}
