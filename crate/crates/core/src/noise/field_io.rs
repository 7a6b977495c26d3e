//! Import and export of externally computed noise maps.
//!
//! Raw grids: magic `DFG1`, then `width` and `height` as little-endian u32,
//! then `width * height` little-endian f32 values in row-major order. NaN
//! marks an invalid pixel in scalar fields.
//!
//! 16-bit PNGs store `round(value * scale)`; in scalar fields a stored `0`
//! is an invalid pixel, in probability maps it is probability 0.

use std::path::Path;

use super::HoleProbField;
use crate::error::{Error, Result};
use crate::io::{load_u16_gray, save_u16_gray};
use crate::types::ScalarField;

pub const RAW_MAGIC: &[u8; 4] = b"DFG1";

struct RawGrid {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

fn read_raw(path: &Path, bytes: &[u8]) -> Result<RawGrid> {
    let malformed = |message: String| Error::Malformed {
        what: "raw float grid",
        message: format!("{}: {message}", path.display()),
    };
    if bytes.len() < 12 || &bytes[..4] != RAW_MAGIC {
        return Err(malformed("missing DFG1 header".into()));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if width == 0 || height == 0 || body.len() != width * height * 4 {
        return Err(malformed(format!(
            "{width}x{height} grid needs {} payload bytes, found {}",
            width * height * 4,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(RawGrid {
        width,
        height,
        values,
    })
}

fn write_raw(path: &Path, width: usize, height: usize, values: impl Iterator<Item = f32>) -> Result<()> {
    let mut bytes = Vec::with_capacity(12 + width * height * 4);
    bytes.extend_from_slice(RAW_MAGIC);
    bytes.extend_from_slice(&(width as u32).to_le_bytes());
    bytes.extend_from_slice(&(height as u32).to_le_bytes());
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn check_png_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param("png_scale", format!("{scale} must be positive")));
    }
    Ok(())
}

fn quantize(value: f64, scale: f64, x: usize, y: usize) -> Result<u16> {
    let u = (value * scale + 0.5).floor();
    if !(0.0..=f64::from(u16::MAX)).contains(&u) {
        return Err(Error::param(
            "field",
            format!("value {value} at ({x}, {y}) does not fit 16 bits at scale {scale}"),
        ));
    }
    Ok(u as u16)
}

/// Imports a scalar noise field from a raw grid or a 16-bit PNG (sample /
/// `png_scale`).
pub fn import_scalar_field(path: impl AsRef<Path>, png_scale: f64) -> Result<ScalarField> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if bytes.starts_with(RAW_MAGIC) {
        let g = read_raw(path, &bytes)?;
        let valid: Vec<bool> = g.values.iter().map(|v| v.is_finite()).collect();
        let values = g.values.iter().map(|&v| f64::from(v)).collect();
        return ScalarField::from_parts(g.width, g.height, values, valid);
    }
    check_png_scale(png_scale)?;
    let (w, h, samples) = load_u16_gray(path)?;
    let valid = samples.iter().map(|&u| u != 0).collect();
    let values = samples.iter().map(|&u| f64::from(u) / png_scale).collect();
    ScalarField::from_parts(w, h, values, valid)
}

/// Imports a hole-probability map; every value must lie in `[0, 1]`.
pub fn import_hole_prob(path: impl AsRef<Path>, png_scale: f64) -> Result<HoleProbField> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if bytes.starts_with(RAW_MAGIC) {
        let g = read_raw(path, &bytes)?;
        return HoleProbField::new(g.width, g.height, g.values.iter().map(|&v| f64::from(v)).collect());
    }
    check_png_scale(png_scale)?;
    let (w, h, samples) = load_u16_gray(path)?;
    HoleProbField::new(w, h, samples.iter().map(|&u| f64::from(u) / png_scale).collect())
}

pub fn export_field_raw(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let values = (0..field.len()).map(|i| field.get(i).map_or(f32::NAN, |v| v as f32));
    write_raw(path.as_ref(), field.width(), field.height(), values)
}

/// Writes a scalar field as a 16-bit PNG. Valid values must be positive
/// after quantization since `0` encodes an invalid pixel.
pub fn export_field_png(field: &ScalarField, path: impl AsRef<Path>, png_scale: f64) -> Result<()> {
    check_png_scale(png_scale)?;
    let w = field.width();
    let mut samples = Vec::with_capacity(field.len());
    for i in 0..field.len() {
        samples.push(match field.get(i) {
            Some(v) => {
                let u = quantize(v, png_scale, i % w, i / w)?;
                if u == 0 {
                    return Err(Error::param(
                        "field",
                        format!("value {v} at ({}, {}) quantizes to the invalid marker", i % w, i / w),
                    ));
                }
                u
            }
            None => 0,
        });
    }
    save_u16_gray(path, w, field.height(), &samples)
}

pub fn export_prob_raw(prob: &HoleProbField, path: impl AsRef<Path>) -> Result<()> {
    let values = prob.values().iter().map(|&v| v as f32);
    write_raw(path.as_ref(), prob.width(), prob.height(), values)
}

pub fn export_prob_png(prob: &HoleProbField, path: impl AsRef<Path>, png_scale: f64) -> Result<()> {
    check_png_scale(png_scale)?;
    let w = prob.width();
    let samples = prob
        .values()
        .iter()
        .enumerate()
        .map(|(i, &p)| quantize(p, png_scale, i % w, i / w))
        .collect::<Result<Vec<_>>>()?;
    save_u16_gray(path, w, prob.height(), &samples)
}
