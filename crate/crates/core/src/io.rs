//! PNG codecs for depth maps (16-bit grayscale) and color images (8-bit RGB).

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::types::{DepthMap, ImageRGB};

pub(crate) struct RawPng {
    pub width: usize,
    pub height: usize,
    pub color: ColorType,
    pub depth: BitDepth,
    pub bytes: Vec<u8>,
}

pub(crate) fn read_png(path: &Path) -> Result<RawPng> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::IDENTITY);
    let decode_err = |e: png::DecodingError| Error::PngDecode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = decoder.read_info().map_err(decode_err)?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::PngDecode {
        path: path.to_path_buf(),
        message: "image too large".into(),
    })?;
    let mut bytes = vec![0u8; size];
    let info = reader.next_frame(&mut bytes).map_err(decode_err)?;
    bytes.truncate(info.buffer_size());
    Ok(RawPng {
        width: info.width as usize,
        height: info.height as usize,
        color: info.color_type,
        depth: info.bit_depth,
        bytes,
    })
}

pub(crate) fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
    bytes: &[u8],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encode_err = |e: png::EncodingError| Error::PngEncode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(depth);
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer.write_image_data(bytes).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

/// Reads a single-channel 16-bit PNG as raw integer samples.
pub fn load_u16_gray(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u16>)> {
    let path = path.as_ref();
    let raw = read_png(path)?;
    if raw.color != ColorType::Grayscale || raw.depth != BitDepth::Sixteen {
        return Err(Error::UnexpectedFormat {
            path: path.to_path_buf(),
            expected: "16-bit single-channel png",
            found: format!("{:?} at {:?}", raw.color, raw.depth),
        });
    }
    let samples = raw
        .bytes
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .collect();
    Ok((raw.width, raw.height, samples))
}

pub fn save_u16_gray(path: impl AsRef<Path>, width: usize, height: usize, samples: &[u16]) -> Result<()> {
    let bytes: Vec<u8> = samples.iter().flat_map(|s| s.to_be_bytes()).collect();
    write_png(
        path.as_ref(),
        width,
        height,
        ColorType::Grayscale,
        BitDepth::Sixteen,
        &bytes,
    )
}

fn check_scale(depth_scale: f64) -> Result<()> {
    if !(depth_scale > 0.0 && depth_scale.is_finite()) {
        return Err(Error::param("depth_scale", format!("{depth_scale} must be positive")));
    }
    Ok(())
}

/// Loads a 16-bit depth PNG; sample `u` becomes `u / depth_scale` meters and
/// `0` becomes a hole.
pub fn load_depth(path: impl AsRef<Path>, depth_scale: f64) -> Result<DepthMap> {
    check_scale(depth_scale)?;
    let (w, h, samples) = load_u16_gray(path)?;
    let meters = samples.iter().map(|&u| f64::from(u) / depth_scale).collect();
    DepthMap::from_meters(w, h, meters)
}

/// Quantizes a depth map to 16-bit storage units with round-half-up.
pub fn quantize_depth(map: &DepthMap, depth_scale: f64) -> Result<Vec<u16>> {
    check_scale(depth_scale)?;
    let w = map.width();
    let mut out = Vec::with_capacity(map.len());
    for (i, &v) in map.values().iter().enumerate() {
        if !map.is_valid(i) {
            out.push(0);
            continue;
        }
        let units = (v * depth_scale + 0.5).floor();
        if units > f64::from(u16::MAX) {
            return Err(Error::DepthOverflow {
                x: i % w,
                y: i / w,
                value: v,
                scale: depth_scale,
            });
        }
        // A valid pixel that rounds to zero would read back as a hole.
        out.push(units.max(1.0) as u16);
    }
    Ok(out)
}

/// Writes a 16-bit depth PNG; holes are stored as `0`, valid pixels as
/// `round_half_up(value * depth_scale)`.
pub fn save_depth(map: &DepthMap, path: impl AsRef<Path>, depth_scale: f64) -> Result<()> {
    let samples = quantize_depth(map, depth_scale)?;
    save_u16_gray(path, map.width(), map.height(), &samples)
}

/// Loads an 8-bit RGB PNG. Grayscale and RGBA inputs are rejected.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<ImageRGB> {
    let path = path.as_ref();
    let raw = read_png(path)?;
    if raw.color != ColorType::Rgb || raw.depth != BitDepth::Eight {
        return Err(Error::UnexpectedFormat {
            path: path.to_path_buf(),
            expected: "8-bit rgb png",
            found: format!("{:?} at {:?}", raw.color, raw.depth),
        });
    }
    let pixels = raw.bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    ImageRGB::new(raw.width, raw.height, pixels)
}

pub fn save_rgb(img: &ImageRGB, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    write_png(
        path.as_ref(),
        img.width(),
        img.height(),
        ColorType::Rgb,
        BitDepth::Eight,
        &bytes,
    )
}
