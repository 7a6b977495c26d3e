//! Pinhole back-projection and PLY export.
//!
//! Camera frame: +z forward, +x right, +y down. Pixel `(u, v)` is the pixel
//! centre at integer coordinates.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ensure_same_dims, DepthMap, ImageRGB, Intrinsics};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Lifts every valid pixel to a 3D point; colors are copied when `rgb` is given.
pub fn backproject(d: &DepthMap, k: &Intrinsics, rgb: Option<&ImageRGB>) -> Result<PointCloud> {
    k.validate()?;
    ensure_same_dims(d.dims(), (k.width, k.height))?;
    if let Some(img) = rgb {
        ensure_same_dims(img.dims(), d.dims())?;
    }
    let w = d.width();
    let mut points = Vec::with_capacity(d.valid_count());
    let mut colors = rgb.map(|_| Vec::with_capacity(d.valid_count()));
    for (i, z) in d.iter_valid() {
        let (u, v) = ((i % w) as f64, (i / w) as f64);
        points.push([(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z]);
        if let (Some(c), Some(img)) = (colors.as_mut(), rgb) {
            c.push(img.pixel(i));
        }
    }
    Ok(PointCloud { points, colors })
}

/// Projects points to `(u, v, z)`; every point needs `z > 0`.
pub fn project(p: &PointCloud, k: &Intrinsics) -> Result<Vec<[f64; 3]>> {
    p.points
        .iter()
        .enumerate()
        .map(|(i, &[x, y, z])| {
            if !(z > 0.0) {
                return Err(Error::param("point", format!("point {i} has z = {z}")));
            }
            Ok([k.fx * x / z + k.cx, k.fy * y / z + k.cy, z])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlyMode {
    Ascii,
    Binary,
}

impl FromStr for PlyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(PlyMode::Ascii),
            "binary" | "binary_little_endian" => Ok(PlyMode::Binary),
            other => Err(Error::Unknown {
                kind: "ply mode",
                name: other.to_owned(),
            }),
        }
    }
}

/// Serializes a cloud as PLY 1.0 with `float x, y, z` and, when present,
/// `uchar red, green, blue`.
pub fn encode_ply(p: &PointCloud, mode: PlyMode) -> Vec<u8> {
    let mut out = Vec::new();
    let format = match mode {
        PlyMode::Ascii => "ascii",
        PlyMode::Binary => "binary_little_endian",
    };
    let _ = write!(out, "ply\nformat {format} 1.0\nelement vertex {}\n", p.len());
    out.extend_from_slice(b"property float x\nproperty float y\nproperty float z\n");
    if p.colors.is_some() {
        out.extend_from_slice(b"property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    out.extend_from_slice(b"end_header\n");
    for (i, pt) in p.points.iter().enumerate() {
        let xyz = pt.map(|c| c as f32);
        let rgb = p.colors.as_ref().map(|c| c[i]);
        match mode {
            PlyMode::Ascii => {
                let _ = write!(out, "{} {} {}", xyz[0], xyz[1], xyz[2]);
                if let Some([r, g, b]) = rgb {
                    let _ = write!(out, " {r} {g} {b}");
                }
                out.push(b'\n');
            }
            PlyMode::Binary => {
                for c in xyz {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                if let Some(c) = rgb {
                    out.extend_from_slice(&c);
                }
            }
        }
    }
    out
}

pub fn write_ply(p: &PointCloud, path: impl AsRef<Path>, mode: PlyMode) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_ply(p, mode)).map_err(|e| Error::io(path, e))
}
