//! Test helpers. PNG reading and writing here goes through the `png` crate
//! directly so the tests do not lean on the library's own codecs.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn camdepth() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_camdepth"));
    c.env_remove("CAMDEPTH_WORKERS");
    c
}

pub fn run(args: &[&str]) -> Output {
    camdepth().args(args).output().expect("spawn camdepth")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn write_gray16(path: &Path, w: usize, h: usize, samples: &[u16]) {
    let mut enc = png::Encoder::new(BufWriter::new(File::create(path).unwrap()), w as u32, h as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let bytes: Vec<u8> = samples.iter().flat_map(|s| s.to_be_bytes()).collect();
    enc.write_header().unwrap().write_image_data(&bytes).unwrap();
}

pub fn write_rgb8(path: &Path, w: usize, h: usize, px: &[[u8; 3]]) {
    let mut enc = png::Encoder::new(BufWriter::new(File::create(path).unwrap()), w as u32, h as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = px.iter().flatten().copied().collect();
    enc.write_header().unwrap().write_image_data(&bytes).unwrap();
}

pub fn read_gray16(path: &Path) -> (usize, usize, Vec<u16>) {
    let mut dec = png::Decoder::new(std::io::BufReader::new(File::open(path).unwrap()));
    dec.set_transformations(png::Transformations::IDENTITY);
    let mut reader = dec.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!(info.color_type, png::ColorType::Grayscale);
    assert_eq!(info.bit_depth, png::BitDepth::Sixteen);
    let samples = buf[..info.buffer_size()]
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .collect();
    (info.width as usize, info.height as usize, samples)
}

/// Random depth in millimetres with roughly `hole_frac` zeros.
pub fn random_depth_mm(rng: &mut StdRng, n: usize, hole_frac: f64) -> Vec<u16> {
    (0..n)
        .map(|_| if rng.random::<f64>() < hole_frac { 0 } else { rng.random_range(300..6000) })
        .collect()
}

/// Writes `n` random samples and a manifest; returns the manifest path.
pub fn make_dataset(dir: &Path, n: usize, w: usize, h: usize, seed: u64) -> PathBuf {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut manifest = String::from(
        "[scene]\nname = \"synthetic\"\n\n[intrinsics.cam]\nfx = 60.0\nfy = 60.0\n",
    );
    manifest.push_str(&format!(
        "cx = {}\ncy = {}\nwidth = {w}\nheight = {h}\ndepth_scale = 1000.0\n",
        (w as f64 - 1.0) / 2.0,
        (h as f64 - 1.0) / 2.0
    ));
    for k in 0..n {
        let id = format!("s{k:02}");
        // smooth slanted planes with a box in front, plus a few holes
        let (a, b, c) = (rng.random_range(800.0..2500.0), rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let depth: Vec<u16> = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let mut z = a + b * x + c * y;
                if x > w as f64 * 0.3 && x < w as f64 * 0.6 && y > h as f64 * 0.4 {
                    z *= 0.6;
                }
                if rng.random::<f64>() < 0.05 {
                    0
                } else {
                    z as u16
                }
            })
            .collect();
        let rgb: Vec<[u8; 3]> = (0..w * h).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        write_gray16(&dir.join(format!("{id}_gt.png")), w, h, &depth);
        write_rgb8(&dir.join(format!("{id}_rgb.png")), w, h, &rgb);
        manifest.push_str(&format!(
            "\n[[sample]]\nid = \"{id}\"\nrgb = \"{id}_rgb.png\"\ngt_depth = \"{id}_gt.png\"\n"
        ));
    }
    let path = dir.join("manifest.toml");
    std::fs::write(&path, manifest).unwrap();
    path
}

/// Every file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Parses a CSV with a header row into (header, rows).
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().map(|l| l.split(',').map(str::to_owned).collect::<Vec<_>>());
    let header = lines.next().unwrap();
    (header, lines.collect())
}
