use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use camdepth_core::{
    load_depth, load_manifest, load_rgb, save_depth, synthesize, DatasetManifest,
    NoisePipelineConfig, SampleRecord,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::{create_dir, pick_path, thread_pool, Cli, Outcome, SynthArgs};

struct SampleResult {
    radius: Option<usize>,
    valid: usize,
    millis: f64,
}

fn synth_one(
    m: &DatasetManifest,
    s: &SampleRecord,
    index: usize,
    noise: &NoisePipelineConfig,
    out: &Path,
) -> Result<SampleResult> {
    let start = Instant::now();
    let scale = m.depth_scale_for(s);
    let rgb = load_rgb(&s.rgb_path)?;
    let gt = load_depth(&s.gt_depth_path, scale)?;
    let syn = synthesize(&rgb, &gt, noise, index as u64)?;
    save_depth(&syn.depth, out.join(format!("{}.png", s.id)), scale)?;
    Ok(SampleResult {
        radius: syn.radius,
        valid: syn.depth.valid_count(),
        millis: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn default_log_path(out: &Path) -> PathBuf {
    let name = out
        .file_name()
        .map_or_else(|| "synth".into(), |n| n.to_string_lossy().into_owned());
    out.with_file_name(format!("{name}.log.jsonl"))
}

pub fn run(args: &SynthArgs, cfg: &RunConfig, cli: &Cli) -> Result<Outcome> {
    let manifest_path = pick_path(args.manifest.as_ref(), cfg.manifest.as_ref(), "manifest")?;
    let out = pick_path(args.out.as_ref(), cfg.output.as_ref(), "output directory")?;
    let workers = cfg.resolve_workers(cli.workers)?;
    let noise = cfg.noise_with_seed(cli.seed);
    noise.validate()?;

    let manifest = load_manifest(&manifest_path)?;
    create_dir(&out)?;
    let log_path = args.log.clone().unwrap_or_else(|| default_log_path(&out));

    let start = Instant::now();
    let results: Vec<Result<SampleResult>> = thread_pool(workers)?.install(|| {
        manifest
            .samples
            .par_iter()
            .enumerate()
            .map(|(i, s)| synth_one(&manifest, s, i, &noise, &out))
            .collect()
    });

    let mut log = Vec::new();
    let mut line = |v: serde_json::Value| {
        log.push(v.to_string());
    };
    line(json!({
        "event": "start",
        "manifest": manifest_path.display().to_string(),
        "output": out.display().to_string(),
        "seed": noise.seed,
        "workers": workers,
        "samples": manifest.samples.len(),
    }));
    let mut outcome = Outcome::default();
    for (i, (s, r)) in manifest.samples.iter().zip(&results).enumerate() {
        match r {
            Ok(r) => line(json!({
                "event": "sample",
                "index": i,
                "id": s.id,
                "status": "ok",
                "radius": r.radius,
                "valid_pixels": r.valid,
                "ms": r.millis,
            })),
            Err(e) => {
                let msg = format!("{e:#}");
                line(json!({
                    "event": "sample",
                    "index": i,
                    "id": s.id,
                    "status": "error",
                    "error": msg,
                }));
                outcome.failures.push((s.id.clone(), msg));
            }
        }
    }
    let failed: Vec<&str> = outcome.failures.iter().map(|(id, _)| id.as_str()).collect();
    line(json!({
        "event": "end",
        "failed": failed,
        "ms": start.elapsed().as_secs_f64() * 1e3,
    }));

    let mut f = std::fs::File::create(&log_path)
        .with_context(|| format!("creating run log {}", log_path.display()))?;
    for l in &log {
        writeln!(f, "{l}")?;
    }
    Ok(outcome)
}
