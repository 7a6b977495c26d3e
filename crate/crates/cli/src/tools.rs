use std::collections::HashSet;

use anyhow::{bail, Context, Result};
use camdepth_core::gfilter::guided_filter_depth_by;
use camdepth_core::traj::{smoothness_csv, SmoothnessRow};
use camdepth_core::{
    backproject, guided_filter_depth, load_depth, load_manifest, load_rgb, load_traj,
    luminance, save_depth, write_ply, Error, GuidedFilterParams, Intrinsics,
};

use crate::config::RunConfig;
use crate::{create_dir, pick_path, CloudArgs, GfilterArgs, Outcome, TrajArgs, ValidateArgs};

pub fn gfilter(a: &GfilterArgs) -> Result<Outcome> {
    let params = GuidedFilterParams {
        radius: a.radius,
        epsilon: a.eps,
        min_valid: a.min_valid,
    };
    let input = load_depth(&a.input, a.depth_scale)?;
    let out = match load_depth(&a.guide, a.depth_scale) {
        Ok(guide) => guided_filter_depth(&guide, &input, &params)?,
        // 8-bit color guides filter against their luminance
        Err(Error::UnexpectedFormat { .. }) => {
            guided_filter_depth_by(&luminance(&load_rgb(&a.guide)?), &input, &params)?
        }
        Err(e) => return Err(e.into()),
    };
    save_depth(&out, &a.out, a.depth_scale)?;
    Ok(Outcome::default())
}

pub fn cloud(a: &CloudArgs) -> Result<Outcome> {
    let k = Intrinsics::load_json(&a.intrinsics)?;
    let depth = load_depth(&a.depth, a.depth_scale.unwrap_or(k.depth_scale))?;
    let rgb = a.rgb.as_ref().map(load_rgb).transpose()?;
    let cloud = backproject(&depth, &k, rgb.as_ref())?;
    write_ply(&cloud, &a.out, a.mode)?;
    println!("{} points -> {}", cloud.len(), a.out.display());
    Ok(Outcome::default())
}

pub fn traj(a: &TrajArgs) -> Result<Outcome> {
    let mut rows = Vec::with_capacity(a.files.len());
    let mut seen = HashSet::new();
    for path in &a.files {
        let method = path
            .file_stem()
            .with_context(|| format!("{} has no file name", path.display()))?
            .to_string_lossy()
            .into_owned();
        if !seen.insert(method.clone()) {
            bail!("two trajectory files are both named `{method}`");
        }
        let t = load_traj(path, a.rate)?;
        rows.push(SmoothnessRow::compute(method, &t)?);
    }
    let csv = smoothness_csv(&rows)?;
    create_dir(&a.out)?;
    std::fs::write(a.out.join("smoothness.json"), serde_json::to_string_pretty(&rows)?)?;
    std::fs::write(a.out.join("smoothness.csv"), csv)?;
    Ok(Outcome::default())
}

pub fn validate(a: &ValidateArgs, cfg: &RunConfig) -> Result<Outcome> {
    let path = pick_path(a.manifest.as_ref(), cfg.manifest.as_ref(), "manifest")?;
    let m = load_manifest(&path)?;
    let mut outcome = Outcome::default();
    for miss in &m.validation.missing {
        outcome.failures.push((
            miss.id.clone(),
            format!("{} not found: {}", miss.field, miss.path.display()),
        ));
    }
    println!(
        "{}: {} samples, {} intrinsics, {} missing files",
        path.display(),
        m.samples.len(),
        m.intrinsics.len(),
        m.validation.missing.len()
    );
    Ok(outcome)
}
