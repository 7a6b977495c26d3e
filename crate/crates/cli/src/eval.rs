use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use camdepth_core::metrics::{binned_accuracy, BinnedReport, METRIC_COLUMNS};
use camdepth_core::noise::fill_holes_nearest;
use camdepth_core::{depth_metrics, load_depth, load_manifest, DepthMap, MetricReport, DEFAULT_DEPTH_SCALE};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ReportFormat, RunConfig};
use crate::{create_dir, pick_path, thread_pool, Cli, EvalArgs, Outcome, PredField};

struct Item {
    id: String,
    pred: Option<PathBuf>,
    gt: Option<PathBuf>,
    scale: f64,
}

#[derive(Serialize)]
struct SampleEntry {
    id: String,
    #[serde(flatten)]
    metrics: MetricReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<BinnedReport>,
}

#[derive(Serialize)]
struct Unmatched {
    id: String,
    missing: &'static str,
}

#[derive(Serialize)]
struct Failed {
    id: String,
    error: String,
}

#[derive(Serialize)]
struct Report {
    columns: [&'static str; 5],
    policy: camdepth_core::ValidPolicy,
    fill: bool,
    samples: Vec<SampleEntry>,
    aggregate: Option<MetricReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<BinnedReport>,
    unmatched: Vec<Unmatched>,
    failed: Vec<Failed>,
}

fn png_stems(dir: &Path) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "png") {
            if let Some(stem) = path.file_stem() {
                out.insert(stem.to_string_lossy().into_owned());
            }
        }
    }
    Ok(out)
}

fn collect_items(args: &EvalArgs, cfg: &RunConfig) -> Result<Vec<Item>> {
    if let Some(gt_dir) = &args.gt_dir {
        let pred_dir = args.pred_dir.as_ref().expect("clap enforces --pred-dir");
        let gts = png_stems(gt_dir)?;
        let preds = png_stems(pred_dir)?;
        let scale = args.depth_scale.unwrap_or(DEFAULT_DEPTH_SCALE);
        return Ok(gts
            .union(&preds)
            .map(|id| Item {
                pred: preds.contains(id).then(|| pred_dir.join(format!("{id}.png"))),
                gt: gts.contains(id).then(|| gt_dir.join(format!("{id}.png"))),
                id: id.clone(),
                scale,
            })
            .collect());
    }
    let path = pick_path(args.manifest.as_ref(), cfg.manifest.as_ref(), "manifest or --gt-dir")?;
    let m = load_manifest(&path)?;
    Ok(m.samples
        .iter()
        .map(|s| Item {
            id: s.id.clone(),
            pred: match (&args.pred_dir, args.pred_field) {
                (Some(dir), _) => Some(dir.join(format!("{}.png", s.id))),
                (None, PredField::Pred) => s.pred_depth_path.clone(),
                (None, PredField::Camera) => s.camera_depth_path.clone(),
            },
            gt: Some(s.gt_depth_path.clone()),
            scale: args.depth_scale.unwrap_or_else(|| m.depth_scale_for(s)),
        })
        .collect())
}

struct Scored {
    report: MetricReport,
    bins: Option<BinnedReport>,
    /// Jointly valid (pred, gt) pairs, kept for the pooled bin table.
    pairs: Vec<(f64, f64)>,
}

fn score(args: &EvalArgs, pred: &Path, gt: &Path, scale: f64) -> Result<Scored> {
    let gt = load_depth(gt, scale)?;
    let mut pred = load_depth(pred, scale)?;
    if args.fill {
        pred = fill_holes_nearest(&pred).context("filling prediction")?;
    }
    let report = depth_metrics(&pred, &gt, args.policy)?;
    let (bins, pairs) = match args.bins {
        Some(w) => {
            let b = binned_accuracy(&pred, &gt, w, args.max_range)?;
            let pairs = gt
                .iter_valid()
                .filter_map(|(i, z)| Some((pred.get(i)?, z)))
                .collect();
            (Some(b), pairs)
        }
        None => (None, Vec::new()),
    };
    Ok(Scored { report, bins, pairs })
}

fn pooled_bins(args: &EvalArgs, scored: &[&Scored]) -> Result<Option<BinnedReport>> {
    let Some(w) = args.bins else { return Ok(None) };
    let (pred, gt): (Vec<f64>, Vec<f64>) = scored.iter().flat_map(|s| s.pairs.iter().copied()).unzip();
    if gt.is_empty() {
        return Ok(None);
    }
    let n = gt.len();
    let pred = DepthMap::from_meters(n, 1, pred)?;
    let gt = DepthMap::from_meters(n, 1, gt)?;
    Ok(Some(binned_accuracy(&pred, &gt, w, args.max_range)?))
}

fn metrics_csv(report: &Report) -> String {
    let mut s = format!("sample,{}\n", METRIC_COLUMNS.join(","));
    let mut row = |name: &str, m: &MetricReport| {
        let cells: Vec<String> = m.metric_values().iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{name},{}", cells.join(","));
    };
    for e in &report.samples {
        row(&e.id, &e.metrics);
    }
    if let Some(a) = &report.aggregate {
        row("aggregate", a);
    }
    s
}

fn coverage_csv(report: &Report) -> String {
    let mut s = String::from("sample,coverage,n_pixels\n");
    for e in &report.samples {
        let _ = writeln!(s, "{},{},{}", e.id, e.metrics.coverage, e.metrics.n_pixels);
    }
    if let Some(a) = &report.aggregate {
        let _ = writeln!(s, "aggregate,{},{}", a.coverage, a.n_pixels);
    }
    s
}

pub fn run(args: &EvalArgs, cfg: &RunConfig, cli: &Cli) -> Result<Outcome> {
    if let Some(w) = args.bins {
        if !(w > 0.0) {
            bail!("--bins must be positive");
        }
    }
    let out = pick_path(args.out.as_ref(), cfg.output.as_ref(), "output directory")?;
    let formats = cfg.formats_or(&args.format);
    let workers = cfg.resolve_workers(cli.workers)?;
    let items = collect_items(args, cfg)?;

    let results: Vec<Option<Result<Scored>>> = thread_pool(workers)?.install(|| {
        items
            .par_iter()
            .map(|it| match (&it.pred, &it.gt) {
                (Some(p), Some(g)) => Some(score(args, p, g, it.scale)),
                _ => None,
            })
            .collect()
    });

    let mut report = Report {
        columns: METRIC_COLUMNS,
        policy: args.policy,
        fill: args.fill,
        samples: Vec::new(),
        aggregate: None,
        bins: None,
        unmatched: Vec::new(),
        failed: Vec::new(),
    };
    let mut scored = Vec::new();
    for (it, r) in items.iter().zip(&results) {
        match r {
            None => report.unmatched.push(Unmatched {
                id: it.id.clone(),
                missing: if it.pred.is_none() { "prediction" } else { "ground truth" },
            }),
            Some(Err(e)) => report.failed.push(Failed {
                id: it.id.clone(),
                error: format!("{e:#}"),
            }),
            Some(Ok(s)) => {
                report.samples.push(SampleEntry {
                    id: it.id.clone(),
                    metrics: s.report,
                    bins: s.bins.clone(),
                });
                scored.push(s);
            }
        }
    }
    let per_sample: Vec<MetricReport> = report.samples.iter().map(|e| e.metrics).collect();
    report.aggregate = MetricReport::mean_of(&per_sample);
    report.bins = pooled_bins(args, &scored)?;

    create_dir(&out)?;
    let write = |name: &str, body: &str| {
        let p = out.join(name);
        std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))
    };
    if formats.contains(&ReportFormat::Json) {
        write("report.json", &serde_json::to_string_pretty(&report)?)?;
    }
    if formats.contains(&ReportFormat::Csv) {
        write("metrics.csv", &metrics_csv(&report))?;
        write("coverage.csv", &coverage_csv(&report))?;
        if let Some(b) = &report.bins {
            write("bins.csv", &b.to_csv())?;
        }
    }

    let mut outcome = Outcome::default();
    for u in &report.unmatched {
        outcome.failures.push((u.id.clone(), format!("no {} found", u.missing)));
    }
    for f in report.failed {
        outcome.failures.push((f.id, f.error));
    }
    Ok(outcome)
}
