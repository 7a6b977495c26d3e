use camdepth_core::noise::fill_holes_nearest;
use camdepth_core::{depth_metrics, guided_filter, DepthMap, GuidedFilterParams, ScalarField, ValidPolicy};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const W: usize = 640;
const H: usize = 480;

// cheap deterministic texture, no RNG needed
fn wave(i: usize, k: f64) -> f64 {
    let (x, y) = ((i % W) as f64, (i / W) as f64);
    1.5 + 0.5 * (k * x).sin() * (0.7 * k * y).cos()
}

fn depth(hole_every: usize) -> DepthMap {
    DepthMap::from_meters(W, H, (0..W * H).map(|i| if i % hole_every == 0 { 0.0 } else { wave(i, 0.05) }).collect()).unwrap()
}

fn gfilter(c: &mut Criterion) {
    let g = ScalarField::dense(W, H, (0..W * H).map(|i| wave(i, 0.03)).collect()).unwrap();
    let a = ScalarField::dense(W, H, (0..W * H).map(|i| wave(i, 0.11)).collect()).unwrap();
    let mut group = c.benchmark_group("guided_filter_640x480");
    group.sample_size(20);
    for r in [2, 8, 32] {
        let p = GuidedFilterParams::new(r, 1e-3);
        group.bench_with_input(BenchmarkId::from_parameter(r), &p, |b, p| b.iter(|| guided_filter(black_box(&g), black_box(&a), p).unwrap()));
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let gt = depth(13);
    let pred = gt.scaled(1.05);
    c.bench_function("depth_metrics_640x480", |b| {
        b.iter(|| depth_metrics(black_box(&pred), black_box(&gt), ValidPolicy::Intersection).unwrap())
    });
}

fn fill(c: &mut Criterion) {
    let d = depth(3);
    c.bench_function("fill_holes_nearest_640x480", |b| b.iter(|| fill_holes_nearest(black_box(&d)).unwrap()));
}

criterion_group!(benches, gfilter, metrics, fill);
criterion_main!(benches);
