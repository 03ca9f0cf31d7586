//! Parallel lane vs. forced-sequential lane on the two heaviest kernels:
//! the curvature pinching scan (independent per-sample work) and the
//! self-linking Gauss integral (a double sum reduced row by row).
//!
//! Both lanes run the same ordered reductions, so the comparison is purely
//! about throughput; `lanes.rs` in the test suite pins bitwise equality.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use reeb_lab_core::knot::{self, TransverseKnot};
use reeb_lab_core::par;
use reeb_lab_core::surface::StarShapedSurface;

fn bench_pinching_scan(c: &mut Criterion) {
    let surface = StarShapedSurface::ellipsoid(1.0, 1.2).expect("ellipsoid");
    let mut group = c.benchmark_group("pinching_scan_2048");
    group.bench_function("parallel", |b| {
        par::force_sequential(false);
        b.iter(|| black_box(&surface).pinching_scan(2048).expect("scan"))
    });
    group.bench_function("sequential", |b| {
        par::force_sequential(true);
        b.iter(|| black_box(&surface).pinching_scan(2048).expect("scan"))
    });
    group.finish();
    par::force_sequential(false);
}

fn bench_self_linking(c: &mut Criterion) {
    let hopf = TransverseKnot::hopf().expect("hopf");
    let mut group = c.benchmark_group("self_linking_hopf_512");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        par::force_sequential(false);
        b.iter(|| knot::self_linking_detailed(black_box(&hopf), 1e-2, 512).expect("linking"))
    });
    group.bench_function("sequential", |b| {
        par::force_sequential(true);
        b.iter(|| knot::self_linking_detailed(black_box(&hopf), 1e-2, 512).expect("linking"))
    });
    group.finish();
    par::force_sequential(false);
}

criterion_group!(benches, bench_pinching_scan, bench_self_linking);
criterion_main!(benches);
