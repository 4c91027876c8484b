//! Batch curvature evaluation: rayon-backed `map_collect` against the
//! sequential reference path on the same inputs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lagcurv::flow::JetOptions;
use lagcurv::parallel::{map_collect, map_collect_sequential};
use lagcurv::reduction::reduced_curvature;
use lagcurv::suites::{random_symmetric_instance, rng, SymmetricInstance, SymmetryKind};

fn instances(count: usize) -> Vec<SymmetricInstance> {
    let mut r = rng(11);
    (0..count)
        .map(|i| {
            let kind = if i % 2 == 0 { SymmetryKind::Rotation } else { SymmetryKind::RotationMomentum };
            random_symmetric_instance(&mut r, 3, kind).expect("instance")
        })
        .collect()
}

/// Reduced Ricci curvature from a finite-difference jet (no oracle), the
/// expensive path of a curvature sweep.
fn reduced_ricci(inst: &SymmetricInstance) -> f64 {
    reduced_curvature(inst.model.as_ref(), &inst.integrals, &inst.lambda0, false, &JetOptions::default())
        .map(|r| r.reduced_ricci)
        .unwrap_or(f64::NAN)
}

fn batch_curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduced_ricci_batch");
    group.sample_size(10);
    for count in [8usize, 32] {
        let batch = instances(count);
        group.bench_with_input(BenchmarkId::new("parallel", count), &batch, |b, batch| {
            b.iter(|| map_collect(black_box(batch), reduced_ricci))
        });
        group.bench_with_input(BenchmarkId::new("sequential", count), &batch, |b, batch| {
            b.iter(|| map_collect_sequential(black_box(batch), reduced_ricci))
        });
    }
    group.finish();
}

criterion_group!(benches, batch_curvature);
criterion_main!(benches);
