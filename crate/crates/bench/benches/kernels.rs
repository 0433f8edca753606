use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;
use topoguard::metrics::report;
use topoguard::{dilate, edt, key_voxels, Connectivity, LabelTable, Spacing};
use topoguard_bench::{blocky_labels, punched_shell, six_constraints, sparse_mask};

fn bench_dilate(c: &mut Criterion) {
    let mut group = c.benchmark_group("dilate");
    for side in [64, 128] {
        let mask = sparse_mask(side, 0.05, 1);
        group.throughput(Throughput::Elements(mask.dims().len() as u64));
        for conn in Connectivity::ALL {
            group.bench_with_input(BenchmarkId::new(format!("{conn:?}"), side), &mask, |b, m| {
                b.iter(|| dilate(black_box(m), conn))
            });
        }
    }
    group.finish();
}

fn bench_edt(c: &mut Criterion) {
    let mut group = c.benchmark_group("edt");
    group.sample_size(20);
    for side in [64, 128] {
        let mask = sparse_mask(side, 0.001, 2);
        group.throughput(Throughput::Elements(mask.dims().len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(side), &mask, |b, m| {
            b.iter(|| edt(black_box(m), Spacing::new(1.5, 0.8, 0.8).unwrap()))
        });
    }
    group.finish();
}

fn bench_key_voxels(c: &mut Criterion) {
    let spec = six_constraints();
    let mut group = c.benchmark_group("key_voxels");
    group.sample_size(10);
    for side in [64, 128, 256] {
        let g = blocky_labels(side, 8, 3);
        group.throughput(Throughput::Elements(g.dims().len() as u64));
        group.bench_with_input(BenchmarkId::new("blocky", side), &g, |b, g| {
            b.iter(|| key_voxels(black_box(g), &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_metrics(c: &mut Criterion) {
    let gt = punched_shell(96);
    let pred = blocky_labels(96, 12, 4);
    let table = LabelTable::whs();
    let mut group = c.benchmark_group("metrics");
    group.sample_size(10);
    group.bench_function("report_96", |b| b.iter(|| report(black_box(&pred), &gt, &table).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_dilate, bench_edt, bench_key_voxels, bench_metrics);
criterion_main!(benches);
