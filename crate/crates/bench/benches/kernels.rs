use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use leewave_bench::{positions, reference};
use leewave_core::verifier::{euler_residual, verify_nodes, Tolerances};
use leewave_core::vorticity::{dgamma_dz, vorticity_vec};

fn kernels(c: &mut Criterion) {
    let (atm, nodes) = reference();
    let flow = atm.flow();
    let points = positions(&atm, &nodes);
    let n = &nodes[0];

    c.bench_function("flow_map", |b| {
        b.iter(|| flow.flow_map(black_box(&n.label), black_box(n.t)))
    });
    c.bench_function("jacobian", |b| {
        b.iter(|| flow.jacobian(black_box(&n.label), black_box(n.t)))
    });
    c.bench_function("invert_flow_map", |b| {
        b.iter(|| flow.invert_flow_map(black_box(&points[0].0), black_box(points[0].1)))
    });
    c.bench_function("vorticity_vec", |b| {
        b.iter(|| vorticity_vec(flow, black_box(&n.label), black_box(n.t)))
    });
    c.bench_function("dgamma_dz", |b| {
        b.iter(|| dgamma_dz(flow, black_box(&n.label), black_box(n.t)))
    });
    c.bench_function("euler_residual", |b| {
        b.iter(|| euler_residual(&atm, black_box(&n.label), black_box(n.t)))
    });

    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    group.bench_function("invert_1000", |b| {
        b.iter(|| {
            points
                .iter()
                .map(|(p, t)| flow.invert_flow_map(p, *t).unwrap().r)
                .sum::<f64>()
        })
    });
    group.bench_function("verify_1000", |b| {
        b.iter(|| verify_nodes(&atm, black_box(&nodes), &Tolerances::default(), "reference", None).passed)
    });
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
