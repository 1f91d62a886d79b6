use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ferriswheel::diffraction::{decompose_orders, initial_packet};
use ferriswheel::optics::mask_field;
use ferriswheel::Propagator;
use ferriswheel_bench::{grid, imprint_params, packet, spiral_mask, K_DB};

fn bench_mask_field(c: &mut Criterion) {
    let mask = spiral_mask();
    let mut group = c.benchmark_group("mask_field");
    for n in [256, 512] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid(n), |b, &spec| {
            b.iter(|| mask_field(&mask, spec, 0.0).unwrap())
        });
    }
    group.finish();
}

fn bench_decompose_orders(c: &mut Criterion) {
    let params = imprint_params();
    let mut group = c.benchmark_group("decompose_orders");
    group.sample_size(20);
    for n in [256, 512] {
        let psi0 = initial_packet(&packet(), grid(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi0, |b, psi0| {
            b.iter(|| decompose_orders(psi0, &params, None).unwrap())
        });
    }
    group.finish();
}

fn bench_propagate(c: &mut Criterion) {
    let params = imprint_params();
    let mut group = c.benchmark_group("propagate");
    group.sample_size(20);
    for n in [256, 512] {
        let psi0 = initial_packet(&packet(), grid(n)).unwrap();
        let set = decompose_orders(&psi0, &params, None).unwrap();
        let order = set.get(1).unwrap().field.clone();
        let propagator = Propagator::new(grid(n));
        group.bench_with_input(BenchmarkId::from_parameter(n), &order, |b, order| {
            b.iter(|| propagator.propagate(order, K_DB, 0.5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mask_field, bench_decompose_orders, bench_propagate);
criterion_main!(benches);
