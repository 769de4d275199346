use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qnet_bench::Fixture;
use qnet_core::machine::library::{copier, oscillator, up_down};
use qnet_core::verify::{rs_network, verify_theorem4};

fn compiled_networks(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_30_cycles");
    for (name, scm) in [("oscillator", oscillator()), ("copier", copier()), ("up_down_4", up_down(4, 8))] {
        for normalized in [false, true] {
            let fx = Fixture::compiled(&scm, normalized);
            let id = BenchmarkId::new(name, if normalized { "normalized" } else { "plain" });
            g.bench_function(id, |b| b.iter(|| black_box(fx.run(90))));
        }
    }
    g.finish();
}

fn crossing_network(c: &mut Criterion) {
    let mut g = c.benchmark_group("crossing_network");
    for m in [4u64, 64] {
        let fx = Fixture::from_doc(&rs_network(m));
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| b.iter(|| black_box(fx.run(20 * m))));
    }
    g.finish();
}

fn lockstep(c: &mut Criterion) {
    c.bench_function("verify_copier_100_cycles", |b| {
        b.iter(|| black_box(verify_theorem4(&copier(), 100, false).unwrap().passed()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = compiled_networks, crossing_network, lockstep
}
criterion_main!(benches);
