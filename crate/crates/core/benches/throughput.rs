//! Batched-protocol throughput: data-parallel engines against the
//! sequential fallback, across batch sizes.

use b3pc::proto::{ExecMode, Kind};
use b3pc::ring::RingParams;
use b3pc::sim::{run_protocol, FullSeeds, SimConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn sim_config(exec: ExecMode) -> SimConfig {
    let params = RingParams::new(40, 16, 8).unwrap();
    let mut cfg = SimConfig::new(params, FullSeeds::from_master(b"bench"));
    cfg.exec = exec;
    cfg
}

fn bench_kind(c: &mut Criterion, name: &str, kind: Kind, width: usize, batches: &[usize]) {
    let mut group = c.benchmark_group(name);
    for &batch in batches {
        let inputs: Vec<Vec<u64>> = (0..batch)
            .map(|i| (0..width).map(|j| ((i * 37 + j * 11 + 5) % 60_000) as u64).collect())
        .collect();
        group.throughput(Throughput::Elements(batch as u64));
        for (label, exec) in [("seq", ExecMode::Sequential), ("par", ExecMode::Parallel)] {
            let cfg = sim_config(exec);
            group.bench_with_input(BenchmarkId::new(label, batch), &inputs, |b, inputs| {
                b.iter(|| run_protocol(&cfg, &kind, inputs, None).unwrap());
            });
        }
    }
    group.finish();
}

fn benches(c: &mut Criterion) {
    bench_kind(c, "drelu", Kind::DRelu, 1, &[16, 256, 4096]);
    bench_kind(c, "relu", Kind::Relu, 1, &[16, 256, 4096]);
    bench_kind(c, "max9", Kind::MaxN, 9, &[16, 128]);
}

criterion_group!(benches_group, benches);
criterion_main!(benches_group);
