use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use contract_iv::exec::Exec;
use contract_iv::harness::{run_preset, ExperimentConfig, Preset};

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("replications");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        let mut cfg = ExperimentConfig::preset(Preset::FigGmmContractIv);
        cfg.horizons = vec![1_000, 3_162, 10_000];
        cfg.exec = exec;
        group.bench_with_input(BenchmarkId::new("fig-gmm-contract-iv", name), &cfg, |b, cfg| {
            b.iter(|| run_preset(cfg).expect("preset runs"))
        });
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
