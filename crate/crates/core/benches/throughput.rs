//! Monte Carlo throughput benchmarks.
//!
//! Run with the default features for the rayon path and with
//! `--no-default-features` for the sequential fallback; comparing the two
//! reports shows the parallel speedup:
//!
//! ```text
//! cargo bench -p upc-core
//! cargo bench -p upc-core --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use upc_core::experiments::{run_table1, ExperimentConfig};
use upc_core::{mmse_efficiency, FixedPointSettings, SnrProfile};

fn bench_table_cells(c: &mut Criterion) {
    let mode = if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    };
    let mut group = c.benchmark_group("table1_cell");
    group.sample_size(10);
    for (n, alpha) in [(64usize, 0.25f64), (64, 0.75)] {
        let config = ExperimentConfig {
            gamma_star: Some(6.4),
            realizations: 300,
            sweep_n: vec![n],
            sweep_alpha: vec![alpha],
            seed: 1,
            ..Default::default()
        };
        group.bench_with_input(
            BenchmarkId::new(mode, format!("n{n}_a{alpha}")),
            &config,
            |b, cfg| b.iter(|| run_table1(cfg).unwrap()),
        );
    }
    group.finish();
}

fn bench_mmse_fixed_point(c: &mut Criterion) {
    let profile = SnrProfile::new((1..=64).map(|i| 0.3 * i as f64).collect(), 0.5).unwrap();
    let settings = FixedPointSettings::default();
    c.bench_function("mmse_efficiency_64_users", |b| {
        b.iter(|| mmse_efficiency(&profile, &settings).unwrap())
    });
}

criterion_group!(benches, bench_table_cells, bench_mmse_fixed_point);
criterion_main!(benches);
