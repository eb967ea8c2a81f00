//! Worker-count and feature-flag independence of persisted results.
//!
//! The frozen CSV below must come out byte-identical from the rayon build
//! (`--features parallel`, default) and the sequential fallback
//! (`--no-default-features`), and under any thread count: realizations
//! derive their seeds from their index and all reductions run sequentially
//! over index-ordered records.

use upc_core::experiments::{run_table1, ExperimentConfig};
use upc_core::Receiver;

const FROZEN_SMALL_TABLE: &str = "\
n,alpha,receiver,p_sim,p_beta,p_norm,resampled,realizations
16,0.5,dec,0.435,0.6069488775696505,0.48764793262406125,0,50
16,0.5,mmse,0.575,,0.3961909312868772,0,50
";

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        receivers: vec![Receiver::Decorrelator, Receiver::Mmse],
        gamma_star: Some(6.4),
        realizations: 50,
        sweep_n: vec![16],
        sweep_alpha: vec![0.5],
        seed: 424242,
        ..Default::default()
    }
}

#[test]
fn small_table_bytes_are_frozen() {
    let result = run_table1(&small_config()).unwrap();
    assert_eq!(result.to_csv_string(), FROZEN_SMALL_TABLE);
}

#[cfg(feature = "parallel")]
#[test]
fn bytes_identical_across_thread_counts() {
    for threads in [1usize, 2, 7] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let csv = pool.install(|| run_table1(&small_config()).unwrap().to_csv_string());
        assert_eq!(csv, FROZEN_SMALL_TABLE, "thread count {threads}");
    }
}
