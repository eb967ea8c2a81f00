//! Seeded Monte Carlo experiment drivers with persisted results.
//!
//! Every experiment is a pure function of its config (which embeds the
//! master seed): realization `i` draws its randomness from the derived
//! stream `hash(master_seed, i)`, the parallel stage only maps realizations
//! to records, and all reductions run sequentially over the index-ordered
//! records. Re-running a config byte-identically reproduces every persisted
//! file regardless of worker count.

mod cdf;
mod config;
mod fig1;
mod persist;
mod sir_ber;
mod table1;

pub use cdf::{run_cdf, CdfCase, CdfResult};
pub use config::{ExperimentConfig, GainModel};
pub use fig1::{run_fig1, Fig1Result, ReceiverTrace};
pub use persist::{
    config_hash, prepare_output_dir, read_manifest, write_manifest, RunManifest,
};
pub use sir_ber::{run_sir_ber_series, SirBerResult, SymbolRecord};
pub use table1::{run_table1, Table1Result, Table1Row};
