//! Energy-efficient power control for large randomly spread CDMA systems.
//!
//! The crate is organized around the pipeline from analysis to experiment:
//!
//! - [`efficiency`] — large-system multiuser-efficiency fixed points for the
//!   matched filter, decorrelator, MMSE, and individually optimal receivers;
//! - [`game`] — the bits-per-joule utility, the Nash-equilibrium target SIR
//!   γ* solving f(γ) = γf′(γ), and utility-loss accounting;
//! - [`upc`] — the unified power-control iteration p_k = γ*σ²/(η·h_k), its
//!   convergence/feasibility machinery, and the standard-interference-
//!   function property harness;
//! - [`system`] — finite-size DS-CDMA realizations: random spreading, linear
//!   receive filters, exact per-realization output SIRs;
//! - [`detect`] — bit decisions, including exhaustive jointly/individually
//!   optimal detectors at small user counts;
//! - [`stats`] — beta/Gaussian models of the finite-size SIR fluctuation,
//!   P_Δ probabilities, empirical CDFs, and KS distances;
//! - [`experiments`] — seeded, reproducible Monte Carlo drivers that persist
//!   CSV/JSON result sets.
//!
//! Monte Carlo fan-out uses rayon when the `parallel` feature (default) is
//! enabled and falls back to sequential execution otherwise; results are
//! bit-identical either way.

pub mod detect;
pub mod efficiency;
pub mod error;
pub mod experiments;
pub mod game;
pub mod par;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod system;
pub mod upc;

pub use efficiency::{
    dec_efficiency, io_efficiency, mf_efficiency, mmse_efficiency,
    mmse_efficiency_closed_form, receiver_efficiency, Efficiency, FixedPointSettings, Receiver, SnrProfile,
};
pub use error::{Error, Result};
pub use game::{db_to_linear, linear_to_db, EfficiencyFunction, TabulatedEfficiency, TargetSir};
pub use stats::{
    dec_beta_distribution, dec_beta_spherical, gaussian_sir_distribution, gaussian_variance,
    ks_distance, p_delta, EmpiricalCdf, SirDistribution,
};
pub use system::{ChipKind, SpreadingMatrix};
pub use upc::{
    balanced_snr_closed_form, interference_function, run_upc, sif_property_harness, upc_step,
    PowerState, SifReport, SirTargets, SystemParams, UpcOptions, UpcRun,
};
