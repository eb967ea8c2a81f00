//! Power-trace experiment: run the UPC iteration for several receivers on
//! the same channel and compare steady-state transmit powers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::config::ExperimentConfig;
use super::persist::{write_manifest, RunManifest};
use crate::efficiency::Receiver;
use crate::error::{Error, Result};
use crate::upc::{run_upc, SirTargets, SystemParams, UpcOptions, UpcRun};

/// One receiver's full UPC trajectory.
#[derive(Debug, Clone)]
pub struct ReceiverTrace {
    pub receiver: Receiver,
    pub run: UpcRun,
}

/// Traces for every configured receiver plus per-receiver steady-state power
/// gaps against the ML trace (when ML is among the receivers).
#[derive(Debug, Clone)]
pub struct Fig1Result {
    pub gamma_star: f64,
    pub traces: Vec<ReceiverTrace>,
    /// max_k |p_k − p_k^ml| / max(p_k, p_k^ml), keyed by receiver label.
    pub gap_vs_ml: BTreeMap<String, f64>,
}

/// Symmetric relative difference, bounded by 1.
fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.max(b)
}

/// Run the UPC iteration for each configured receiver from the same initial
/// powers and report convergence plus steady-state power gaps.
pub fn run_fig1(config: &ExperimentConfig) -> Result<Fig1Result> {
    config.validate()?;
    let gamma_star = config.resolve_gamma_star()?;
    let params = SystemParams::new(
        config.gains()?,
        config.noise_var,
        config.alpha(),
        config.p_max,
    )?;
    let targets = SirTargets::uniform(gamma_star, config.k)?;
    let opts = UpcOptions::default();

    let mut traces = Vec::new();
    for &rx in &config.receivers {
        let run = run_upc(
            vec![config.initial_power; config.k],
            &params,
            rx,
            &targets,
            &opts,
        )?;
        traces.push(ReceiverTrace { receiver: rx, run });
    }

    let mut gap_vs_ml = BTreeMap::new();
    if let Some(ml) = traces
        .iter()
        .find(|t| t.receiver == Receiver::JointlyOptimalMl)
    {
        for t in &traces {
            if t.receiver == Receiver::JointlyOptimalMl {
                continue;
            }
            let gap = t
                .run
                .state
                .powers
                .iter()
                .zip(&ml.run.state.powers)
                .map(|(&a, &b)| relative_gap(a, b))
                .fold(0.0, f64::max);
            gap_vs_ml.insert(t.receiver.label().to_string(), gap);
        }
    }

    Ok(Fig1Result {
        gamma_star,
        traces,
        gap_vs_ml,
    })
}

impl Fig1Result {
    /// CSV with columns `receiver,iteration,user,power_watts,eta`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("receiver,iteration,user,power_watts,eta\n");
        for t in &self.traces {
            for (i, row) in t.run.power_trace.iter().enumerate() {
                for (k, p) in row.iter().enumerate() {
                    let eta = t
                        .run
                        .state
                        .eta_trace
                        .get(i)
                        .map(|e| format!("{e}"))
                        .unwrap_or_default();
                    out.push_str(&format!("{},{i},{k},{p},{eta}\n", t.receiver.label()));
                }
            }
        }
        out
    }

    /// Persist `fig1_traces.csv`, `fig1_gaps.csv`, and the manifest.
    pub fn persist(&self, dir: &Path, config: &ExperimentConfig) -> Result<()> {
        std::fs::write(dir.join("fig1_traces.csv"), self.to_csv_string())?;
        let mut gaps = Vec::new();
        writeln!(gaps, "receiver,max_relative_gap_vs_ml")?;
        for (rx, gap) in &self.gap_vs_ml {
            writeln!(gaps, "{rx},{gap}")?;
        }
        std::fs::write(dir.join("fig1_gaps.csv"), gaps)?;
        write_manifest(dir, &RunManifest::new("fig1", config, 0))?;
        Ok(())
    }

    pub fn trace(&self, receiver: Receiver) -> Result<&ReceiverTrace> {
        self.traces
            .iter()
            .find(|t| t.receiver == receiver)
            .ok_or_else(|| Error::InvalidInput(format!("no trace for {receiver:?}")))
    }
}
