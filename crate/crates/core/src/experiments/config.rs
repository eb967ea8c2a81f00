//! Experiment configuration, deserializable from TOML-style config files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::efficiency::Receiver;
use crate::error::{Error, Result};
use crate::game::EfficiencyFunction;

/// Path-loss model h_k = coefficient · d_k^exponent. Without an explicit
/// distance list, user k (1-based) sits at d_k = 100 + 10·k meters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GainModel {
    #[serde(default = "default_gain_coefficient")]
    pub coefficient: f64,
    #[serde(default = "default_gain_exponent")]
    pub exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances_m: Option<Vec<f64>>,
}

fn default_gain_coefficient() -> f64 {
    0.1
}

fn default_gain_exponent() -> f64 {
    -4.0
}

impl Default for GainModel {
    fn default() -> Self {
        Self {
            coefficient: default_gain_coefficient(),
            exponent: default_gain_exponent(),
            distances_m: None,
        }
    }
}

impl GainModel {
    pub fn gains(&self, k: usize) -> Result<Vec<f64>> {
        let distances: Vec<f64> = match &self.distances_m {
            Some(d) => {
                if d.len() != k {
                    return Err(Error::InvalidInput(format!(
                        "{} distances given for {k} users",
                        d.len()
                    )));
                }
                d.clone()
            }
            None => (1..=k).map(|i| 100.0 + 10.0 * i as f64).collect(),
        };
        let gains: Vec<f64> = distances
            .iter()
            .map(|&d| self.coefficient * d.powf(self.exponent))
            .collect();
        if gains.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidInput("gain model produced a non-positive gain".into()));
        }
        Ok(gains)
    }
}

/// One experiment description; the master seed makes every output
/// reproducible bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Receivers to run (subset of mf/dec/mmse/io/ml).
    #[serde(default = "default_receivers")]
    pub receivers: Vec<Receiver>,
    /// Spreading factor.
    #[serde(default = "default_n")]
    pub n: usize,
    /// User count.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Explicit target SIR override; otherwise derived from `packet_bits`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_star: Option<f64>,
    /// Packet size M for f(γ) = (1 − e^{-γ})^M when `gamma_star` is absent.
    #[serde(default = "default_packet_bits")]
    pub packet_bits: u32,
    /// Background noise variance σ².
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    #[serde(default)]
    pub gain: GainModel,
    /// Monte Carlo realization count.
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Master seed.
    #[serde(default)]
    pub seed: u64,
    /// Window half-width for P_Δ, in dB.
    #[serde(default = "default_delta_db")]
    pub delta_db: f64,
    /// Where result files go.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Starting power for the UPC iteration, watts.
    #[serde(default = "default_initial_power")]
    pub initial_power: f64,
    /// Optional transmit power cap, watts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    /// (N, α) grid for the table/CDF sweeps.
    #[serde(default = "default_sweep_n")]
    pub sweep_n: Vec<usize>,
    #[serde(default = "default_sweep_alpha")]
    pub sweep_alpha: Vec<f64>,
    /// Symbol count for the per-symbol SIR/BER series.
    #[serde(default = "default_symbols")]
    pub symbols: usize,
}

fn default_receivers() -> Vec<Receiver> {
    vec![Receiver::Decorrelator, Receiver::Mmse, Receiver::JointlyOptimalMl]
}

fn default_n() -> usize {
    32
}

fn default_k() -> usize {
    8
}

fn default_packet_bits() -> u32 {
    100
}

fn default_noise_var() -> f64 {
    1.6e-14
}

fn default_realizations() -> usize {
    10_000
}

fn default_delta_db() -> f64 {
    1.0
}

fn default_initial_power() -> f64 {
    1e-4
}

fn default_sweep_n() -> Vec<usize> {
    vec![16, 64, 256]
}

fn default_sweep_alpha() -> Vec<f64> {
    vec![0.25, 0.75]
}

fn default_symbols() -> usize {
    200
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            receivers: default_receivers(),
            n: default_n(),
            k: default_k(),
            gamma_star: None,
            packet_bits: default_packet_bits(),
            noise_var: default_noise_var(),
            gain: GainModel::default(),
            realizations: default_realizations(),
            seed: 0,
            delta_db: default_delta_db(),
            output_dir: None,
            initial_power: default_initial_power(),
            p_max: None,
            sweep_n: default_sweep_n(),
            sweep_alpha: default_sweep_alpha(),
            symbols: default_symbols(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidInput("n and k must be positive".into()));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidInput("realizations must be >= 1".into()));
        }
        if !(self.noise_var > 0.0) {
            return Err(Error::InvalidInput("noise variance must be positive".into()));
        }
        if !(self.delta_db > 0.0) {
            return Err(Error::InvalidInput("delta_db must be positive".into()));
        }
        if !(self.initial_power > 0.0) {
            return Err(Error::InvalidInput("initial power must be positive".into()));
        }
        if let Some(g) = self.gamma_star {
            if !(g > 0.0) {
                return Err(Error::InvalidInput("gamma_star must be positive".into()));
            }
        }
        if self.receivers.is_empty() {
            return Err(Error::InvalidInput("at least one receiver required".into()));
        }
        Ok(())
    }

    /// The target SIR: the explicit override if present, otherwise the Nash
    /// SIR of the (1 − e^{-γ})^M packet-success model.
    pub fn resolve_gamma_star(&self) -> Result<f64> {
        match self.gamma_star {
            Some(g) => Ok(g),
            None => {
                let f = EfficiencyFunction::new(self.packet_bits, self.packet_bits, 100_000)?;
                Ok(f.target_sir(1e-12)?.value())
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn gains(&self) -> Result<Vec<f64>> {
        self.gain.gains(self.k)
    }
}
