//! Bit-level detection: linear slicers and exhaustive-search optimal
//! detectors for small user counts.
//!
//! The jointly optimal (maximum-likelihood) detector returns
//! argmin_x ‖Y − S·diag(√Γ)·x‖² over x ∈ {±1}^K; the individually optimal
//! detector signs the exact marginal posterior of each bit,
//! sign(Σ_{x: x_k=+1} w(x) − Σ_{x: x_k=−1} w(x)) with
//! w(x) = exp(−½‖Y − S·diag(√Γ)·x‖²). Both enumerate all 2^K hypotheses and
//! are capped at K ≤ 20.

use nalgebra::{DMatrix, DVector};

use crate::efficiency::Receiver;
use crate::error::{Error, Result};
use crate::system::{output_sirs, ChannelRealization, SpreadingMatrix};

/// Exhaustive enumeration cap for the optimal detectors.
pub const MAX_EXHAUSTIVE_USERS: usize = 20;

/// Hypothesis energies E(x) = xᵀQx − 2xᵀc (‖Y‖² dropped), shared by both
/// exhaustive detectors. Entry `i` encodes x_k = +1 iff bit k of `i` is set.
fn hypothesis_energies(
    received: &DVector<f64>,
    spreading: &SpreadingMatrix,
    snrs: &[f64],
) -> Result<Vec<f64>> {
    let k = spreading.k();
    if k > MAX_EXHAUSTIVE_USERS {
        return Err(Error::TooManyUsers {
            k,
            max: MAX_EXHAUSTIVE_USERS,
        });
    }
    if snrs.len() != k || received.len() != spreading.n() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    // H = S·diag(√Γ); Q = HᵀH, c = HᵀY.
    let mut h = spreading.chips().clone();
    for j in 0..k {
        let amp = snrs[j].sqrt();
        h.column_mut(j).scale_mut(amp);
    }
    let q: DMatrix<f64> = h.tr_mul(&h);
    let c: DVector<f64> = h.tr_mul(received);
    let mut energies = Vec::with_capacity(1usize << k);
    let mut x = vec![-1.0f64; k];
    for idx in 0..(1usize << k) {
        for (b, xb) in x.iter_mut().enumerate() {
            *xb = if (idx >> b) & 1 == 1 { 1.0 } else { -1.0 };
        }
        let mut e = 0.0;
        for a in 0..k {
            let mut row = 0.0;
            for b in 0..k {
                row += q[(a, b)] * x[b];
            }
            e += x[a] * row;
            e -= 2.0 * x[a] * c[a];
        }
        energies.push(e);
    }
    Ok(energies)
}

/// Jointly optimal (maximum-likelihood) decision for all users.
pub fn detect_ml(
    received: &DVector<f64>,
    spreading: &SpreadingMatrix,
    snrs: &[f64],
) -> Result<Vec<i8>> {
    let energies = hypothesis_energies(received, spreading, snrs)?;
    let best = energies
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("at least one hypothesis");
    Ok((0..spreading.k())
        .map(|b| if (best >> b) & 1 == 1 { 1 } else { -1 })
        .collect())
}

/// Individually optimal (marginal-posterior) decision for one user.
pub fn detect_io(
    received: &DVector<f64>,
    spreading: &SpreadingMatrix,
    snrs: &[f64],
    user: usize,
) -> Result<i8> {
    if user >= spreading.k() {
        return Err(Error::InvalidInput("user index out of range".into()));
    }
    Ok(detect_io_all(received, spreading, snrs)?[user])
}

/// Individually optimal decisions for all users in one enumeration pass.
pub fn detect_io_all(
    received: &DVector<f64>,
    spreading: &SpreadingMatrix,
    snrs: &[f64],
) -> Result<Vec<i8>> {
    let k = spreading.k();
    let energies = hypothesis_energies(received, spreading, snrs)?;
    let min_e = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut margin = vec![0.0f64; k];
    for (idx, &e) in energies.iter().enumerate() {
        let w = (-(e - min_e) / 2.0).exp();
        for (b, m) in margin.iter_mut().enumerate() {
            if (idx >> b) & 1 == 1 {
                *m += w;
            } else {
                *m -= w;
            }
        }
    }
    Ok(margin.iter().map(|&m| if m >= 0.0 { 1 } else { -1 }).collect())
}

/// Per-user outcome of one simulated symbol interval.
#[derive(Debug, Clone)]
pub struct SymbolOutcome {
    /// Transmitted BPSK symbols.
    pub symbols: Vec<i8>,
    /// Detected BPSK symbols.
    pub decisions: Vec<i8>,
    /// Realized output SIR per user; present for linear receivers only.
    pub sirs: Option<Vec<f64>>,
}

impl SymbolOutcome {
    /// Indicator vector of bit errors.
    pub fn bit_errors(&self) -> Vec<bool> {
        self.symbols
            .iter()
            .zip(&self.decisions)
            .map(|(a, b)| a != b)
            .collect()
    }
}

/// Simulate one symbol interval: fold `(powers, gains, σ²)` into SNRs, sample
/// symbols and noise, detect with the given receiver, and report per-user
/// realized SIR (linear receivers) plus bit decisions.
pub fn simulate_symbol(
    powers: &[f64],
    gains: &[f64],
    noise_var: f64,
    spreading: &SpreadingMatrix,
    receiver: Receiver,
    seed: u64,
) -> Result<SymbolOutcome> {
    let k = spreading.k();
    if powers.len() != k || gains.len() != k {
        return Err(Error::InvalidInput("power/gain count mismatch".into()));
    }
    if !(noise_var > 0.0) {
        return Err(Error::InvalidInput("noise variance must be positive".into()));
    }
    let snrs: Vec<f64> = powers
        .iter()
        .zip(gains)
        .map(|(&p, &h)| p * h / noise_var)
        .collect();
    let real = ChannelRealization::sample(spreading, &snrs, seed)?;
    let (decisions, sirs) = match receiver {
        Receiver::JointlyOptimalMl => (detect_ml(&real.received, spreading, &snrs)?, None),
        Receiver::IndividuallyOptimal => (detect_io_all(&real.received, spreading, &snrs)?, None),
        linear => {
            let sirs = output_sirs(linear, spreading, &snrs)?;
            let mut decisions = Vec::with_capacity(k);
            for u in 0..k {
                let c = crate::system::receiver_filter(linear, spreading, &snrs, u)?;
                let out = c.dot(&real.received);
                decisions.push(if out >= 0.0 { 1 } else { -1 });
            }
            (decisions, Some(sirs))
        }
    };
    Ok(SymbolOutcome {
        symbols: real.symbols,
        decisions,
        sirs,
    })
}
