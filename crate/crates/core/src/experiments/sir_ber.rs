//! Per-symbol SIR/BER series: UPC powers held fixed across spreading draws
//! versus a sequence-aware baseline that re-balances powers on every draw.
//!
//! The UPC branch keeps the large-system powers, so its realized SIR
//! fluctuates with the spreading draw. The baseline branch runs a standard
//! interference iteration on the *true* per-realization SIR formulas
//! (Γ ← Γ·γ*/γ(Γ)) until every user's SIR equals γ*; by construction its SIR
//! series is flat at the target. Both branches share the symbol and noise
//! randomness so the series are directly comparable.

use std::path::Path;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::ExperimentConfig;
use super::persist::{write_manifest, RunManifest};
use crate::efficiency::Receiver;
use crate::error::{Error, Result};
use crate::game::EfficiencyFunction;
use crate::par::map_indexed;
use crate::rng::{derive_rng, derive_seed};
use crate::system::{output_sirs, receiver_filter, SpreadingMatrix};
use crate::upc::{run_upc, SirTargets, SystemParams, UpcOptions};

/// Iteration cap for the per-draw balancing baseline.
const BASELINE_MAX_ITERS: usize = 500;
/// Relative SIR accuracy the baseline must reach on every draw.
const BASELINE_TOL: f64 = 1e-10;

/// One user's outcome at one symbol interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRecord {
    pub symbol: usize,
    pub user: usize,
    pub sir_upc: f64,
    pub sir_balanced: f64,
    /// Gaussian-formula BER Q(√γ) for each branch.
    pub ber_q_upc: f64,
    pub ber_q_balanced: f64,
    /// Monte Carlo bit decisions for each branch.
    pub bit_error_upc: bool,
    pub bit_error_balanced: bool,
}

#[derive(Debug, Clone)]
pub struct SirBerResult {
    pub receiver: Receiver,
    pub gamma_star: f64,
    pub records: Vec<SymbolRecord>,
    /// Worst per-draw iteration count used by the balancing baseline.
    pub baseline_iters_max: usize,
    pub resampled: usize,
}

fn q_function(x: f64) -> f64 {
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    1.0 - std_normal.cdf(x)
}

/// Balance the true SIRs at γ* for one spreading draw: Γ ← Γ·γ*/γ(Γ).
/// Returns the balanced SNR vector and iterations used.
fn balance_on_draw(
    receiver: Receiver,
    spreading: &SpreadingMatrix,
    start_snrs: &[f64],
    gamma_star: f64,
) -> Result<(Vec<f64>, usize)> {
    let mut snrs = start_snrs.to_vec();
    for iter in 1..=BASELINE_MAX_ITERS {
        let sirs = output_sirs(receiver, spreading, &snrs)?;
        let err = sirs
            .iter()
            .map(|&g| (g / gamma_star - 1.0).abs())
            .fold(0.0, f64::max);
        if err < BASELINE_TOL {
            return Ok((snrs, iter));
        }
        for (s, &g) in snrs.iter_mut().zip(&sirs) {
            *s *= gamma_star / g;
        }
    }
    Err(Error::BaselineNoConvergence {
        iters: BASELINE_MAX_ITERS,
    })
}

struct DrawOutcome {
    records: Vec<SymbolRecord>,
    baseline_iters: usize,
    resampled: usize,
}

/// Run both branches over `config.symbols` spreading draws.
pub fn run_sir_ber_series(config: &ExperimentConfig) -> Result<SirBerResult> {
    config.validate()?;
    let receiver = *config
        .receivers
        .iter()
        .find(|r| {
            matches!(
                r,
                Receiver::MatchedFilter | Receiver::Decorrelator | Receiver::Mmse
            )
        })
        .ok_or_else(|| {
            Error::InvalidInput("SIR/BER series needs a linear receiver".into())
        })?;
    let gamma_star = config.resolve_gamma_star()?;
    let gains = config.gains()?;
    let params = SystemParams::new(gains.clone(), config.noise_var, config.alpha(), config.p_max)?;
    let targets = SirTargets::uniform(gamma_star, config.k)?;
    let upc = run_upc(
        vec![config.initial_power; config.k],
        &params,
        receiver,
        &targets,
        &UpcOptions::default(),
    )?;
    let snr_upc: Vec<f64> = params.snrs(&upc.state.powers)?.snrs().to_vec();

    let k = config.k;
    let n = config.n;
    let series_seed = derive_seed(config.seed, 0x5349_5242);
    let outcomes: Vec<Result<DrawOutcome>> = map_indexed(config.symbols, |t| {
        let draw_seed = derive_seed(series_seed, t as u64);
        let mut resampled = 0usize;
        let (spreading, sirs_upc) = loop {
            let seed = derive_seed(draw_seed, resampled as u64);
            let s = SpreadingMatrix::sample(n, k, seed)?;
            match output_sirs(receiver, &s, &snr_upc) {
                Ok(sirs) => break (s, sirs),
                Err(Error::SingularGram { .. }) => {
                    resampled += 1;
                    if resampled > 100 {
                        return Err(Error::InvalidInput(
                            "more than 100 consecutive singular Gram draws".into(),
                        ));
                    }
                }
                Err(e) => return Err(e),
            }
        };
        let (snr_balanced, baseline_iters) =
            balance_on_draw(receiver, &spreading, &snr_upc, gamma_star)?;
        let sirs_balanced = output_sirs(receiver, &spreading, &snr_balanced)?;

        // Shared symbol/noise randomness for the two branches.
        let mut rng = derive_rng(draw_seed, 0x424954);
        let symbols: Vec<i8> = (0..k)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let received = |snrs: &[f64]| {
            let mut y = noise.clone();
            for j in 0..k {
                y.axpy(
                    snrs[j].sqrt() * symbols[j] as f64,
                    &spreading.chips().column(j).into_owned(),
                    1.0,
                );
            }
            y
        };
        let y_upc = received(&snr_upc);
        let y_balanced = received(&snr_balanced);

        let mut records = Vec::with_capacity(k);
        for u in 0..k {
            let c_upc = receiver_filter(receiver, &spreading, &snr_upc, u)?;
            let c_bal = receiver_filter(receiver, &spreading, &snr_balanced, u)?;
            let dec_upc = if c_upc.dot(&y_upc) >= 0.0 { 1i8 } else { -1 };
            let dec_bal = if c_bal.dot(&y_balanced) >= 0.0 { 1i8 } else { -1 };
            records.push(SymbolRecord {
                symbol: t,
                user: u,
                sir_upc: sirs_upc[u],
                sir_balanced: sirs_balanced[u],
                ber_q_upc: q_function(sirs_upc[u].sqrt()),
                ber_q_balanced: q_function(sirs_balanced[u].sqrt()),
                bit_error_upc: dec_upc != symbols[u],
                bit_error_balanced: dec_bal != symbols[u],
            });
        }
        Ok(DrawOutcome {
            records,
            baseline_iters,
            resampled,
        })
    });

    let mut records = Vec::with_capacity(config.symbols * k);
    let mut baseline_iters_max = 0;
    let mut resampled = 0;
    for o in outcomes {
        let o = o?;
        baseline_iters_max = baseline_iters_max.max(o.baseline_iters);
        resampled += o.resampled;
        records.extend(o.records);
    }
    Ok(SirBerResult {
        receiver,
        gamma_star,
        records,
        baseline_iters_max,
        resampled,
    })
}

impl SirBerResult {
    pub fn mean_upc_sir(&self) -> f64 {
        self.records.iter().map(|r| r.sir_upc).sum::<f64>() / self.records.len() as f64
    }

    /// Mean utility retention of the UPC branch relative to exact balancing.
    pub fn mean_loss_ratio(&self, eff: &EfficiencyFunction) -> Result<f64> {
        let target = crate::game::TargetSir::new(self.gamma_star)?;
        Ok(self
            .records
            .iter()
            .map(|r| eff.utility_loss_ratio(r.sir_upc, target))
            .sum::<f64>()
            / self.records.len() as f64)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "symbol,user,sir_upc,sir_balanced,ber_q_upc,ber_q_balanced,bit_error_upc,bit_error_balanced\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.symbol,
                r.user,
                r.sir_upc,
                r.sir_balanced,
                r.ber_q_upc,
                r.ber_q_balanced,
                r.bit_error_upc as u8,
                r.bit_error_balanced as u8
            ));
        }
        out
    }

    pub fn persist(&self, dir: &Path, config: &ExperimentConfig) -> Result<()> {
        std::fs::write(dir.join("sir_ber_series.csv"), self.to_csv_string())?;
        write_manifest(dir, &RunManifest::new("sir_ber", config, self.resampled))?;
        Ok(())
    }
}
