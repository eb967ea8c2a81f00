//! Empirical SIR CDFs against the beta and Gaussian fluctuation models.

use std::path::Path;

use super::config::ExperimentConfig;
use super::persist::{write_manifest, RunManifest};
use super::table1::UPC_GRID_RECEIVERS;
use crate::efficiency::Receiver;
use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::derive_seed;
use crate::stats::{
    dec_beta_distribution, gaussian_sir_distribution, ks_distance, EmpiricalCdf, SirDistribution,
};
use crate::system::{output_sirs, SpreadingMatrix};
use crate::upc::{run_upc, SirTargets, SystemParams, UpcOptions};

/// Empirical and model CDFs for one (N, α, receiver) case.
#[derive(Debug, Clone)]
pub struct CdfCase {
    pub n: usize,
    pub alpha: f64,
    pub receiver: Receiver,
    pub empirical: EmpiricalCdf,
    pub beta_model: Option<SirDistribution>,
    pub gaussian_model: SirDistribution,
    pub ks_beta: Option<f64>,
    pub ks_gaussian: f64,
    pub resampled: usize,
}

#[derive(Debug, Clone)]
pub struct CdfResult {
    pub gamma_star: f64,
    pub cases: Vec<CdfCase>,
}

/// Pool per-user realized SIRs over the spreading realizations of one case.
fn pooled_sirs(
    receiver: Receiver,
    n: usize,
    k: usize,
    snr: f64,
    realizations: usize,
    case_seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let snrs = vec![snr; k];
    let records: Vec<Result<(Vec<f64>, usize)>> = map_indexed(realizations, |i| {
        let realization_seed = derive_seed(case_seed, i as u64);
        let mut resampled = 0usize;
        loop {
            let seed = derive_seed(realization_seed, resampled as u64);
            let spreading = SpreadingMatrix::sample(n, k, seed)?;
            match output_sirs(receiver, &spreading, &snrs) {
                Ok(sirs) => return Ok((sirs, resampled)),
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
        }
    });
    let mut samples = Vec::with_capacity(realizations * k);
    let mut resampled = 0usize;
    for r in records {
        let (mut sirs, s) = r?;
        samples.append(&mut sirs);
        resampled += s;
    }
    Ok((samples, resampled))
}

/// Run the (sweep_n × sweep_alpha) grid, collecting empirical CDFs of the
/// realized SIR under UPC powers plus the matching theoretical CDFs and KS
/// distances.
pub fn run_cdf(config: &ExperimentConfig) -> Result<CdfResult> {
    config.validate()?;
    let gamma_star = config.resolve_gamma_star()?;
    let receivers: Vec<Receiver> = config
        .receivers
        .iter()
        .copied()
        .filter(|r| UPC_GRID_RECEIVERS.contains(r))
        .collect();
    if receivers.is_empty() {
        return Err(Error::InvalidInput(
            "CDF experiment needs dec and/or mmse among the receivers".into(),
        ));
    }
    let mut cases = Vec::new();
    let mut case_index = 1_000u64; // distinct stream block from table cells
    for &n in &config.sweep_n {
        for &alpha in &config.sweep_alpha {
            let k = (alpha * n as f64).round() as usize;
            if k < 2 || k >= n {
                return Err(Error::InvalidInput(format!(
                    "case N={n}, alpha={alpha} gives K={k}, need 2 <= K < N"
                )));
            }
            for &rx in &receivers {
                let params = SystemParams::new(vec![1.0; k], 1.0, alpha, None)?;
                let targets = SirTargets::uniform(gamma_star, k)?;
                let snr = run_upc(vec![1.0; k], &params, rx, &targets, &UpcOptions::default())?
                    .state
                    .powers[0];
                let case_seed = derive_seed(config.seed, case_index);
                case_index += 1;
                let (samples, resampled) =
                    pooled_sirs(rx, n, k, snr, config.realizations, case_seed)?;
                let empirical = EmpiricalCdf::new(samples)?;
                let beta_model = match rx {
                    Receiver::Decorrelator => Some(dec_beta_distribution(n, k, gamma_star)?),
                    _ => None,
                };
                let gaussian_model = gaussian_sir_distribution(rx, gamma_star, alpha, n)?;
                let ks_beta = beta_model.as_ref().map(|m| ks_distance(&empirical, m));
                let ks_gaussian = ks_distance(&empirical, &gaussian_model);
                cases.push(CdfCase {
                    n,
                    alpha,
                    receiver: rx,
                    empirical,
                    beta_model,
                    gaussian_model,
                    ks_beta,
                    ks_gaussian,
                    resampled,
                });
            }
        }
    }
    Ok(CdfResult { gamma_star, cases })
}

/// Number of quantile points kept when persisting a CDF.
const EXPORT_POINTS: usize = 2048;

impl CdfCase {
    /// Deterministic quantile decimation of the empirical CDF for export.
    pub fn export_points(&self) -> Vec<(f64, f64)> {
        let n = self.empirical.len();
        let grid = EXPORT_POINTS.min(n);
        (1..=grid)
            .map(|j| {
                let idx = (j * n).div_ceil(grid) - 1;
                (
                    self.empirical.samples()[idx],
                    (idx + 1) as f64 / n as f64,
                )
            })
            .collect()
    }
}

impl CdfResult {
    /// Points CSV: `n,alpha,receiver,value,empirical,beta,gaussian`.
    pub fn points_csv_string(&self) -> String {
        let mut out = String::from("n,alpha,receiver,value,empirical,beta,gaussian\n");
        for c in &self.cases {
            for (value, emp) in c.export_points() {
                let beta = c
                    .beta_model
                    .as_ref()
                    .map(|m| format!("{}", m.cdf(value)))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{value},{emp},{beta},{}\n",
                    c.n,
                    c.alpha,
                    c.receiver.label(),
                    c.gaussian_model.cdf(value)
                ));
            }
        }
        out
    }

    /// Summary CSV: `n,alpha,receiver,ks_beta,ks_gaussian,samples,resampled`.
    pub fn summary_csv_string(&self) -> String {
        let mut out = String::from("n,alpha,receiver,ks_beta,ks_gaussian,samples,resampled\n");
        for c in &self.cases {
            let ks_beta = c.ks_beta.map(|v| format!("{v}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{ks_beta},{},{},{}\n",
                c.n,
                c.alpha,
                c.receiver.label(),
                c.ks_gaussian,
                c.empirical.len(),
                c.resampled
            ));
        }
        out
    }

    pub fn persist(&self, dir: &Path, config: &ExperimentConfig) -> Result<()> {
        std::fs::write(dir.join("cdf_points.csv"), self.points_csv_string())?;
        std::fs::write(dir.join("cdf_summary.csv"), self.summary_csv_string())?;
        let resampled = self.cases.iter().map(|c| c.resampled).sum();
        write_manifest(dir, &RunManifest::new("cdf", config, resampled))?;
        Ok(())
    }

    pub fn case(&self, n: usize, alpha: f64, receiver: Receiver) -> Option<&CdfCase> {
        self.cases
            .iter()
            .find(|c| c.n == n && (c.alpha - alpha).abs() < 1e-12 && c.receiver == receiver)
    }
}
