//! The unified power-control iteration and its convergence machinery.
//!
//! Each round recomputes the large-system multiuser efficiency η from the
//! current received-SNR profile and then sets every user's power to
//! p_k = γ*_k·σ² / (η·h_k), optionally capped at p_max. Written in SNR
//! coordinates the update is Γ_k ← I(Γ) = γ*_k/η(Γ), and because I is a
//! standard interference function (positive, monotone, scalable) for the
//! matched filter, the decorrelator, and the MMSE receiver, the iteration
//! converges to the unique fixed point from any starting point whenever a
//! feasible SNR vector exists. [`sif_property_harness`] probes those three
//! properties over randomized profiles.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;

use crate::efficiency::{receiver_efficiency, FixedPointSettings, Receiver, SnrProfile};
use crate::error::{Error, Result};
use crate::rng::derive_rng;

/// Channel-side constants of the power-control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    gains: Vec<f64>,
    noise_var: f64,
    alpha: f64,
    p_max: Option<f64>,
}

impl SystemParams {
    pub fn new(gains: Vec<f64>, noise_var: f64, alpha: f64, p_max: Option<f64>) -> Result<Self> {
        if gains.is_empty() || gains.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidInput(
                "channel gains must be positive and finite".into(),
            ));
        }
        if !(noise_var > 0.0) {
            return Err(Error::InvalidInput("noise variance must be positive".into()));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidInput("load must be non-negative".into()));
        }
        if let Some(p) = p_max {
            if !(p > 0.0) {
                return Err(Error::InvalidInput("p_max must be positive".into()));
            }
        }
        Ok(Self {
            gains,
            noise_var,
            alpha,
            p_max,
        })
    }

    pub fn k(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p_max(&self) -> Option<f64> {
        self.p_max
    }

    /// Received SNRs Γ_k = p_k·h_k/σ² for a power vector.
    pub fn snrs(&self, powers: &[f64]) -> Result<SnrProfile> {
        if powers.len() != self.k() {
            return Err(Error::InvalidInput("power count mismatch".into()));
        }
        SnrProfile::new(
            powers
                .iter()
                .zip(&self.gains)
                .map(|(&p, &h)| p * h / self.noise_var)
                .collect(),
            self.alpha,
        )
    }
}

/// Per-user target SIRs. SIR balancing uses the same γ* for everyone, but the
/// update works equally with unequal targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SirTargets {
    values: Vec<f64>,
}

impl SirTargets {
    pub fn uniform(gamma_star: f64, k: usize) -> Result<Self> {
        Self::per_user(vec![gamma_star; k])
    }

    pub fn per_user(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput(
                "target SIRs must be positive and finite".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The state carried through the UPC loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerState {
    /// Current transmit powers p_k in watts.
    pub powers: Vec<f64>,
    /// η(0), η(1), … — one entry per completed update.
    pub eta_trace: Vec<f64>,
    /// Completed iteration count (equals `eta_trace.len()`).
    pub n: usize,
    /// Set once the relative power change drops below tolerance.
    pub converged: bool,
    /// Users clipped at p_max in the most recent update.
    pub capped_users: BTreeSet<usize>,
}

impl PowerState {
    pub fn from_initial(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() || powers.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput(
                "initial powers must be positive and finite".into(),
            ));
        }
        Ok(Self {
            powers,
            eta_trace: Vec::new(),
            n: 0,
            converged: false,
            capped_users: BTreeSet::new(),
        })
    }

    /// Large-system SIRs η·Γ_k implied by the most recent efficiency.
    pub fn large_system_sirs(&self, params: &SystemParams) -> Result<Vec<f64>> {
        let eta = *self
            .eta_trace
            .last()
            .ok_or_else(|| Error::InvalidInput("no completed iterations".into()))?;
        Ok(params
            .snrs(&self.powers)?
            .snrs()
            .iter()
            .map(|&g| eta * g)
            .collect())
    }
}

/// One UPC update: evaluate η on the current profile, then set
/// p_k = min(γ*_k·σ²/(η·h_k), p_max).
pub fn upc_step(
    state: &PowerState,
    params: &SystemParams,
    receiver: Receiver,
    targets: &SirTargets,
    settings: &FixedPointSettings,
) -> Result<PowerState> {
    if targets.values().len() != params.k() || state.powers.len() != params.k() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let profile = params.snrs(&state.powers)?;
    let eta = receiver_efficiency(receiver, &profile, settings)?.value();
    let mut capped = BTreeSet::new();
    let powers: Vec<f64> = targets
        .values()
        .iter()
        .zip(params.gains())
        .enumerate()
        .map(|(k, (&gs, &h))| {
            let p = gs * params.noise_var() / (eta * h);
            match params.p_max() {
                Some(pm) if p > pm => {
                    capped.insert(k);
                    pm
                }
                _ => p,
            }
        })
        .collect();
    let mut eta_trace = state.eta_trace.clone();
    eta_trace.push(eta);
    Ok(PowerState {
        powers,
        eta_trace,
        n: state.n + 1,
        converged: false,
        capped_users: capped,
    })
}

/// Stopping rules for [`run_upc`]. Convergence is declared when the maximum
/// relative per-user power change falls below `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpcOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub fixed_point: FixedPointSettings,
}

impl Default for UpcOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 100,
            fixed_point: FixedPointSettings::default(),
        }
    }
}

/// Power growth beyond this multiple of the starting level means no feasible
/// SNR vector exists for the target.
const DIVERGENCE_GUARD: f64 = 1e6;

/// A completed UPC run: the final state plus the full power trajectory
/// (row 0 is the initial vector, row i the powers after update i).
#[derive(Debug, Clone, PartialEq)]
pub struct UpcRun {
    pub state: PowerState,
    pub power_trace: Vec<Vec<f64>>,
}

impl UpcRun {
    /// CSV export with columns `iteration,user,power_watts,eta`; the η column
    /// holds the efficiency computed *from* that iteration's powers (empty
    /// for the final row, where no further update was taken).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "user", "power_watts", "eta"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for (i, row) in self.power_trace.iter().enumerate() {
            for (k, p) in row.iter().enumerate() {
                let eta = self
                    .state
                    .eta_trace
                    .get(i)
                    .map(|e| format!("{e}"))
                    .unwrap_or_default();
                w.write_record(&[format!("{i}"), format!("{k}"), format!("{p}"), eta])
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterate [`upc_step`] until the relative power change is below `opts.tol`,
/// the iteration budget runs out, or the divergence guard trips.
pub fn run_upc(
    initial_powers: Vec<f64>,
    params: &SystemParams,
    receiver: Receiver,
    targets: &SirTargets,
    opts: &UpcOptions,
) -> Result<UpcRun> {
    let mut state = PowerState::from_initial(initial_powers)?;
    let start_max = state.powers.iter().cloned().fold(0.0, f64::max);
    let mut trace = vec![state.powers.clone()];
    for _ in 0..opts.max_iters {
        let next = upc_step(&state, params, receiver, targets, &opts.fixed_point)?;
        let rel_change = state
            .powers
            .iter()
            .zip(&next.powers)
            .map(|(&a, &b)| (b - a).abs() / a)
            .fold(0.0, f64::max);
        trace.push(next.powers.clone());
        state = next;
        if state.powers.iter().cloned().fold(0.0, f64::max) > DIVERGENCE_GUARD * start_max {
            return Err(Error::Infeasible {
                reason: format!(
                    "powers exceeded {DIVERGENCE_GUARD:e} times the initial level after {} iterations",
                    state.n
                ),
            });
        }
        if rel_change < opts.tol {
            state.converged = true;
            // Pinned at the cap across the board without meeting the targets
            // means the cap, not balance, stopped the iteration.
            if state.capped_users.len() == params.k() {
                let sirs = state.large_system_sirs(params)?;
                let unmet = sirs
                    .iter()
                    .zip(targets.values())
                    .any(|(&s, &g)| s < g * (1.0 - 1e-9));
                if unmet {
                    return Err(Error::Infeasible {
                        reason: "all users pinned at p_max below their target SIR".into(),
                    });
                }
            }
            return Ok(UpcRun {
                state,
                power_trace: trace,
            });
        }
    }
    Err(Error::NoConvergence {
        iters: opts.max_iters,
        residual: f64::NAN,
    })
}

/// Closed-form SIR-balanced SNR Γ* for equal targets on the three linear
/// receivers, with the feasibility condition enforced:
/// decorrelator γ*/(1−α); matched filter γ*/(1−αγ*) for αγ* < 1;
/// MMSE γ*/(1 − αγ*/(1+γ*)) for αγ*/(1+γ*) < 1.
pub fn balanced_snr_closed_form(receiver: Receiver, gamma_star: f64, alpha: f64) -> Result<f64> {
    if !(gamma_star > 0.0) || !(alpha >= 0.0) {
        return Err(Error::InvalidInput("need gamma* > 0 and alpha >= 0".into()));
    }
    let infeasible = |cond: String| Error::Infeasible { reason: cond };
    match receiver {
        Receiver::Decorrelator => {
            if alpha >= 1.0 {
                return Err(infeasible(format!("decorrelator needs alpha < 1, got {alpha}")));
            }
            Ok(gamma_star / (1.0 - alpha))
        }
        Receiver::MatchedFilter => {
            let load = alpha * gamma_star;
            if load >= 1.0 {
                return Err(infeasible(format!(
                    "matched filter needs alpha*gamma* < 1, got {load}"
                )));
            }
            Ok(gamma_star / (1.0 - load))
        }
        Receiver::Mmse => {
            let load = alpha * gamma_star / (1.0 + gamma_star);
            if load >= 1.0 {
                return Err(infeasible(format!(
                    "MMSE needs alpha*gamma*/(1+gamma*) < 1, got {load}"
                )));
            }
            Ok(gamma_star / (1.0 - load))
        }
        other => Err(Error::InvalidInput(format!(
            "no closed-form balanced SNR for {other:?}"
        ))),
    }
}

/// The interference function I(Γ) = γ*/η(Γ) driving the SNR-space iteration.
pub fn interference_function(
    profile: &SnrProfile,
    receiver: Receiver,
    gamma_star: f64,
    settings: &FixedPointSettings,
) -> Result<f64> {
    Ok(gamma_star / receiver_efficiency(receiver, profile, settings)?.value())
}

/// Outcome of the standard-interference-function property sweep.
#[derive(Debug, Clone)]
pub struct SifReport {
    pub receiver: Receiver,
    pub trials: usize,
    pub positivity_failures: Vec<String>,
    pub monotonicity_failures: Vec<String>,
    pub scalability_failures: Vec<String>,
}

impl SifReport {
    pub fn all_pass(&self) -> bool {
        self.positivity_failures.is_empty()
            && self.monotonicity_failures.is_empty()
            && self.scalability_failures.is_empty()
    }
}

impl std::fmt::Display for SifReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = |v: &Vec<String>| if v.is_empty() { "PASS" } else { "FAIL" };
        write!(
            f,
            "positivity: {}, monotonicity: {}, scalability: {}",
            verdict(&self.positivity_failures),
            verdict(&self.monotonicity_failures),
            verdict(&self.scalability_failures)
        )
    }
}

/// Verify positivity, monotonicity, and scalability of I(Γ) = γ*/η(Γ) over
/// randomized SNR profiles. Failures are collected (with the offending
/// profile) rather than returned as errors.
pub fn sif_property_harness(
    receiver: Receiver,
    trials: usize,
    seed: u64,
    settings: &FixedPointSettings,
) -> Result<SifReport> {
    let mut rng = derive_rng(seed, 0x5349_4600);
    let mut report = SifReport {
        receiver,
        trials,
        positivity_failures: Vec::new(),
        monotonicity_failures: Vec::new(),
        scalability_failures: Vec::new(),
    };
    let gamma_star = 6.4;
    for trial in 0..trials {
        let k = rng.random_range(2..=12);
        let alpha = rng.random_range(0.05..0.95);
        let snrs: Vec<f64> = (0..k)
            .map(|_| 10f64.powf(rng.random_range(-2.0..2.0)))
            .collect();
        let profile = SnrProfile::new(snrs.clone(), alpha)?;
        let i0 = interference_function(&profile, receiver, gamma_star, settings)?;

        if !(i0 > 0.0) || !i0.is_finite() {
            report
                .positivity_failures
                .push(format!("trial {trial}: I = {i0} on {snrs:?}, alpha {alpha}"));
        }

        let raised: Vec<f64> = snrs
            .iter()
            .map(|&g| g + rng.random_range(0.0..5.0))
            .collect();
        let i_raised = interference_function(
            &SnrProfile::new(raised.clone(), alpha)?,
            receiver,
            gamma_star,
            settings,
        )?;
        if i_raised < i0 * (1.0 - 1e-9) {
            report.monotonicity_failures.push(format!(
                "trial {trial}: I({raised:?}) = {i_raised} < I({snrs:?}) = {i0}"
            ));
        }

        let theta = rng.random_range(1.01..5.0);
        let i_scaled =
            interference_function(&profile.scaled(theta)?, receiver, gamma_star, settings)?;
        if theta * i0 <= i_scaled {
            report.scalability_failures.push(format!(
                "trial {trial}: theta {theta}: theta*I = {} vs I(theta*Gamma) = {i_scaled}",
                theta * i0
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_params(p_max: Option<f64>) -> SystemParams {
        // K = 8, N = 32; h_k = 0.1·d_k⁻⁴ with d_k = 100 + 10k.
        let gains: Vec<f64> = (1..=8)
            .map(|k| 0.1 * (100.0 + 10.0 * k as f64).powi(-4))
            .collect();
        SystemParams::new(gains, 1.6e-14, 8.0 / 32.0, p_max).unwrap()
    }

    fn uniform_targets(k: usize) -> SirTargets {
        SirTargets::uniform(6.4, k).unwrap()
    }

    #[test]
    fn dec_reaches_closed_form_in_one_step() {
        let params = paper_params(None);
        let targets = uniform_targets(8);
        let state = PowerState::from_initial(vec![1e-3; 8]).unwrap();
        let next = upc_step(
            &state,
            &params,
            Receiver::Decorrelator,
            &targets,
            &FixedPointSettings::default(),
        )
        .unwrap();
        for (k, &p) in next.powers.iter().enumerate() {
            let expect = 6.4 * 1.6e-14 / (0.75 * params.gains()[k]);
            assert!((p - expect).abs() / expect < 1e-12);
        }
    }

    #[test]
    fn single_user_step_is_exact() {
        let params = SystemParams::new(vec![2e-9], 1.6e-14, 0.0, None).unwrap();
        let targets = uniform_targets(1);
        let state = PowerState::from_initial(vec![1.0]).unwrap();
        let next = upc_step(
            &state,
            &params,
            Receiver::Mmse,
            &targets,
            &FixedPointSettings::default(),
        )
        .unwrap();
        let expect = 6.4 * 1.6e-14 / 2e-9;
        assert!((next.powers[0] - expect).abs() / expect < 1e-9);
        assert!((next.eta_trace[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dec_converges_in_exactly_two_iterations() {
        let params = paper_params(None);
        let run = run_upc(
            vec![1e-6; 8],
            &params,
            Receiver::Decorrelator,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        assert!(run.state.converged);
        assert_eq!(run.state.n, 2);
    }

    #[test]
    fn mf_equal_gains_balances_at_closed_form() {
        // alpha·gamma* = 0.64 < 1: feasible; Γ* = 6.4/0.36 ≈ 17.78.
        let params = SystemParams::new(vec![1e-9; 4], 1.6e-14, 0.1, None).unwrap();
        let run = run_upc(
            vec![1e-4; 4],
            &params,
            Receiver::MatchedFilter,
            &uniform_targets(4),
            &UpcOptions::default(),
        )
        .unwrap();
        let snrs = params.snrs(&run.state.powers).unwrap();
        for &g in snrs.snrs() {
            assert!((g - 17.777_777_777_777_78).abs() < 1e-5, "snr {g}");
        }
        let closed = balanced_snr_closed_form(Receiver::MatchedFilter, 6.4, 0.1).unwrap();
        assert!((closed - 17.777_777_777_777_78).abs() < 1e-10);
    }

    #[test]
    fn paper_setup_converges_quickly_and_balances() {
        let params = paper_params(None);
        for rx in [Receiver::Decorrelator, Receiver::Mmse, Receiver::IndividuallyOptimal] {
            let run = run_upc(
                vec![1e-4; 8],
                &params,
                rx,
                &uniform_targets(8),
                &UpcOptions::default(),
            )
            .unwrap();
            assert!(run.state.converged, "{rx:?} did not converge");
            assert!(run.state.n <= 20, "{rx:?} took {} iterations", run.state.n);
            for s in run.state.large_system_sirs(&params).unwrap() {
                assert!((s - 6.4).abs() / 6.4 < 1e-7, "{rx:?}: sir {s}");
            }
        }
    }

    #[test]
    fn mf_overload_is_infeasible() {
        // alpha·gamma* = 1.6 > 1: the balanced fixed point has no positive
        // solution and powers blow up.
        let params = SystemParams::new(vec![1e-9; 8], 1.6e-14, 0.25, None).unwrap();
        let out = run_upc(
            vec![1e-4; 8],
            &params,
            Receiver::MatchedFilter,
            &uniform_targets(8),
            &UpcOptions::default(),
        );
        assert!(matches!(out, Err(Error::Infeasible { .. })), "{out:?}");
    }

    #[test]
    fn fixed_point_unique_across_initial_points() {
        let params = paper_params(None);
        let a = run_upc(
            vec![1e-5; 8],
            &params,
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        let b = run_upc(
            vec![1e-3; 8],
            &params,
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        for (x, y) in a.state.powers.iter().zip(&b.state.powers) {
            assert!((x - y).abs() / x < 1e-6);
        }
    }

    #[test]
    fn converged_powers_are_componentwise_minimal() {
        // Lowering any single user's power drops that user below target.
        let params = paper_params(None);
        let run = run_upc(
            vec![1e-4; 8],
            &params,
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        let settings = FixedPointSettings::default();
        for k in 0..8 {
            let mut powers = run.state.powers.clone();
            powers[k] *= 0.95;
            let profile = params.snrs(&powers).unwrap();
            let eta = receiver_efficiency(Receiver::Mmse, &profile, &settings)
                .unwrap()
                .value();
            let sir = eta * profile.snrs()[k];
            assert!(sir < 6.4, "user {k} still meets target after cut: {sir}");
        }
    }

    #[test]
    fn trace_is_monotone_after_first_update() {
        let params = paper_params(None);
        let run = run_upc(
            vec![1e-4; 8],
            &params,
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        for k in 0..8 {
            let series: Vec<f64> = run.power_trace.iter().skip(1).map(|row| row[k]).collect();
            let increasing = series.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
            let decreasing = series.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            assert!(increasing || decreasing, "user {k} trace not monotone");
        }
    }

    #[test]
    fn unequal_targets_balance_per_user() {
        let params = paper_params(None);
        let targets =
            SirTargets::per_user(vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]).unwrap();
        let run = run_upc(
            vec![1e-4; 8],
            &params,
            Receiver::Mmse,
            &targets,
            &UpcOptions::default(),
        )
        .unwrap();
        assert!(run.state.converged);
        let sirs = run.state.large_system_sirs(&params).unwrap();
        for (k, (&sir, &target)) in sirs.iter().zip(targets.values()).enumerate() {
            assert!(
                (sir - target).abs() / target < 1e-7,
                "user {k}: sir {sir} vs target {target}"
            );
        }
    }

    #[test]
    fn all_users_pinned_at_cap_is_infeasible() {
        let params = paper_params(Some(1e-7));
        let out = run_upc(
            vec![1e-7; 8],
            &params,
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        );
        assert!(matches!(out, Err(Error::Infeasible { .. })), "{out:?}");
    }

    #[test]
    fn generous_cap_changes_nothing() {
        let free = run_upc(
            vec![1e-4; 8],
            &paper_params(None),
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        let capped = run_upc(
            vec![1e-4; 8],
            &paper_params(Some(1.0)),
            Receiver::Mmse,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        assert_eq!(free.state.powers, capped.state.powers);
        assert!(capped.state.capped_users.is_empty());
    }

    #[test]
    fn balanced_closed_forms() {
        let dec = balanced_snr_closed_form(Receiver::Decorrelator, 6.4, 0.25).unwrap();
        assert!((dec - 8.533_333_333_333_333).abs() < 1e-12);
        let mmse = balanced_snr_closed_form(Receiver::Mmse, 6.4, 0.25).unwrap();
        assert!((mmse - 8.165_517_241_379_31).abs() < 1e-12);
        assert!(matches!(
            balanced_snr_closed_form(Receiver::MatchedFilter, 6.4, 0.25),
            Err(Error::Infeasible { .. })
        ));
        assert!(matches!(
            balanced_snr_closed_form(Receiver::Decorrelator, 6.4, 1.0),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn interference_function_forms() {
        let settings = FixedPointSettings::default();
        let profile = SnrProfile::new(vec![3.0, 9.0, 1.0], 0.25).unwrap();
        let dec = interference_function(&profile, Receiver::Decorrelator, 6.4, &settings).unwrap();
        assert!((dec - 6.4 / 0.75).abs() < 1e-12);
        let mf = interference_function(&profile, Receiver::MatchedFilter, 6.4, &settings).unwrap();
        let expect = 6.4 * (1.0 + 0.25 * profile.mean_snr());
        assert!((mf - expect).abs() < 1e-12);

        // Scalability spot check: 2·I(Γ) > I(2Γ).
        for rx in [Receiver::MatchedFilter, Receiver::Mmse] {
            let base = interference_function(&profile, rx, 6.4, &settings).unwrap();
            let scaled =
                interference_function(&profile.scaled(2.0).unwrap(), rx, 6.4, &settings).unwrap();
            assert!(2.0 * base > scaled, "{rx:?}");
        }
    }

    #[test]
    fn sif_harness_passes_for_linear_receivers() {
        let settings = FixedPointSettings::default();
        for rx in [Receiver::MatchedFilter, Receiver::Decorrelator, Receiver::Mmse] {
            let report = sif_property_harness(rx, 1000, 7, &settings).unwrap();
            assert!(report.all_pass(), "{rx:?}: {report}");
        }
    }

    #[test]
    fn csv_trace_has_header_and_rows() {
        let params = paper_params(None);
        let run = run_upc(
            vec![1e-4; 8],
            &params,
            Receiver::Decorrelator,
            &uniform_targets(8),
            &UpcOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,user,power_watts,eta\n"));
        assert_eq!(text.lines().count(), 1 + 8 * run.power_trace.len());
    }
}
