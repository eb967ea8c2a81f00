//! Large-system multiuser-efficiency fixed points.
//!
//! In the large-system limit every user sees the linear SIR law γ = η·Γ,
//! where the multiuser efficiency η depends on the received-SNR profile only
//! through its distribution. With finitely many users the expectations are
//! replaced by empirical averages over the profile, which is exactly what
//! these solvers do: they never carry a distribution object.
//!
//! Supported receivers and their efficiencies:
//! - matched filter: η = 1 / (1 + α·mean(Γ))
//! - decorrelator:   η = 1 − α for α < 1
//! - linear MMSE:    1/η = 1 + α·mean(Γ / (1 + ηΓ))
//! - individually optimal (BPSK): 1/η = 1 + α·mean(Γ·(1 − E[tanh(ηΓ + √(ηΓ)Z)]))
//!
//! The implicit equations are solved by damped fixed-point iteration from
//! η₀ = 1; the Gaussian expectation in the IO equation uses Gauss–Hermite
//! quadrature after the substitution z = √2·t.

use crate::error::{Error, Result};
use crate::quad::GaussHermite;

/// Damping factor for the fixed-point iterations.
const DAMPING: f64 = 0.5;

/// Restart threshold: if the solution reached from η₀ = 1 and the one reached
/// from η₀ = 10⁻⁶ differ by more than this, the fixed point is ambiguous.
const AMBIGUITY_TOL: f64 = 1e-4;

/// Per-user received SNRs Γ_k together with the load α = K/N.
///
/// The SNRs are dimensionless (power · gain / noise variance). α = 0 is
/// accepted as the vanishing-load (single-user) limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrProfile {
    snrs: Vec<f64>,
    alpha: f64,
}

impl SnrProfile {
    pub fn new(snrs: Vec<f64>, alpha: f64) -> Result<Self> {
        if snrs.is_empty() {
            return Err(Error::InvalidInput("SNR profile must be non-empty".into()));
        }
        if snrs.iter().any(|&g| !g.is_finite() || g < 0.0) {
            return Err(Error::InvalidInput(
                "SNRs must be finite and non-negative".into(),
            ));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidInput(
                "load alpha must be finite and non-negative".into(),
            ));
        }
        Ok(Self { snrs, alpha })
    }

    /// Profile with all `k` users at the same SNR (a point mass).
    pub fn point_mass(gamma: f64, alpha: f64, k: usize) -> Result<Self> {
        Self::new(vec![gamma; k.max(1)], alpha)
    }

    pub fn snrs(&self) -> &[f64] {
        &self.snrs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mean_snr(&self) -> f64 {
        self.snrs.iter().sum::<f64>() / self.snrs.len() as f64
    }

    /// Empirical average of `f` over the per-user SNRs.
    pub fn mean_of<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.snrs.iter().map(|&g| f(g)).sum::<f64>() / self.snrs.len() as f64
    }

    /// Same profile with every SNR multiplied by `theta`.
    pub fn scaled(&self, theta: f64) -> Result<Self> {
        Self::new(self.snrs.iter().map(|&g| theta * g).collect(), self.alpha)
    }
}

/// Multiuser efficiency, the SNR degradation factor; always in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    eta: f64,
}

impl Efficiency {
    fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "efficiency {eta} outside (0, 1]"
            )));
        }
        Ok(Self { eta })
    }

    pub fn value(self) -> f64 {
        self.eta
    }
}

/// Solver parameters for the implicit efficiency equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    /// Relative convergence tolerance on successive iterates.
    pub tol: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Node count for the Gauss–Hermite evaluation of the IO integral.
    pub quadrature_nodes: usize,
}

impl FixedPointSettings {
    pub fn new(tol: f64, max_iters: usize, quadrature_nodes: usize) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if quadrature_nodes < 8 {
            return Err(Error::InvalidInput(
                "quadrature_nodes must be at least 8".into(),
            ));
        }
        Ok(Self {
            tol,
            max_iters,
            quadrature_nodes,
        })
    }
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            quadrature_nodes: 64,
        }
    }
}

/// The receiver family sharing the linear large-system SIR law.
///
/// The jointly optimal (maximum-likelihood) detector is driven by the
/// individually-optimal efficiency fixed point: the two share the power
/// control loop here, differing only at the bit-decision stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Receiver {
    #[serde(rename = "mf")]
    MatchedFilter,
    #[serde(rename = "dec")]
    Decorrelator,
    #[serde(rename = "mmse")]
    Mmse,
    #[serde(rename = "io")]
    IndividuallyOptimal,
    #[serde(rename = "ml")]
    JointlyOptimalMl,
}

impl Receiver {
    pub fn label(self) -> &'static str {
        match self {
            Receiver::MatchedFilter => "mf",
            Receiver::Decorrelator => "dec",
            Receiver::Mmse => "mmse",
            Receiver::IndividuallyOptimal => "io",
            Receiver::JointlyOptimalMl => "ml",
        }
    }
}

/// Matched-filter efficiency 1 / (1 + α·mean(Γ)).
pub fn mf_efficiency(profile: &SnrProfile) -> Efficiency {
    Efficiency {
        eta: 1.0 / (1.0 + profile.alpha() * profile.mean_snr()),
    }
}

/// Decorrelator efficiency 1 − α, defined for α < 1.
pub fn dec_efficiency(alpha: f64) -> Result<Efficiency> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidInput(
            "load alpha must be finite and non-negative".into(),
        ));
    }
    if alpha >= 1.0 {
        return Err(Error::LoadTooHigh { alpha });
    }
    Efficiency::new(1.0 - alpha)
}

/// Linear-MMSE efficiency: unique solution of 1/η = 1 + α·mean(Γ/(1+ηΓ)).
pub fn mmse_efficiency(profile: &SnrProfile, settings: &FixedPointSettings) -> Result<Efficiency> {
    let rhs = |eta: f64| 1.0 / (1.0 + profile.alpha() * profile.mean_of(|g| g / (1.0 + eta * g)));
    let eta = damped_fixed_point(rhs, 1.0, settings)?;
    Efficiency::new(eta)
}

/// Closed-form MMSE efficiency for an equal-power (point-mass) SNR profile.
///
/// η = (1−α)/2 − 1/(2Γ) + ½·√((1−α)² + 2(1+α)/Γ + 1/Γ²), the positive root of
/// the point-mass fixed-point quadratic Γη² + (1 + αΓ − Γ)η − 1 = 0.
pub fn mmse_efficiency_closed_form(gamma_snr: f64, alpha: f64) -> f64 {
    let a = alpha;
    let g = gamma_snr;
    0.5 * (1.0 - a) - 0.5 / g
        + 0.5 * ((1.0 - a).powi(2) + 2.0 * (1.0 + a) / g + 1.0 / (g * g)).sqrt()
}

/// Individually-optimal (BPSK) efficiency:
/// 1/η = 1 + α·mean(Γ − Γ·E[tanh(ηΓ + √(ηΓ)·Z)]), Z ~ N(0,1).
///
/// The Gaussian expectation is evaluated by Gauss–Hermite quadrature. The
/// iteration from η₀ = 1 selects the largest fixed point; a verification
/// restart from η₀ = 10⁻⁶ detects multiple solutions, which are logged rather
/// than resolved (free-energy selection is out of scope here).
pub fn io_efficiency(profile: &SnrProfile, settings: &FixedPointSettings) -> Result<Efficiency> {
    let quad = GaussHermite::new(settings.quadrature_nodes)?;
    let rhs = |eta: f64| {
        let mean = profile.mean_of(|g| g * (1.0 - tanh_expectation(&quad, eta * g)));
        1.0 / (1.0 + profile.alpha() * mean)
    };
    let from_one = damped_fixed_point(rhs, 1.0, settings)?;
    let from_zero = damped_fixed_point(rhs, 1e-6, settings)?;
    if (from_one - from_zero).abs() > AMBIGUITY_TOL {
        log::warn!(
            "IO efficiency fixed point is ambiguous: eta={from_one:.8} from above, \
             eta={from_zero:.8} from below; keeping the branch reached from eta=1"
        );
    }
    Efficiency::new(from_one)
}

/// E[tanh(s + √s·Z)] for Z ~ N(0,1); equals ∫φ(z)·tanh(s − z√s)dz by symmetry.
fn tanh_expectation(quad: &GaussHermite, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let sqrt_s = s.sqrt();
    quad.normal_expectation(|z| (s + sqrt_s * z).tanh())
}

/// Compute the efficiency of `receiver` on `profile`.
pub fn receiver_efficiency(
    receiver: Receiver,
    profile: &SnrProfile,
    settings: &FixedPointSettings,
) -> Result<Efficiency> {
    match receiver {
        Receiver::MatchedFilter => Ok(mf_efficiency(profile)),
        Receiver::Decorrelator => dec_efficiency(profile.alpha()),
        Receiver::Mmse => mmse_efficiency(profile, settings),
        Receiver::IndividuallyOptimal | Receiver::JointlyOptimalMl => {
            io_efficiency(profile, settings)
        }
    }
}

/// Damped Picard iteration η ← (1−d)·η + d·G(η) with relative stopping rule.
fn damped_fixed_point<F: Fn(f64) -> f64>(
    rhs: F,
    start: f64,
    settings: &FixedPointSettings,
) -> Result<f64> {
    let mut eta = start;
    for _ in 0..settings.max_iters {
        let next = (1.0 - DAMPING) * eta + DAMPING * rhs(eta);
        if (next - eta).abs() < settings.tol * next.abs() {
            return Ok(next);
        }
        eta = next;
    }
    Err(Error::NoConvergence {
        iters: settings.max_iters,
        residual: (rhs(eta) - eta).abs(),
    })
}
