//! Energy-efficiency utility and the Nash-equilibrium target SIR.
//!
//! A user transmitting `L` information bits out of `M`-bit packets at rate
//! `R` with packet-success probability f(γ) earns utility
//! u = L·R·f(γ) / (M·p) bits per joule. Because output SIR is proportional to
//! transmit power, the utility-maximizing SIR γ* solves f(γ) = γ·f′(γ),
//! independently of L, R, and the channel; at the (unique) Nash equilibrium
//! every user balances its SIR at γ*.
//!
//! For the canonical packet-success model f(γ) = (1 − e^{−γ})^M the defining
//! equation reduces algebraically to e^γ = 1 + Mγ, solved here by bisection.
//! Alternative efficiency functions can be supplied as tabulated (γ, f)
//! pairs; a safeguarded Newton iteration on the monotone-cubic interpolant
//! then finds γ*.

use crate::error::{Error, Result};

/// 10·log10(x).
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// 10^(x/10).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Packet-success model f(γ) = (1 − e^{−γ})^M with frame parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EfficiencyFunction {
    /// Total packet size in bits.
    pub m_bits: u32,
    /// Information bits per packet (L ≤ M).
    pub l_bits: u32,
    /// Transmission rate in bits/s.
    pub rate_bps: u32,
}

impl EfficiencyFunction {
    pub fn new(m_bits: u32, l_bits: u32, rate_bps: u32) -> Result<Self> {
        if m_bits == 0 {
            return Err(Error::InvalidInput("packet size M must be positive".into()));
        }
        if l_bits == 0 || l_bits > m_bits {
            return Err(Error::InvalidInput(format!(
                "information bits L = {l_bits} must satisfy 1 <= L <= M = {m_bits}"
            )));
        }
        if rate_bps == 0 {
            return Err(Error::InvalidInput("rate must be positive".into()));
        }
        Ok(Self {
            m_bits,
            l_bits,
            rate_bps,
        })
    }

    /// Packet-success probability f(γ) = (1 − e^{−γ})^M; f(0) = 0, f(∞) = 1.
    pub fn packet_success(&self, gamma: f64) -> f64 {
        (1.0 - (-gamma).exp()).powi(self.m_bits as i32)
    }

    /// f′(γ) = M·(1 − e^{−γ})^{M−1}·e^{−γ}.
    pub fn packet_success_derivative(&self, gamma: f64) -> f64 {
        let m = self.m_bits as f64;
        m * (1.0 - (-gamma).exp()).powi(self.m_bits as i32 - 1) * (-gamma).exp()
    }

    /// The positive solution γ* of f(γ) = γ·f′(γ), via the exact reduction
    /// e^γ = 1 + Mγ, bisected on [10⁻⁶, 50] to absolute tolerance `tol`.
    ///
    /// For M < 2 the only solution is γ = 0 (f is not sigmoidal), reported as
    /// [`Error::DegenerateEfficiencyFunction`].
    pub fn target_sir(&self, tol: f64) -> Result<TargetSir> {
        if self.m_bits < 2 {
            return Err(Error::DegenerateEfficiencyFunction {
                m_bits: self.m_bits,
            });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        let m = self.m_bits as f64;
        let g = |x: f64| x.exp() - 1.0 - m * x;
        let (mut lo, mut hi) = (1e-6, 50.0);
        debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        TargetSir::new(0.5 * (lo + hi))
    }

    /// Utility u = L·R·f(γ) / (M·p) in bits per joule.
    pub fn utility(&self, gamma: f64, power_watts: f64) -> Result<f64> {
        if !(power_watts > 0.0) {
            return Err(Error::ZeroPower { power: power_watts });
        }
        let (l, m) = (self.l_bits as f64, self.m_bits as f64);
        Ok(l * self.rate_bps as f64 * self.packet_success(gamma) / (m * power_watts))
    }

    /// Fraction of the maximum utility retained when the output SIR is γ̂
    /// instead of γ*: γ*·f(γ̂) / (γ̂·f(γ*)). Equals 1 iff γ̂ = γ*.
    pub fn utility_loss_ratio(&self, gamma_hat: f64, target: TargetSir) -> f64 {
        let gs = target.value();
        gs * self.packet_success(gamma_hat) / (gamma_hat * self.packet_success(gs))
    }
}

/// The Nash-equilibrium (utility-maximizing) output SIR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSir {
    gamma_star: f64,
}

impl TargetSir {
    /// Wrap an externally chosen target SIR (must be positive).
    pub fn new(gamma_star: f64) -> Result<Self> {
        if !(gamma_star > 0.0) || !gamma_star.is_finite() {
            return Err(Error::InvalidInput(format!(
                "target SIR {gamma_star} must be positive and finite"
            )));
        }
        Ok(Self { gamma_star })
    }

    pub fn value(self) -> f64 {
        self.gamma_star
    }

    pub fn as_db(self) -> f64 {
        linear_to_db(self.gamma_star)
    }
}

/// An efficiency function given as tabulated (γ, f) pairs, interpolated by a
/// monotone (Fritsch–Carlson) cubic so f stays non-decreasing between knots.
#[derive(Debug, Clone)]
pub struct TabulatedEfficiency {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedEfficiency {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidInput(
                "tabulated efficiency function needs at least 3 points".into(),
            ));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "abscissae must be strictly increasing".into(),
            ));
        }
        if ys.windows(2).any(|w| w[1] < w[0]) || ys.iter().any(|&y| !(0.0..=1.0).contains(&y)) {
            return Err(Error::InvalidInput(
                "ordinates must be non-decreasing within [0, 1]".into(),
            ));
        }
        let slopes = fritsch_carlson_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Interpolated f(γ); clamped to the end values outside the table.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let i = self.segment(x);
        let (h00, h10, h01, h11, h) = hermite_basis(self.xs[i], self.xs[i + 1], x);
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Interpolated f′(γ).
    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.xs[0] || x >= *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, m0, m1) = (self.ys[i], self.ys[i + 1], self.slopes[i], self.slopes[i + 1]);
        let dh00 = (6.0 * t * t - 6.0 * t) / h;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        dh00 * y0 + dh10 * m0 + dh01 * y1 + dh11 * m1
    }

    fn second_derivative(&self, x: f64) -> f64 {
        if x <= self.xs[0] || x >= *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, m0, m1) = (self.ys[i], self.ys[i + 1], self.slopes[i], self.slopes[i + 1]);
        let ddh00 = (12.0 * t - 6.0) / (h * h);
        let ddh10 = (6.0 * t - 4.0) / h;
        let ddh01 = -ddh00;
        let ddh11 = (6.0 * t - 2.0) / h;
        ddh00 * y0 + ddh10 * m0 + ddh01 * y1 + ddh11 * m1
    }

    /// Solve f(γ) = γ·f′(γ) on the interpolant: bracket a sign change of
    /// g(γ) = f − γf′ over the knots, then refine with Newton steps
    /// (g′ = −γf″) falling back to bisection whenever Newton leaves the
    /// bracket.
    pub fn target_sir(&self, tol: f64) -> Result<TargetSir> {
        let g = |x: f64| self.value(x) - x * self.derivative(x);
        let mut bracket = None;
        let probes = 8; // per segment, catches sign changes between knots
        let lo_x = self.xs[0].max(1e-12);
        let hi_x = *self.xs.last().unwrap();
        let mut prev = (lo_x, g(lo_x));
        let total = (self.xs.len() - 1) * probes;
        for j in 1..=total {
            let x = lo_x + (hi_x - lo_x) * j as f64 / total as f64;
            let gx = g(x);
            if prev.1 < 0.0 && gx >= 0.0 {
                bracket = Some((prev.0, x));
                break;
            }
            prev = (x, gx);
        }
        let (mut lo, mut hi) = bracket.ok_or_else(|| {
            Error::InvalidInput("no interior utility-maximizing SIR in the tabulated range".into())
        })?;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            if hi - lo < tol {
                break;
            }
            let gx = g(x);
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let dg = -x * self.second_derivative(x);
            let newton = if dg != 0.0 { x - gx / dg } else { x };
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        TargetSir::new(0.5 * (lo + hi))
    }
}

fn fritsch_carlson_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

fn hermite_basis(x0: f64, x1: f64, x: f64) -> (f64, f64, f64, f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
        h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canonical() -> EfficiencyFunction {
        EfficiencyFunction::new(100, 100, 100_000).unwrap()
    }

    #[test]
    fn packet_success_boundaries() {
        let f = canonical();
        assert_eq!(f.packet_success(0.0), 0.0);
        assert!((f.packet_success(1e3) - 1.0).abs() < 1e-15);
        assert!((f.packet_success(6.4) - 0.846_797_307_754_893).abs() < 1e-12);
    }

    #[test]
    fn target_sir_small_packet() {
        let f = EfficiencyFunction::new(2, 2, 1).unwrap();
        let gs = f.target_sir(1e-10).unwrap().value();
        assert!((gs - 1.256_431_208_626_17).abs() < 1e-8, "gs={gs}");
    }

    #[test]
    fn target_sir_hundred_bit_packet() {
        let f = canonical();
        let t = f.target_sir(1e-10).unwrap();
        assert!((t.value() - 6.474_600_379_589_358).abs() < 1e-8);
        assert!((t.as_db() - 8.112).abs() < 5e-3);
        // Defining equation holds at the root.
        let resid = f.packet_success(t.value())
            - t.value() * f.packet_success_derivative(t.value());
        assert!(resid.abs() < 1e-8, "residual {resid}");
    }

    #[test]
    fn target_sir_degenerate() {
        let f = EfficiencyFunction::new(1, 1, 1).unwrap();
        assert!(matches!(
            f.target_sir(1e-10),
            Err(Error::DegenerateEfficiencyFunction { m_bits: 1 })
        ));
    }

    #[test]
    fn target_sir_ignores_l_and_rate() {
        let a = EfficiencyFunction::new(100, 100, 100_000).unwrap();
        let b = EfficiencyFunction::new(100, 4, 7).unwrap();
        assert_eq!(
            a.target_sir(1e-12).unwrap().value(),
            b.target_sir(1e-12).unwrap().value()
        );
    }

    #[test]
    fn utility_example() {
        let f = canonical();
        let u = f.utility(6.4, 1e-3).unwrap();
        assert!((u - 8.467_973_077_548_93e7).abs() / u < 1e-12);
        assert_eq!(f.utility(0.0, 1e-3).unwrap(), 0.0);
        let double = f.utility(6.4, 2e-3).unwrap();
        assert!((u - 2.0 * double).abs() / u < 1e-12);
        assert!(matches!(f.utility(6.4, 0.0), Err(Error::ZeroPower { .. })));
    }

    #[test]
    fn loss_ratio_identity_and_one_db() {
        let f = canonical();
        let t = f.target_sir(1e-12).unwrap();
        assert!((f.utility_loss_ratio(t.value(), t) - 1.0).abs() < 1e-12);
        let one_db_up = t.value() * db_to_linear(1.0);
        let r = f.utility_loss_ratio(one_db_up, t);
        assert!((r - 0.900_526_499_337_5).abs() < 1e-9, "r={r}");
    }

    #[test]
    fn tabulated_matches_closed_form_target() {
        let f = canonical();
        let pts: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let x = i as f64 * 0.05;
                (x, f.packet_success(x))
            })
            .collect();
        let tab = TabulatedEfficiency::new(&pts).unwrap();
        let exact = f.target_sir(1e-12).unwrap().value();
        let approx = tab.target_sir(1e-10).unwrap().value();
        assert!(
            (exact - approx).abs() < 2e-3,
            "exact={exact} approx={approx}"
        );
    }

    #[test]
    fn tabulated_interpolant_stays_monotone() {
        let pts = [
            (0.0, 0.0),
            (1.0, 0.02),
            (2.0, 0.05),
            (4.0, 0.4),
            (6.0, 0.85),
            (8.0, 0.97),
            (12.0, 1.0),
        ];
        let tab = TabulatedEfficiency::new(&pts).unwrap();
        let mut prev = -1.0;
        for i in 0..=1200 {
            let v = tab.value(i as f64 * 0.01);
            assert!(v >= prev - 1e-12, "monotonicity broken at {i}");
            prev = v;
        }
    }

    #[test]
    fn loss_ratio_unimodal_around_target() {
        let f = canonical();
        let t = f.target_sir(1e-12).unwrap();
        let ratio = |g: f64| f.utility_loss_ratio(g, t);
        // Strictly increasing on a grid below γ*, strictly decreasing above.
        let below: Vec<f64> = (1..=40).map(|i| t.value() * i as f64 / 41.0).collect();
        assert!(below.windows(2).all(|w| ratio(w[0]) < ratio(w[1])));
        let above: Vec<f64> = (1..=40).map(|i| t.value() * (1.0 + i as f64 / 10.0)).collect();
        assert!(above.windows(2).all(|w| ratio(w[0]) > ratio(w[1])));
    }

    #[test]
    fn dbd_conversions() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-12);
        assert!((db_to_linear(linear_to_db(6.4)) - 6.4).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn loss_ratio_never_exceeds_one(gamma_hat in 1e-3f64..1e3) {
            let f = canonical();
            let t = f.target_sir(1e-12).unwrap();
            let r = f.utility_loss_ratio(gamma_hat, t);
            prop_assert!(r <= 1.0 + 1e-9, "ratio {r} at {gamma_hat}");
        }

        #[test]
        fn target_maximizes_f_over_gamma(gamma in 1e-3f64..1e3, m in 2u32..500) {
            let f = EfficiencyFunction::new(m, m.min(2), 1).unwrap();
            let t = f.target_sir(1e-12).unwrap();
            if (gamma - t.value()).abs() > 1e-6 {
                let at_target = f.packet_success(t.value()) / t.value();
                let elsewhere = f.packet_success(gamma) / gamma;
                prop_assert!(elsewhere < at_target + 1e-12);
            }
        }

        #[test]
        fn packet_success_increasing(a in 1e-6f64..50.0, b in 1e-6f64..50.0) {
            let f = canonical();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(f.packet_success(lo) <= f.packet_success(hi) + 1e-15);
        }
    }
}
