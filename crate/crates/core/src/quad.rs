//! Gauss–Hermite quadrature via the Golub–Welsch algorithm.
//!
//! Nodes and weights for ∫ e^{-t²} g(t) dt come from the eigen-decomposition
//! of the Jacobi matrix of the (physicists') Hermite recurrence: the matrix is
//! symmetric tridiagonal with zero diagonal and off-diagonal √((i+1)/2), its
//! eigenvalues are the nodes, and μ₀ = √π times the squared first eigenvector
//! components are the weights.

use crate::error::{Error, Result};

/// A Gauss–Hermite rule with nodes sorted ascending.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Build an `n`-point rule.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput(
                "quadrature rule needs at least one node".into(),
            ));
        }
        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (1..n).map(|i| (i as f64 / 2.0).sqrt()).collect();
        off.push(0.0);
        // First eigenvector components, accumulated through the rotations.
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        tridiag_eigen(&mut diag, &mut off, &mut first)?;

        let mu0 = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = diag
            .iter()
            .zip(first.iter())
            .map(|(&x, &z)| (x, mu0 * z * z))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ e^{-t²} g(t) dt.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }

    /// E[g(Z)] for Z ~ N(0,1), using the substitution z = √2 t.
    pub fn normal_expectation<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let s = std::f64::consts::PI.sqrt();
        self.integrate(|t| g(std::f64::consts::SQRT_2 * t)) / s
    }
}

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal and is overwritten with eigenvalues; `e` holds the
/// off-diagonal in `e[0..n-1]` (with `e[n-1]` as scratch); `z` is a row vector
/// rotated alongside, so that on exit `z[i]` is the first component of the
/// i-th eigenvector.
fn tridiag_eigen(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Look for a negligible off-diagonal element.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::NoConvergence {
                    iters: iter,
                    residual: e[l].abs(),
                });
            }
            // Wilkinson-style shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn one_point_rule() {
        let q = GaussHermite::new(1).unwrap();
        assert!((q.nodes()[0]).abs() < 1e-14);
        assert!((q.weights()[0] - SQRT_PI).abs() < 1e-14);
    }

    #[test]
    fn four_point_rule_matches_reference() {
        // Abramowitz & Stegun table 25.10.
        let q = GaussHermite::new(4).unwrap();
        let nodes = [
            -1.650_680_123_885_785,
            -0.524_647_623_275_290,
            0.524_647_623_275_290,
            1.650_680_123_885_785,
        ];
        let weights = [
            8.131_283_544_724_52e-2,
            8.049_140_900_055_13e-1,
            8.049_140_900_055_13e-1,
            8.131_283_544_724_52e-2,
        ];
        for i in 0..4 {
            assert!((q.nodes()[i] - nodes[i]).abs() < 1e-12, "node {i}");
            assert!((q.weights()[i] - weights[i]).abs() < 1e-12, "weight {i}");
        }
    }

    #[test]
    fn moments_are_exact() {
        // An n-point rule integrates polynomials up to degree 2n-1 exactly.
        for n in [8usize, 32, 64, 128] {
            let q = GaussHermite::new(n).unwrap();
            assert!((q.integrate(|_| 1.0) - SQRT_PI).abs() < 1e-12 * n as f64);
            assert!((q.integrate(|t| t * t) - SQRT_PI / 2.0).abs() < 1e-11);
            assert!(q.integrate(|t| t * t * t).abs() < 1e-11);
            assert!((q.integrate(|t| t.powi(4)) - 0.75 * SQRT_PI).abs() < 1e-10);
        }
    }

    #[test]
    fn normal_expectation_of_square_is_one() {
        let q = GaussHermite::new(64).unwrap();
        assert!((q.normal_expectation(|z| z * z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussHermite::new(0).is_err());
    }
}
