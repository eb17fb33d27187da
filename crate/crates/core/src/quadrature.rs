//! Gauss–Hermite and Gauss–Legendre rules.

use crate::error::{Error, Result};
use crate::hermite::{pair_with, recurrence_coeffs};

/// Largest Gauss–Hermite order accepted by [`gauss_hermite_rule`].
pub const MAX_GH_ORDER: usize = 10_000;

/// Gauss–Hermite rule for the weight `e^{-x²}`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    /// Weights for `∫ g(x) e^{-x²} dx`; may underflow for large `|x|`.
    pub weights: Vec<f64>,
    /// Weights with the Gaussian folded in, for `∫ f(x) dx`. These never underflow.
    pub folded_weights: Vec<f64>,
}

/// Nodes and weights of the `m`-point Gauss–Hermite rule.
///
/// Nodes are the eigenvalues of the Jacobi matrix (computed by implicit QL),
/// each polished by Newton steps on the normalized Hermite function `φ_m`.
pub fn gauss_hermite_rule(m: usize) -> Result<GaussHermite> {
    if m == 0 {
        return Err(Error::InvalidArgument("Gauss–Hermite order must be positive".into()));
    }
    if m > MAX_GH_ORDER {
        return Err(Error::Sizing {
            what: "Gauss–Hermite order",
            required: m as u128,
            cap: MAX_GH_ORDER as u128,
        });
    }

    let mut diag = vec![0.0; m];
    let mut off: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Only the non-negative half is polished; the rule is symmetric.
    let half = m / 2;
    let mut nodes = vec![0.0; m];
    let mut folded = vec![0.0; m];
    let scale = (2.0 * m as f64).sqrt();
    let coeffs = recurrence_coeffs(m);
    for i in 0..(m - half) {
        let j = m - 1 - i;
        let mut x = if m % 2 == 1 && i == m - half - 1 { 0.0 } else { diag[j].abs() };
        if x != 0.0 {
            for _ in 0..8 {
                let (pm, pm1) = pair_with(&coeffs, x);
                let dx = pm / (scale * pm1);
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
        }
        let (_, pm1) = pair_with(&coeffs, x);
        let w = 1.0 / (m as f64 * pm1 * pm1);
        nodes[j] = x;
        folded[j] = w;
        nodes[m - 1 - j] = -x;
        folded[m - 1 - j] = w;
    }

    let weights = nodes
        .iter()
        .zip(&folded)
        .map(|(x, w)| w * (-x * x).exp())
        .collect();
    Ok(GaussHermite { nodes, weights, folded_weights: folded })
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson shifts.
/// On return `d` holds the (unsorted) eigenvalues; `e` is destroyed.
/// `e[i]` couples rows `i` and `i+1`; `e[n-1]` is ignored.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
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
            if iter > 60 {
                return Err(Error::Unsupported("QL iteration failed to converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
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

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let nf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over `[a, b]` with a precomputed Legendre rule.
pub fn integrate_legendre(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_point_rule() {
        let r = gauss_hermite_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule_matches_roots_of_h2() {
        let r = gauss_hermite_rule(2).unwrap();
        let x = 0.5f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15);
        assert!((r.nodes[1] - x).abs() < 1e-15);
        for w in &r.weights {
            assert!((w - PI.sqrt() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for m in [3, 7, 20, 64, 129, 300] {
            let r = gauss_hermite_rule(m).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - PI.sqrt()).abs() < 1e-14, "m={m} sum={s}");
        }
    }

    #[test]
    fn integrates_moments_exactly() {
        // ∫ x^{2j} e^{-x²} = Γ(j+1/2)
        let r = gauss_hermite_rule(10).unwrap();
        let mut gamma = PI.sqrt();
        for j in 0..10 {
            let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(2 * j)).sum();
            assert!((q - gamma).abs() < 1e-12 * gamma, "j={j}");
            gamma *= j as f64 + 0.5;
        }
    }

    #[test]
    fn nodes_strictly_increasing_and_symmetric() {
        let r = gauss_hermite_rule(501).unwrap();
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(r.nodes[250], 0.0);
        for i in 0..501 {
            assert_eq!(r.nodes[i], -r.nodes[500 - i]);
        }
    }

    #[test]
    fn rejects_large_orders() {
        assert!(matches!(gauss_hermite_rule(MAX_GH_ORDER + 1), Err(Error::Sizing { .. })));
        assert!(gauss_hermite_rule(0).is_err());
    }

    #[test]
    fn legendre_rule() {
        let rule = gauss_legendre_rule(12);
        let s: f64 = rule.1.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let i = integrate_legendre(&rule, 0.0, PI, f64::sin);
        assert!((i - 2.0).abs() < 1e-14);
        let odd = gauss_legendre_rule(5);
        assert_eq!(odd.0[2], 0.0);
    }
}
