//! Closed-form piecewise exponents: `γ_p`, `γ_∞`, `θ_∞`, `δ(p)` and the
//! regularity thresholds for linear, spectral and multilinear operators.
//!
//! Every threshold `s` returned here is the infimum of an open condition:
//! boundedness holds for `s` strictly greater than the returned value.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;

/// Sup-norm decay exponent of Hermite functions.
pub const THETA_INFTY: f64 = -1.0 / 12.0;

/// Gap between the Fourier and Fourier–Hermite flavors of the linear threshold.
pub const FHT_SHIFT: f64 = 1.0 / 12.0;

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ThresholdKind {
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "gamma-infty")]
    GammaInfty,
    #[serde(rename = "theta-infty")]
    ThetaInfty,
    #[serde(rename = "s-linear-FT")]
    SLinearFt,
    #[serde(rename = "s-linear-FHT")]
    SLinearFht,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "s-spectral-pp'")]
    SSpectralPpPrime,
    #[serde(rename = "s-spectral-pq")]
    SSpectralPq,
    #[serde(rename = "s-multilinear")]
    SMultilinear,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 9] = [
        ThresholdKind::Gamma,
        ThresholdKind::GammaInfty,
        ThresholdKind::ThetaInfty,
        ThresholdKind::SLinearFt,
        ThresholdKind::SLinearFht,
        ThresholdKind::Delta,
        ThresholdKind::SSpectralPpPrime,
        ThresholdKind::SSpectralPq,
        ThresholdKind::SMultilinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::Gamma => "gamma",
            ThresholdKind::GammaInfty => "gamma-infty",
            ThresholdKind::ThetaInfty => "theta-infty",
            ThresholdKind::SLinearFt => "s-linear-FT",
            ThresholdKind::SLinearFht => "s-linear-FHT",
            ThresholdKind::Delta => "delta",
            ThresholdKind::SSpectralPpPrime => "s-spectral-pp'",
            ThresholdKind::SSpectralPq => "s-spectral-pq",
            ThresholdKind::SMultilinear => "s-multilinear",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = match key.as_str() {
            "s-spectral-ppprime" | "s-spectral-pp-prime" => "s-spectral-pp'",
            other => other,
        };
        ThresholdKind::ALL
            .into_iter()
            .find(|k| k.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Parse(format!("unknown threshold kind '{s}'")))
    }
}

/// One evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdQuery {
    pub kind: ThresholdKind,
    pub n: usize,
    pub p: Exponent,
    pub kappa: Option<usize>,
}

impl ThresholdQuery {
    pub fn evaluate(&self) -> Result<f64> {
        match self.kind {
            ThresholdKind::Gamma => gamma(self.n, self.p),
            ThresholdKind::GammaInfty => {
                check_dim(self.n)?;
                Ok(gamma_infty(self.n))
            }
            ThresholdKind::ThetaInfty => Ok(THETA_INFTY),
            ThresholdKind::Delta => delta(self.n, self.p),
            kind => s_threshold(kind, self.n, self.p, self.kappa),
        }
    }
}

/// A piece of a piecewise formula: the range of `p` it covers and the value as
/// a function of `u = 1/2 − 1/p` (or of `p` itself for the spectral pieces).
struct Branch {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
    f: Box<dyn Fn(f64) -> f64>,
}

impl Branch {
    fn new(lo: f64, hi: f64, closed: (bool, bool), f: impl Fn(f64) -> f64 + 'static) -> Self {
        Branch { lo, hi, lo_closed: closed.0, hi_closed: closed.1, f: Box::new(f) }
    }

    fn point(p: f64, value: f64) -> Self {
        Branch::new(p, p, (true, true), move |_| value)
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn contains(&self, p: f64) -> bool {
        if self.is_point() {
            return near(p, self.lo);
        }
        let above = if self.lo_closed { p >= self.lo || near(p, self.lo) } else { p > self.lo && !near(p, self.lo) };
        let below = if self.hi.is_infinite() {
            p < f64::INFINITY || self.hi_closed
        } else if self.hi_closed {
            p <= self.hi || near(p, self.hi)
        } else {
            p < self.hi && !near(p, self.hi)
        };
        above && below
    }
}

fn near(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= BOUNDARY_TOL * b.abs().max(1.0)
}

fn find<'a>(branches: &'a [Branch], p: f64) -> Option<&'a Branch> {
    branches.iter().find(|b| b.contains(p))
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(())
}

fn u_of(p: Exponent) -> f64 {
    0.5 - p.recip()
}

fn critical(n: usize) -> f64 {
    let n = n as f64;
    2.0 * (n + 3.0) / (n + 1.0)
}

fn sobolev(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        let n = n as f64;
        2.0 * n / (n - 2.0)
    }
}

/// `γ_p` on `p ≥ 2`, as a function of `u = 1/2 − 1/p`.
fn gamma_branches(n: usize) -> Vec<Branch> {
    let nf = n as f64;
    if n == 1 {
        return vec![
            Branch::new(2.0, 4.0, (true, true), |_| 0.0),
            Branch::new(4.0, f64::INFINITY, (false, true), |u| -1.0 / 6.0 + 2.0 / 3.0 * u),
        ];
    }
    let p0 = critical(n);
    let p1 = sobolev(n);
    let mut b = vec![
        Branch::point(p0, (nf - 1.0) / (2.0 * (nf + 3.0))),
        Branch::new(2.0, p0, (true, false), move |u| (nf - 1.0) / 2.0 * u),
        Branch::new(p0, p1, (false, true), move |u| -1.0 / 6.0 + 2.0 * nf / 3.0 * u),
    ];
    if p1.is_finite() {
        b.push(Branch::new(p1, f64::INFINITY, (true, true), move |u| -0.5 + nf * u));
    }
    b
}

/// Fourier-flavor `s_{n,p}` on `2 ≤ p < ∞`, as a function of `u = 1/2 − 1/p`.
fn linear_upper_branches(n: usize) -> Vec<Branch> {
    let nf = n as f64;
    if n == 1 {
        return vec![
            Branch::point(4.0, 2.0),
            Branch::new(2.0, 4.0, (true, false), |_| 1.5),
            Branch::new(4.0, f64::INFINITY, (false, false), |u| 4.0 / 3.0 + 2.0 / 3.0 * u),
        ];
    }
    let p0 = critical(n);
    let p1 = sobolev(n);
    let base = 1.5 * nf;
    let mut b = vec![
        Branch::point(p0, base + (nf - 1.0) / (2.0 * (nf + 3.0))),
        Branch::new(2.0, p0, (true, false), move |u| base + (nf - 1.0) / 2.0 * u),
        Branch::new(p0, p1, (false, p1.is_finite()), move |u| base - 1.0 / 6.0 + 2.0 * nf / 3.0 * u),
    ];
    if p1.is_finite() {
        b.push(Branch::new(p1, f64::INFINITY, (true, false), move |u| (3.0 * nf - 1.0) / 2.0 + nf * u));
    }
    b
}

/// Fourier-flavor `s_{n,p}` on `1 < p < 2`. The formulas are evaluated at
/// the dual exponent, i.e. with `u = 1/p − 1/2`.
fn linear_lower_branches(n: usize) -> Vec<Branch> {
    let nf = n as f64;
    if n == 1 {
        return vec![
            Branch::new(4.0 / 3.0, 2.0, (true, false), |_| 1.5),
            Branch::new(1.0, 4.0 / 3.0, (false, false), |u| 4.0 / 3.0 + 2.0 / 3.0 * u),
        ];
    }
    let q0 = 2.0 * (nf + 3.0) / (nf + 5.0);
    let q1 = 2.0 * nf / (nf + 2.0);
    let base = 1.5 * nf;
    vec![
        Branch::new(q0, 2.0, (true, true), move |u| base + (nf - 1.0) / 2.0 * u),
        Branch::new(q1, q0, (true, true), move |u| base - 1.0 / 6.0 + 2.0 * nf / 3.0 * u),
        Branch::new(1.0, q1, (false, true), move |u| (3.0 * nf - 1.0) / 2.0 + nf * u),
    ]
}

/// `γ_p`: growth exponent of `‖φ_ν‖_p ‖φ_ν‖_{p'}` in `|ν|`. Defined for
/// `p ∈ (1, ∞]`, with `γ_p = γ_{p'}` below 2.
pub fn gamma(n: usize, p: Exponent) -> Result<f64> {
    check_dim(n)?;
    let pv = p.value();
    if pv.is_nan() || pv <= 1.0 {
        return Err(Error::InvalidArgument(format!("gamma requires p in (1, ∞], got {p}")));
    }
    let q = if pv < 2.0 { p.conjugate() } else { p };
    let branches = gamma_branches(n);
    let b = find(&branches, q.value()).expect("gamma branches cover [2, ∞]");
    Ok((b.f)(u_of(q)))
}

/// `γ_∞`: `(n−1)/2` for `n ≥ 2` and `1/6` for `n = 1`.
pub fn gamma_infty(n: usize) -> f64 {
    if n == 1 {
        1.0 / 6.0
    } else {
        (n as f64 - 1.0) / 2.0
    }
}

/// `δ(p) = n|1/p − 1/2| − 1/2` for `p ∈ [1, ∞]`.
pub fn delta(n: usize, p: Exponent) -> Result<f64> {
    check_dim(n)?;
    let pv = p.value();
    if pv.is_nan() || pv < 1.0 {
        return Err(Error::InvalidArgument(format!("delta requires p in [1, ∞], got {p}")));
    }
    let nf = n as f64;
    // n/p − n/2 rounds better than n·(1/p − 1/2) at p = 2n/(n+2)
    let np = if p.is_infinite() { 0.0 } else { nf / pv };
    Ok((np - nf / 2.0).abs() - 0.5)
}

/// Regularity threshold of the given kind; boundedness holds for `s` strictly
/// above the returned value. `kappa` is the arity and is used only by
/// [`ThresholdKind::SMultilinear`].
pub fn s_threshold(kind: ThresholdKind, n: usize, p: Exponent, kappa: Option<usize>) -> Result<f64> {
    check_dim(n)?;
    let pv = p.value();
    if pv.is_nan() || pv < 1.0 {
        return Err(Error::InvalidArgument(format!("exponent must lie in [1, ∞], got {p}")));
    }
    let outside = || Error::InvalidArgument(format!("no {kind} bullet covers n={n}, p={p}"));
    match kind {
        ThresholdKind::SLinearFt | ThresholdKind::SLinearFht => {
            if pv <= 1.0 || p.is_infinite() {
                return Err(outside());
            }
            let (branches, u) = if pv >= 2.0 {
                (linear_upper_branches(n), u_of(p))
            } else {
                (linear_lower_branches(n), -u_of(p))
            };
            let b = find(&branches, pv).ok_or_else(outside)?;
            let s = (b.f)(u);
            Ok(if kind == ThresholdKind::SLinearFht { s - FHT_SHIFT } else { s })
        }
        ThresholdKind::SSpectralPpPrime => spectral_pp(n, pv).ok_or_else(outside),
        ThresholdKind::SSpectralPq => spectral_pq(n, pv).ok_or_else(outside),
        ThresholdKind::SMultilinear => {
            let kappa = kappa.ok_or_else(|| Error::InvalidArgument("s-multilinear needs an arity κ".into()))?;
            if kappa < 2 {
                return Err(Error::InvalidArgument(format!("s-multilinear needs κ ≥ 2, got {kappa}")));
            }
            multilinear(n, kappa, p)
        }
        other => Err(Error::InvalidArgument(format!("{other} is not a regularity threshold"))),
    }
}

fn spectral_pp(n: usize, p: f64) -> Option<f64> {
    let nf = n as f64;
    let branches = if n == 1 {
        vec![
            Branch::point(4.0 / 3.0, 1.5),
            Branch::new(4.0 / 3.0, 2.0, (false, true), |p| 2.0 - 1.0 / p),
            Branch::new(1.0, 4.0 / 3.0, (false, false), |p| 1.0 + 1.0 / (3.0 * p)),
        ]
    } else {
        let q1 = 2.0 * nf / (nf + 2.0);
        vec![
            Branch::new(1.0, q1, (true, true), move |p| (nf + 1.0) / 2.0 + nf * (1.0 / p - 0.5).abs() - 0.5),
            Branch::new(q1, 2.0, (false, true), move |_| 1.5 * nf),
        ]
    };
    find(&branches, p).map(|b| (b.f)(p))
}

fn spectral_pq(n: usize, p: f64) -> Option<f64> {
    let nf = n as f64;
    let branches = if n == 1 {
        vec![
            Branch::new(4.0 / 3.0, 2.0, (true, false), |_| 1.5),
            Branch::new(1.0, 4.0 / 3.0, (false, false), |p| 1.0 + 1.0 / (3.0 * p)),
        ]
    } else {
        let q1 = 2.0 * nf / (nf + 2.0);
        vec![
            Branch::new(1.0, q1, (false, true), move |p| (3.0 * nf - 1.0) / 2.0 + nf * (0.5 - 1.0 / p)),
            Branch::new(q1, 2.0, (false, true), move |_| 1.5 * nf),
        ]
    };
    find(&branches, p).map(|b| (b.f)(p))
}

fn multilinear(n: usize, kappa: usize, p: Exponent) -> Result<f64> {
    let nf = n as f64;
    let k = kappa as f64;
    let base = 1.5 * nf * k;
    let quarter = base + (k - 1.0) * nf / 4.0;
    if p.value() <= 2.0 {
        Ok(quarter.max(base + (k - 1.0) * gamma_infty(n)))
    } else {
        let g = gamma(n, p)?;
        Ok(quarter.max(base + (nf - 1.0) * (k - 1.0) / 2.0 + g))
    }
}

/// Values of the two adjacent formulas at an interior branch junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Junction {
    pub p: f64,
    pub left: f64,
    pub right: f64,
}

/// Interior junctions of `γ_p` (on `p ≥ 2`) or of the linear threshold
/// (both halves), each with the limits of the formulas on either side.
/// Dedicated point values are not included.
pub fn branch_junctions(kind: ThresholdKind, n: usize) -> Result<Vec<Junction>> {
    check_dim(n)?;
    let halves: Vec<(Vec<Branch>, f64)> = match kind {
        ThresholdKind::Gamma => vec![(gamma_branches(n), 1.0)],
        ThresholdKind::SLinearFt | ThresholdKind::SLinearFht => {
            vec![(linear_upper_branches(n), 1.0), (linear_lower_branches(n), -1.0)]
        }
        other => return Err(Error::Unsupported(format!("junctions are tabulated for gamma and s-linear, not {other}"))),
    };
    let mut out = Vec::new();
    for (branches, sign) in halves {
        let mut pieces: Vec<&Branch> = branches.iter().filter(|b| !b.is_point()).collect();
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        for w in pieces.windows(2) {
            let p = w[0].hi;
            if !p.is_finite() || p != w[1].lo {
                continue;
            }
            let u = sign * (0.5 - 1.0 / p);
            out.push(Junction { p, left: (w[0].f)(u), right: (w[1].f)(u) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(p: f64) -> Exponent {
        Exponent::Finite(p)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(2, fin(2.0)).unwrap(), 0.0);
        assert!(close(gamma(2, Exponent::Infinity).unwrap(), 0.5));
        assert_eq!(gamma(1, fin(3.0)).unwrap(), 0.0);
        assert_eq!(gamma(1, fin(4.0)).unwrap(), 0.0);
        assert!(close(gamma(1, Exponent::Infinity).unwrap(), 1.0 / 6.0));
        for n in 2..=10 {
            assert!(close(gamma(n, Exponent::Infinity).unwrap(), gamma_infty(n)));
        }
        assert!(gamma(2, fin(1.0)).is_err());
        assert!(gamma(0, fin(3.0)).is_err());
    }

    #[test]
    fn gamma_at_critical_exponent_is_dedicated_value() {
        for n in 2..=10 {
            let nf = n as f64;
            let g = gamma(n, fin(critical(n))).unwrap();
            assert!(close(g, (nf - 1.0) / (2.0 * (nf + 3.0))), "n={n}");
        }
    }

    #[test]
    fn linear_examples() {
        let ft = |n, p| s_threshold(ThresholdKind::SLinearFt, n, fin(p), None).unwrap();
        assert_eq!(ft(2, 2.0), 3.0);
        assert_eq!(ft(1, 4.0), 2.0);
        assert_eq!(ft(1, 3.0), 1.5);
        assert!(close(ft(1, 6.0), 4.0 / 3.0 + 2.0 / 3.0 * (0.5 - 1.0 / 6.0)));
        // n = 3: critical 3, Sobolev 6
        assert!(close(ft(3, 3.0), 4.5 + 2.0 / 12.0));
        assert!(close(ft(3, 6.0), 4.0 + 3.0 / 3.0));
        assert!(close(ft(3, 12.0), 4.0 + 3.0 * (0.5 - 1.0 / 12.0)));
        assert!(s_threshold(ThresholdKind::SLinearFt, 2, Exponent::Infinity, None).is_err());
        assert!(s_threshold(ThresholdKind::SLinearFt, 2, fin(1.0), None).is_err());
    }

    #[test]
    fn linear_is_symmetric_under_duality() {
        for n in 1..=6 {
            for &p in &[2.5, 3.0, 3.5, 5.0, 7.0, 10.0, 40.0] {
                if n == 1 && p == 4.0 {
                    continue;
                }
                let q = p / (p - 1.0);
                let a = s_threshold(ThresholdKind::SLinearFt, n, fin(p), None).unwrap();
                let b = s_threshold(ThresholdKind::SLinearFt, n, fin(q), None).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fht_shift_is_one_twelfth() {
        for n in 1..=5 {
            for &p in &[1.2, 1.5, 2.0, 3.0, 4.0, 9.0] {
                let a = s_threshold(ThresholdKind::SLinearFt, n, fin(p), None).unwrap();
                let b = s_threshold(ThresholdKind::SLinearFht, n, fin(p), None).unwrap();
                assert!((a - b - FHT_SHIFT).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn junctions_agree() {
        for n in 1..=10 {
            for kind in [ThresholdKind::Gamma, ThresholdKind::SLinearFt] {
                for j in branch_junctions(kind, n).unwrap() {
                    assert!((j.left - j.right).abs() < 1e-14, "{kind} n={n} p={}: {j:?}", j.p);
                }
            }
        }
        // n = 3 has junctions at 2(n+3)/(n+5) = 1.5, 2n/(n+2) = 1.2 and 2n/(n-2) = 6
        let ps: Vec<f64> = branch_junctions(ThresholdKind::SLinearFt, 3).unwrap().iter().map(|j| j.p).collect();
        assert!(ps.contains(&6.0) && ps.contains(&1.5) && ps.contains(&1.2));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(2, fin(1.0)).unwrap(), 0.5);
        for n in 1..=6 {
            assert_eq!(delta(n, fin(2.0)).unwrap(), -0.5);
        }
        for n in 2..=6 {
            let nf = n as f64;
            assert_eq!(delta(n, fin(2.0 * nf / (nf + 2.0))).unwrap(), 0.5, "n={n}");
        }
        assert!(delta(2, fin(0.5)).is_err());
    }

    #[test]
    fn spectral_thresholds() {
        let pp = |n, p| s_threshold(ThresholdKind::SSpectralPpPrime, n, fin(p), None);
        let pq = |n, p| s_threshold(ThresholdKind::SSpectralPq, n, fin(p), None);
        assert!(close(pp(2, 1.0).unwrap(), 1.5 + 0.5));
        assert_eq!(pp(3, 2.0).unwrap(), 4.5);
        assert_eq!(pp(1, 4.0 / 3.0).unwrap(), 1.5);
        assert!(close(pp(1, 1.5).unwrap(), 2.0 - 1.0 / 1.5));
        assert!(close(pp(1, 1.2).unwrap(), 1.0 + 1.0 / 3.6));
        assert!(pp(2, 3.0).is_err());
        assert!(close(pq(3, 1.2).unwrap(), 4.0 + 3.0 * (0.5 - 1.0 / 1.2)));
        assert_eq!(pq(2, 1.5).unwrap(), 3.0);
        assert_eq!(pq(1, 1.5).unwrap(), 1.5);
        assert!(pq(2, 2.5).is_err());
    }

    #[test]
    fn multilinear_examples() {
        let ml = |n, k, p| s_threshold(ThresholdKind::SMultilinear, n, p, Some(k)).unwrap();
        assert_eq!(ml(2, 2, fin(1.0)), 6.5);
        // both statements apply at p = 2 and agree
        for n in 1..=4 {
            for k in 2..=4 {
                let lo = multilinear(n, k, fin(2.0)).unwrap();
                let nf = n as f64;
                let kf = k as f64;
                let hi = (1.5 * nf * kf + (kf - 1.0) * nf / 4.0).max(1.5 * nf * kf + (nf - 1.0) * (kf - 1.0) / 2.0);
                assert!(close(lo, hi));
            }
        }
        assert!(s_threshold(ThresholdKind::SMultilinear, 2, fin(2.0), Some(1)).is_err());
        assert!(s_threshold(ThresholdKind::SMultilinear, 2, fin(2.0), None).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ThresholdKind::ALL {
            assert_eq!(k.name().parse::<ThresholdKind>().unwrap(), k);
        }
        assert!("bogus".parse::<ThresholdKind>().is_err());
    }
}
