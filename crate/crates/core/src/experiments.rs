//! Numerical experiments behind the command-line harness, including the
//! acceptance suite run by `selftest`.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::hermite::{build_basis, hermite_lp_norm, GridFunction, HermiteBasis, MultiIndex};
use crate::hnorms::{hormander_norm, Flavor, Mode};
use crate::operators::{apply, apply_multilinear, square_function, symbol_at, OperatorSpec, Variant};
use crate::opnorms::{compactness_profile, kernel_sup, l2_opnorm_measured, lp_opnorm_lower, lp_ratios, TestSet};
use crate::symbols::{make_lp_partition, make_symbol, Profile, Symbol, SymbolTable, XFactor};
use crate::thresholds::{branch_junctions, delta, gamma, s_threshold, ThresholdKind, FHT_SHIFT};
use crate::transform::{inverse_fht, plancherel_defect, SpectralCoeffs};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// One numeric assertion inside an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, target: format!("<= {bound}"), passed: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, target: format!(">= {bound}"), passed: value >= bound }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target: format!("{target} ± {tol}"),
            passed: (value - target).abs() <= tol,
        }
    }

    pub fn between(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, target: format!("in [{lo}, {hi}]"), passed: value >= lo && value <= hi }
    }

    pub fn open_between(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, target: format!("in ({lo}, {hi})"), passed: value > lo && value < hi }
    }

    pub fn exact(name: impl Into<String>, value: f64, target: f64) -> Self {
        Check { name: name.into(), value, target: format!("== {target}"), passed: value == target }
    }
}

/// Result of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Set when the experiment could not run at all.
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `PASS`/`FAIL` line with the failing checks, or the first check if all pass.
    pub fn summary(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let detail = if let Some(e) = &self.error {
            format!("error: {e}")
        } else {
            let failing: Vec<&Check> = self.checks.iter().filter(|c| !c.passed).collect();
            let shown: Vec<&Check> = if failing.is_empty() { self.checks.iter().take(1).collect() } else { failing };
            let parts: Vec<String> = shown.iter().take(3).map(|c| format!("{} = {:.6e} ({})", c.name, c.value, c.target)).collect();
            format!("{} checks; {}", self.checks.len(), parts.join("; "))
        };
        format!("[{status}] criterion {:>2}: {} ({:.1}s): {detail}", self.id, self.title, self.seconds)
    }
}

pub const CRITERIA: [(usize, &str); 11] = [
    (1, "orthonormality and Plancherel"),
    (2, "exact lower bounds from Hermite tests"),
    (3, "compactness tails"),
    (4, "Hermite Lp asymptotics"),
    (5, "product-norm exponents"),
    (6, "threshold tables"),
    (7, "dyadic machinery"),
    (8, "Littlewood-Paley at p=2"),
    (9, "Hormander block norms"),
    (10, "projection kernel diagnostic"),
    (11, "multilinear operators"),
];

pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionOutcome> {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .ok_or_else(|| Error::InvalidArgument(format!("no criterion {id} (1..=11)")))?;
    let start = Instant::now();
    let checks = match id {
        1 => orthonormality(seed),
        2 => lower_bounds(seed),
        3 => compactness(),
        4 => lp_asymptotics(),
        5 => product_exponents(),
        6 => threshold_tables(),
        7 => dyadic_machinery(seed),
        8 => littlewood_paley(seed, 50),
        9 => hormander_blocks(),
        10 => kernel_diagnostic(),
        _ => multilinear_checks(48, seed, 1e-8),
    };
    let seconds = start.elapsed().as_secs_f64();
    Ok(match checks {
        Ok(checks) => CriterionOutcome {
            id,
            title,
            passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
            checks,
            error: None,
            seconds,
        },
        Err(e) => CriterionOutcome { id, title, passed: false, checks: Vec::new(), error: Some(e.to_string()), seconds },
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|c| run_criterion(c.0, seed).expect("known criterion")).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("slope fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Integers from `lo` to `hi` spaced by half octaves, endpoints included.
pub fn half_octaves(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = lo as f64;
    while t < hi as f64 * (1.0 - 1e-9) {
        out.push(t.round() as usize);
        t *= std::f64::consts::SQRT_2;
    }
    out.push(hi);
    out.dedup();
    out
}

/// Expected 1-D decay exponent of `‖φ_k‖_p` in `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayTarget {
    Value(f64),
    /// `p = 4`, where a logarithmic factor shifts finite-range fits.
    Open(f64, f64),
}

pub fn lp_decay_target(p: Exponent) -> DecayTarget {
    let r = p.recip();
    if p == Exponent::Finite(4.0) {
        DecayTarget::Open(-0.125, -0.10)
    } else if r > 0.25 {
        DecayTarget::Value(r / 2.0 - 0.25)
    } else {
        DecayTarget::Value(-r / 6.0 - 1.0 / 12.0)
    }
}

/// Diagonal index `(k, …, k)`.
fn diagonal(n: usize, k: usize) -> MultiIndex {
    MultiIndex::new(vec![k; n])
}

/// Fitted exponent of `‖φ_{(k,…,k)}‖_p` against `|ν| = nk`.
pub fn lp_norm_slope(n: usize, p: Exponent, ks: &[usize]) -> Result<(f64, Vec<(usize, f64)>)> {
    let rows: Vec<(usize, f64)> =
        ks.par_iter().map(|&k| Ok((n * k, hermite_lp_norm(&diagonal(n, k), p)?))).collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok((loglog_slope(&xs, &ys)?, rows))
}

/// Fitted exponent of `‖φ_ν‖_p ‖φ_ν‖_{p'}` along diagonal indices.
pub fn product_norm_slope(n: usize, p: Exponent, ks: &[usize]) -> Result<(f64, Vec<(usize, f64)>)> {
    let q = p.conjugate();
    let rows: Vec<(usize, f64)> = ks
        .par_iter()
        .map(|&k| {
            let nu = diagonal(n, k);
            Ok((n * k, hermite_lp_norm(&nu, p)? * hermite_lp_norm(&nu, q)?))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok((loglog_slope(&xs, &ys)?, rows))
}

/// Band-limited function with uniform `[−1, 1]` complex coefficients, drawn
/// from `rng` in index order, synthesized on `grid`.
pub fn random_band_function(
    basis: &HermiteBasis,
    grid: &std::sync::Arc<crate::hermite::GridSpec>,
    rng: &mut ChaCha8Rng,
) -> Result<GridFunction> {
    let mut c = SpectralCoeffs::zeros(basis.dim(), basis.cutoff());
    for nu in basis.indices() {
        c.set(&nu, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))?;
    }
    inverse_fht(&c, basis, grid)
}

/// `max |G − I|` for the Gram matrix of the band on the quadrature grid.
pub fn gram_defect(basis: &HermiteBasis) -> Result<f64> {
    let grid = basis.quad_grid();
    let table = basis.quad_table();
    let indices = basis.indices();
    let mut a = DMatrix::<f64>::zeros(grid.len(), indices.len());
    for i in 0..grid.len() {
        let pos = grid.unravel(i);
        let w = grid.weight(i).sqrt();
        for (j, nu) in indices.iter().enumerate() {
            let v: f64 = nu.components().iter().zip(&pos).map(|(&k, &p)| table.row(k)[p]).product();
            a[(i, j)] = w * v;
        }
    }
    let g = a.transpose() * &a;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    Ok(worst)
}

fn orthonormality(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (n, cutoff) in [(1, 128), (2, 32)] {
        let basis = build_basis(n, cutoff, 1.0)?;
        checks.push(Check::at_most(format!("gram defect n={n} N={cutoff}"), gram_defect(&basis)?, 1e-10));
        let f = random_band_function(&basis, basis.quad_grid(), &mut rng)?;
        let energy = f.inner(&f)?.re;
        let d = plancherel_defect(&f, &basis)? / energy;
        checks.push(Check::at_most(format!("relative plancherel defect n={n} N={cutoff}"), d, 1e-10));
    }
    Ok(checks)
}

/// Deterministic tabulated multiplier on `0..=cutoff` used by the lower-bound experiment.
pub fn sample_table(cutoff: usize) -> Result<Symbol> {
    let values = (0..=cutoff)
        .map(|k| {
            let t = k as f64;
            (vec![k], Complex64::from_polar(0.2 + 0.7 * (0.37 * t).sin().abs(), 0.5 * t))
        })
        .collect();
    Ok(Symbol::table(SymbolTable::from_values(1, values)?))
}

/// Lower-bound checks for one symbol and exponent on the given basis.
pub fn lower_bound_checks(s: &Symbol, label: &str, p: Exponent, basis: &HermiteBasis, seed: u64) -> Result<Vec<Check>> {
    let x0 = vec![0.0; basis.dim()];
    let indices = basis.indices();
    let spec = OperatorSpec::plain(s.clone(), basis);
    let ratios = lp_ratios(&spec, p, p, &TestSet::hermite_band(basis))?;
    let mut worst = 0.0f64;
    let mut sup = 0.0f64;
    for (nu, r) in indices.iter().zip(&ratios) {
        let m = symbol_at(s, &x0, nu)?.norm();
        sup = sup.max(m);
        worst = worst.max((r.ratio - m).abs());
    }
    let lower = lp_opnorm_lower(s, p, p, basis, &TestSet::standard(basis, seed))?;
    Ok(vec![
        Check::at_most(format!("{label} p={p}: max |ratio − |m(ν)||"), worst, 1e-6),
        Check::at_least(format!("{label} p={p}: lower bound − sup|m|"), lower.value - sup, -1e-6),
    ])
}

fn lower_bounds(seed: u64) -> Result<Vec<Check>> {
    let basis = build_basis(1, 64, 1.0)?;
    let symbols = [
        ("power:1", make_symbol("power", &[1.0], 1)?),
        ("oscillating:5", make_symbol("oscillating", &[5.0], 1)?),
        ("table", sample_table(64)?),
    ];
    let mut checks = Vec::new();
    for (label, s) in &symbols {
        for p in [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Infinity]
        {
            checks.extend(lower_bound_checks(s, label, p, &basis, seed)?);
        }
    }
    Ok(checks)
}

fn compactness() -> Result<Vec<Check>> {
    let basis = build_basis(1, 64, 1.0)?;
    let ks = [2, 4, 8, 16, 32];
    let mut checks = Vec::new();
    for kappa in [0.5, 1.0, 2.0] {
        let s = make_symbol("power", &[kappa], 1)?;
        for row in compactness_profile(&s, &ks, &basis)? {
            let exact = (1.0 + row.k as f64).powf(-kappa);
            checks.push(Check::within(format!("power:{kappa} k={} measured", row.k), row.measured, exact, 1e-10));
            checks.push(Check::within(format!("power:{kappa} k={} tail sup", row.k), row.tail_sup, exact, 1e-10));
        }
    }
    let s = make_symbol("oscillating", &[5.0], 1)?;
    for row in compactness_profile(&s, &ks, &basis)? {
        checks.push(Check::within(format!("oscillating:5 k={} measured", row.k), row.measured, 1.0, 1e-10));
    }
    Ok(checks)
}

fn lp_asymptotics() -> Result<Vec<Check>> {
    let ks = half_octaves(64, 4096);
    let mut checks = Vec::new();
    let cases = [
        (Exponent::Finite(1.0), 0.02),
        (Exponent::Finite(2.0), 0.005),
        (Exponent::Finite(6.0), 0.02),
        (Exponent::Infinity, 0.02),
        (Exponent::Finite(4.0), 0.0),
    ];
    for (p, tol) in cases {
        let (slope, _) = lp_norm_slope(1, p, &ks)?;
        checks.push(match lp_decay_target(p) {
            DecayTarget::Value(t) => Check::within(format!("slope p={p}"), slope, t, tol),
            DecayTarget::Open(lo, hi) => Check::open_between(format!("slope p={p}"), slope, lo, hi),
        });
    }
    Ok(checks)
}

fn product_exponents() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ks = half_octaves(64, 4096);
    for p in [Exponent::Finite(3.0), Exponent::Finite(6.0), Exponent::Infinity] {
        let (slope, _) = product_norm_slope(1, p, &ks)?;
        checks.push(Check::at_most(format!("n=1 p={p} slope"), slope, gamma(1, p)? + 0.02));
    }
    let ks = half_octaves(32, 2048);
    for p in [Exponent::Finite(2.0), Exponent::Infinity] {
        let (slope, _) = product_norm_slope(2, p, &ks)?;
        checks.push(Check::at_most(format!("n=2 p={p} slope"), slope, gamma(2, p)? + 0.05));
    }
    Ok(checks)
}

fn threshold_tables() -> Result<Vec<Check>> {
    use ThresholdKind::*;
    let fin = Exponent::Finite;
    let spots: [(ThresholdKind, usize, Exponent, Option<usize>, f64); 12] = [
        (SLinearFt, 1, fin(4.0), None, 2.0),
        (SLinearFt, 2, fin(2.0), None, 3.0),
        (SLinearFt, 1, fin(3.0), None, 1.5),
        (SLinearFt, 1, fin(6.0), None, 14.0 / 9.0),
        (SLinearFt, 3, fin(3.0), None, 14.0 / 3.0),
        (SLinearFt, 3, fin(6.0), None, 5.0),
        (SLinearFt, 3, fin(12.0), None, 5.25),
        (Gamma, 1, Exponent::Infinity, None, 1.0 / 6.0),
        (Gamma, 2, Exponent::Infinity, None, 0.5),
        (Gamma, 2, fin(2.0), None, 0.0),
        (SSpectralPpPrime, 3, fin(2.0), None, 4.5),
        (SMultilinear, 2, fin(1.0), Some(2), 6.5),
    ];
    let mut checks = Vec::new();
    for (kind, n, p, kappa, expected) in spots {
        let v = if kind == Gamma { gamma(n, p)? } else { s_threshold(kind, n, p, kappa)? };
        checks.push(Check::within(format!("{kind} n={n} p={p}"), v, expected, 1e-14));
    }
    for n in 1..=5 {
        for p in [1.25, 1.5, 2.0, 3.0, 4.0, 8.0] {
            let ft = s_threshold(SLinearFt, n, fin(p), None)?;
            let fht = s_threshold(SLinearFht, n, fin(p), None)?;
            checks.push(Check::within(format!("FHT shift n={n} p={p}"), ft - fht, FHT_SHIFT, 1e-15));
        }
    }
    let mut worst = 0.0f64;
    for n in 1..=10 {
        for kind in [Gamma, SLinearFt, SLinearFht] {
            for j in branch_junctions(kind, n)? {
                worst = worst.max((j.left - j.right).abs());
            }
        }
    }
    checks.push(Check::at_most("max junction mismatch n ≤ 10", worst, 1e-14));
    for n in 2..=6 {
        let nf = n as f64;
        checks.push(Check::exact(format!("delta n={n} at 2n/(n+2)"), delta(n, fin(2.0 * nf / (nf + 2.0)))?, 0.5));
    }
    Ok(checks)
}

fn dyadic_machinery(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let partition = make_lp_partition(10)?;
    let mut worst = 0.0f64;
    let samples = 100_000;
    for i in 0..=samples {
        let lambda = 2f64.powf(10.0 * i as f64 / samples as f64);
        let sum: f64 = partition.weights(lambda).iter().sum();
        worst = worst.max((sum - 1.0).abs());
    }
    checks.push(Check::at_most("partition of unity defect on [1, 2^10]", worst, 1e-12));

    let basis = build_basis(1, 64, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_band_function(&basis, basis.grid(), &mut rng)?;
    for label in ["power:1", "mihlin:1"] {
        let (family, param) = label.split_once(':').unwrap();
        let s = make_symbol(family, &[param.parse().unwrap()], 1)?;
        let full = apply(&OperatorSpec::plain(s.clone(), &basis), &f)?;
        let mut sum = apply(&OperatorSpec::new(s.clone(), &basis, Variant::TailTruncation(0)), &f)?;
        let mut k = 0u32;
        while (1usize << k) <= basis.cutoff() {
            sum = sum.add(&apply(&OperatorSpec::new(s.clone(), &basis, Variant::DyadicBlock(k)), &f)?)?;
            k += 1;
        }
        let defect = sum.max_abs_diff(&full)? / full.max_abs();
        checks.push(Check::at_most(format!("block completeness {label}"), defect, 1e-10));
    }

    let x0 = [0.0];
    for label in ["power:1", "oscillating:5", "table"] {
        let s = match label {
            "table" => sample_table(64)?,
            "power:1" => make_symbol("power", &[1.0], 1)?,
            _ => make_symbol("oscillating", &[5.0], 1)?,
        };
        let mut worst = 0.0f64;
        for k in 0..=6u32 {
            let spec = OperatorSpec::new(s.clone(), &basis, Variant::DyadicBlock(k));
            let measured = l2_opnorm_measured(&spec)?.value;
            let shell_sup = basis
                .indices()
                .iter()
                .filter(|nu| spec.variant.weight(nu.abs()) == 1.0)
                .map(|nu| symbol_at(&s, &x0, nu).map(|v| v.norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max((measured - shell_sup).abs());
        }
        checks.push(Check::at_most(format!("dyadic block L² norm vs shell sup, {label}"), worst, 1e-10));
    }
    Ok(checks)
}

/// Square-function ratios `‖Sf‖₂/‖f‖₂` for seeded random band-limited `f`
/// with the interval `[min_ν (Σ_l ψ_l(⟨ν⟩)²)^{1/2}, 1]` they must lie in.
pub fn littlewood_paley_ratios(n: usize, cutoff: usize, count: usize, seed: u64) -> Result<(Vec<f64>, f64, f64)> {
    let basis = build_basis(n, cutoff, 1.0)?;
    let bracket_max = (1.0 + (cutoff * cutoff) as f64).sqrt();
    let levels = bracket_max.log2().ceil().max(1.0) as usize;
    let partition = make_lp_partition(levels)?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for d in 0..=cutoff {
        let bracket = (1.0 + (d * d) as f64).sqrt();
        let v = partition.weights(bracket).iter().map(|w| w * w).sum::<f64>().sqrt();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two = Exponent::Finite(2.0);
    let mut ratios = Vec::with_capacity(count);
    for _ in 0..count {
        let f = random_band_function(&basis, basis.grid(), &mut rng)?;
        let sf = square_function(&f, &partition, &basis)?;
        ratios.push(crate::hermite::lp_norm(&sf, two)? / crate::hermite::lp_norm(&f, two)?);
    }
    Ok((ratios, lo, hi))
}

fn littlewood_paley(seed: u64, count: usize) -> Result<Vec<Check>> {
    let (ratios, lo, hi) = littlewood_paley_ratios(1, 256, count, seed)?;
    let mut checks = vec![Check::at_most("max_ν (Σψ_l²)^{1/2}", hi, 1.0 + 1e-12)];
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::at_least(format!("min ratio over {count} functions"), min, lo - 1e-12));
    checks.push(Check::at_most(format!("max ratio over {count} functions"), max, 1.0 + 1e-12));
    Ok(checks)
}

fn hormander_blocks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in [1, 2] {
        let one = make_symbol("one", &[], n)?;
        let r = hormander_norm(&one, Flavor::Ft, 3.0, Mode::Rescaled, 1..=12, &[])?;
        let b0 = r.blocks[0].value;
        let spread = r.blocks.iter().map(|b| (b.value - b0).abs()).fold(0.0, f64::max) / b0;
        checks.push(Check::at_most(format!("m≡1 rescaled relative spread n={n}"), spread, 1e-8));
    }
    let mihlin = make_symbol("mihlin", &[1.0], 1)?;
    let xs: Vec<Vec<f64>> = (-2..=2).map(|i| vec![i as f64]).collect();
    let r = hormander_norm(&mihlin, Flavor::Ft, 3.0, Mode::Rescaled, 4..=10, &xs)?;
    let max = r.blocks.iter().map(|b| b.value).fold(0.0, f64::max);
    let min = r.blocks.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
    checks.push(Check::at_most("mihlin:1 s=3 max/min over k ∈ [4,10]", max / min, 2.0 - f64::EPSILON));
    let one = make_symbol("one", &[], 1)?;
    for s in [1.0, 2.0, 3.0] {
        let r = hormander_norm(&one, Flavor::Ft, s, Mode::Literal, 10..=12, &[])?;
        let ratio = r.blocks[2].value / r.blocks[1].value;
        checks.push(Check::within(format!("m≡1 literal B_12/B_11 / 2^s, s={s}"), ratio / 2f64.powf(s), 1.0, 0.02));
    }
    Ok(checks)
}

/// Exact `sup_x Σ_{|ν|=ℓ} φ_ν(x)²` for each `ℓ`, each on a basis with cutoff `ℓ`.
pub fn kernel_sups(n: usize, ls: &[usize]) -> Result<Vec<(usize, f64)>> {
    ls.iter()
        .map(|&l| {
            let basis = build_basis(n, l, 1.0)?;
            Ok((l, kernel_sup(l, &basis)?.0))
        })
        .collect()
}

fn kernel_diagnostic() -> Result<Vec<Check>> {
    let ls = [8, 12, 16, 24, 32, 48, 64];
    let rows = kernel_sups(2, &ls)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let slope = loglog_slope(&xs, &ys)?;
    let bound = delta(2, Exponent::Finite(1.0))? - 0.5 + 0.1;
    Ok(vec![Check::at_most("n=2 p=1 kernel-sup slope over ℓ ∈ [8,64]", slope, bound)])
}

fn relative_diff(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    Ok(a.max_abs_diff(b)? / b.max_abs().max(1.0))
}

/// Multilinear identities for `n = 1`, `κ = 2` on the band `|ν_j| ≤ cutoff`.
pub fn multilinear_checks(cutoff: usize, seed: u64, tol: f64) -> Result<Vec<Check>> {
    let basis = build_basis(1, cutoff, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_band_function(&basis, basis.grid(), &mut rng)?;
    let g = random_band_function(&basis, basis.grid(), &mut rng)?;
    let mut checks = Vec::new();

    let one = Symbol::multilinear_family(Profile::One, XFactor::One, 1, 2)?;
    let joint = apply_multilinear(&one, &[&f, &g], &basis)?;
    let id = make_symbol("one", &[], 1)?;
    let pf = apply(&OperatorSpec::plain(id.clone(), &basis), &f)?;
    let pg = apply(&OperatorSpec::plain(id, &basis), &g)?;
    checks.push(Check::at_most("m≡1 vs product of band projections", relative_diff(&joint, &pf.mul(&pg)?)?, tol));

    let a = make_symbol("power", &[1.0], 1)?;
    let b = make_symbol("oscillating", &[5.0], 1)?;
    let sep = Symbol::multilinear_separable(XFactor::One, vec![a.clone(), b.clone()])?;
    let out = apply_multilinear(&sep, &[&f, &g], &basis)?;
    let af = apply(&OperatorSpec::plain(a, &basis), &f)?;
    let bg = apply(&OperatorSpec::plain(b, &basis), &g)?;
    checks.push(Check::at_most("separable vs composed linear applies", relative_diff(&out, &af.mul(&bg)?)?, tol));

    let v = s_threshold(ThresholdKind::SMultilinear, 2, Exponent::Finite(1.0), Some(2))?;
    checks.push(Check::exact("s-multilinear n=2 κ=2 p=1", v, 6.5));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.25)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 0.25).abs() < 1e-14);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn half_octave_grid() {
        let g = half_octaves(64, 4096);
        assert_eq!(g.first(), Some(&64));
        assert_eq!(g.last(), Some(&4096));
        assert_eq!(g.len(), 13);
    }

    #[test]
    fn decay_targets() {
        assert_eq!(lp_decay_target(Exponent::Finite(1.0)), DecayTarget::Value(0.25));
        assert_eq!(lp_decay_target(Exponent::Finite(2.0)), DecayTarget::Value(0.0));
        assert_eq!(lp_decay_target(Exponent::Infinity), DecayTarget::Value(-1.0 / 12.0));
        match lp_decay_target(Exponent::Finite(6.0)) {
            DecayTarget::Value(v) => assert!((v + 1.0 / 9.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gram_defect_small_basis() {
        let b = build_basis(2, 6, 1.0).unwrap();
        assert!(gram_defect(&b).unwrap() < 1e-12);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(12, 1).is_err());
        let out = run_criterion(6, 1).unwrap();
        assert!(out.passed, "{}", out.summary());
    }
}
