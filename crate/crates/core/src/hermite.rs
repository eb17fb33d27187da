//! Hermite functions, tensor grids, grid functions and Lp norms.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::quadrature::{gauss_hermite_rule, gauss_legendre_rule};

/// `π^{-1/4}`.
pub const PI_M14: f64 = 0.751_125_544_464_942_5;

const RESCALE: f64 = 1e200;
const LN_RESCALE: f64 = 460.517_018_598_809_1;
/// Below this `x²` the Gaussian seed is applied directly without log scaling.
const DIRECT_X2: f64 = 1200.0;

/// Default cap on the number of points of any tensor grid or index set.
pub const DEFAULT_POINT_CAP: usize = 1 << 24;

/// Non-negative multi-index `ν ∈ N₀ⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|ν| = ν₁ + … + ν_n`.
    pub fn abs(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn max_component(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `λ_ν = 2|ν| + n`.
pub fn eigenvalue(nu: &MultiIndex, n: usize) -> usize {
    2 * nu.abs() + n
}

/// All multi-indices of dimension `n` with `|ν| ≤ max_degree`, ordered by
/// total degree and lexicographically within a shell.
pub fn total_degree_indices(n: usize, max_degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        shell_indices_into(n, d, &mut out);
    }
    out
}

/// Multi-indices with `|ν| = degree`, in lexicographic order.
pub fn shell_indices(n: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    shell_indices_into(n, degree, &mut out);
    out
}

fn shell_indices_into(n: usize, degree: usize, out: &mut Vec<MultiIndex>) {
    fn rec(n: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == n {
            cur.push(remaining);
            out.push(MultiIndex(cur.clone()));
            cur.pop();
            return;
        }
        for c in 0..=remaining {
            cur.push(c);
            rec(n, remaining - c, cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        return;
    }
    rec(n, degree, &mut Vec::with_capacity(n), out);
}

/// Number of multi-indices in `N₀ⁿ` with `|ν| ≤ d`, i.e. `C(n+d, n)`.
pub fn total_degree_count(n: usize, d: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (d as u128 + i) / i;
    }
    c
}

/// Runs the normalized recurrence at `x` up to degree `kmax`, calling
/// `sink(k, φ_k(x))` for every `k`.
fn recurrence(x: f64, kmax: usize, mut sink: impl FnMut(usize, f64)) {
    let x2 = x * x;
    if x.abs() > (2.0 * kmax as f64 + 1.0).sqrt() + 50.0 || x.is_nan() {
        // Far past the turning point every φ_k is below the smallest subnormal.
        (0..=kmax).for_each(|k| sink(k, 0.0));
        return;
    }
    if x2 < DIRECT_X2 {
        let mut prev = 0.0;
        let mut cur = PI_M14 * (-0.5 * x2).exp();
        sink(0, cur);
        for k in 0..kmax {
            let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            sink(k + 1, cur);
        }
        return;
    }
    // Log-scaled branch: carry `φ_k = p_k · e^{log}` with `|p_k|` kept moderate.
    let mut log = -0.5 * x2;
    let mut prev = 0.0;
    let mut cur = PI_M14;
    let emit = |p: f64, log: f64| if p == 0.0 { 0.0 } else { p.signum() * (p.abs().ln() + log).exp() };
    sink(0, emit(cur, log));
    for k in 0..kmax {
        let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log += LN_RESCALE;
        }
        sink(k + 1, emit(cur, log));
    }
}

/// Coefficients `(sqrt(2/(j+1)), sqrt(j/(j+1)))` of the recurrence step `j → j+1`.
pub(crate) fn recurrence_coeffs(k: usize) -> Vec<(f64, f64)> {
    (0..k).map(|j| ((2.0 / (j as f64 + 1.0)).sqrt(), (j as f64 / (j as f64 + 1.0)).sqrt())).collect()
}

/// `(φ_k(x), φ_{k-1}(x))` with `k = coeffs.len()`; the scale is applied once at the end.
pub(crate) fn pair_with(coeffs: &[(f64, f64)], x: f64) -> (f64, f64) {
    let k = coeffs.len();
    if x.abs() > (2.0 * k as f64 + 1.0).sqrt() + 50.0 || x.is_nan() {
        return (0.0, 0.0);
    }
    let x2 = x * x;
    let (mut prev, mut cur, mut log) =
        if x2 < DIRECT_X2 { (0.0, PI_M14 * (-0.5 * x2).exp(), 0.0) } else { (0.0, PI_M14, -0.5 * x2) };
    for &(a, b) in coeffs {
        let next = x * a * cur - b * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log += LN_RESCALE;
        }
    }
    let emit = |p: f64| if p == 0.0 || log == 0.0 { p * log.exp() } else { p.signum() * (p.abs().ln() + log).exp() };
    (emit(cur), if k == 0 { 0.0 } else { emit(prev) })
}

/// `φ_k(x)` for a single degree.
pub fn hermite_function(k: usize, x: f64) -> f64 {
    pair_with(&recurrence_coeffs(k), x).0
}

/// `(φ_k(x), φ_{k-1}(x))`, with `φ_{-1} = 0`.
pub fn hermite_pair(k: usize, x: f64) -> (f64, f64) {
    pair_with(&recurrence_coeffs(k), x)
}

/// `φ_0(x), …, φ_kmax(x)`.
pub fn hermite_functions(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    recurrence(x, kmax, |j, v| out[j] = v);
    out
}

/// `φ_k'(x) = sqrt(2k)·φ_{k-1}(x) − x·φ_k(x)`.
pub fn hermite_derivative(k: usize, x: f64) -> f64 {
    let (pk, pkm1) = hermite_pair(k, x);
    (2.0 * k as f64).sqrt() * pkm1 - x * pk
}

/// `φ_ν` at each point; imaginary parts are exactly zero.
pub fn eval_hermite(nu: &MultiIndex, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    points
        .par_iter()
        .map(|pt| {
            if pt.len() != nu.dim() {
                return Err(Error::InvalidArgument(format!(
                    "point of dimension {} for multi-index of dimension {}",
                    pt.len(),
                    nu.dim()
                )));
            }
            let v: f64 = nu
                .components()
                .iter()
                .zip(pt)
                .map(|(&k, &x)| hermite_function(k, x))
                .product();
            Ok(Complex64::new(v, 0.0))
        })
        .collect()
}

/// Per-axis table `φ_k(x_i)` for `k ≤ kmax`, stored row-major by `k`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    kmax: usize,
    len: usize,
    data: Vec<f64>,
}

impl HermiteTable {
    pub fn new(kmax: usize, nodes: &[f64]) -> Self {
        let len = nodes.len();
        let columns: Vec<Vec<f64>> = nodes.par_iter().map(|&x| hermite_functions(kmax, x)).collect();
        let mut data = vec![0.0; (kmax + 1) * len];
        for (i, col) in columns.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                data[k * len + i] = *v;
            }
        }
        HermiteTable { kmax, len, data }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.len..(k + 1) * self.len]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform,
    GaussHermite,
}

/// Tensor grid stored per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    nodes: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    kind: GridKind,
}

impl GridSpec {
    pub fn new(nodes: Vec<Vec<f64>>, weights: Vec<Vec<f64>>, kind: GridKind) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidArgument("grid needs matching node and weight axes".into()));
        }
        for (ax, (x, w)) in nodes.iter().zip(&weights).enumerate() {
            if x.is_empty() || x.len() != w.len() {
                return Err(Error::InvalidArgument(format!("axis {ax}: node/weight length mismatch")));
            }
            if !x.windows(2).all(|p| p[0] < p[1]) {
                return Err(Error::InvalidArgument(format!("axis {ax}: nodes not strictly increasing")));
            }
            if !w.iter().all(|&v| v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("axis {ax}: weights must be positive")));
            }
        }
        Ok(GridSpec { nodes, weights, kind })
    }

    /// Uniform grid on `[-K h, K h]^dim` with `K = ceil(half_width / h)`.
    pub fn uniform(dim: usize, half_width: f64, spacing: f64) -> Result<Self> {
        let k = (half_width / spacing).ceil() as usize;
        let axis: Vec<f64> = (0..=2 * k).map(|i| (i as f64 - k as f64) * spacing).collect();
        Self::uniform_axes(vec![axis; dim])
    }

    /// Uniform grid with `count` nodes starting at `start`, repeated on every axis.
    pub fn uniform_from(dim: usize, start: f64, spacing: f64, count: usize) -> Result<Self> {
        let axis: Vec<f64> = (0..count).map(|i| start + i as f64 * spacing).collect();
        Self::uniform_axes(vec![axis; dim])
    }

    pub fn uniform_axes(nodes: Vec<Vec<f64>>) -> Result<Self> {
        let weights = nodes
            .iter()
            .map(|x| {
                let h = if x.len() > 1 { x[1] - x[0] } else { 1.0 };
                vec![h; x.len()]
            })
            .collect();
        Self::new(nodes, weights, GridKind::Uniform)
    }

    /// Gauss–Hermite tensor grid with Gaussian-folded weights, so that
    /// `Σ w_i f(x_i) ≈ ∫ f`.
    pub fn gauss_hermite(dim: usize, order: usize) -> Result<Self> {
        let rule = gauss_hermite_rule(order)?;
        Self::new(vec![rule.nodes; dim], vec![rule.folded_weights; dim], GridKind::GaussHermite)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.nodes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_nodes(&self, axis: usize) -> &[f64] {
        &self.nodes[axis]
    }

    pub fn axis_weights(&self, axis: usize) -> &[f64] {
        &self.weights[axis]
    }

    /// Spacing of a uniform axis.
    pub fn spacing(&self, axis: usize) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some(self.weights[axis][0]),
            GridKind::GaussHermite => None,
        }
    }

    /// Per-axis positions of a flat row-major index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            let len = self.nodes[ax].len();
            idx[ax] = flat % len;
            flat /= len;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .into_iter()
            .enumerate()
            .map(|(ax, i)| self.nodes[ax][i])
            .collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.unravel(flat)
            .into_iter()
            .enumerate()
            .map(|(ax, i)| self.weights[ax][i])
            .product()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Flat tensor of all quadrature weights.
    pub fn weight_tensor(&self) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| self.weight(i)).collect()
    }
}

/// Complex samples on a tensor grid, row-major.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<GridSpec>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<GridSpec>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let len = grid.len();
        GridFunction { grid, values: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_fn<F>(grid: Arc<GridSpec>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        GridFunction { grid, values }
    }

    pub fn from_real_fn<F>(grid: Arc<GridSpec>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("grid functions live on different grids".into()))
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &GridFunction, b: Complex64) -> Result<GridFunction> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn scale(&self, a: Complex64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| a * v).collect() }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    /// Quadrature inner product `Σ w_i f_i conj(g_i)`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.check_grid(other)?;
        let w = self.grid.weight_tensor();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&w)
            .map(|((f, g), w)| f * g.conj() * w)
            .sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }
}

/// Quadrature Lp norm: `(Σ w_i |f_i|^p)^{1/p}`, or the grid maximum for `p = ∞`.
pub fn lp_norm(f: &GridFunction, p: Exponent) -> Result<f64> {
    if let Exponent::Finite(q) = p {
        if !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!("Lp norm needs p ≥ 1, got {q}")));
        }
    }
    if f.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite grid values".into()));
    }
    match p {
        Exponent::Infinity => Ok(f.max_abs()),
        Exponent::Finite(q) => {
            let w = f.grid.weight_tensor();
            let sum: f64 = f
                .values
                .iter()
                .zip(&w)
                .map(|(v, w)| {
                    let a = v.norm();
                    if q == 2.0 {
                        w * a * a
                    } else {
                        w * a.powf(q)
                    }
                })
                .sum();
            Ok(sum.powf(1.0 / q))
        }
    }
}

/// Sizing and padding knobs for [`build_basis_with`].
#[derive(Debug, Clone, Copy)]
pub struct BasisConfig {
    pub oversample: f64,
    pub pad: f64,
    pub point_cap: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { oversample: 1.0, pad: 4.0, point_cap: DEFAULT_POINT_CAP }
    }
}

/// Smallest half-width ever used; `e^{-R²/2}` is then far below rounding.
const MIN_HALF_WIDTH: f64 = 10.0;

/// Hermite basis with per-axis cutoff `N`, a Gauss–Hermite quadrature grid
/// and a uniform evaluation grid.
#[derive(Debug)]
pub struct HermiteBasis {
    n: usize,
    cutoff: usize,
    quad_order: usize,
    config: BasisConfig,
    half_width: f64,
    spacing: f64,
    quad_grid: Arc<GridSpec>,
    grid: Arc<GridSpec>,
    quad_table: OnceLock<Arc<HermiteTable>>,
    grid_table: OnceLock<Arc<HermiteTable>>,
}

pub fn build_basis(n: usize, cutoff: usize, oversample: f64) -> Result<HermiteBasis> {
    build_basis_with(n, cutoff, BasisConfig { oversample, ..BasisConfig::default() })
}

pub fn build_basis_with(n: usize, cutoff: usize, config: BasisConfig) -> Result<HermiteBasis> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(config.oversample >= 1.0) || !config.oversample.is_finite() {
        return Err(Error::InvalidArgument("oversample must be a finite real ≥ 1".into()));
    }
    if !(config.pad >= 4.0) {
        return Err(Error::InvalidArgument("pad must be at least 4".into()));
    }
    let quad_order = ((cutoff + 1) as f64 * config.oversample).ceil() as usize;
    let quad_order = quad_order.max(cutoff + 1);
    let lambda = (2 * n * cutoff + n) as f64;
    let half_width = ((2.0 * lambda).sqrt() + config.pad).max(MIN_HALF_WIDTH);
    let spacing = std::f64::consts::PI / (4.0 * lambda.sqrt() * config.oversample);
    let per_axis = 2 * (half_width / spacing).ceil() as u128 + 1;

    let cap = config.point_cap as u128;
    let check = |what: &'static str, per_axis: u128| -> Result<()> {
        let total = per_axis.checked_pow(n as u32).unwrap_or(u128::MAX);
        if total > cap {
            Err(Error::Sizing { what, required: total, cap })
        } else {
            Ok(())
        }
    };
    if quad_order > crate::quadrature::MAX_GH_ORDER {
        return Err(Error::Sizing {
            what: "Gauss–Hermite order",
            required: quad_order as u128,
            cap: crate::quadrature::MAX_GH_ORDER as u128,
        });
    }
    check("quadrature grid", quad_order as u128)?;
    check("evaluation grid", per_axis)?;

    let quad_grid = Arc::new(GridSpec::gauss_hermite(n, quad_order)?);
    let grid = Arc::new(GridSpec::uniform(n, half_width, spacing)?);
    Ok(HermiteBasis {
        n,
        cutoff,
        quad_order,
        config,
        half_width,
        spacing,
        quad_grid,
        grid,
        quad_table: OnceLock::new(),
        grid_table: OnceLock::new(),
    })
}

impl HermiteBasis {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Per-axis degree cutoff `N`.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn config(&self) -> BasisConfig {
        self.config
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn quad_grid(&self) -> &Arc<GridSpec> {
        &self.quad_grid
    }

    /// Uniform evaluation grid.
    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn quad_table(&self) -> Arc<HermiteTable> {
        self.quad_table
            .get_or_init(|| Arc::new(HermiteTable::new(self.cutoff, self.quad_grid.axis_nodes(0))))
            .clone()
    }

    pub fn grid_table(&self) -> Arc<HermiteTable> {
        self.grid_table
            .get_or_init(|| Arc::new(HermiteTable::new(self.cutoff, self.grid.axis_nodes(0))))
            .clone()
    }

    /// Per-axis tables for an arbitrary grid, reusing the cached ones when possible.
    pub fn tables_for(&self, grid: &GridSpec) -> Vec<Arc<HermiteTable>> {
        if *grid == *self.quad_grid {
            return vec![self.quad_table(); grid.dim()];
        }
        if *grid == *self.grid {
            return vec![self.grid_table(); grid.dim()];
        }
        let mut cache: HashMap<usize, Arc<HermiteTable>> = HashMap::new();
        (0..grid.dim())
            .map(|ax| {
                let first = (0..ax).find(|&b| grid.axis_nodes(b) == grid.axis_nodes(ax)).unwrap_or(ax);
                cache
                    .entry(first)
                    .or_insert_with(|| Arc::new(HermiteTable::new(self.cutoff, grid.axis_nodes(ax))))
                    .clone()
            })
            .collect()
    }

    /// Total-degree index set `|ν| ≤ N`.
    pub fn indices(&self) -> Vec<MultiIndex> {
        total_degree_indices(self.n, self.cutoff)
    }

    /// `φ_ν` sampled on `grid`.
    pub fn hermite_on(&self, nu: &MultiIndex, grid: &Arc<GridSpec>) -> Result<GridFunction> {
        if nu.dim() != self.n || grid.dim() != self.n {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let axes: Vec<Vec<f64>> = (0..self.n)
            .map(|ax| grid.axis_nodes(ax).iter().map(|&x| hermite_function(nu.components()[ax], x)).collect())
            .collect();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let idx = grid.unravel(i);
                Complex64::new(idx.iter().enumerate().map(|(ax, &j)| axes[ax][j]).product(), 0.0)
            })
            .collect();
        GridFunction::new(grid.clone(), values)
    }
}

/// Exact `‖φ_k‖_{L^p(R)}` computed between consecutive zeros.
///
/// The zeros of `φ_k` are the nodes of the `k`-point Gauss–Hermite rule; on
/// each interval `|φ_k|^p` is integrated by a Legendre rule after a smoothing
/// substitution that tames the `|x − r|^p` behaviour at the zeros. The sup
/// norm is located by Newton iteration on `φ_k'` in each interval.
pub fn hermite_lp_norm_1d(k: usize, p: Exponent) -> Result<f64> {
    if let Exponent::Finite(q) = p {
        if !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!("Lp norm needs p ≥ 1, got {q}")));
        }
    }
    let roots = nonnegative_zeros(k)?;
    let coeffs = recurrence_coeffs(k);
    let tail_end = (2.0 * k as f64 + 1.0).sqrt() + 10.0;
    // Breakpoints on [0, ∞): 0, positive zeros, then tail panels.
    let mut breaks = vec![0.0];
    breaks.extend(roots.iter().copied().filter(|&r| r > 0.0));
    let last = *breaks.last().unwrap();
    let panel = 0.5;
    let panels = ((tail_end - last) / panel).ceil().max(1.0) as usize;
    let tail: Vec<f64> = (1..=panels).map(|i| last + (tail_end - last) * i as f64 / panels as f64).collect();

    match p {
        Exponent::Infinity => {
            let mut intervals: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
            // The last extremum lies between the largest zero and the turning point.
            intervals.push((last, (2.0 * k as f64 + 1.0).sqrt() + 1.0));
            Ok(max_on_intervals(&coeffs, &intervals))
        }
        Exponent::Finite(q) => {
            let (nodes, weights) = gauss_legendre_rule(24);
            let mut segments: Vec<(f64, f64, bool)> = breaks.windows(2).map(|w| (w[0], w[1], true)).collect();
            let mut a = last;
            for &b in &tail {
                // Only the first tail panel touches a zero.
                segments.push((a, b, a == last && k > 0));
                a = b;
            }
            let mut xs = Vec::with_capacity(segments.len() * nodes.len());
            let mut ws = Vec::with_capacity(xs.capacity());
            for (a, b, smooth) in segments {
                let len = b - a;
                for (t, w) in nodes.iter().zip(&weights) {
                    let u = 0.5 * (t + 1.0);
                    if smooth {
                        let s = u * u * (3.0 - 2.0 * u);
                        let ds = 6.0 * u * (1.0 - u);
                        xs.push(a + len * s);
                        ws.push(0.5 * w * len * ds);
                    } else {
                        xs.push(a + len * u);
                        ws.push(0.5 * w * len);
                    }
                }
            }
            let total: f64 = xs
                .par_chunks(BATCH)
                .zip(ws.par_chunks(BATCH))
                .map(|(x, w)| {
                    let (phi, _) = pairs_batch(&coeffs, x);
                    phi.iter().zip(w).map(|(v, w)| w * v.abs().powf(q)).sum::<f64>()
                })
                .sum();
            Ok((2.0 * total).powf(1.0 / q))
        }
    }
}

/// Non-negative zeros of `φ_k`, memoized per degree.
fn nonnegative_zeros(k: usize) -> Result<Arc<Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(z) = cache.lock().unwrap().get(&k) {
        return Ok(z.clone());
    }
    let zeros: Vec<f64> =
        if k == 0 { Vec::new() } else { gauss_hermite_rule(k)?.nodes.into_iter().filter(|&r| r >= 0.0).collect() };
    let zeros = Arc::new(zeros);
    cache.lock().unwrap().insert(k, zeros.clone());
    Ok(zeros)
}

/// Points evaluated together by [`pairs_batch`].
const BATCH: usize = 4096;

/// `(φ_k, φ_{k−1})` at every point, with `k = coeffs.len()`. The recurrence
/// runs once for all points so the independent updates can overlap.
fn pairs_batch(coeffs: &[(f64, f64)], xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = coeffs.len();
    let m = xs.len();
    let mut prev = vec![0.0; m];
    let mut cur = vec![0.0; m];
    let mut log = vec![0.0; m];
    for i in 0..m {
        let x2 = xs[i] * xs[i];
        if x2 < DIRECT_X2 {
            cur[i] = PI_M14 * (-0.5 * x2).exp();
        } else {
            cur[i] = PI_M14;
            log[i] = -0.5 * x2;
        }
    }
    for &(a, b) in coeffs {
        let mut big = 0.0f64;
        for i in 0..m {
            let next = xs[i] * a * cur[i] - b * prev[i];
            prev[i] = cur[i];
            cur[i] = next;
            let m = next.abs();
            big = if m > big { m } else { big };
        }
        if big > RESCALE {
            for i in 0..m {
                if cur[i].abs() > RESCALE {
                    cur[i] /= RESCALE;
                    prev[i] /= RESCALE;
                    log[i] += LN_RESCALE;
                }
            }
        }
    }
    let limit = (2.0 * k as f64 + 1.0).sqrt() + 50.0;
    let emit = |p: f64, log: f64| if p == 0.0 || log == 0.0 { p * log.exp() } else { p.signum() * (p.abs().ln() + log).exp() };
    let mut phi = vec![0.0; m];
    let mut phim1 = vec![0.0; m];
    for i in 0..m {
        if xs[i].abs() > limit || xs[i].is_nan() {
            continue;
        }
        phi[i] = emit(cur[i], log[i]);
        if k > 0 {
            phim1[i] = emit(prev[i], log[i]);
        }
    }
    (phi, phim1)
}

/// `max |φ_k|` over the union of intervals: 17 samples per interval, then
/// Newton iteration on `φ_k'` from the best sample, all intervals in lockstep.
fn max_on_intervals(coeffs: &[(f64, f64)], intervals: &[(f64, f64)]) -> f64 {
    let k = coeffs.len();
    let samples = 16;
    let xs: Vec<f64> = intervals
        .iter()
        .flat_map(|&(a, b)| (0..=samples).map(move |i| a + (b - a) * i as f64 / samples as f64))
        .collect();
    let (phi, _) = pairs_batch(coeffs, &xs);
    let mut best = 0.0f64;
    let mut starts = Vec::with_capacity(intervals.len());
    for (j, chunk) in phi.chunks(samples + 1).enumerate() {
        let (i, v) = chunk.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        best = best.max(v);
        starts.push(xs[j * (samples + 1) + i]);
    }
    let lambda = 2.0 * k as f64 + 1.0;
    let mut x = starts;
    let mut active = vec![true; x.len()];
    for _ in 0..30 {
        if !active.iter().any(|&a| a) {
            break;
        }
        let (pk, pkm1) = pairs_batch(coeffs, &x);
        for j in 0..x.len() {
            if !active[j] {
                continue;
            }
            let d1 = (2.0 * k as f64).sqrt() * pkm1[j] - x[j] * pk[j];
            let d2 = (x[j] * x[j] - lambda) * pk[j];
            if d2 == 0.0 {
                active[j] = false;
                continue;
            }
            let (a, b) = intervals[j];
            let nx = (x[j] - d1 / d2).clamp(a, b);
            if (nx - x[j]).abs() < 1e-15 * x[j].abs().max(1.0) {
                active[j] = false;
            }
            x[j] = nx;
        }
    }
    let (pk, _) = pairs_batch(coeffs, &x);
    pk.iter().fold(best, |acc, v| acc.max(v.abs()))
}

/// `‖φ_ν‖_{L^p(Rⁿ)}` as the product of one-dimensional norms.
pub fn hermite_lp_norm(nu: &MultiIndex, p: Exponent) -> Result<f64> {
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut out = 1.0;
    for &k in nu.components() {
        let v = match cache.get(&k) {
            Some(v) => *v,
            None => {
                let v = hermite_lp_norm_1d(k, p)?;
                cache.insert(k, v);
                v
            }
        };
        out *= v;
    }
    Ok(out)
}
