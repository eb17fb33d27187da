//! Dyadic Hörmander-type symbol norms.
//!
//! For a symbol `m(y, ·)` and the dyadic bump `ψ`, block `k` of the Fourier
//! flavor is `2^{k(s−n/2)} ‖⟨x⟩^s F[m(y,·)ψ(2^{−k}|·|)]‖_{L²}` (literal mode)
//! or `‖m(y, 2^k·)ψ(|·|)‖_{H^s} = ‖⟨x⟩^s F[m(y,2^k·)ψ(|·|)]‖_{L²}` (rescaled
//! mode). Both are computed from samples of `g_k(ξ) = m(y, 2^k ξ)ψ(|ξ|)`: the
//! literal block equals `2^{k(s−n/2)} 2^{kd/2} ‖⟨2^{−k}u⟩^s F g_k(u)‖` after
//! the change of variables `u = 2^k x`, with `d` the frequency dimension.
//!
//! The Fourier–Hermite flavor replaces `F` by Hermite synthesis of the
//! sequence `m(y,ν)ψ(2^{−k}|ν|)`, `|ν|` the `ℓ¹` length of the (joint) index.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{build_basis_with, BasisConfig, GridFunction, GridSpec};
use crate::symbols::{make_cutoff, DyadicCutoff, Symbol, SymbolKind};
use crate::transform::{continuous_ft, inverse_fht, SpectralCoeffs};

/// Default largest block index.
pub const DEFAULT_K_MAX: u32 = 12;

/// Grid pad used by the Fourier–Hermite synthesis.
pub const FHT_PAD: f64 = 8.0;

/// Half-width of the frequency box holding the support `|ξ| ≤ 4` of `ψ`.
const FREQ_HALF_WIDTH: f64 = 4.5;

/// Cap on `(N+1) × nodes per axis` for Fourier–Hermite synthesis tables.
const FHT_TABLE_CAP: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    #[serde(rename = "FT")]
    Ft,
    #[serde(rename = "FHT")]
    Fht,
    #[serde(rename = "spectral-1d")]
    Spectral1d,
    #[serde(rename = "multilinear-FHT")]
    MultilinearFht,
    #[serde(rename = "multilinear-FT")]
    MultilinearFt,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Ft => "FT",
            Flavor::Fht => "FHT",
            Flavor::Spectral1d => "spectral-1d",
            Flavor::MultilinearFht => "multilinear-FHT",
            Flavor::MultilinearFt => "multilinear-FT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Flavor::Ft, Flavor::Fht, Flavor::Spectral1d, Flavor::MultilinearFht, Flavor::MultilinearFt]
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown flavor '{s}'")))
    }

    fn hermite(self) -> bool {
        matches!(self, Flavor::Fht | Flavor::MultilinearFht)
    }

    /// Mode used when none is requested.
    pub fn default_mode(self) -> Mode {
        if self.hermite() {
            Mode::Literal
        } else {
            Mode::Rescaled
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Literal,
    Rescaled,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "literal" => Ok(Mode::Literal),
            "rescaled" => Ok(Mode::Rescaled),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockValue {
    pub k: u32,
    pub value: f64,
    /// The `y` grid point attaining the block value.
    pub argsup: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HormanderReport {
    pub flavor: Flavor,
    pub s: f64,
    pub mode: Mode,
    pub blocks: Vec<BlockValue>,
    pub sup: f64,
    pub argsup_k: u32,
    /// Least-squares slope of `log₂ B_k` against `k`.
    pub tail_slope: f64,
    /// Length used for the shell of a joint index.
    pub joint_norm: &'static str,
}

/// Sampling knobs; `None` picks a default from the frequency dimension.
#[derive(Debug, Clone, Copy, Default)]
pub struct HnormConfig {
    pub samples_per_axis: Option<usize>,
}

fn default_samples(d: usize) -> usize {
    match d {
        1 => 2048,
        2 => 256,
        3 => 64,
        _ => 32,
    }
}

/// Frequency dimension and the dimension in the `2^{k(s − ·/2)}` prefactor.
fn dimensions(s: &Symbol, flavor: Flavor) -> Result<(usize, usize)> {
    let kind = s.kind();
    match flavor {
        Flavor::Ft | Flavor::Fht => {
            if !matches!(kind, SymbolKind::Multiplier | SymbolKind::Pseudo) {
                return Err(Error::InvalidArgument(format!("{} flavor needs a multi-index symbol", flavor.name())));
            }
            Ok((s.dim(), s.dim()))
        }
        Flavor::Spectral1d => {
            if !kind.is_level() {
                return Err(Error::InvalidArgument("spectral-1d flavor needs a radial or spectral symbol".into()));
            }
            Ok((1, s.dim()))
        }
        Flavor::MultilinearFht | Flavor::MultilinearFt => {
            if kind != SymbolKind::Multilinear {
                return Err(Error::InvalidArgument("multilinear flavors need a symbol of arity κ ≥ 2".into()));
            }
            let d = s.dim() * s.arity();
            Ok((d, d))
        }
    }
}

/// `m(y, ξ)` at a real frequency; level symbols are extended evenly to `ξ < 0`.
fn eval_real(s: &Symbol, y: &[f64], xi: &[f64]) -> Result<Complex64> {
    if s.kind().is_level() {
        s.eval_real(y, &[xi[0].abs()])
    } else {
        s.eval_real(y, xi)
    }
}

fn frequency_grid(d: usize, m: usize, half_width: f64) -> Result<Arc<GridSpec>> {
    let h = 2.0 * half_width / m as f64;
    Ok(Arc::new(GridSpec::uniform_from(d, -half_width, h, m)?))
}

/// Samples of `g_k(ξ) = m(y, 2^k ξ) ψ(|ξ|)`.
fn rescaled_samples(s: &Symbol, y: &[f64], k: u32, grid: &Arc<GridSpec>, psi: &DyadicCutoff) -> Result<GridFunction> {
    let scale = 2f64.powi(k as i32);
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xi = grid.point(i);
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let w = psi.eval(r);
            if w == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let scaled: Vec<f64> = xi.iter().map(|v| v * scale).collect();
            Ok(eval_real(s, y, &scaled)? * w)
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid.clone(), values)
}

/// `‖⟨c·u⟩^s F‖_{L²}` on the dual grid.
fn weighted_l2(f: &GridFunction, s: f64, c: f64) -> f64 {
    let grid = f.grid();
    let cell: f64 = (0..grid.dim()).map(|ax| grid.spacing(ax).unwrap_or(1.0)).product();
    let sum: f64 = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let u2: f64 = grid.point(i).iter().map(|v| v * v).sum();
            (1.0 + c * c * u2).powf(s) * f.values()[i].norm_sqr()
        })
        .sum();
    (sum * cell).sqrt()
}

fn fourier_block(s: &Symbol, y: &[f64], k: u32, order: f64, mode: Mode, d: usize, n_pref: usize, m: usize) -> Result<f64> {
    let psi = make_cutoff();
    let grid = frequency_grid(d, m, FREQ_HALF_WIDTH)?;
    let g = rescaled_samples(s, y, k, &grid, &psi)?;
    let fg = continuous_ft(&g)?.function;
    Ok(match mode {
        Mode::Rescaled => weighted_l2(&fg, order, 1.0),
        Mode::Literal => {
            let kf = k as f64;
            let pref = 2f64.powf(kf * (order - n_pref as f64 / 2.0) + kf * d as f64 / 2.0);
            pref * weighted_l2(&fg, order, 2f64.powf(-kf))
        }
    })
}

fn hermite_block(s: &Symbol, y: &[f64], k: u32, order: f64, d: usize, n_pref: usize) -> Result<f64> {
    let psi = make_cutoff();
    let scale = 2f64.powi(-(k as i32));
    // ψ(2^{−k}t) vanishes for t ≥ 2^{k+2}.
    let cutoff = (1usize << (k + 2)) - 1;
    let basis = build_basis_with(d, cutoff, BasisConfig { pad: FHT_PAD, ..BasisConfig::default() })?;
    let per_axis = basis.grid().axis_nodes(0).len();
    if (cutoff + 1) * per_axis > FHT_TABLE_CAP {
        return Err(Error::Sizing {
            what: "Fourier–Hermite synthesis table",
            required: ((cutoff + 1) * per_axis) as u128,
            cap: FHT_TABLE_CAP as u128,
        });
    }
    let mut c = SpectralCoeffs::zeros(d, cutoff);
    let values = (0..c.dense().len())
        .into_par_iter()
        .map(|i| {
            let nu = c.index_at(i);
            let w = psi.eval(scale * nu.abs() as f64);
            if w == 0.0 {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Ok(s.eval_index(y, nu.components())? * w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    c.dense_mut().copy_from_slice(&values);
    let f = inverse_fht(&c, &basis, basis.grid())?;
    let grid = f.grid();
    let cell = basis.spacing().powi(d as i32);
    let sum: f64 = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z2: f64 = grid.point(i).iter().map(|v| v * v).sum();
            (1.0 + z2).powf(order) * f.values()[i].norm_sqr()
        })
        .sum();
    Ok(2f64.powf(k as f64 * (order - n_pref as f64 / 2.0)) * (sum * cell).sqrt())
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Per-block values `B_k` for `k ∈ k_range`, each the grid-sup over `y ∈
/// x_grid` (a single `y = 0` for x-independent symbols or an empty grid).
pub fn hormander_norm(
    s: &Symbol,
    flavor: Flavor,
    order: f64,
    mode: Mode,
    k_range: std::ops::RangeInclusive<u32>,
    x_grid: &[Vec<f64>],
) -> Result<HormanderReport> {
    hormander_norm_with(s, flavor, order, mode, k_range, x_grid, HnormConfig::default())
}

pub fn hormander_norm_with(
    s: &Symbol,
    flavor: Flavor,
    order: f64,
    mode: Mode,
    k_range: std::ops::RangeInclusive<u32>,
    x_grid: &[Vec<f64>],
    config: HnormConfig,
) -> Result<HormanderReport> {
    if !(order > 0.0) || !order.is_finite() {
        return Err(Error::InvalidArgument(format!("regularity order must be positive, got {order}")));
    }
    let (d, n_pref) = dimensions(s, flavor)?;
    if flavor.hermite() && mode == Mode::Rescaled {
        return Err(Error::Unsupported("the Fourier–Hermite flavors have no rescaled form".into()));
    }
    if !flavor.hermite() && !s.real_evaluable() {
        return Err(Error::Unsupported(format!("{} is not defined at real frequencies", s.describe())));
    }
    if k_range.is_empty() {
        return Err(Error::InvalidArgument("empty k range".into()));
    }
    let ys: Vec<Vec<f64>> = if s.depends_on_x() && !x_grid.is_empty() {
        x_grid.to_vec()
    } else {
        vec![vec![0.0; s.dim()]]
    };
    if ys.iter().any(|y| y.len() != s.dim()) {
        return Err(Error::InvalidArgument("x grid points have the wrong dimension".into()));
    }
    let m = config.samples_per_axis.unwrap_or_else(|| default_samples(d));

    let mut blocks = Vec::new();
    for k in k_range {
        let mut best = BlockValue { k, value: f64::NEG_INFINITY, argsup: Vec::new() };
        for y in &ys {
            let v = if flavor.hermite() {
                hermite_block(s, y, k, order, d, n_pref)?
            } else {
                fourier_block(s, y, k, order, mode, d, n_pref, m)?
            };
            if v > best.value {
                best = BlockValue { k, value: v, argsup: y.clone() };
            }
        }
        blocks.push(best);
    }
    let top = blocks.iter().max_by(|a, b| a.value.partial_cmp(&b.value).unwrap()).unwrap();
    let logs: Vec<(f64, f64)> = blocks
        .iter()
        .filter(|b| b.value > 0.0)
        .map(|b| (b.k as f64, b.value.log2()))
        .collect();
    Ok(HormanderReport {
        flavor,
        s: order,
        mode,
        sup: top.value,
        argsup_k: top.k,
        tail_slope: slope(&logs),
        joint_norm: if flavor.hermite() { "l1" } else { "euclidean" },
        blocks,
    })
}

/// Central-difference stencils of order eight.
const D1: [f64; 9] = [1.0 / 280.0, -4.0 / 105.0, 0.2, -0.8, 0.0, 0.8, -0.2, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -0.2,
    1.6,
    -205.0 / 72.0,
    1.6,
    -0.2,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Apply a 9-point stencil along one axis of a row-major tensor (zero outside).
fn stencil_axis(data: &[f64], shape: &[usize], axis: usize, stencil: &[f64; 9], scale: f64) -> Vec<f64> {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; data.len()];
    out.par_iter_mut().enumerate().for_each(|(flat, o)| {
        let j = (flat / inner) % len;
        let mut acc = 0.0;
        for (t, &c) in stencil.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let jj = j as isize + t as isize - 4;
            if jj >= 0 && (jj as usize) < len {
                acc += c * data[(flat as isize + (t as isize - 4) * inner as isize) as usize];
            }
        }
        *o = acc * scale;
    });
    out
}

fn derivative(data: &[f64], shape: &[usize], beta: &[usize], h: f64) -> Vec<f64> {
    let mut cur = data.to_vec();
    for (ax, &b) in beta.iter().enumerate() {
        let mut left = b;
        while left >= 2 {
            cur = stencil_axis(&cur, shape, ax, &D2, 1.0 / (h * h));
            left -= 2;
        }
        if left == 1 {
            cur = stencil_axis(&cur, shape, ax, &D1, 1.0 / h);
        }
    }
    cur
}

/// `sup_y Σ_{|β|≤ρ} ‖∂^β (m(y, 2^k ·) ψ(|·|))‖_{L²}` with eighth-order central
/// differences on a uniform frequency grid.
pub fn block_sobolev_norm(s: &Symbol, k: u32, rho: usize, x_grid: &[Vec<f64>]) -> Result<f64> {
    if s.kind() == SymbolKind::Multilinear {
        return Err(Error::Unsupported("block Sobolev norms of multilinear symbols".into()));
    }
    if !s.real_evaluable() {
        return Err(Error::Unsupported(format!("{} is not defined at real frequencies", s.describe())));
    }
    if rho >= 1 && !s.is_smooth() {
        return Err(Error::Unsupported(format!("{} is not smooth; derivatives are undefined", s.describe())));
    }
    let d = s.freq_len();
    let h: f64 = match d {
        1 => 1.0 / 256.0,
        2 => 1.0 / 32.0,
        _ => 1.0 / 8.0,
    };
    // Support of ψ(|ξ|) is |ξ| ≤ 4; four extra nodes keep stencils inside zeros.
    let half = 4.0 + 5.0 * h;
    let m = (2.0 * half / h).round() as usize + 1;
    let grid = Arc::new(GridSpec::uniform_from(d, -half, h, m)?);
    let shape = grid.shape();
    let psi = make_cutoff();
    let ys: Vec<Vec<f64>> = if s.depends_on_x() && !x_grid.is_empty() {
        x_grid.to_vec()
    } else {
        vec![vec![0.0; s.dim()]]
    };
    let cell = h.powi(d as i32);
    let mut best = 0.0f64;
    for y in &ys {
        let g = rescaled_samples(s, y, k, &grid, &psi)?;
        let re: Vec<f64> = g.values().iter().map(|v| v.re).collect();
        let im: Vec<f64> = g.values().iter().map(|v| v.im).collect();
        let mut total = 0.0;
        for beta in crate::hermite::total_degree_indices(d, rho) {
            let dr = derivative(&re, &shape, beta.components(), h);
            let di = derivative(&im, &shape, beta.components(), h);
            let sq: f64 = dr.iter().zip(&di).map(|(a, b)| a * a + b * b).sum();
            total += (sq * cell).sqrt();
        }
        best = best.max(total);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre_rule, integrate_legendre};
    use crate::symbols::{make_symbol, Profile, XFactor};

    fn one(n: usize) -> Symbol {
        make_symbol("one", &[], n).unwrap()
    }

    #[test]
    fn rescaled_blocks_of_one_are_constant() {
        for n in [1, 2] {
            let r = hormander_norm(&one(n), Flavor::Ft, 1.5, Mode::Rescaled, 1..=8, &[]).unwrap();
            let b0 = r.blocks[0].value;
            for b in &r.blocks {
                assert!((b.value - b0).abs() < 1e-8 * b0, "n={n}: {b:?}");
            }
            assert!((r.sup - b0).abs() < 1e-8 * b0);
        }
    }

    #[test]
    fn literal_blocks_of_one_grow_like_two_to_the_s() {
        let r = hormander_norm(&one(1), Flavor::Ft, 2.0, Mode::Literal, 1..=12, &[]).unwrap();
        let ratio = r.blocks[11].value / r.blocks[10].value;
        assert!((ratio / 4.0 - 1.0).abs() < 0.02, "{ratio}");
        assert!((r.tail_slope - 2.0).abs() < 0.2);
    }

    #[test]
    fn literal_rescaled_sandwich() {
        let s = make_symbol("mihlin", &[1.0], 1).unwrap();
        let xs = vec![vec![0.0], vec![1.0]];
        let lit = hormander_norm(&s, Flavor::Ft, 1.0, Mode::Literal, 0..=6, &xs).unwrap();
        let res = hormander_norm(&s, Flavor::Ft, 1.0, Mode::Rescaled, 0..=6, &xs).unwrap();
        for (a, b) in lit.blocks.iter().zip(&res.blocks) {
            let k = a.k as f64;
            assert!(b.value <= a.value * (1.0 + 1e-12));
            assert!(a.value <= 2f64.powf(k) * b.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mihlin_blocks_are_comparable() {
        let s = make_symbol("mihlin", &[1.0], 1).unwrap();
        let r = hormander_norm(&s, Flavor::Ft, 3.0, Mode::Rescaled, 4..=10, &[vec![0.0], vec![2.0]]).unwrap();
        let max = r.blocks.iter().map(|b| b.value).fold(0.0, f64::max);
        let min = r.blocks.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
        assert!(max / min < 2.0, "{max} / {min}");
    }

    #[test]
    fn dilation_shifts_blocks() {
        let s = Symbol::family(Profile::Mihlin { a: 1.0 }, XFactor::One, 1);
        let d = s.dilated(2.0).unwrap();
        let a = hormander_norm(&s, Flavor::Ft, 2.0, Mode::Rescaled, 2..=7, &[]).unwrap();
        let b = hormander_norm(&d, Flavor::Ft, 2.0, Mode::Rescaled, 1..=6, &[]).unwrap();
        for (x, y) in a.blocks.iter().zip(&b.blocks) {
            assert!((x.value - y.value).abs() < 1e-6 * x.value);
        }
    }

    #[test]
    fn fht_flavor_is_shell_local() {
        let base = make_symbol("power", &[0.5], 1).unwrap();
        // Same values on 2^{k-1} < |ν| < 2^{k+2}, garbage elsewhere, for k = 3.
        let noisy = Symbol::custom("noisy", SymbolKind::Multiplier, 1, 1, false, |_, nu| {
            let t = nu[0];
            if t > 4.0 && t < 32.0 {
                Complex64::new((1.0 + t).powf(-0.5), 0.0)
            } else {
                Complex64::new(1e6, -3.0)
            }
        })
        .unwrap();
        let a = hormander_norm(&base, Flavor::Fht, 1.0, Mode::Literal, 3..=3, &[]).unwrap();
        let b = hormander_norm(&noisy, Flavor::Fht, 1.0, Mode::Literal, 3..=3, &[]).unwrap();
        assert_eq!(a.blocks[0].value, b.blocks[0].value);
        assert!(hormander_norm(&base, Flavor::Fht, 1.0, Mode::Rescaled, 3..=3, &[]).is_err());
    }

    #[test]
    fn flavors_check_symbol_kind() {
        let lin = one(1);
        assert!(hormander_norm(&lin, Flavor::MultilinearFt, 1.0, Mode::Rescaled, 1..=2, &[]).is_err());
        assert!(hormander_norm(&lin, Flavor::Spectral1d, 1.0, Mode::Rescaled, 1..=2, &[]).is_err());
        let ml = Symbol::multilinear_family(Profile::Power { kappa: 1.0 }, XFactor::One, 1, 2).unwrap();
        let r = hormander_norm(&ml, Flavor::MultilinearFt, 1.0, Mode::Rescaled, 1..=3, &[]).unwrap();
        assert!(r.sup > 0.0);
        let r = hormander_norm(&ml, Flavor::MultilinearFht, 1.0, Mode::Literal, 1..=2, &[]).unwrap();
        assert_eq!(r.joint_norm, "l1");
        let radial = lin.with_kind(SymbolKind::Radial).unwrap();
        let r = hormander_norm(&radial, Flavor::Spectral1d, 1.0, Mode::Rescaled, 1..=3, &[]).unwrap();
        assert!((r.blocks[0].value - r.blocks[2].value).abs() < 1e-8 * r.sup);
    }

    #[test]
    fn norm_grows_with_s() {
        let s = make_symbol("mihlin", &[2.0], 1).unwrap();
        let mut last = 0.0;
        for order in [0.5, 1.0, 2.0, 3.0] {
            let r = hormander_norm(&s, Flavor::Ft, order, Mode::Rescaled, 2..=5, &[]).unwrap();
            assert!(r.sup >= last);
            last = r.sup;
        }
    }

    #[test]
    fn sobolev_block_of_one_is_constant() {
        for rho in [0, 2] {
            let a = block_sobolev_norm(&one(1), 1, rho, &[]).unwrap();
            let b = block_sobolev_norm(&one(1), 7, rho, &[]).unwrap();
            assert_eq!(a, b);
        }
        // ρ = 0: ‖ψ(|·|)‖_{L²} over both half-lines.
        let rule = gauss_legendre_rule(40);
        let psi = make_cutoff();
        let mut exact = 0.0;
        for i in 0..35 {
            let a = 0.5 + 0.1 * i as f64;
            exact += integrate_legendre(&rule, a, a + 0.1, |t| psi.eval(t).powi(2));
        }
        let v = block_sobolev_norm(&one(1), 3, 0, &[]).unwrap();
        assert!((v - (2.0 * exact).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sobolev_block_matches_quadrature_oracle() {
        let s = make_symbol("power", &[0.5], 1).unwrap();
        let k = 6;
        let c = 2f64.powi(k);
        // g(t) = (1 + c t)^{-1/2} ψ(t) on t > 0, with ψ built from the smooth step.
        let sdash = |u: f64| {
            if u <= 0.0 || u >= 1.0 {
                return 0.0;
            }
            let a = (-1.0 / u).exp();
            let b = (-1.0 / (1.0 - u)).exp();
            let (da, db) = (a / (u * u), -b / ((1.0 - u) * (1.0 - u)));
            (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
        };
        let psi = |t: f64| make_cutoff().eval(t);
        let dpsi = |t: f64| {
            if t > 0.5 && t < 1.0 {
                sdash((t - 0.5) / 0.5) / 0.5
            } else if t > 2.0 && t < 4.0 {
                -sdash((t - 2.0) / 2.0) / 2.0
            } else {
                0.0
            }
        };
        let g = |t: f64| (1.0 + c * t).powf(-0.5) * psi(t);
        let dg = |t: f64| -0.5 * c * (1.0 + c * t).powf(-1.5) * psi(t) + (1.0 + c * t).powf(-0.5) * dpsi(t);
        let rule = gauss_legendre_rule(40);
        let (mut i0, mut i1) = (0.0, 0.0);
        for j in 0..70 {
            let a = 0.5 + 0.05 * j as f64;
            i0 += integrate_legendre(&rule, a, a + 0.05, |t| g(t).powi(2));
            i1 += integrate_legendre(&rule, a, a + 0.05, |t| dg(t).powi(2));
        }
        let oracle = (2.0 * i0).sqrt() + (2.0 * i1).sqrt();
        let v = block_sobolev_norm(&s, k as u32, 1, &[]).unwrap();
        assert!((v - oracle).abs() < 1e-6 * oracle, "{v} vs {oracle}");
    }

    #[test]
    fn sobolev_block_rejects_rough_symbols() {
        let riesz = make_symbol("riesz", &[1.0, 100.0], 1).unwrap();
        assert!(block_sobolev_norm(&riesz, 2, 1, &[]).is_err());
        assert!(block_sobolev_norm(&riesz, 2, 0, &[]).is_ok());
    }
}
