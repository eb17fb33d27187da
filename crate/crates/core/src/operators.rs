//! Application of multipliers, pseudo-multipliers, spectral projections,
//! dyadic and Littlewood–Paley blocks, square functions and multilinear
//! operators to grid functions.
//!
//! All sums run over the total-degree band `|ν| ≤ N` of the basis.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{total_degree_count, GridFunction, GridSpec, HermiteBasis, HermiteTable, MultiIndex};
use crate::symbols::{LPPartition, Symbol, SymbolKind};
use crate::transform::{forward_fht, inverse_fht, SpectralCoeffs};

/// Default bound on the number of joint indices summed by [`apply_multilinear`].
pub const DEFAULT_JOINT_CAP: u128 = 1 << 24;

/// Index restriction applied on top of the symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Plain,
    /// `2^k ≤ |ν| < 2^{k+1}`
    DyadicBlock(u32),
    /// `|ν| ≤ k`
    TailTruncation(usize),
    /// Coefficients weighted by `ψ_l(⟨ν⟩)`, `⟨ν⟩ = (1 + |ν|²)^{1/2}`.
    LpBlock { l: usize, partition: LPPartition },
}

impl Variant {
    /// Weight of an index of total degree `d`.
    pub fn weight(&self, d: usize) -> f64 {
        match *self {
            Variant::Plain => 1.0,
            Variant::DyadicBlock(k) => {
                let lo = 1usize << k;
                if d >= lo && d < 2 * lo {
                    1.0
                } else {
                    0.0
                }
            }
            Variant::TailTruncation(k) => {
                if d <= k {
                    1.0
                } else {
                    0.0
                }
            }
            Variant::LpBlock { l, partition } => {
                let bracket = (1.0 + (d * d) as f64).sqrt();
                partition.weight(l, bracket)
            }
        }
    }

    fn validate(&self, basis: &HermiteBasis) -> Result<()> {
        let n = basis.cutoff();
        match *self {
            Variant::Plain => Ok(()),
            Variant::DyadicBlock(k) if k < usize::BITS - 1 && (1usize << k) <= n => Ok(()),
            Variant::DyadicBlock(k) => Err(Error::OutOfRange {
                index: vec![k as usize],
                range: format!("dyadic blocks with 2^k ≤ {n}"),
            }),
            Variant::TailTruncation(k) if k <= n => Ok(()),
            Variant::TailTruncation(k) => Err(Error::OutOfRange { index: vec![k], range: format!("0..={n}") }),
            Variant::LpBlock { l, partition } if l <= partition.count => Ok(()),
            Variant::LpBlock { l, partition } => Err(Error::OutOfRange {
                index: vec![l],
                range: format!("0..={}", partition.count),
            }),
        }
    }
}

/// A linear operator: symbol, basis and index restriction.
#[derive(Debug, Clone)]
pub struct OperatorSpec<'a> {
    pub symbol: Symbol,
    pub basis: &'a HermiteBasis,
    pub variant: Variant,
}

impl<'a> OperatorSpec<'a> {
    pub fn new(symbol: Symbol, basis: &'a HermiteBasis, variant: Variant) -> Self {
        OperatorSpec { symbol, basis, variant }
    }

    pub fn plain(symbol: Symbol, basis: &'a HermiteBasis) -> Self {
        Self::new(symbol, basis, Variant::Plain)
    }

    fn validate(&self) -> Result<()> {
        if self.symbol.kind() == SymbolKind::Multilinear {
            return Err(Error::InvalidArgument("multilinear symbols go through apply_multilinear".into()));
        }
        if self.symbol.dim() != self.basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "symbol of dimension {} on a basis of dimension {}",
                self.symbol.dim(),
                self.basis.dim()
            )));
        }
        self.variant.validate(self.basis)
    }
}

/// Symbol value at grid point `x` for the index `ν`, following the kind:
/// `m(x,ν)`, `μ(|ν|)` or `m(x, 2|ν|+n)`.
pub fn symbol_at(s: &Symbol, x: &[f64], nu: &MultiIndex) -> Result<Complex64> {
    match s.kind() {
        SymbolKind::Multiplier | SymbolKind::Pseudo => s.eval_index(x, nu.components()),
        SymbolKind::Radial => s.eval_index(x, &[nu.abs()]),
        SymbolKind::Spectral => s.eval_index(x, &[2 * nu.abs() + nu.dim()]),
        SymbolKind::Multilinear => Err(Error::InvalidArgument("multilinear symbol used as a linear one".into())),
    }
}

/// Coefficients restricted to the band and weighted by the variant.
fn band_coeffs(f: &GridFunction, basis: &HermiteBasis, variant: &Variant) -> Result<SpectralCoeffs> {
    let c = forward_fht(f, basis)?;
    let cutoff = basis.cutoff();
    Ok(c.map_indexed(|nu, v| {
        let d = nu.abs();
        if d > cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            v * variant.weight(d)
        }
    }))
}

fn multiply_coeffs(c: &SpectralCoeffs, s: &Symbol) -> Result<SpectralCoeffs> {
    let x0 = vec![0.0; s.dim()];
    let values = (0..c.dense().len())
        .into_par_iter()
        .map(|i| {
            let v = c.dense()[i];
            if v == Complex64::new(0.0, 0.0) {
                Ok(v)
            } else {
                Ok(v * symbol_at(s, &x0, &c.index_at(i))?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralCoeffs::from_dense(c.dim(), c.cutoff(), values)
}

/// `T f` on the grid of `f`, which must be one of the basis grids (or any
/// uniform grid fine enough for the trapezoidal analysis).
pub fn apply(spec: &OperatorSpec, f: &GridFunction) -> Result<GridFunction> {
    spec.validate()?;
    let basis = spec.basis;
    let grid = f.grid();
    let c = band_coeffs(f, basis, &spec.variant)?;
    let s = &spec.symbol;

    if !s.depends_on_x() {
        return inverse_fht(&multiply_coeffs(&c, s)?, basis, grid);
    }
    if let Some((a, b)) = s.x_factorization() {
        let mut out = inverse_fht(&multiply_coeffs(&c, &b)?, basis, grid)?;
        let g = grid.clone();
        out.values_mut().par_iter_mut().enumerate().for_each(|(i, v)| *v *= a.eval(&g.point(i)));
        return Ok(out);
    }
    if s.kind().is_level() {
        return apply_by_shells(s, &c, basis, grid);
    }
    apply_pointwise(s, &c, basis, grid)
}

/// `Σ_ℓ m(x, ℓ) (P_ℓ f)(x)` for level kinds.
fn apply_by_shells(s: &Symbol, c: &SpectralCoeffs, basis: &HermiteBasis, grid: &Arc<GridSpec>) -> Result<GridFunction> {
    let mut out = GridFunction::zeros(grid.clone());
    let n = basis.dim();
    for l in 0..=basis.cutoff() {
        let shell = c.map_indexed(|nu, v| if nu.abs() == l { v } else { Complex64::new(0.0, 0.0) });
        if shell.norm_sq() == 0.0 {
            continue;
        }
        let level = if s.kind() == SymbolKind::Spectral { 2 * l + n } else { l };
        let part = inverse_fht(&shell, basis, grid)?;
        let updates = (0..grid.len())
            .into_par_iter()
            .map(|i| Ok(s.eval_index(&grid.point(i), &[level])? * part.values()[i]))
            .collect::<Result<Vec<_>>>()?;
        for (o, u) in out.values_mut().iter_mut().zip(updates) {
            *o += u;
        }
    }
    Ok(out)
}

/// `Σ_ν m(x,ν) c_ν φ_ν(x)` evaluated point by point.
fn apply_pointwise(s: &Symbol, c: &SpectralCoeffs, basis: &HermiteBasis, grid: &Arc<GridSpec>) -> Result<GridFunction> {
    let tables = basis.tables_for(grid);
    let active: Vec<(MultiIndex, Complex64)> = c.iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let idx = grid.unravel(i);
            let x = grid.point(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (nu, v) in &active {
                let phi = hermite_product(&tables, nu.components(), &idx);
                if phi != 0.0 {
                    acc += symbol_at(s, &x, nu)? * v * phi;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid.clone(), values)
}

fn hermite_product(tables: &[Arc<HermiteTable>], nu: &[usize], idx: &[usize]) -> f64 {
    nu.iter().zip(idx).enumerate().map(|(ax, (&k, &i))| tables[ax].row(k)[i]).product()
}

/// `P_ℓ f = Σ_{|ν|=ℓ} (f, φ_ν) φ_ν`.
pub fn spectral_projection(l: usize, f: &GridFunction, basis: &HermiteBasis) -> Result<GridFunction> {
    if l > basis.cutoff() {
        return Err(Error::OutOfRange { index: vec![l], range: format!("shells 0..={}", basis.cutoff()) });
    }
    let c = forward_fht(f, basis)?;
    let shell = c.map_indexed(|nu, v| if nu.abs() == l { v } else { Complex64::new(0.0, 0.0) });
    inverse_fht(&shell, basis, f.grid())
}

/// `(Σ_{l=0}^{L} |T_{ψ_l} f|²)^{1/2}` pointwise, including the `ψ₀` block.
pub fn square_function(f: &GridFunction, partition: &LPPartition, basis: &HermiteBasis) -> Result<GridFunction> {
    let grid = f.grid();
    let c = band_coeffs(f, basis, &Variant::Plain)?;
    let mut acc = vec![0.0; grid.len()];
    for l in 0..=partition.count {
        let block = c.map_indexed(|nu, v| v * Variant::LpBlock { l, partition: *partition }.weight(nu.abs()));
        if block.norm_sq() == 0.0 {
            continue;
        }
        let g = inverse_fht(&block, basis, grid)?;
        for (a, v) in acc.iter_mut().zip(g.values()) {
            *a += v.norm_sqr();
        }
    }
    GridFunction::new(grid.clone(), acc.into_iter().map(|a| Complex64::new(a.sqrt(), 0.0)).collect())
}

/// `T_m(f₁, …, f_κ)(x) = Σ_{ν₁…ν_κ} m(x, ν₁, …, ν_κ) Π_j f̂_j(ν_j) φ_{ν_j}(x)`
/// with every `ν_j` in the band `|ν_j| ≤ N`.
pub fn apply_multilinear(s: &Symbol, fs: &[&GridFunction], basis: &HermiteBasis) -> Result<GridFunction> {
    apply_multilinear_with_cap(s, fs, basis, DEFAULT_JOINT_CAP)
}

pub fn apply_multilinear_with_cap(s: &Symbol, fs: &[&GridFunction], basis: &HermiteBasis, cap: u128) -> Result<GridFunction> {
    if s.kind() != SymbolKind::Multilinear {
        return Err(Error::InvalidArgument("apply_multilinear needs a multilinear symbol".into()));
    }
    if fs.len() != s.arity() {
        return Err(Error::InvalidArgument(format!("symbol of arity {} given {} inputs", s.arity(), fs.len())));
    }
    if s.dim() != basis.dim() {
        return Err(Error::InvalidArgument("symbol and basis dimensions differ".into()));
    }
    let grid = fs[0].grid();
    if fs.iter().any(|f| !f.same_grid(fs[0])) {
        return Err(Error::GridMismatch("multilinear inputs on different grids".into()));
    }

    if let Some((a, slots)) = s.separable_slots() {
        let mut out = GridFunction::from_real_fn(grid.clone(), |x| a.eval(x));
        for (slot, f) in slots.iter().zip(fs) {
            let t = apply(&OperatorSpec::plain(slot.clone(), basis), f)?;
            out = out.mul(&t)?;
        }
        return Ok(out);
    }

    let per_slot = total_degree_count(basis.dim(), basis.cutoff());
    let joint = per_slot.checked_pow(s.arity() as u32).unwrap_or(u128::MAX);
    if joint > cap {
        return Err(Error::Sizing { what: "joint multilinear index set", required: joint, cap });
    }

    let coeffs: Vec<Vec<(MultiIndex, Complex64)>> = fs
        .iter()
        .map(|f| {
            let c = band_coeffs(f, basis, &Variant::Plain)?;
            Ok(c.iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect())
        })
        .collect::<Result<_>>()?;
    let tables = basis.tables_for(grid);
    let kappa = s.arity();

    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let idx = grid.unravel(i);
            let x = grid.point(i);
            // Per-slot terms c_j(ν) φ_ν(x) at this point.
            let terms: Vec<Vec<(&MultiIndex, Complex64)>> = coeffs
                .iter()
                .map(|slot| {
                    slot.iter()
                        .map(|(nu, v)| (nu, v * hermite_product(&tables, nu.components(), &idx)))
                        .filter(|(_, t)| *t != Complex64::new(0.0, 0.0))
                        .collect()
                })
                .collect();
            if terms.iter().any(Vec::is_empty) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut pos = vec![0usize; kappa];
            let mut joint = Vec::with_capacity(kappa * basis.dim());
            let mut acc = Complex64::new(0.0, 0.0);
            loop {
                joint.clear();
                let mut prod = Complex64::new(1.0, 0.0);
                for (j, &p) in pos.iter().enumerate() {
                    let (nu, t) = terms[j][p];
                    joint.extend_from_slice(nu.components());
                    prod *= t;
                }
                acc += s.eval_index(&x, &joint)? * prod;
                let mut j = 0;
                loop {
                    if j == kappa {
                        return Ok(acc);
                    }
                    pos[j] += 1;
                    if pos[j] < terms[j].len() {
                        break;
                    }
                    pos[j] = 0;
                    j += 1;
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::build_basis;
    use crate::symbols::{make_lp_partition, make_symbol, Profile, SymbolTable, XFactor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_band(basis: &HermiteBasis, grid: &Arc<GridSpec>, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = SpectralCoeffs::zeros(basis.dim(), basis.cutoff());
        for nu in basis.indices() {
            coeffs.set(&nu, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
        }
        inverse_fht(&coeffs, basis, grid).unwrap()
    }

    #[test]
    fn multiplier_scales_hermite_functions() {
        let basis = build_basis(1, 24, 1.0).unwrap();
        let m = make_symbol("power", &[1.0], 1).unwrap();
        for grid in [basis.grid().clone(), basis.quad_grid().clone()] {
            for k in [0, 5, 24] {
                let nu = MultiIndex::new(vec![k]);
                let f = basis.hermite_on(&nu, &grid).unwrap();
                let out = apply(&OperatorSpec::plain(m.clone(), &basis), &f).unwrap();
                let expected = f.scale(c(1.0 / (1.0 + k as f64)));
                assert!(out.max_abs_diff(&expected).unwrap() < 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn identity_symbol_is_band_projection() {
        let basis = build_basis(2, 8, 1.0).unwrap();
        let f = random_band(&basis, basis.grid(), 3);
        let one = make_symbol("one", &[], 2).unwrap();
        let out = apply(&OperatorSpec::plain(one, &basis), &f).unwrap();
        assert!(out.max_abs_diff(&f).unwrap() < 1e-10);
    }

    #[test]
    fn dyadic_block_drops_lower_shell() {
        let basis = build_basis(1, 16, 1.0).unwrap();
        let m = make_symbol("power", &[0.5], 1).unwrap();
        let f = basis.hermite_on(&MultiIndex::new(vec![7]), basis.grid()).unwrap();
        let out = apply(&OperatorSpec::new(m.clone(), &basis, Variant::DyadicBlock(3)), &f).unwrap();
        assert!(out.max_abs() < 1e-14);
        let out = apply(&OperatorSpec::new(m, &basis, Variant::DyadicBlock(2)), &f).unwrap();
        assert!(out.max_abs() > 0.1);
    }

    #[test]
    fn rejects_multilinear_and_mismatch() {
        let basis = build_basis(1, 8, 1.0).unwrap();
        let f = basis.hermite_on(&MultiIndex::new(vec![1]), basis.grid()).unwrap();
        let ml = Symbol::multilinear_family(Profile::One, XFactor::One, 1, 2).unwrap();
        assert!(apply(&OperatorSpec::plain(ml, &basis), &f).is_err());
        let two = make_symbol("one", &[], 2).unwrap();
        assert!(apply(&OperatorSpec::plain(two, &basis), &f).is_err());
        let m = make_symbol("one", &[], 1).unwrap();
        assert!(apply(&OperatorSpec::new(m, &basis, Variant::DyadicBlock(4)), &f).is_err());
    }

    #[test]
    fn pseudo_paths_agree() {
        // Factorized fast path against the generic pointwise sum.
        let basis = build_basis(1, 20, 1.0).unwrap();
        let fam = Symbol::family(Profile::Mihlin { a: 2.0 }, XFactor::Bounded, 1);
        let generic = Symbol::custom("mihlin-custom", SymbolKind::Pseudo, 1, 1, true, |x, xi| {
            let t = xi[0];
            Complex64::from_polar(1.0, (1.0 + t * t).ln()) * XFactor::Bounded.eval(x)
        })
        .unwrap();
        let f = random_band(&basis, basis.grid(), 9);
        let a = apply(&OperatorSpec::plain(fam, &basis), &f).unwrap();
        let b = apply(&OperatorSpec::plain(generic, &basis), &f).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn spectral_kind_uses_eigenvalues() {
        let basis = build_basis(2, 6, 1.0).unwrap();
        let s = Symbol::custom("lambda", SymbolKind::Spectral, 2, 1, true, |x, l| {
            c(l[0] * (1.0 + 0.1 * x[0].cos()))
        })
        .unwrap();
        let nu = MultiIndex::new(vec![2, 1]);
        let f = basis.hermite_on(&nu, basis.grid()).unwrap();
        let out = apply(&OperatorSpec::plain(s, &basis), &f).unwrap();
        let expected = GridFunction::from_fn(basis.grid().clone(), |x| {
            c(8.0 * (1.0 + 0.1 * x[0].cos()) * crate::hermite::hermite_function(2, x[0]) * crate::hermite::hermite_function(1, x[1]))
        });
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn tabulated_symbol_outside_table_is_an_error() {
        let table = SymbolTable::from_values(1, vec![(vec![0], c(0.3)), (vec![1], c(0.9)), (vec![2], c(0.1))]).unwrap();
        let s = Symbol::table(table);
        let small = build_basis(1, 2, 1.0).unwrap();
        let f = small.hermite_on(&MultiIndex::new(vec![1]), small.grid()).unwrap();
        let out = apply(&OperatorSpec::plain(s.clone(), &small), &f).unwrap();
        assert!(out.max_abs_diff(&f.scale(c(0.9))).unwrap() < 1e-13);
        let big = build_basis(1, 4, 1.0).unwrap();
        let f = big.hermite_on(&MultiIndex::new(vec![4]), big.grid()).unwrap();
        assert!(matches!(apply(&OperatorSpec::plain(s, &big), &f), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn projections() {
        let basis = build_basis(2, 8, 1.0).unwrap();
        let nu = MultiIndex::new(vec![3, 2]);
        let f = basis.hermite_on(&nu, basis.grid()).unwrap();
        let p = spectral_projection(5, &f, &basis).unwrap();
        assert!(p.max_abs_diff(&f).unwrap() < 1e-10);
        let p = spectral_projection(4, &f, &basis).unwrap();
        assert!(p.max_abs() < 1e-10);
        let g = random_band(&basis, basis.grid(), 1);
        let p1 = spectral_projection(3, &g, &basis).unwrap();
        let p2 = spectral_projection(3, &p1, &basis).unwrap();
        assert!(p1.max_abs_diff(&p2).unwrap() < 1e-10);
        assert!(spectral_projection(9, &g, &basis).is_err());
    }

    #[test]
    fn square_function_examples() {
        let basis = build_basis(1, 40, 1.0).unwrap();
        let part = make_lp_partition(6).unwrap();
        // An index whose ⟨ν⟩ sits where a single block weight equals one.
        let nu = (0..=40).find(|&k| {
            let w = part.weights((1.0 + (k * k) as f64).sqrt());
            w.iter().any(|&v| v == 1.0)
        });
        let k = nu.expect("some index sits on a plateau");
        let f = basis.hermite_on(&MultiIndex::new(vec![k]), basis.grid()).unwrap();
        let s = square_function(&f, &part, &basis).unwrap();
        let abs = GridFunction::new(basis.grid().clone(), f.values().iter().map(|v| c(v.norm())).collect()).unwrap();
        assert!(s.max_abs_diff(&abs).unwrap() < 1e-12);
        let zero = GridFunction::zeros(basis.grid().clone());
        assert_eq!(square_function(&zero, &part, &basis).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn multilinear_identity_factorizes() {
        let basis = build_basis(1, 12, 1.0).unwrap();
        let one = Symbol::multilinear_family(Profile::One, XFactor::One, 1, 2).unwrap();
        let f = GridFunction::from_real_fn(basis.grid().clone(), |x| (-x[0] * x[0] / 2.0).exp() * (1.0 + x[0]));
        let g = GridFunction::from_real_fn(basis.grid().clone(), |x| (-(x[0] - 0.5).powi(2)).exp());
        let out = apply_multilinear(&one, &[&f, &g], &basis).unwrap();
        let id = make_symbol("one", &[], 1).unwrap();
        let pf = apply(&OperatorSpec::plain(id.clone(), &basis), &f).unwrap();
        let pg = apply(&OperatorSpec::plain(id, &basis), &g).unwrap();
        assert!(out.max_abs_diff(&pf.mul(&pg).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn multilinear_single_term_and_cap() {
        let basis = build_basis(1, 10, 1.0).unwrap();
        let s = Symbol::multilinear_family(Profile::Power { kappa: 1.0 }, XFactor::Gauss, 1, 2).unwrap();
        let f = basis.hermite_on(&MultiIndex::new(vec![2]), basis.grid()).unwrap();
        let g = basis.hermite_on(&MultiIndex::new(vec![3]), basis.grid()).unwrap();
        let out = apply_multilinear(&s, &[&f, &g], &basis).unwrap();
        let expected = GridFunction::from_fn(basis.grid().clone(), |x| {
            let xv = x[0];
            c((-xv * xv).exp() / 6.0 * crate::hermite::hermite_function(2, xv) * crate::hermite::hermite_function(3, xv))
        });
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-12);
        assert!(matches!(apply_multilinear_with_cap(&s, &[&f, &g], &basis, 100), Err(Error::Sizing { .. })));
    }

    #[test]
    fn separable_multilinear_is_product_of_linear_applies() {
        let basis = build_basis(1, 16, 1.0).unwrap();
        let a = make_symbol("power", &[1.0], 1).unwrap();
        let b = make_symbol("oscillating", &[2.0], 1).unwrap();
        let sep = Symbol::multilinear_separable(XFactor::One, vec![a.clone(), b.clone()]).unwrap();
        // Same symbol without the separable declaration, forcing the joint sum.
        let joint = Symbol::custom("ab", SymbolKind::Multilinear, 1, 2, false, |_, nu| {
            Complex64::new((1.0 + nu[0]).recip(), 0.0) * Complex64::from_polar(1.0, 2.0 * (1.0 + nu[1]).ln())
        })
        .unwrap();
        let f = random_band(&basis, basis.grid(), 5);
        let g = random_band(&basis, basis.grid(), 6);
        let ta = apply(&OperatorSpec::plain(a, &basis), &f).unwrap();
        let tb = apply(&OperatorSpec::plain(b, &basis), &g).unwrap();
        let expected = ta.mul(&tb).unwrap();
        let x = apply_multilinear(&sep, &[&f, &g], &basis).unwrap();
        let y = apply_multilinear(&joint, &[&f, &g], &basis).unwrap();
        assert!(x.max_abs_diff(&expected).unwrap() < 1e-10);
        assert!(y.max_abs_diff(&expected).unwrap() < 1e-10);
    }
}
