//! Fourier–Hermite analysis/synthesis and a grid-based continuous Fourier transform.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hermite::{GridFunction, GridKind, GridSpec, HermiteBasis, MultiIndex};

/// Dense Fourier–Hermite coefficients on the box `0 ≤ ν_j ≤ N`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    n: usize,
    cutoff: usize,
    data: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn zeros(n: usize, cutoff: usize) -> Self {
        let len = (cutoff + 1).pow(n as u32);
        SpectralCoeffs { n, cutoff, data: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_dense(n: usize, cutoff: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != (cutoff + 1).pow(n as u32) {
            return Err(Error::InvalidArgument("coefficient tensor has the wrong length".into()));
        }
        Ok(SpectralCoeffs { n, cutoff, data })
    }

    /// Unit coefficient at `nu`.
    pub fn unit(n: usize, cutoff: usize, nu: &MultiIndex) -> Result<Self> {
        let mut c = Self::zeros(n, cutoff);
        c.set(nu, Complex64::new(1.0, 0.0))?;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dense(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dense_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn offset(&self, nu: &MultiIndex) -> Result<usize> {
        if nu.dim() != self.n {
            return Err(Error::InvalidArgument(format!("multi-index {nu} has the wrong dimension")));
        }
        if nu.max_component() > self.cutoff {
            return Err(Error::OutOfRange {
                index: nu.components().to_vec(),
                range: format!("0..={} per axis", self.cutoff),
            });
        }
        Ok(nu.components().iter().fold(0, |acc, &k| acc * (self.cutoff + 1) + k))
    }

    pub fn index_at(&self, mut offset: usize) -> MultiIndex {
        let mut c = vec![0; self.n];
        for ax in (0..self.n).rev() {
            c[ax] = offset % (self.cutoff + 1);
            offset /= self.cutoff + 1;
        }
        MultiIndex::new(c)
    }

    pub fn get(&self, nu: &MultiIndex) -> Result<Complex64> {
        Ok(self.data[self.offset(nu)?])
    }

    pub fn set(&mut self, nu: &MultiIndex, v: Complex64) -> Result<()> {
        let o = self.offset(nu)?;
        self.data[o] = v;
        Ok(())
    }

    /// `(ν, c_ν)` over the whole box.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        self.data.iter().enumerate().map(|(i, v)| (self.index_at(i), *v))
    }

    /// Multiply every coefficient by `w(ν)`.
    pub fn map_indexed(&self, w: impl Fn(&MultiIndex, Complex64) -> Complex64 + Sync) -> SpectralCoeffs {
        let data = self
            .data
            .par_iter()
            .enumerate()
            .map(|(i, v)| w(&self.index_at(i), *v))
            .collect();
        SpectralCoeffs { n: self.n, cutoff: self.cutoff, data }
    }

    /// `Σ |c_ν|²`.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ c_ν conj(d_ν)`.
    pub fn inner(&self, other: &SpectralCoeffs) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn max_abs_diff(&self, other: &SpectralCoeffs) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Contract one axis of a row-major tensor with a real `rows × shape[axis]` matrix.
pub(crate) fn contract_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    mat: &[f64],
    rows: usize,
) -> Vec<Complex64> {
    let len = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    debug_assert_eq!(mat.len(), rows * len);
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    out.par_chunks_mut(inner).enumerate().for_each(|(ar, chunk)| {
        let a = ar / rows;
        let r = ar % rows;
        let mrow = &mat[r * len..(r + 1) * len];
        for (l, &m) in mrow.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let src = &data[(a * len + l) * inner..(a * len + l + 1) * inner];
            for (o, s) in chunk.iter_mut().zip(src) {
                *o += s * m;
            }
        }
    });
    out
}

fn check_basis_grid(grid: &GridSpec, basis: &HermiteBasis) -> Result<()> {
    if grid.dim() != basis.dim() {
        return Err(Error::GridMismatch(format!(
            "grid of dimension {} for a basis of dimension {}",
            grid.dim(),
            basis.dim()
        )));
    }
    Ok(())
}

/// Fourier–Hermite coefficients `(f, φ_ν)` for `ν_j ≤ N`.
///
/// On the basis quadrature grid this is Gauss–Hermite quadrature, exact on the
/// span. On a uniform grid the trapezoidal rule is used, which is spectrally
/// accurate for functions negligible at the grid boundary.
pub fn forward_fht(f: &GridFunction, basis: &HermiteBasis) -> Result<SpectralCoeffs> {
    let grid = f.grid();
    check_basis_grid(grid, basis)?;
    if grid.kind() == GridKind::GaussHermite && **grid != **basis.quad_grid() {
        return Err(Error::GridMismatch("Gauss–Hermite grid does not match the basis quadrature".into()));
    }
    let tables = basis.tables_for(grid);
    let rows = basis.cutoff() + 1;
    let mut shape = grid.shape();
    let mut data = f.values().to_vec();
    for ax in 0..basis.dim() {
        let len = shape[ax];
        let w = grid.axis_weights(ax);
        let mut mat = vec![0.0; rows * len];
        for k in 0..rows {
            let row = tables[ax].row(k);
            for i in 0..len {
                mat[k * len + i] = row[i] * w[i];
            }
        }
        data = contract_axis(&data, &shape, ax, &mat, rows);
        shape[ax] = rows;
    }
    SpectralCoeffs::from_dense(basis.dim(), basis.cutoff(), data)
}

/// Synthesis `Σ_ν c_ν φ_ν` on an arbitrary tensor grid.
pub fn inverse_fht(c: &SpectralCoeffs, basis: &HermiteBasis, grid: &Arc<GridSpec>) -> Result<GridFunction> {
    check_basis_grid(grid, basis)?;
    if c.dim() != basis.dim() {
        return Err(Error::InvalidArgument("coefficient dimension differs from the basis".into()));
    }
    if c.cutoff() > basis.cutoff() {
        return Err(Error::OutOfRange {
            index: vec![c.cutoff()],
            range: format!("basis cutoff {}", basis.cutoff()),
        });
    }
    let tables = basis.tables_for(grid);
    let cols = c.cutoff() + 1;
    let mut shape = vec![cols; c.dim()];
    let mut data = c.dense().to_vec();
    for ax in 0..c.dim() {
        let len = grid.axis_nodes(ax).len();
        let mut mat = vec![0.0; len * cols];
        for k in 0..cols {
            let row = tables[ax].row(k);
            for i in 0..len {
                mat[i * cols + k] = row[i];
            }
        }
        data = contract_axis(&data, &shape, ax, &mat, len);
        shape[ax] = len;
    }
    GridFunction::new(grid.clone(), data)
}

/// `|‖f‖₂² − Σ|f̂(ν)|²|` with the norm taken by the grid quadrature.
pub fn plancherel_defect(f: &GridFunction, basis: &HermiteBasis) -> Result<f64> {
    let c = forward_fht(f, basis)?;
    let energy = f.inner(f)?.re;
    Ok((energy - c.norm_sq()).abs())
}

/// Output of [`continuous_ft`].
#[derive(Debug, Clone)]
pub struct FourierSamples {
    pub function: GridFunction,
    /// Set when the input is not below `1e-12` of its maximum on the grid boundary.
    pub decay_warning: bool,
}

/// Relative boundary level above which [`continuous_ft`] raises its warning flag.
pub const DECAY_TOLERANCE: f64 = 1e-12;

/// Trapezoidal approximation of `F f(ξ) = ∫ e^{−2πi x·ξ} f(x) dx` on the dual grid.
///
/// For an axis with `M` nodes `x_j = x₀ + j h`, the dual nodes are
/// `ξ_m = (m − ⌊M/2⌋)/(M h)` and `F f(ξ_m) = h e^{−2πi x₀ ξ_m} Σ_j f_j e^{−2πi j (m−⌊M/2⌋)/M}`.
pub fn continuous_ft(samples: &GridFunction) -> Result<FourierSamples> {
    let grid = samples.grid();
    if grid.kind() != GridKind::Uniform {
        return Err(Error::InvalidArgument("continuous_ft needs a uniform grid".into()));
    }
    let shape = grid.shape();
    let dim = grid.dim();
    let decay_warning = boundary_level(samples) > DECAY_TOLERANCE;

    let mut data = samples.values().to_vec();
    let mut dual_axes = Vec::with_capacity(dim);
    let mut planner = FftPlanner::<f64>::new();
    for ax in 0..dim {
        let m = shape[ax];
        let h = grid.spacing(ax).unwrap();
        let x0 = grid.axis_nodes(ax)[0];
        let c = (m / 2) as f64;
        let mf = m as f64;
        let dual: Vec<f64> = (0..m).map(|j| (j as f64 - c) / (mf * h)).collect();
        let pre: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 * c / mf)).collect();
        let post: Vec<Complex64> = dual.iter().map(|xi| Complex64::from_polar(h, -2.0 * PI * x0 * xi)).collect();
        let fft = planner.plan_fft_forward(m);

        let inner: usize = shape[ax + 1..].iter().product();
        let outer: usize = shape[..ax].iter().product();
        let lines: Vec<Vec<Complex64>> = (0..outer * inner)
            .into_par_iter()
            .map(|li| {
                let (a, b) = (li / inner, li % inner);
                let mut line: Vec<Complex64> =
                    (0..m).map(|j| data[(a * m + j) * inner + b] * pre[j]).collect();
                fft.process(&mut line);
                line.iter_mut().zip(&post).for_each(|(v, p)| *v *= p);
                line
            })
            .collect();
        for (li, line) in lines.into_iter().enumerate() {
            let (a, b) = (li / inner, li % inner);
            for (j, v) in line.into_iter().enumerate() {
                data[(a * m + j) * inner + b] = v;
            }
        }
        dual_axes.push(dual);
    }
    let dual_grid = Arc::new(GridSpec::uniform_axes(dual_axes)?);
    Ok(FourierSamples { function: GridFunction::new(dual_grid, data)?, decay_warning })
}

/// Largest `|f|` on the grid boundary relative to the overall maximum.
fn boundary_level(f: &GridFunction) -> f64 {
    let grid = f.grid();
    let shape = grid.shape();
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let edge = (0..grid.len())
        .filter(|&i| {
            grid.unravel(i)
                .iter()
                .zip(&shape)
                .any(|(&j, &m)| j == 0 || j + 1 == m)
        })
        .map(|i| f.values()[i].norm())
        .fold(0.0, f64::max);
    edge / peak
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{build_basis, hermite_function};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn forward_of_hermite_function_is_unit_vector() {
        let b = build_basis(1, 12, 1.0).unwrap();
        let nu = MultiIndex::new(vec![5]);
        let f = b.hermite_on(&nu, b.quad_grid()).unwrap();
        let coeffs = forward_fht(&f, &b).unwrap();
        for (idx, v) in coeffs.iter() {
            let target = if idx == nu { 1.0 } else { 0.0 };
            assert!((v - c(target)).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_combination_and_zero() {
        let b = build_basis(1, 6, 1.0).unwrap();
        let g = b.quad_grid().clone();
        let f = GridFunction::from_real_fn(g.clone(), |x| hermite_function(0, x[0]) + 2.0 * hermite_function(3, x[0]));
        let co = forward_fht(&f, &b).unwrap();
        assert!((co.get(&MultiIndex::new(vec![0])).unwrap() - c(1.0)).norm() < 1e-10);
        assert!((co.get(&MultiIndex::new(vec![3])).unwrap() - c(2.0)).norm() < 1e-10);
        let z = forward_fht(&GridFunction::zeros(g), &b).unwrap();
        assert_eq!(z.norm_sq(), 0.0);
    }

    #[test]
    fn inverse_of_unit_vector_is_hermite_function() {
        let b = build_basis(2, 5, 1.0).unwrap();
        let nu = MultiIndex::new(vec![2, 3]);
        let co = SpectralCoeffs::unit(2, 5, &nu).unwrap();
        let f = inverse_fht(&co, &b, b.grid()).unwrap();
        let direct = b.hermite_on(&nu, b.grid()).unwrap();
        assert!(f.max_abs_diff(&direct).unwrap() < 1e-14);
        let zero = inverse_fht(&SpectralCoeffs::zeros(2, 5), &b, b.grid()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn uniform_grid_analysis_matches_quadrature() {
        let b = build_basis(1, 20, 1.0).unwrap();
        let nu = MultiIndex::new(vec![17]);
        let f = b.hermite_on(&nu, b.grid()).unwrap();
        let co = forward_fht(&f, &b).unwrap();
        assert!((co.get(&nu).unwrap() - c(1.0)).norm() < 1e-12);
        assert!(co.norm_sq() - 1.0 < 1e-12);
    }

    #[test]
    fn plancherel_examples() {
        let b = build_basis(1, 10, 1.0).unwrap();
        let inside = b.hermite_on(&MultiIndex::new(vec![7]), b.quad_grid()).unwrap();
        assert!(plancherel_defect(&inside, &b).unwrap() < 1e-10);
        let outside = b.hermite_on(&MultiIndex::new(vec![12]), b.grid()).unwrap();
        assert!((plancherel_defect(&outside, &b).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cutoff_exceeded_is_rejected() {
        let b = build_basis(1, 4, 1.0).unwrap();
        let co = SpectralCoeffs::zeros(1, 6);
        assert!(matches!(inverse_fht(&co, &b, b.grid()), Err(Error::OutOfRange { .. })));
        let other = build_basis(1, 5, 1.0).unwrap();
        let f = GridFunction::zeros(other.quad_grid().clone());
        assert!(matches!(forward_fht(&f, &b), Err(Error::GridMismatch(_))));
    }

    fn gaussian_grid() -> Arc<GridSpec> {
        Arc::new(GridSpec::uniform_from(1, -8.0, 16.0 / 256.0, 256).unwrap())
    }

    #[test]
    fn gaussian_is_self_dual() {
        let f = GridFunction::from_real_fn(gaussian_grid(), |x| (-PI * x[0] * x[0]).exp());
        let out = continuous_ft(&f).unwrap();
        assert!(!out.decay_warning);
        let g = out.function.grid().clone();
        for (i, v) in out.function.values().iter().enumerate() {
            let xi = g.point(i)[0];
            assert!((v - c((-PI * xi * xi).exp())).norm() < 1e-10, "xi={xi}");
        }
    }

    #[test]
    fn shift_theorem() {
        let f = GridFunction::from_real_fn(gaussian_grid(), |x| (-PI * (x[0] - 1.0).powi(2)).exp());
        let out = continuous_ft(&f).unwrap();
        let g = out.function.grid().clone();
        for (i, v) in out.function.values().iter().enumerate() {
            let xi = g.point(i)[0];
            let target = Complex64::from_polar((-PI * xi * xi).exp(), -2.0 * PI * xi);
            assert!((v - target).norm() < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_transform_and_warning() {
        let grid = Arc::new(GridSpec::uniform_from(2, -8.0, 16.0 / 128.0, 128).unwrap());
        let f = GridFunction::from_real_fn(grid.clone(), |x| (-PI * (x[0] * x[0] + x[1] * x[1])).exp());
        let out = continuous_ft(&f).unwrap();
        let g = out.function.grid().clone();
        for (i, v) in out.function.values().iter().enumerate() {
            let p = g.point(i);
            assert!((v - c((-PI * (p[0] * p[0] + p[1] * p[1])).exp())).norm() < 1e-10);
        }
        let wide = GridFunction::from_real_fn(grid, |x| (-0.01 * x[0] * x[0]).exp());
        assert!(continuous_ft(&wide).unwrap().decay_warning);
        let b = build_basis(1, 3, 1.0).unwrap();
        assert!(continuous_ft(&GridFunction::zeros(b.quad_grid().clone())).is_err());
    }
}
