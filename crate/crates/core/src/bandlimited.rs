//! The finite Fourier operator `F_c` on [-1, 1] and its truncated inverse
//!
//! ```text
//! F⁻¹_{m,c}[g](y) = Σ_{j ≤ m} μ_j⁻¹ ψ_j(y) ⟨ψ_j, g⟩.
//! ```
//!
//! Inner products are taken on a uniform grid of at least [`OVERSAMPLED_N`]
//! points, after piecewise-linear resampling of the input, with the
//! trapezoid rule plus Gregory end corrections. PSWFs oscillate quickly for
//! large j, so the caller's grid is usually too coarse to integrate against
//! them directly, and the plain trapezoid rule leaves an O(h²) error near
//! 1e-6 that 1/μ_j then amplifies.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{SampledFunction1D, UniformGrid};
use crate::pswf::PswfBasis;
use crate::special::normalized_legendre_series;

/// Size of the internal quadrature grid on [-1, 1].
pub const OVERSAMPLED_N: usize = 1024;

/// Minimum samples per period of `e^{icxy}` on the quadrature grid.
const MIN_SAMPLES_PER_OSCILLATION: f64 = 8.0;

/// Piecewise-linear resampling onto `target_n` uniform nodes of the same
/// interval. Original nodes that coincide with target nodes are reproduced
/// exactly.
pub fn oversample_linear(f: &SampledFunction1D, target_n: usize) -> Result<SampledFunction1D> {
    let n = f.len();
    if target_n < n {
        return invalid(format!("target size {target_n} is smaller than source size {n}"));
    }
    let grid = UniformGrid::new(f.grid.a, f.grid.b, target_n)?;
    let num = (n - 1) as u64;
    let den = (target_n - 1) as u64;
    let values = (0..target_n as u64)
        .map(|k| {
            // node k of the target sits at source position k·num/den; use
            // integer arithmetic so coinciding nodes are hit exactly
            let p = k * num;
            let idx = (p / den) as usize;
            let rem = p % den;
            if rem == 0 {
                f.values[idx]
            } else {
                let t = rem as f64 / den as f64;
                f.values[idx] + (f.values[idx + 1] - f.values[idx]) * t
            }
        })
        .collect();
    Ok(SampledFunction1D { grid, values })
}

fn check_unit_interval(f: &SampledFunction1D) -> Result<()> {
    if f.is_empty() {
        return invalid("empty input");
    }
    if !f.grid.is_interval(-1.0, 1.0) {
        return invalid(format!(
            "expected samples on [-1, 1], got [{}, {}]",
            f.grid.a, f.grid.b
        ));
    }
    Ok(())
}

/// Quadrature grid size used for an input of `n` samples.
fn quadrature_size(n: usize) -> usize {
    n.max(OVERSAMPLED_N)
}

fn check_resolution(c: f64, n_quad: usize) -> Result<()> {
    // period of e^{icxy} in y is at least 2π/c; grid spacing is 2/(n-1)
    let per_period = std::f64::consts::PI * (n_quad - 1) as f64 / c;
    if per_period < MIN_SAMPLES_PER_OSCILLATION {
        return Err(Error::GridTooCoarse(format!(
            "{per_period:.2} samples per oscillation for c = {c} on {n_quad} points"
        )));
    }
    Ok(())
}

/// Quadrature approximation of `F_c[f](x) = ∫ e^{icxy} f(y) dy` at the input
/// nodes.
pub fn apply_fc(basis: &PswfBasis, f: &SampledFunction1D) -> Result<SampledFunction1D> {
    check_unit_interval(f)?;
    let c = basis.c();
    let n_quad = quadrature_size(f.len());
    check_resolution(c, n_quad)?;
    let fine = oversample_linear(f, n_quad)?;
    let ys = fine.grid.nodes();
    let weighted: Vec<Complex64> = fine
        .grid
        .gregory_weights()
        .iter()
        .zip(&fine.values)
        .map(|(w, v)| v * *w)
        .collect();
    let values = f
        .grid
        .nodes()
        .par_iter()
        .map(|&x| {
            ys.iter()
                .zip(&weighted)
                .map(|(&y, &v)| v * Complex64::from_polar(1.0, c * x * y))
                .sum()
        })
        .collect();
    Ok(SampledFunction1D { grid: f.grid, values })
}

fn check_truncation(basis: &PswfBasis, m: usize) -> Result<()> {
    let cap = basis.m_max().min(basis.max_index());
    if m > cap {
        return Err(Error::IndexOutOfRange { index: m, max: cap });
    }
    Ok(())
}

/// `⟨ψ_j, g⟩` for `j = 0..=m` by oversampled quadrature.
pub fn psi_inner_products(basis: &PswfBasis, g: &SampledFunction1D, m: usize) -> Result<Vec<Complex64>> {
    check_unit_interval(g)?;
    if m > basis.max_index() {
        return Err(Error::IndexOutOfRange {
            index: m,
            max: basis.max_index(),
        });
    }
    let n_quad = quadrature_size(g.len());
    check_resolution(basis.c(), n_quad)?;
    let fine = oversample_linear(g, n_quad)?;
    let w = fine.grid.gregory_weights();
    let table = basis.psi_table(m, &fine.grid.nodes())?;
    Ok(table
        .par_iter()
        .map(|psi| {
            psi.iter()
                .zip(&w)
                .zip(&fine.values)
                .map(|((p, w), v)| v * (p * w))
                .sum()
        })
        .collect())
}

/// A finite combination `Σ_j a_j ψ_j`, stored as a complex Legendre series so
/// it can be evaluated anywhere on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PswfExpansion {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PswfExpansion {
    /// Builds `Σ_{j < coeffs.len()} coeffs[j] ψ_j`.
    pub fn from_psi_coefficients(basis: &PswfBasis, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() > basis.max_index() + 1 {
            return Err(Error::IndexOutOfRange {
                index: coeffs.len() - 1,
                max: basis.max_index(),
            });
        }
        let dim = basis.galerkin_dim();
        let mut re = vec![0.0; dim];
        let mut im = vec![0.0; dim];
        for (j, a) in coeffs.iter().enumerate() {
            for (k, b) in basis.legendre_coeffs(j).iter().enumerate() {
                re[k] += a.re * b;
                im[k] += a.im * b;
            }
        }
        Ok(Self { re, im })
    }

    /// Value at `x`; zero outside [-1, 1].
    pub fn eval(&self, x: f64) -> Complex64 {
        if !(-1.0..=1.0).contains(&x) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(
            normalized_legendre_series(&self.re, x),
            normalized_legendre_series(&self.im, x),
        )
    }

    pub fn sample(&self, grid: UniformGrid) -> SampledFunction1D {
        SampledFunction1D::from_fn(grid, |x| self.eval(x))
    }
}

/// Coefficients `μ_j⁻¹ ⟨ψ_j, g⟩` of the truncated inverse for every
/// `j ≤ m`. Prefixes of this vector give the inverses for smaller m.
pub fn inverse_coefficients(basis: &PswfBasis, g: &SampledFunction1D, m: usize) -> Result<Vec<Complex64>> {
    check_truncation(basis, m)?;
    let ip = psi_inner_products(basis, g, m)?;
    Ok(ip.iter().zip(basis.mu()).map(|(a, mu)| a / mu).collect())
}

/// `F⁻¹_{m,c}[g]` as an expansion that can be evaluated at any point.
pub fn invert_fc_expansion(basis: &PswfBasis, g: &SampledFunction1D, m: usize) -> Result<PswfExpansion> {
    let coeffs = inverse_coefficients(basis, g, m)?;
    PswfExpansion::from_psi_coefficients(basis, &coeffs)
}

/// `F⁻¹_{m,c}[g]` sampled on the grid of `g`.
pub fn invert_fc_truncated(basis: &PswfBasis, g: &SampledFunction1D, m: usize) -> Result<SampledFunction1D> {
    let coeffs = inverse_coefficients(basis, g, m)?;
    let table = basis.psi_table(m, &g.grid.nodes())?;
    let values = (0..g.len())
        .map(|i| {
            coeffs
                .iter()
                .zip(&table)
                .map(|(a, psi)| a * psi[i])
                .sum()
        })
        .collect();
    Ok(SampledFunction1D {
        grid: g.grid,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pswf::build_basis;

    #[test]
    fn oversample_examples() {
        let g = UniformGrid::new(0.0, 1.0, 2).unwrap();
        let f = SampledFunction1D::from_real_fn(g, |x| x);
        let up = oversample_linear(&f, 3).unwrap();
        assert_eq!(up.real_parts(), vec![0.0, 0.5, 1.0]);
        assert!(oversample_linear(&up, 2).is_err());
    }

    #[test]
    fn rejects_wrong_interval_and_large_m() {
        let b = build_basis(10.0, 30).unwrap();
        let g = SampledFunction1D::zeros(UniformGrid::new(0.0, 1.0, 16).unwrap());
        assert!(apply_fc(&b, &g).is_err());
        let g = SampledFunction1D::zeros(UniformGrid::new(-1.0, 1.0, 16).unwrap());
        assert!(matches!(
            invert_fc_truncated(&b, &g, 25),
            Err(Error::IndexOutOfRange { max: 24, .. })
        ));
    }

    #[test]
    fn coarse_grid_for_huge_bandwidth() {
        let b = build_basis(450.0, 0).unwrap();
        let g = SampledFunction1D::zeros(UniformGrid::new(-1.0, 1.0, 64).unwrap());
        assert!(matches!(apply_fc(&b, &g), Err(Error::GridTooCoarse(_))));
    }
}
