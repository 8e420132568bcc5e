//! Prolate spheroidal wave functions ψ_j on [-1, 1] for a bandwidth `c`, and
//! the eigenvalues μ_j of the finite Fourier operator
//! `F_c[f](x) = ∫_{-1}^{1} e^{icxy} f(y) dy`.
//!
//! The functions are expanded in normalized Legendre polynomials
//! `P̄_k = √(k + 1/2) P_k`. In that basis the prolate differential operator
//! `-(d/dx)(1 - x²)(d/dx) + c²x²` is a symmetric pentadiagonal matrix that
//! splits into two tridiagonal blocks (even and odd k). Eigenvectors of the
//! blocks give the expansion coefficients; ascending eigenvalues χ_j order
//! the functions so that ψ_j has exactly j zeros in (-1, 1).
//!
//! The eigenvalue μ_0 comes from `F_c[ψ_0](0) = ∫ψ_0`, which is exact in the
//! Legendre basis. Higher eigenvalues follow from the ratio identity
//!
//! ```text
//! μ_{j+1} / μ_j = ⟨ψ_{j+1}, ψ_j'⟩ / (i c ⟨x ψ_{j+1}, ψ_j⟩)
//! ```
//!
//! whose right-hand side involves only O(1) inner products, so the relative
//! accuracy of μ_j does not degrade as |μ_j| approaches machine epsilon.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::refine_tridiagonal_eigenpair;
use crate::error::{invalid, Error, Result};
use crate::special::{norm_legendre_a, normalized_legendre_series, normalized_legendre_values};

/// Required magnitude of the trailing Legendre coefficient of ψ_{max_index}.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// Ratio `|μ_j| / |μ_0|` below which 1/μ_j amplification exceeds double
/// precision headroom.
pub const USABLE_MU_RATIO: f64 = 1e-14;

const MAX_GROWTH_ROUNDS: usize = 12;

const CACHE_VERSION: u32 = 1;

const REFINE_ITERATIONS: usize = 3;

/// PSWF family for a fixed bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct PswfBasis {
    c: f64,
    max_index: usize,
    /// `legendre_coeffs[j][k]` is the coefficient of P̄_k in ψ_j.
    legendre_coeffs: Vec<Vec<f64>>,
    chi: Vec<f64>,
    mu: Vec<Complex64>,
}

/// Diagonal and off-diagonal of one parity block of the prolate operator.
fn prolate_block(c: f64, parity: usize, size: usize) -> (Vec<f64>, Vec<f64>) {
    let c2 = c * c;
    let diag = (0..size)
        .map(|p| {
            let k = (2 * p + parity) as f64;
            k * (k + 1.0) + c2 * (2.0 * k * (k + 1.0) - 1.0) / ((2.0 * k + 3.0) * (2.0 * k - 1.0))
        })
        .collect();
    let off = (0..size.saturating_sub(1))
        .map(|p| {
            let k = (2 * p + parity) as f64;
            c2 * (k + 1.0) * (k + 2.0) / ((2.0 * k + 3.0) * ((2.0 * k + 1.0) * (2.0 * k + 5.0)).sqrt())
        })
        .collect();
    (diag, off)
}

/// Smallest `count` eigenpairs of a symmetric tridiagonal matrix, ascending.
fn lowest_eigenpairs(diag: &[f64], off: &[f64], count: usize) -> Vec<(f64, Vec<f64>)> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
    }
    for (i, &e) in off.iter().enumerate() {
        m[(i, i + 1)] = e;
        m[(i + 1, i)] = e;
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(count)
        .map(|i| {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            // the dense solver leaves O(eps·‖T‖) absolute error in each
            // component; refinement restores accuracy in the small components
            // that matter once |μ_j| is tiny
            refine_tridiagonal_eigenpair(diag, off, eig.eigenvalues[i], &v, REFINE_ITERATIONS)
        })
        .collect()
}

/// ⟨x ψ_a, ψ_b⟩ from Legendre coefficients.
fn inner_x(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut s = 0.0;
    for k in 0..n {
        if a[k] == 0.0 {
            continue;
        }
        let mut xb = 0.0;
        if k + 1 < n {
            xb += norm_legendre_a(k) * b[k + 1];
        }
        if k >= 1 {
            xb += norm_legendre_a(k - 1) * b[k - 1];
        }
        s += a[k] * xb;
    }
    s
}

/// ⟨ψ_a, ψ_b'⟩ from Legendre coefficients, using
/// `P̄_k' = Σ_{l<k, k-l odd} √((2k+1)(2l+1)) P̄_l`.
fn inner_deriv(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut tail = [0.0f64; 2];
    let mut s = 0.0;
    for l in (0..n).rev() {
        let sl = tail[(l + 1) % 2];
        s += a[l] * (2.0 * l as f64 + 1.0).sqrt() * sl;
        tail[l % 2] += (2.0 * l as f64 + 1.0).sqrt() * b[l];
    }
    s
}

/// μ_0 from `μ_0 ψ_0(0) = ∫ψ_0 = √2 β_0`.
fn mu_zero(coeffs: &[f64]) -> Result<Complex64> {
    let at_zero = normalized_legendre_series(coeffs, 0.0);
    if at_zero.abs() < 1e-300 || coeffs.is_empty() {
        return Err(Error::Degenerate(0));
    }
    Ok(Complex64::new(
        std::f64::consts::SQRT_2 * coeffs[0] / at_zero,
        0.0,
    ))
}

/// μ_j / μ_{j-1} for consecutive eigenfunctions; phase is fixed to i.
fn mu_ratio(c: f64, prev: &[f64], cur: &[f64], j: usize) -> Result<f64> {
    let d = inner_deriv(cur, prev);
    let x = inner_x(cur, prev);
    if x.abs() < 1e-300 {
        return Err(Error::Degenerate(j));
    }
    // μ_j/μ_{j-1} = d / (i c x) = i · (-d / (c x))
    let r = -d / (c * x);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::EigenNonConvergence {
            index: j,
            reason: format!("eigenvalue ratio has unexpected phase (value {r})"),
        });
    }
    // for large c the true ratio lies within an ulp of 1; the inner products
    // can round it above 1, so clamp to keep the ordering strict
    Ok(r.min(1.0 - f64::EPSILON))
}

/// i^j exactly.
pub fn i_pow(j: usize) -> Complex64 {
    match j % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Eigenvalue μ_j of F_c for a basis under construction, given Legendre
/// coefficients of ψ_0, …, ψ_j. Magnitude from the ratio chain, phase i^j.
pub fn compute_mu(c: f64, legendre_coeffs: &[Vec<f64>], j: usize) -> Result<Complex64> {
    if j >= legendre_coeffs.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: legendre_coeffs.len().saturating_sub(1),
        });
    }
    let mut mag = mu_zero(&legendre_coeffs[0])?.re;
    for i in 1..=j {
        mag *= mu_ratio(c, &legendre_coeffs[i - 1], &legendre_coeffs[i], i)?;
    }
    Ok(i_pow(j) * mag)
}

/// Builds ψ_0, …, ψ_{max_index} for bandwidth `c`.
pub fn build_basis(c: f64, max_index: usize) -> Result<PswfBasis> {
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("bandwidth c must be positive and finite, got {c}"));
    }
    let mut dim = 2 * max_index + c.ceil() as usize + 40;
    for _ in 0..MAX_GROWTH_ROUNDS {
        if let Some(coeffs_chi) = try_galerkin(c, max_index, dim) {
            let (legendre_coeffs, chi) = coeffs_chi;
            let mut mu = Vec::with_capacity(max_index + 1);
            let mut mag = mu_zero(&legendre_coeffs[0])?.re;
            mu.push(Complex64::new(mag, 0.0));
            for j in 1..=max_index {
                mag *= mu_ratio(c, &legendre_coeffs[j - 1], &legendre_coeffs[j], j)?;
                mu.push(i_pow(j) * mag);
            }
            return Ok(PswfBasis {
                c,
                max_index,
                legendre_coeffs,
                chi,
                mu,
            });
        }
        dim += dim / 2;
    }
    Err(Error::EigenNonConvergence {
        index: max_index,
        reason: format!("trailing Legendre coefficient above {TAIL_TOLERANCE} at dimension {dim}"),
    })
}

type Galerkin = (Vec<Vec<f64>>, Vec<f64>);

/// One Galerkin solve at dimension `dim`; `None` when the tail criterion fails.
fn try_galerkin(c: f64, max_index: usize, dim: usize) -> Option<Galerkin> {
    let mut pairs: Vec<Option<(f64, Vec<f64>)>> = vec![None; max_index + 1];
    for parity in 0..2 {
        let size = (dim - parity).div_ceil(2);
        let count = if max_index < parity {
            0
        } else {
            (max_index - parity) / 2 + 1
        };
        if count == 0 {
            continue;
        }
        let (diag, off) = prolate_block(c, parity, size);
        for (n, (chi, v)) in lowest_eigenpairs(&diag, &off, count).into_iter().enumerate() {
            let mut coeffs = vec![0.0; 2 * size + parity];
            for (p, &val) in v.iter().enumerate() {
                coeffs[2 * p + parity] = val;
            }
            coeffs.truncate(dim);
            // sign convention ψ_j(1) > 0, with P̄_k(1) = √(k + 1/2)
            let at_one: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, b)| b * (k as f64 + 0.5).sqrt())
                .sum();
            if at_one < 0.0 {
                coeffs.iter_mut().for_each(|b| *b = -*b);
            }
            pairs[2 * n + parity] = Some((chi, coeffs));
        }
    }
    let (coeffs, chi): (Vec<_>, Vec<_>) = pairs
        .into_iter()
        .map(|p| {
            let (chi, v) = p.expect("every index filled by its parity block");
            (v, chi)
        })
        .unzip();
    // ψ_{max_index} and its neighbour of the other parity decay slowest
    let lo = max_index.saturating_sub(1);
    for v in &coeffs[lo..] {
        let last = v.iter().rev().find(|b| **b != 0.0).copied().unwrap_or(0.0);
        if last.abs() > TAIL_TOLERANCE {
            return None;
        }
    }
    Some((coeffs, chi))
}

impl PswfBasis {
    /// Builds a basis that reaches past the usable range, so that
    /// [`PswfBasis::m_max`] is the true cap for this bandwidth.
    pub fn for_bandwidth(c: f64) -> Result<Self> {
        let mut max_index = (2.0 * c / std::f64::consts::PI).ceil() as usize + 24;
        loop {
            let basis = build_basis(c, max_index)?;
            if basis.exhausts_usable_range() {
                return Ok(basis);
            }
            max_index += 16;
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn galerkin_dim(&self) -> usize {
        self.legendre_coeffs.first().map_or(0, Vec::len)
    }

    pub fn legendre_coeffs(&self, j: usize) -> &[f64] {
        &self.legendre_coeffs[j]
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    /// Largest j with |μ_j| ≥ 1e-14·|μ_0| among the computed indices.
    pub fn m_max(&self) -> usize {
        let floor = USABLE_MU_RATIO * self.mu[0].norm();
        self.mu
            .iter()
            .rposition(|m| m.norm() >= floor)
            .unwrap_or(0)
    }

    /// True when the computed indices run past the usable range.
    pub fn exhausts_usable_range(&self) -> bool {
        self.m_max() < self.max_index
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.max_index {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.max_index,
            });
        }
        Ok(())
    }

    /// ψ_j at a single point, no range checks.
    pub(crate) fn psi_unchecked(&self, j: usize, x: f64) -> f64 {
        normalized_legendre_series(&self.legendre_coeffs[j], x)
    }

    pub fn eval_psi(&self, j: usize, xs: &[f64]) -> Result<Vec<f64>> {
        self.check_index(j)?;
        xs.iter()
            .map(|&x| {
                if x.abs() > 1.0 + 1e-12 {
                    Err(Error::OutsideInterval(x))
                } else {
                    Ok(self.psi_unchecked(j, x.clamp(-1.0, 1.0)))
                }
            })
            .collect()
    }

    /// Rows ψ_0, …, ψ_m sampled at `xs`, sharing one Legendre recurrence per
    /// point.
    pub fn psi_table(&self, m: usize, xs: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_index(m)?;
        if let Some(&x) = xs.iter().find(|x| x.abs() > 1.0 + 1e-12) {
            return Err(Error::OutsideInterval(x));
        }
        let dim = self.galerkin_dim();
        let columns: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&x| {
                let p = normalized_legendre_values(dim, x.clamp(-1.0, 1.0));
                (0..=m)
                    .map(|j| {
                        let beta = &self.legendre_coeffs[j];
                        // only the matching parity contributes
                        (j % 2..dim).step_by(2).map(|k| beta[k] * p[k]).sum()
                    })
                    .collect()
            })
            .collect();
        Ok((0..=m)
            .map(|j| columns.iter().map(|col| col[j]).collect())
            .collect())
    }

    pub fn to_cache_bytes(&self) -> Vec<u8> {
        let blob = CacheBlob {
            version: CACHE_VERSION,
            c: self.c,
            max_index: self.max_index,
            legendre_coeffs: self.legendre_coeffs.clone(),
            chi: self.chi.clone(),
            mu: self.mu.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_vec(&blob).expect("cache blob serializes")
    }

    /// Decodes a cache blob, validating its shape and values.
    pub fn from_cache_bytes(bytes: &[u8]) -> Result<Self> {
        let blob: CacheBlob = serde_json::from_slice(bytes)?;
        if blob.version != CACHE_VERSION {
            return invalid(format!("unsupported cache version {}", blob.version));
        }
        if !(blob.c > 0.0) || !blob.c.is_finite() {
            return invalid("cache bandwidth must be positive");
        }
        let count = blob.max_index.checked_add(1).ok_or_else(|| {
            Error::InvalidArgument("cache max_index overflows".into())
        })?;
        if blob.legendre_coeffs.len() != count || blob.chi.len() != count || blob.mu.len() != count {
            return invalid("cache arrays disagree with max_index");
        }
        let dim = blob.legendre_coeffs[0].len();
        if dim == 0 || blob.legendre_coeffs.iter().any(|v| v.len() != dim) {
            return invalid("cache coefficient vectors have inconsistent length");
        }
        let finite = blob
            .legendre_coeffs
            .iter()
            .flatten()
            .chain(&blob.chi)
            .chain(blob.mu.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return invalid("cache contains non-finite values");
        }
        if blob.mu[0][0].abs() == 0.0 {
            return invalid("cache has zero leading eigenvalue");
        }
        Ok(PswfBasis {
            c: blob.c,
            max_index: blob.max_index,
            legendre_coeffs: blob.legendre_coeffs,
            chi: blob.chi,
            mu: blob.mu.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CacheBlob {
    version: u32,
    c: f64,
    max_index: usize,
    legendre_coeffs: Vec<Vec<f64>>,
    chi: Vec<f64>,
    mu: Vec<[f64; 2]>,
}

/// File name of the cache entry for `(c, max_index)`.
pub fn cache_path(dir: &Path, c: f64, max_index: usize) -> PathBuf {
    dir.join(format!("pswf_c{:016x}_m{max_index}.json", c.to_bits()))
}

/// Loads `(c, max_index)` from `dir` or builds and stores it.
pub fn build_basis_cached(dir: &Path, c: f64, max_index: usize) -> Result<PswfBasis> {
    let path = cache_path(dir, c, max_index);
    if let Ok(bytes) = std::fs::read(&path) {
        let basis = PswfBasis::from_cache_bytes(&bytes)?;
        if basis.c.to_bits() == c.to_bits() && basis.max_index == max_index {
            return Ok(basis);
        }
    }
    let basis = build_basis(c, max_index)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(&path, basis.to_cache_bytes())?;
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gauss_legendre;

    #[test]
    fn rejects_bad_bandwidth() {
        assert!(build_basis(0.0, 3).is_err());
        assert!(build_basis(-1.0, 3).is_err());
        assert!(build_basis(f64::NAN, 3).is_err());
    }

    #[test]
    fn lowest_function_is_even_and_nodeless() {
        let b = build_basis(10.0, 0).unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
        let v = b.eval_psi(0, &xs).unwrap();
        assert!(v.iter().all(|&y| y > 0.0));
        for i in 0..=200 {
            assert!((v[i] - v[400 - i]).abs() < 1e-14);
        }
        let c = b.legendre_coeffs(0);
        assert!(c.iter().skip(1).step_by(2).all(|&x| x == 0.0));
        assert!(b.mu()[0].im == 0.0 && b.mu()[0].re > 0.0);
    }

    #[test]
    fn opposite_parity_functions_are_orthogonal() {
        for &c in &[0.5, 4.0, 10.0, 25.0] {
            let b = build_basis(c, 1).unwrap();
            let (x, w) = gauss_legendre(200);
            let p0 = b.eval_psi(0, &x).unwrap();
            let p1 = b.eval_psi(1, &x).unwrap();
            let ip: f64 = (0..x.len()).map(|i| w[i] * p0[i] * p1[i]).sum();
            assert!(ip.abs() < 1e-15);
        }
    }

    #[test]
    fn eval_errors() {
        let b = build_basis(10.0, 3).unwrap();
        assert!(matches!(b.eval_psi(4, &[0.0]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(b.eval_psi(1, &[1.5]), Err(Error::OutsideInterval(_))));
        assert_eq!(b.eval_psi(1, &[0.0]).unwrap()[0], 0.0);
        let v = b.eval_psi(0, &[0.3, -0.3]).unwrap();
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn compute_mu_matches_built_values() {
        let b = build_basis(10.0, 12).unwrap();
        for j in [0, 1, 5, 12] {
            let m = compute_mu(10.0, &b.legendre_coeffs, j).unwrap();
            assert_eq!(m, b.mu()[j]);
        }
        assert!(compute_mu(10.0, &b.legendre_coeffs, 13).is_err());
        let zero = vec![vec![0.0; 8]];
        assert!(matches!(compute_mu(10.0, &zero, 0), Err(Error::Degenerate(0))));
    }

    #[test]
    fn tail_criterion_holds() {
        let b = build_basis(10.0, 30).unwrap();
        let last = b.legendre_coeffs(30);
        let tail = last.iter().rev().find(|v| **v != 0.0).unwrap();
        assert!(tail.abs() <= TAIL_TOLERANCE);
    }

    #[test]
    fn cache_round_trip_is_bit_identical() {
        let b = build_basis(10.0, 20).unwrap();
        let bytes = b.to_cache_bytes();
        let back = PswfBasis::from_cache_bytes(&bytes).unwrap();
        assert_eq!(b, back);
        let dir = tempfile::tempdir().unwrap();
        let first = build_basis_cached(dir.path(), 10.0, 20).unwrap();
        let second = build_basis_cached(dir.path(), 10.0, 20).unwrap();
        assert_eq!(first, second);
        assert_eq!(first, b);
    }

    #[test]
    fn cache_rejects_malformed() {
        assert!(PswfBasis::from_cache_bytes(b"").is_err());
        assert!(PswfBasis::from_cache_bytes(b"{\"version\":1}").is_err());
        let bad = br#"{"version":1,"c":10.0,"max_index":1,"legendre_coeffs":[[1.0]],"chi":[1.0,2.0],"mu":[[1.0,0.0],[0.0,1.0]]}"#;
        assert!(PswfBasis::from_cache_bytes(bad).is_err());
        let bad_version = br#"{"version":9,"c":10.0,"max_index":0,"legendre_coeffs":[[1.0]],"chi":[1.0],"mu":[[1.0,0.0]]}"#;
        assert!(PswfBasis::from_cache_bytes(bad_version).is_err());
    }
}
