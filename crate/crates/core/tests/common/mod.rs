//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerical kernels except to read basis coefficients.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pswf_radon::PswfBasis;

/// Gauss-Legendre nodes and weights on [-1, 1] via the Golub-Welsch
/// eigenproblem (deliberately a different algorithm from the library's).
pub fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Spherical Bessel functions j_0(z), ..., j_{kmax}(z) for z ≥ 0 by
/// backward recurrence, normalized against the closed form of j_0 or j_1.
pub fn spherical_bessel_all(kmax: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if z < 1e-8 {
        out[0] = 1.0;
        if kmax >= 1 {
            out[1] = z / 3.0;
        }
        return out;
    }
    let start = (kmax.max(z as usize) + 40 + (10.0 * z.max(1.0)).sqrt() as usize) + 10;
    let mut above = 0.0f64;
    let mut cur = 1e-280f64;
    let mut vals = vec![0.0; start + 1];
    vals[start] = cur;
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 + 1.0) / z * cur - above;
        above = cur;
        cur = below;
        vals[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            above *= 1e-250;
            cur *= 1e-250;
        }
    }
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    let scale = if j0.abs() >= j1.abs() {
        j0 / vals[0]
    } else {
        j1 / vals[1]
    };
    for k in 0..=kmax {
        out[k] = vals[k] * scale;
    }
    out
}

/// Sum of normalized Legendre series Σ β_k √(k+1/2) P_k(x) by direct
/// three-term recurrence on the unnormalized polynomials.
pub fn legendre_series_direct(beta: &[f64], x: f64) -> f64 {
    let mut p_prev = 1.0;
    let mut p = x;
    let mut s = beta.first().copied().unwrap_or(0.0) * 0.5f64.sqrt();
    if beta.len() > 1 {
        s += beta[1] * 1.5f64.sqrt() * x;
    }
    for k in 2..beta.len() {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
        s += beta[k] * (kf + 0.5).sqrt() * p;
    }
    s
}

/// Applies F_c to ψ_j exactly mode by mode:
/// F_c[P_k](x) = 2 i^k j_k(c x) for the unnormalized Legendre polynomial.
pub fn fc_psi_exact(basis: &PswfBasis, j: usize, x: f64) -> Complex64 {
    let beta = basis.legendre_coeffs(j);
    let z = basis.c() * x.abs();
    let jk = spherical_bessel_all(beta.len(), z);
    let mut re = 0.0;
    let mut im = 0.0;
    for (k, &b) in beta.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        // j_k(-z) = (-1)^k j_k(z)
        let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        let term = b * 2.0 * (k as f64 + 0.5).sqrt() * jk[k] * sign;
        match k % 4 {
            0 => re += term,
            1 => im += term,
            2 => re -= term,
            _ => im -= term,
        }
    }
    Complex64::new(re, im)
}

/// ‖F_c ψ_j − μ_j ψ_j‖ / |μ_j| on [-1, 1] with the exact-mode operator.
pub fn eigen_relation_residual(basis: &PswfBasis, j: usize, nodes: &[f64], weights: &[f64]) -> f64 {
    let mu = basis.mu()[j];
    let beta = basis.legendre_coeffs(j);
    let mut num = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        let psi = legendre_series_direct(beta, x);
        num += w * (fc_psi_exact(basis, j, x) - mu * psi).norm_sqr();
    }
    num.sqrt() / mu.norm()
}

/// Eigenvalues (descending) of the sinc concentration kernel
/// sin(c(x−y)) / (π(x−y)) on [-1, 1], discretized by Gauss-Legendre.
pub fn sinc_kernel_eigenvalues(c: f64, n: usize) -> Vec<f64> {
    let (x, w) = golub_welsch(n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let d = x[i] - x[k];
            let kern = if d == 0.0 {
                c / std::f64::consts::PI
            } else {
                (c * d).sin() / (std::f64::consts::PI * d)
            };
            m[(i, k)] = w[i].sqrt() * kern * w[k].sqrt();
        }
    }
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Relative L² distance between two real sample vectors over indices where
/// `mask` holds.
pub fn rel_l2_masked(a: &[f64], b: &[f64], mask: impl Fn(usize) -> bool) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..a.len() {
        if mask(i) {
            num += (a[i] - b[i]).powi(2);
            den += b[i].powi(2);
        }
    }
    (num / den).sqrt()
}
