//! Uniform grids and complex-valued sampled functions on an interval.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `n` uniform nodes `a + k (b - a) / (n - 1)`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("grid needs at least 2 nodes, got {n}"));
        }
        if !a.is_finite() || !b.is_finite() || a >= b {
            return invalid(format!("grid interval [{a}, {b}] must be finite with a < b"));
        }
        Ok(Self { a, b, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.b
        } else {
            self.a + k as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Trapezoid weights with Gregory end corrections through sixth
    /// differences (exact for degree-7 polynomials, O(h⁸) for smooth
    /// integrands). Interior weights stay equal to h. Falls back to the plain
    /// trapezoid rule below 16 nodes.
    pub fn gregory_weights(&self) -> Vec<f64> {
        // ∫ ≈ T - h Σ_k γ_k (∇^k f_n + (-1)^k Δ^k f_0)
        const GAMMA: [f64; 6] = [
            1.0 / 12.0,
            1.0 / 24.0,
            19.0 / 720.0,
            3.0 / 160.0,
            863.0 / 60480.0,
            275.0 / 24192.0,
        ];
        let mut w = self.trapezoid_weights();
        if self.n < 16 {
            return w;
        }
        let h = self.spacing();
        for (idx, g) in GAMMA.iter().enumerate() {
            let k = idx + 1;
            let mut binom = 1.0;
            for i in 0..=k {
                // Δ^k f_0 = Σ_i (-1)^{k-i} C(k,i) f_i, ∇^k f_n = Σ_i (-1)^i C(k,i) f_{n-i}
                let fwd = if (k - i) % 2 == 0 { binom } else { -binom };
                let bwd = if i % 2 == 0 { binom } else { -binom };
                let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
                w[i] -= h * g * sign_k * fwd;
                w[self.n - 1 - i] -= h * g * bwd;
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
        }
        w
    }

    pub fn is_interval(&self, a: f64, b: f64) -> bool {
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        (self.a - a).abs() <= tol && (self.b - b).abs() <= tol
    }

    /// Index of the cell containing `x` and the fractional offset in it.
    /// Returns `None` outside `[a, b]`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= self.a && x <= self.b) {
            return None;
        }
        let pos = (x - self.a) / self.spacing();
        let k = (pos.floor() as usize).min(self.n - 2);
        Some((k, pos - k as f64))
    }
}

/// Complex samples on a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction1D {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
}

impl SampledFunction1D {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return invalid(format!(
                "expected {} samples, got {}",
                grid.n,
                values.len()
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n).map(|k| f(grid.node(k))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// Piecewise-linear interpolation; zero outside the grid interval.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        match self.grid.locate(x) {
            Some((k, frac)) if frac < 1e-12 => self.values[k],
            Some((k, frac)) if frac > 1.0 - 1e-12 => self.values[k + 1],
            Some((k, frac)) => self.values[k] * (1.0 - frac) + self.values[k + 1] * frac,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Trapezoid approximation of the L² norm.
    pub fn l2_norm(&self) -> f64 {
        self.grid
            .trapezoid_weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative L² distance `‖a - b‖ / ‖b‖` restricted to the grid nodes lying in
/// `[lo, hi]`, using trapezoid weights of the grid.
pub fn relative_l2_on(a: &SampledFunction1D, b: &SampledFunction1D, lo: f64, hi: f64) -> f64 {
    let w = a.grid.trapezoid_weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..a.len() {
        let x = a.grid.node(k);
        if x >= lo && x <= hi {
            num += w[k] * (a.values[k] - b.values[k]).norm_sqr();
            den += w[k] * b.values[k].norm_sqr();
        }
    }
    (num / den).sqrt()
}
