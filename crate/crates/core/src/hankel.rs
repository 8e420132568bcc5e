//! Hankel transform of order ν,
//!
//! ```text
//! H_ν[f](t) = ∫_0^∞ f(s) J_ν(ts) √(ts) ds,
//! ```
//!
//! which is its own inverse for ν ≥ -1/2, together with the naive
//! band-limited inverse and the symmetric extension `h_{r,ν}` of Hankel data
//! to [-1, 1] that feeds the finite Fourier inversion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{SampledFunction1D, UniformGrid};
use crate::special::bessel_j_sqrt;

/// Hankel order ν stored as the integer 2ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct HankelOrder {
    two_nu: i32,
}

/// Integer or half-integer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Integer(usize),
    /// Half-integer ν = n + 1/2, carrying n.
    HalfInteger(usize),
}

impl HankelOrder {
    pub fn new(two_nu: i32) -> Result<Self> {
        if two_nu < -1 {
            return invalid(format!("order must be at least -1/2, got {}", 0.5 * two_nu as f64));
        }
        Ok(Self { two_nu })
    }

    /// Parses ν given as a float; only integers and half-integers are
    /// accepted.
    pub fn from_nu(nu: f64) -> Result<Self> {
        let twice = 2.0 * nu;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.abs() > 1e6 {
            return invalid(format!("order {nu} is not an integer or half-integer"));
        }
        Self::new(twice.round() as i32)
    }

    pub fn two_nu(&self) -> i32 {
        self.two_nu
    }

    pub fn nu(&self) -> f64 {
        0.5 * self.two_nu as f64
    }

    /// `None` for ν = -1/2, which is valid for the transform but not for
    /// the reconstruction pipelines.
    pub fn kind(&self) -> Option<OrderKind> {
        match self.two_nu {
            t if t < 0 => None,
            t if t % 2 == 0 => Some(OrderKind::Integer((t / 2) as usize)),
            t => Some(OrderKind::HalfInteger(((t - 1) / 2) as usize)),
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self.kind(), Some(OrderKind::Integer(_)))
    }

    /// The exponent p in (-1)^p that relates h_{r,ν}(-x) to h_{r,ν}(x): ν for
    /// integer orders and n = ν - 1/2 for half-integer ones.
    fn parity_index(&self) -> Result<usize> {
        match self.kind() {
            Some(OrderKind::Integer(p)) | Some(OrderKind::HalfInteger(p)) => Ok(p),
            None => invalid("order -1/2 has no symmetric extension"),
        }
    }
}

impl TryFrom<i32> for HankelOrder {
    type Error = Error;
    fn try_from(two_nu: i32) -> Result<Self> {
        Self::new(two_nu)
    }
}

impl From<HankelOrder> for i32 {
    fn from(o: HankelOrder) -> i32 {
        o.two_nu
    }
}

impl std::fmt::Display for HankelOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.two_nu % 2 == 0 {
            write!(f, "{}", self.two_nu / 2)
        } else {
            write!(f, "{}", self.nu())
        }
    }
}

/// Hankel data `h = H_ν[f]` sampled on [0, r] for an f supported in [0, σ].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelDataset {
    pub order: HankelOrder,
    pub r: f64,
    pub sigma: f64,
    pub h: SampledFunction1D,
    pub noise_level: f64,
    pub seed: u64,
}

impl HankelDataset {
    pub fn new(
        order: HankelOrder,
        r: f64,
        sigma: f64,
        h: SampledFunction1D,
        noise_level: f64,
        seed: u64,
    ) -> Result<Self> {
        let data = Self {
            order,
            r,
            sigma,
            h,
            noise_level,
            seed,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return invalid(format!("band limit r must be positive, got {}", self.r));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid(format!("support radius sigma must be positive, got {}", self.sigma));
        }
        if !(self.noise_level >= 0.0) {
            return invalid(format!("noise level must be non-negative, got {}", self.noise_level));
        }
        if !self.h.grid.is_interval(0.0, self.r) {
            return invalid(format!(
                "data grid [{}, {}] does not match [0, r] = [0, {}]",
                self.h.grid.a, self.h.grid.b, self.r
            ));
        }
        if self.h.values.len() != self.h.grid.n {
            return invalid("data sample count does not match its grid");
        }
        Ok(())
    }

    /// Bandwidth parameter c = rσ.
    pub fn c(&self) -> f64 {
        self.r * self.sigma
    }
}

fn check_points(ts: &[f64]) -> Result<()> {
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return invalid(format!("evaluation point {t} must be finite and non-negative"));
    }
    Ok(())
}

fn check_support(f: &SampledFunction1D) -> Result<()> {
    if f.grid.a < 0.0 {
        return invalid(format!("function grid starts at {} < 0", f.grid.a));
    }
    Ok(())
}

/// Trapezoid evaluation of `∫ f(s) J_ν(ts) √(ts) ds` over the grid of `f`
/// at every `t` in `ts`.
pub fn hankel_forward(order: HankelOrder, f: &SampledFunction1D, ts: &[f64]) -> Result<Vec<Complex64>> {
    check_support(f)?;
    check_points(ts)?;
    let s = f.nodes();
    let weighted: Vec<Complex64> = f
        .grid
        .trapezoid_weights()
        .iter()
        .zip(&f.values)
        .map(|(w, v)| v * *w)
        .collect();
    let two_nu = order.two_nu();
    Ok(ts
        .par_iter()
        .map(|&t| {
            s.iter()
                .zip(&weighted)
                .map(|(&sk, v)| v * bessel_j_sqrt(two_nu, t * sk))
                .sum()
        })
        .collect())
}

/// Dense trapezoid discretization of H_ν from a fixed s-grid to fixed
/// t-points, for repeated application to many functions on the same grid.
#[derive(Debug, Clone)]
pub struct HankelKernel {
    s_grid: UniformGrid,
    rows: Vec<Vec<f64>>,
}

impl HankelKernel {
    pub fn new(order: HankelOrder, s_grid: UniformGrid, ts: &[f64]) -> Result<Self> {
        if s_grid.a < 0.0 {
            return invalid(format!("function grid starts at {} < 0", s_grid.a));
        }
        check_points(ts)?;
        let s = s_grid.nodes();
        let w = s_grid.trapezoid_weights();
        let two_nu = order.two_nu();
        let rows = ts
            .par_iter()
            .map(|&t| {
                s.iter()
                    .zip(&w)
                    .map(|(&sk, &wk)| wk * bessel_j_sqrt(two_nu, t * sk))
                    .collect()
            })
            .collect();
        Ok(Self { s_grid, rows })
    }

    pub fn s_grid(&self) -> UniformGrid {
        self.s_grid
    }

    pub fn apply(&self, f: &SampledFunction1D) -> Result<Vec<Complex64>> {
        if f.grid != self.s_grid {
            return invalid("function grid differs from the kernel's grid");
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().zip(&f.values).map(|(k, v)| v * *k).sum())
            .collect())
    }
}

/// The naive inverse: H_ν applied to the zero extension of the data beyond
/// r, evaluated on `out_grid` ⊂ [0, σ].
pub fn naive_inverse(data: &HankelDataset, out_grid: UniformGrid) -> Result<SampledFunction1D> {
    data.validate()?;
    if out_grid.a < 0.0 || out_grid.b > data.sigma * (1.0 + 1e-12) {
        return invalid(format!(
            "output grid [{}, {}] must lie in [0, sigma] = [0, {}]",
            out_grid.a, out_grid.b, data.sigma
        ));
    }
    let values = hankel_forward(data.order, &data.h, &out_grid.nodes())?;
    SampledFunction1D::new(out_grid, values)
}

/// `∫_0^1 f(y) J_ν(cxy) √(cxy) dy` by the trapezoid rule.
pub fn hankel_bandlimited_forward(
    order: HankelOrder,
    f: &SampledFunction1D,
    c: f64,
    xs: &[f64],
) -> Result<Vec<Complex64>> {
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("bandwidth c must be positive, got {c}"));
    }
    if !f.grid.is_interval(0.0, 1.0) {
        return invalid("band-limited transform expects samples on [0, 1]");
    }
    if let Some(x) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return invalid(format!("evaluation point {x} outside [0, 1]"));
    }
    let ts: Vec<f64> = xs.iter().map(|x| c * x).collect();
    hankel_forward(order, f, &ts)
}

/// Data nodes with t/r in (0, NEAR_ZERO_WINDOW] are smoothed by a
/// low-degree fit that also supplies the value at t = 0.
const NEAR_ZERO_WINDOW: f64 = 0.05;

/// Symmetric extension of Hankel data to [-1, 1]:
///
/// ```text
/// integer ν:       h_{r,ν}(x) = h(r|x|)/√(r|x|),  times (-1)^ν for x < 0
/// half-integer ν:  h_{r,ν}(x) = h(r|x|)/(r|x|),   times (-1)^n for x < 0
/// ```
///
/// The weighted data q(t) = h(t)/√t or h(t)/t is interpolated linearly
/// between data nodes. Near t = 0 the division would amplify noise, so on
/// the window t/r ≤ 0.05 q is replaced by a least-squares fit of the
/// matching parity (even polynomial in t, or t times one), which also gives
/// q(0). On a grid symmetric about 0 the output has exact parity.
pub fn symmetrize(data: &HankelDataset, x_grid: UniformGrid) -> Result<SampledFunction1D> {
    data.validate()?;
    if !x_grid.is_interval(-1.0, 1.0) {
        return invalid("symmetric extension is sampled on [-1, 1]");
    }
    let p = data.order.parity_index()?;
    let half = !data.order.is_integer();
    let odd = p % 2 == 1;

    let t_grid = data.h.grid;
    let near = (1..t_grid.n)
        .take_while(|&k| t_grid.node(k) / data.r <= NEAR_ZERO_WINDOW)
        .count();
    if near < 3 {
        return invalid(format!(
            "only {near} data samples in (0, {NEAR_ZERO_WINDOW}·r]; at least 3 are needed near t = 0"
        ));
    }

    let mut q: Vec<Complex64> = (0..t_grid.n)
        .map(|k| {
            let t = t_grid.node(k);
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else if half {
                data.h.values[k] / t
            } else {
                data.h.values[k] / t.sqrt()
            }
        })
        .collect();
    fit_near_zero(&mut q, &data.h.values, t_grid, near, if half { 1.0 } else { 0.5 }, odd)?;
    let q = SampledFunction1D::new(t_grid, q)?;

    let n = x_grid.n;
    let sign = if odd { -1.0 } else { 1.0 };
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    // nodes n-1-k and k are mirror images; fill the right half, then copy
    for k in (n / 2)..n {
        let x = if 2 * k + 1 == n { 0.0 } else { x_grid.node(k) };
        values[k] = q.interpolate((data.r * x).min(data.r));
        values[n - 1 - k] = values[k] * sign;
    }
    if n % 2 == 1 && odd {
        values[n / 2] = Complex64::new(0.0, 0.0);
    }
    SampledFunction1D::new(x_grid, values)
}

/// Replaces the weighted data q on the first `near` nodes (and at t = 0) by
/// a least-squares fit `t^parity · P(t²)`, with `P` of degree ≤ 3 in t².
/// The fit is done on `h = t^power · q`, where the noise is white, so the
/// division by small t does not amplify it.
fn fit_near_zero(
    q: &mut [Complex64],
    h: &[Complex64],
    t_grid: UniformGrid,
    near: usize,
    power: f64,
    odd: bool,
) -> Result<()> {
    let terms = near.min(4);
    let scale = t_grid.node(near);
    let column = |t: f64, j: usize| {
        let u = t / scale;
        let base = if odd { u } else { 1.0 };
        base * u.powi(2 * j as i32)
    };
    let mut a = DMatrix::<f64>::zeros(near, terms);
    let mut rhs = DMatrix::<f64>::zeros(near, 2);
    for k in 1..=near {
        let t = t_grid.node(k);
        let w = t.powf(power);
        for j in 0..terms {
            a[(k - 1, j)] = w * column(t, j);
        }
        rhs[(k - 1, 0)] = h[k].re;
        rhs[(k - 1, 1)] = h[k].im;
    }
    let coef = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Numerical(format!("near-zero fit failed: {e}")))?;
    for (k, slot) in q.iter_mut().enumerate().take(near + 1) {
        let t = t_grid.node(k);
        *slot = (0..terms)
            .map(|j| Complex64::new(coef[(j, 0)], coef[(j, 1)]) * column(t, j))
            .sum();
    }
    Ok(())
}
