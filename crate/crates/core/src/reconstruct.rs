//! End-to-end reconstruction of `f` from band-limited Hankel data.
//!
//! Both PSWF routes share the first two steps: the data are extended
//! symmetrically to [-1, 1] and inverted once with the truncated operator
//! F⁻¹_{m,c}, giving the radial factor `I(y)` of a separated Radon transform.
//! The closed-form route then applies a Cormack inversion to `I` directly,
//! while the FBP route builds a full sinogram, back-projects it and reads the
//! ν-th angular harmonic off the image.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandlimited::{inverse_coefficients, PswfExpansion};
use crate::error::{invalid, Error, Result};
use crate::grid::{vec_norm, SampledFunction1D, UniformGrid};
use crate::hankel::{hankel_forward, naive_inverse, symmetrize, HankelDataset, HankelKernel, HankelOrder, OrderKind};
use crate::pswf::{i_pow, PswfBasis};
use crate::radon::{angular_project, cormack2d_invert_fn, cormack3d_invert_fn, edge_layer_2d, fbp2d, Sinogram2D};
use crate::special::{bessel_j_sqrt, gauss_legendre, legendre_p};

/// Version tag written into every serialized report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Allowed relative mismatch between the basis bandwidth and `rσ`.
const BANDWIDTH_TOLERANCE: f64 = 1e-9;

/// Gauss-Legendre nodes per panel when transforming the edge layer.
const EDGE_NODES: usize = 32;

/// Declarative description of a test function on [0, σ].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhantomSpec {
    /// Indicator function of a union of closed intervals.
    TwoStep { intervals: Vec<(f64, f64)> },
    /// `sin(ωs)` restricted to [0, σ].
    Harmonic { omega: f64 },
    /// Explicit values on a uniform grid over [0, σ], resampled linearly.
    Custom { samples: Vec<f64> },
}

impl PhantomSpec {
    /// The indicator of [0.15, 0.3] ∪ [0.5, 0.75] used throughout the
    /// experiments.
    pub fn two_step() -> Self {
        PhantomSpec::TwoStep {
            intervals: vec![(0.15, 0.3), (0.5, 0.75)],
        }
    }

    pub fn validate(&self, sigma: f64) -> Result<()> {
        match self {
            PhantomSpec::TwoStep { intervals } => {
                if intervals.is_empty() {
                    return invalid("two-step phantom needs at least one interval");
                }
                let mut sorted = intervals.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                for &(lo, hi) in &sorted {
                    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= sigma) {
                        return invalid(format!("interval [{lo}, {hi}] must satisfy 0 ≤ lo < hi ≤ σ = {sigma}"));
                    }
                }
                if sorted.windows(2).any(|p| p[1].0 <= p[0].1) {
                    return invalid("phantom intervals must be disjoint");
                }
            }
            PhantomSpec::Harmonic { omega } => {
                if !(*omega > 0.0 && omega.is_finite()) {
                    return invalid(format!("harmonic frequency must be positive, got {omega}"));
                }
            }
            PhantomSpec::Custom { samples } => {
                if samples.len() < 2 {
                    return invalid("custom phantom needs at least 2 samples");
                }
                if samples.iter().any(|v| !v.is_finite()) {
                    return invalid("custom phantom contains a non-finite sample");
                }
            }
        }
        Ok(())
    }
}

/// Samples the phantom on `grid`, which must lie in [0, σ].
pub fn make_phantom(spec: &PhantomSpec, sigma: f64, grid: UniformGrid) -> Result<SampledFunction1D> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("σ must be positive, got {sigma}"));
    }
    if grid.a < 0.0 || grid.b > sigma * (1.0 + 1e-12) {
        return invalid(format!("phantom grid [{}, {}] must lie in [0, {sigma}]", grid.a, grid.b));
    }
    spec.validate(sigma)?;
    Ok(match spec {
        PhantomSpec::TwoStep { intervals } => SampledFunction1D::from_real_fn(grid, |s| {
            if intervals.iter().any(|&(lo, hi)| lo <= s && s <= hi) {
                1.0
            } else {
                0.0
            }
        }),
        PhantomSpec::Harmonic { omega } => SampledFunction1D::from_real_fn(grid, |s| (omega * s).sin()),
        PhantomSpec::Custom { samples } => {
            let own = UniformGrid::new(0.0, sigma, samples.len())?;
            let f = SampledFunction1D::new(own, samples.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
            SampledFunction1D::from_fn(grid, |s| f.interpolate(s.min(sigma)))
        }
    })
}

/// Adds centered Gaussian noise scaled so that `‖η‖₂ = level·‖h‖₂` in the
/// Euclidean norm of the sample vector. Real data get real noise; complex
/// data get independent noise in both parts.
pub fn add_noise(h: &SampledFunction1D, level: f64, seed: u64) -> Result<SampledFunction1D> {
    if !(level >= 0.0 && level.is_finite()) {
        return invalid(format!("noise level must be non-negative, got {level}"));
    }
    if level == 0.0 {
        return Ok(h.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let complex = h.values.iter().any(|v| v.im != 0.0);
    let eta: Vec<Complex64> = (0..h.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if complex { StandardNormal.sample(&mut rng) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    let scale = level * vec_norm(&h.values) / vec_norm(&eta);
    let values = h.values.iter().zip(&eta).map(|(v, e)| v + e * scale).collect();
    SampledFunction1D::new(h.grid, values)
}

/// Samples `H_ν[f]` on `n_samples` uniform points of [0, r] and adds noise.
pub fn simulate_data(
    order: HankelOrder,
    f: &SampledFunction1D,
    r: f64,
    sigma: f64,
    n_samples: usize,
    noise_level: f64,
    seed: u64,
) -> Result<HankelDataset> {
    let t_grid = UniformGrid::new(0.0, r, n_samples)?;
    let clean = SampledFunction1D::new(t_grid, hankel_forward(order, f, &t_grid.nodes())?)?;
    let h = add_noise(&clean, noise_level, seed)?;
    HankelDataset::new(order, r, sigma, h, noise_level, seed)
}

/// Evaluates the relative data-space residual of many candidates sharing one
/// output grid, reusing the discretized Hankel kernel.
pub struct ResidualEvaluator {
    kernel: HankelKernel,
    weights: Vec<f64>,
    data: Vec<Complex64>,
    data_norm: f64,
    /// H_ν of the unit edge layer at the data nodes.
    edge: Vec<f64>,
}

impl ResidualEvaluator {
    pub fn new(data: &HankelDataset, s_grid: UniformGrid) -> Result<Self> {
        data.validate()?;
        let weights = data.h.grid.trapezoid_weights();
        let data_norm = weighted_norm(&data.h.values, &weights);
        if data_norm == 0.0 {
            return invalid("relative residual is undefined for zero data");
        }
        let ts = data.h.nodes();
        let kernel = HankelKernel::new(data.order, s_grid, &ts)?;
        let edge = edge_layer_transform(data.order, data.sigma, &ts);
        Ok(Self {
            kernel,
            weights,
            data: data.h.values.clone(),
            data_norm,
            edge,
        })
    }

    /// `‖H_ν[f] − h‖ / ‖h‖` over [0, r].
    pub fn residual(&self, f: &SampledFunction1D) -> Result<f64> {
        let hf = self.kernel.apply(f)?;
        let diff: Vec<Complex64> = hf.iter().zip(&self.data).map(|(a, b)| a - b).collect();
        Ok(weighted_norm(&diff, &self.weights) / self.data_norm)
    }

    /// 𝔈 of a PSWF reconstruction: the regular part goes through the
    /// trapezoid rule, the edge layer through its exact transform.
    pub fn residual_of(&self, rec: &Reconstruction) -> Result<f64> {
        let hf = self.kernel.apply(&rec.regular)?;
        let diff: Vec<Complex64> = hf
            .iter()
            .zip(&self.edge)
            .zip(&self.data)
            .map(|((a, e), b)| a + rec.edge * *e - b)
            .collect();
        Ok(weighted_norm(&diff, &self.weights) / self.data_norm)
    }
}

/// H_ν of the edge layer with unit amplitude (see [`Reconstruction`]).
fn edge_layer_transform(order: HankelOrder, sigma: f64, ts: &[f64]) -> Vec<f64> {
    let two_nu = order.two_nu();
    match order.kind() {
        Some(OrderKind::HalfInteger(_)) => ts
            .iter()
            .map(|&t| sigma * sigma / (2.0 * PI) * bessel_j_sqrt(two_nu, t * sigma))
            .collect(),
        Some(OrderKind::Integer(n)) => {
            // s = σ sin φ absorbs the inverse square root; the integrand
            // oscillates about tσ/π times over [0, π/2]
            let t_max = ts.iter().fold(0.0_f64, |a, &t| a.max(t));
            let panels = ((t_max * sigma / 4.0).ceil() as usize).max(1);
            let (x, w) = gauss_legendre(EDGE_NODES);
            let width = 0.5 * PI / panels as f64;
            let mut phi = Vec::with_capacity(panels * EDGE_NODES);
            let mut weight = Vec::with_capacity(panels * EDGE_NODES);
            for p in 0..panels {
                let mid = (p as f64 + 0.5) * width;
                for (xk, wk) in x.iter().zip(&w) {
                    let angle = mid + 0.5 * width * xk;
                    let sin = angle.sin();
                    phi.push(sigma * sin);
                    weight.push(0.5 * width * wk * (sigma * sin).sqrt() * sin.powi(n as i32) * sigma / PI);
                }
            }
            ts.par_iter()
                .map(|&t| {
                    phi.iter()
                        .zip(&weight)
                        .map(|(&s, &wk)| wk * bessel_j_sqrt(two_nu, t * s))
                        .sum()
                })
                .collect()
        }
        None => vec![0.0; ts.len()],
    }
}

fn weighted_norm(v: &[Complex64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative residual 𝔈(f, h) of a single candidate.
pub fn residual(f_rec: &SampledFunction1D, data: &HankelDataset) -> Result<f64> {
    ResidualEvaluator::new(data, f_rec.grid)?.residual(f_rec)
}

/// Normalized inner product of real parts, `⟨a, b⟩ / (‖a‖ ‖b‖)`, with
/// trapezoid weights of the grid of `a`. Zero if either function vanishes.
pub fn correlation(a: &SampledFunction1D, b: &SampledFunction1D) -> Result<f64> {
    if a.grid != b.grid {
        return invalid("correlation needs both functions on the same grid");
    }
    let w = a.grid.trapezoid_weights();
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for ((x, y), w) in a.values.iter().zip(&b.values).zip(&w) {
        ab += w * x.re * y.re;
        aa += w * x.re * x.re;
        bb += w * y.re * y.re;
    }
    if aa == 0.0 || bb == 0.0 {
        return Ok(0.0);
    }
    Ok(ab / (aa.sqrt() * bb.sqrt()))
}

/// Reconstruction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    PswfCormack,
    PswfFbp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Naive => "naive",
            Method::PswfCormack => "pswf_cormack",
            Method::PswfFbp => "pswf_fbp",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "naive" => Ok(Method::Naive),
            "pswf_cormack" => Ok(Method::PswfCormack),
            "pswf_fbp" => Ok(Method::PswfFbp),
            _ => invalid(format!("unknown method '{s}' (naive, pswf-cormack, pswf-fbp)")),
        }
    }
}

/// Discretization of the FBP route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FbpSettings {
    /// Image nodes per axis on [-1, 1]².
    pub grid_n: usize,
    pub n_theta: usize,
    /// Radial samples per projection on [-1, 1].
    pub n_y: usize,
}

impl FbpSettings {
    pub fn with_grid(grid_n: usize) -> Self {
        Self {
            grid_n,
            n_theta: grid_n.max(64),
            n_y: grid_n + 1,
        }
    }
}

impl Default for FbpSettings {
    fn default() -> Self {
        Self::with_grid(512)
    }
}

/// A PSWF reconstruction.
///
/// When the Radon data `w` do not vanish at the edge |y| = 1, the exact
/// preimage has a layer concentrated at s = σ. With `a = w(1)` it is
/// `a √s (s/σ)^ν / (π √(1 − (s/σ)²))` for integer ν, and the point mass
/// `a σ²/(2π) δ(s − σ)` for half-integer ν. Both routes invert `w` minus
/// the data of that layer, which vanish at the edge, and add the layer back
/// analytically.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Samples of f̃. For integer ν they include the edge layer at nodes
    /// below σ; the point mass of the half-integer case has no samples.
    pub f: SampledFunction1D,
    /// Samples of f̃ without the edge layer.
    pub regular: SampledFunction1D,
    /// The edge value `a = w(1)` of the Radon data.
    pub edge: Complex64,
}

/// The pipeline state that does not depend on the route or on m: the
/// coefficients `μ_j⁻¹⟨ψ_j, h_{r,ν}⟩` for every admissible j.
pub struct Reconstructor<'a> {
    basis: &'a PswfBasis,
    order: HankelOrder,
    sigma: f64,
    coeffs: Vec<Complex64>,
    cutoff: Option<f64>,
}

impl<'a> Reconstructor<'a> {
    pub fn new(basis: &'a PswfBasis, data: &HankelDataset) -> Result<Self> {
        data.validate()?;
        if data.order.kind().is_none() {
            return invalid(format!("order ν = {} must be a non-negative integer or half-integer", data.order));
        }
        let c = data.c();
        if (basis.c() - c).abs() > BANDWIDTH_TOLERANCE * c {
            return invalid(format!("basis bandwidth {} differs from rσ = {c}", basis.c()));
        }
        let cap = basis.m_max().min(basis.max_index());
        // a (2N − 1)-point grid puts every data node on a grid node
        let x_grid = UniformGrid::new(-1.0, 1.0, 2 * data.h.len() - 1)?;
        let h_sym = symmetrize(data, x_grid)?;
        let coeffs = inverse_coefficients(basis, &h_sym, cap)?;
        Ok(Self {
            basis,
            order: data.order,
            sigma: data.sigma,
            coeffs,
            cutoff: None,
        })
    }

    /// Multiplies the Radon data by a raised-cosine taper on
    /// `1 − width ≤ |y| ≤ 1`, which damps the boundary ripple.
    pub fn with_smooth_cutoff(mut self, width: Option<f64>) -> Result<Self> {
        if let Some(w) = width {
            if !(w > 0.0 && w <= 1.0) {
                return invalid(format!("cutoff width must lie in (0, 1], got {w}"));
            }
        }
        self.cutoff = width;
        Ok(self)
    }

    /// Largest admissible regularization index.
    pub fn m_cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m > self.m_cap() {
            return Err(Error::IndexOutOfRange {
                index: m,
                max: self.m_cap(),
            });
        }
        Ok(())
    }

    fn check_out_grid(&self, out_grid: UniformGrid) -> Result<()> {
        if out_grid.a < 0.0 || out_grid.b > self.sigma * (1.0 + 1e-12) {
            return invalid(format!(
                "output grid [{}, {}] must lie in [0, σ] = [0, {}]",
                out_grid.a, out_grid.b, self.sigma
            ));
        }
        Ok(())
    }

    /// `F⁻¹_{m,c}[h_{r,ν}]` as an expansion on [-1, 1].
    pub fn expansion(&self, m: usize) -> Result<PswfExpansion> {
        self.check_m(m)?;
        PswfExpansion::from_psi_coefficients(self.basis, &self.coeffs[..=m])
    }

    fn taper(&self, y: f64) -> f64 {
        match self.cutoff {
            Some(width) if y.abs() > 1.0 - width => {
                let u = (y.abs() - (1.0 - width)) / width;
                0.5 * (1.0 + (PI * u.min(1.0)).cos())
            }
            _ => 1.0,
        }
    }

    /// Radial Radon data `w(y)` in units where the support is the unit disk
    /// or ball: `2π i^ν/σ² · I(y)` or `(2π)^{3/2} i^n/σ³ · I(y)`.
    fn radon_factor(&self) -> Complex64 {
        match self.order.kind() {
            Some(OrderKind::Integer(nu)) => i_pow(nu) * (2.0 * PI / self.sigma.powi(2)),
            Some(OrderKind::HalfInteger(n)) => i_pow(n) * ((2.0 * PI).powf(1.5) / self.sigma.powi(3)),
            None => unreachable!("order validated in the constructor"),
        }
    }

    /// Harmonic index n of the separated Radon data.
    fn harmonic(&self) -> usize {
        match self.order.kind() {
            Some(OrderKind::Integer(n) | OrderKind::HalfInteger(n)) => n,
            None => unreachable!("order validated in the constructor"),
        }
    }

    /// The Radon data with the edge layer removed, and the edge value.
    fn regular_data(&self, m: usize) -> Result<(impl Fn(f64) -> Complex64 + Sync + '_, Complex64)> {
        let expansion = self.expansion(m)?;
        let factor = self.radon_factor();
        let n = self.harmonic();
        let edge = expansion.eval(1.0) * (factor * self.taper(1.0));
        let w = move |y: f64| expansion.eval(y) * (factor * self.taper(y)) - edge * legendre_p(n, y);
        Ok((w, edge))
    }

    /// Adds the sampled edge layer (integer ν only) to the regular part.
    fn assemble(&self, regular: SampledFunction1D, edge: Complex64) -> Result<Reconstruction> {
        let mut f = regular.clone();
        if self.order.is_integer() && edge != Complex64::new(0.0, 0.0) {
            let n = self.harmonic();
            for (v, s) in f.values.iter_mut().zip(regular.grid.nodes()) {
                let x = s / self.sigma;
                if x < 1.0 {
                    *v += edge * (s.sqrt() * edge_layer_2d(n, x));
                }
            }
        }
        Ok(Reconstruction { f, regular, edge })
    }

    /// Closed-form route: Cormack inversion of the radial factor.
    pub fn theorem(&self, m: usize, out_grid: UniformGrid) -> Result<Reconstruction> {
        self.check_out_grid(out_grid)?;
        let (w, edge) = self.regular_data(m)?;

        let nodes = out_grid.nodes();
        let first = nodes.iter().position(|&s| s > 0.0).unwrap_or(nodes.len());
        let xs: Vec<f64> = nodes[first..].iter().map(|s| (s / self.sigma).min(1.0)).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); nodes.len()];
        if !xs.is_empty() {
            let (u, weight): (Vec<Complex64>, fn(f64) -> f64) = match self.order.kind() {
                Some(OrderKind::Integer(nu)) => (cormack2d_invert_fn(nu as i32, w, &xs)?, f64::sqrt),
                Some(OrderKind::HalfInteger(n)) => (cormack3d_invert_fn(n, w, &xs)?, |s| s),
                None => unreachable!("order validated in the constructor"),
            };
            for (k, u) in u.into_iter().enumerate() {
                let s = nodes[first + k];
                values[first + k] = u * weight(s);
            }
        }
        self.assemble(SampledFunction1D::new(out_grid, values)?, edge)
    }

    /// FBP route: separated sinogram, filtered back projection, angular
    /// projection. Integer orders only.
    pub fn fbp(&self, m: usize, settings: &FbpSettings, out_grid: UniformGrid) -> Result<Reconstruction> {
        let nu = match self.order.kind() {
            Some(OrderKind::Integer(nu)) => nu,
            _ => {
                return invalid(format!(
                    "the FBP route is integer-ν only (got ν = {}); use the closed-form route",
                    self.order
                ))
            }
        };
        self.check_out_grid(out_grid)?;
        let (w, edge) = self.regular_data(m)?;
        let sino = Sinogram2D::separated(nu as i32, w, settings.n_y, settings.n_theta)?;
        let image = fbp2d(&sino, settings.grid_n)?;
        let xs: Vec<f64> = out_grid.nodes().iter().map(|s| (s / self.sigma).min(1.0)).collect();
        let projected = angular_project(&image, self.order, &xs)?;
        let root = self.sigma.sqrt();
        let regular = SampledFunction1D::new(out_grid, projected.into_iter().map(|v| v * root).collect())?;
        self.assemble(regular, edge)
    }

    pub fn run(&self, method: Method, m: usize, fbp: &FbpSettings, out_grid: UniformGrid) -> Result<Reconstruction> {
        match method {
            Method::PswfCormack => self.theorem(m, out_grid),
            Method::PswfFbp => self.fbp(m, fbp, out_grid),
            Method::Naive => invalid("the naive method has no regularization index"),
        }
    }
}

/// Closed-form (Cormack) reconstruction at a fixed m.
pub fn reconstruct_theorem(
    basis: &PswfBasis,
    data: &HankelDataset,
    m: usize,
    out_grid: UniformGrid,
) -> Result<SampledFunction1D> {
    Ok(Reconstructor::new(basis, data)?.theorem(m, out_grid)?.f)
}

/// FBP reconstruction at a fixed m.
pub fn reconstruct_fbp(
    basis: &PswfBasis,
    data: &HankelDataset,
    m: usize,
    settings: &FbpSettings,
    out_grid: UniformGrid,
) -> Result<SampledFunction1D> {
    if !data.order.is_integer() {
        return invalid(format!(
            "the FBP route is integer-ν only (got ν = {}); use the closed-form route",
            data.order
        ));
    }
    Ok(Reconstructor::new(basis, data)?.fbp(m, settings, out_grid)?.f)
}

/// Result of a residual sweep over m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub m: usize,
    pub m_values: Vec<usize>,
    pub residuals: Vec<f64>,
}

/// Evaluates 𝔈 for every m in `m_values` and returns the minimizer, the
/// smallest m among ties.
pub fn select_m(
    rec: &Reconstructor<'_>,
    evaluator: &ResidualEvaluator,
    method: Method,
    m_values: &[usize],
    fbp: &FbpSettings,
    out_grid: UniformGrid,
) -> Result<Selection> {
    if m_values.is_empty() {
        return invalid("empty m range");
    }
    if let Some(&m) = m_values.iter().find(|&&m| m > rec.m_cap()) {
        return Err(Error::IndexOutOfRange { index: m, max: rec.m_cap() });
    }
    let residuals = m_values
        .par_iter()
        .map(|&m| evaluator.residual_of(&rec.run(method, m, fbp, out_grid)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (k, r) in residuals.iter().enumerate() {
        if *r < residuals[best] {
            best = k;
        }
    }
    Ok(Selection {
        m: m_values[best],
        m_values: m_values.to_vec(),
        residuals,
    })
}

/// Choice of the regularization index in a config file: a number or
/// `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MChoice {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for MChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MChoice::Auto => s.serialize_str("auto"),
            MChoice::Fixed(m) => s.serialize_u64(*m as u64),
        }
    }
}

impl<'de> Deserialize<'de> for MChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(m) => usize::try_from(m)
                .map(MChoice::Fixed)
                .map_err(serde::de::Error::custom),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FromStr for MChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(MChoice::Auto);
        }
        s.parse()
            .map(MChoice::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("m must be a non-negative integer or \"auto\", got '{s}'")))
    }
}

/// Optional output locations recorded in a config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

fn default_samples() -> usize {
    256
}

fn default_grid_n() -> usize {
    512
}

/// A complete experiment: phantom, simulated data and reconstruction
/// settings. Together with the seed it determines every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nu: f64,
    pub sigma: f64,
    pub r: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// Output grid size on [0, σ].
    #[serde(default = "default_samples")]
    pub n_out: usize,
    pub phantom: PhantomSpec,
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default)]
    pub seed: u64,
    pub method: Method,
    #[serde(default)]
    pub m: MChoice,
    /// FBP image nodes per axis.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Width of the raised-cosine taper on the Radon data; off by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_cutoff: Option<f64>,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    /// The standard setting of the experiments: σ = 1, r = 10, 256 data
    /// samples and 256 output samples, automatic m.
    pub fn standard(nu: f64, phantom: PhantomSpec, noise_level: f64, seed: u64) -> Self {
        Self {
            nu,
            sigma: 1.0,
            r: 10.0,
            n_samples: 256,
            n_out: 256,
            phantom,
            noise_level,
            seed,
            method: Method::PswfCormack,
            m: MChoice::Auto,
            grid_n: 512,
            smooth_cutoff: None,
            outputs: OutputPaths::default(),
        }
    }

    pub fn order(&self) -> Result<HankelOrder> {
        HankelOrder::from_nu(self.nu)
    }

    pub fn c(&self) -> f64 {
        self.r * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        self.order()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid(format!("σ must be positive, got {}", self.sigma));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return invalid(format!("r must be positive, got {}", self.r));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return invalid(format!("noise level must be non-negative, got {}", self.noise_level));
        }
        if self.n_samples < 4 || self.n_out < 2 {
            return invalid("need at least 4 data samples and 2 output samples");
        }
        if self.method == Method::PswfFbp && !self.order()?.is_integer() {
            return invalid(format!("the FBP route is integer-ν only (got ν = {})", self.nu));
        }
        if let Some(w) = self.smooth_cutoff {
            if !(w > 0.0 && w <= 1.0) {
                return invalid(format!("cutoff width must lie in (0, 1], got {w}"));
            }
        }
        self.phantom.validate(self.sigma)
    }

    pub fn out_grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(0.0, self.sigma, self.n_out)
    }

    pub fn fbp_settings(&self) -> FbpSettings {
        FbpSettings::with_grid(self.grid_n)
    }
}

/// Everything produced by one reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub schema_version: u32,
    pub method: Method,
    pub nu: f64,
    pub r: f64,
    pub sigma: f64,
    pub c: f64,
    /// Chosen regularization index; absent for the naive method.
    pub m_selected: Option<usize>,
    pub m_auto: bool,
    pub m_values: Vec<usize>,
    /// 𝔈(f̃_m, h) for each entry of `m_values`.
    pub residual_curve: Vec<f64>,
    /// 𝔈 of the reported reconstruction.
    pub residual: f64,
    pub err_naive: f64,
    pub f_rec: SampledFunction1D,
    /// Edge value of the Radon data behind `f_rec`; zero for the naive
    /// method. See [`Reconstruction`].
    pub edge: Complex64,
    pub f_naive: SampledFunction1D,
    /// ‖Im f̃‖/‖Re f̃‖ before any truncation to the real part.
    pub imag_ratio: f64,
    /// True when `f_rec` was truncated to its real part.
    pub real_output: bool,
    pub runtime_ms: BTreeMap<String, f64>,
    pub seed: u64,
    pub noise_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_cutoff: Option<f64>,
}

/// Reconstructs from given data. `basis` must have bandwidth rσ.
#[allow(clippy::too_many_arguments)]
pub fn run_reconstruction(
    basis: &PswfBasis,
    data: &HankelDataset,
    method: Method,
    m: MChoice,
    fbp: &FbpSettings,
    out_grid: UniformGrid,
    smooth_cutoff: Option<f64>,
    real_phantom: bool,
) -> Result<ReconstructionReport> {
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut BTreeMap<String, f64>| {
        timings.insert(name.to_string(), clock.elapsed().as_secs_f64() * 1e3);
        clock = Instant::now();
    };

    let evaluator = ResidualEvaluator::new(data, out_grid)?;
    let f_naive = naive_inverse(data, out_grid)?;
    let err_naive = evaluator.residual(&f_naive)?;
    lap("naive", &mut timings);

    let (m_selected, m_values, residual_curve, f_rec, edge, residual) = if method == Method::Naive {
        (None, vec![], vec![], f_naive.clone(), Complex64::new(0.0, 0.0), err_naive)
    } else {
        let rec = Reconstructor::new(basis, data)?.with_smooth_cutoff(smooth_cutoff)?;
        lap("inversion", &mut timings);
        let m_values: Vec<usize> = match m {
            MChoice::Auto => (0..=rec.m_cap()).collect(),
            MChoice::Fixed(m) => vec![m],
        };
        let sel = select_m(&rec, &evaluator, method, &m_values, fbp, out_grid)?;
        lap("sweep", &mut timings);
        let f = rec.run(method, sel.m, fbp, out_grid)?;
        lap("reconstruction", &mut timings);
        let residual = evaluator.residual_of(&f)?;
        (Some(sel.m), sel.m_values, sel.residuals, f.f, f.edge, residual)
    };

    let re = f_rec.values.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
    let im = f_rec.values.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
    let imag_ratio = if re > 0.0 { im / re } else if im > 0.0 { f64::INFINITY } else { 0.0 };
    let f_rec = if real_phantom {
        SampledFunction1D::new(out_grid, f_rec.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect())?
    } else {
        f_rec
    };
    if !residual.is_finite() {
        return Err(Error::Numerical(format!("non-finite residual {residual}")));
    }

    Ok(ReconstructionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        method,
        nu: data.order.nu(),
        r: data.r,
        sigma: data.sigma,
        c: data.c(),
        m_selected,
        m_auto: m == MChoice::Auto,
        m_values,
        residual_curve,
        residual,
        err_naive,
        f_rec,
        edge,
        f_naive,
        imag_ratio,
        real_output: real_phantom,
        runtime_ms: timings,
        seed: data.seed,
        noise_level: data.noise_level,
        smooth_cutoff,
    })
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Experiment {
    pub phantom: SampledFunction1D,
    pub data: HankelDataset,
    pub report: ReconstructionReport,
}

/// Phantom → simulated data → reconstruction, as described by `config`.
/// A prebuilt basis of bandwidth rσ may be passed to avoid rebuilding it.
pub fn run_experiment(config: &ExperimentConfig, basis: Option<&PswfBasis>) -> Result<Experiment> {
    config.validate()?;
    let order = config.order()?;
    let out_grid = config.out_grid()?;
    let phantom = make_phantom(&config.phantom, config.sigma, out_grid)?;
    let data = simulate_data(
        order,
        &phantom,
        config.r,
        config.sigma,
        config.n_samples,
        config.noise_level,
        config.seed,
    )?;
    let built;
    let basis = match basis {
        Some(b) => b,
        None => {
            built = PswfBasis::for_bandwidth(config.c())?;
            &built
        }
    };
    let report = run_reconstruction(
        basis,
        &data,
        config.method,
        config.m,
        &config.fbp_settings(),
        out_grid,
        config.smooth_cutoff,
        true,
    )?;
    Ok(Experiment { phantom, data, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phantom_validation() {
        let bad = PhantomSpec::TwoStep {
            intervals: vec![(0.1, 0.5), (0.4, 0.6)],
        };
        assert!(bad.validate(1.0).is_err());
        let outside = PhantomSpec::TwoStep {
            intervals: vec![(0.5, 1.5)],
        };
        assert!(outside.validate(1.0).is_err());
        assert!(PhantomSpec::Harmonic { omega: 0.0 }.validate(1.0).is_err());
        assert!(PhantomSpec::two_step().validate(1.0).is_ok());
    }

    #[test]
    fn custom_phantom_is_resampled() {
        let g = UniformGrid::new(0.0, 2.0, 5).unwrap();
        let f = make_phantom(&PhantomSpec::Custom { samples: vec![0.0, 4.0] }, 2.0, g).unwrap();
        assert_eq!(f.real_parts(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn m_choice_parsing() {
        assert_eq!("auto".parse::<MChoice>().unwrap(), MChoice::Auto);
        assert_eq!("7".parse::<MChoice>().unwrap(), MChoice::Fixed(7));
        assert!("-1".parse::<MChoice>().is_err());
        let j: MChoice = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(j, MChoice::Auto);
        let j: MChoice = serde_json::from_str("12").unwrap();
        assert_eq!(j, MChoice::Fixed(12));
        assert!(serde_json::from_str::<MChoice>("\"twelve\"").is_err());
        assert_eq!(serde_json::to_string(&MChoice::Fixed(3)).unwrap(), "3");
    }

    #[test]
    fn method_names() {
        for m in [Method::Naive, Method::PswfCormack, Method::PswfFbp] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!("pswf-fbp".parse::<Method>().unwrap(), Method::PswfFbp);
        assert!("fbp".parse::<Method>().is_err());
    }

    #[test]
    fn negative_noise_rejected() {
        let h = SampledFunction1D::zeros(UniformGrid::new(0.0, 1.0, 4).unwrap());
        assert!(add_noise(&h, -0.1, 0).is_err());
    }

    #[test]
    fn edge_layer_transform_matches_sonine() {
        // ∫_0^1 x^{n+1} J_n(tx) / √(1 − x²) dx = √(π/2) t^{-1/2} J_{n+1/2}(t)
        let ts = [0.3, 1.0, 4.5, 9.7];
        for n in 0..4 {
            for sigma in [1.0, 2.0] {
                let order = HankelOrder::new(2 * n).unwrap();
                let got = edge_layer_transform(order, sigma, &ts);
                for (t, g) in ts.iter().zip(got) {
                    let want = sigma.powf(1.5) * crate::special::bessel_j(2 * n + 1, t * sigma) / (2.0 * PI).sqrt();
                    assert!((g - want).abs() < 1e-12, "n = {n}, σ = {sigma}, t = {t}: {g} vs {want}");
                }
            }
        }
    }
}
