//! Special functions used across the crate: Bessel functions of integer and
//! half-integer order, Legendre and Chebyshev polynomials, normalized
//! Legendre series and Gauss-Legendre quadrature rules.

use std::f64::consts::{FRAC_2_PI, PI};

/// Below this argument the power series is used for every order.
const SERIES_CUTOFF: f64 = 4.0;
const RESCALE_BIG: f64 = 1e250;
const RESCALE_SMALL: f64 = 1e-250;

/// Γ(ν + 1) for ν = two_nu / 2, two_nu ≥ -1.
fn gamma_order_plus_one(two_nu: i32) -> f64 {
    debug_assert!(two_nu >= -1);
    // Γ(1) = 1, Γ(1/2) = √π, then Γ(z + 1) = z Γ(z).
    let (mut z, mut g) = if two_nu % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = 0.5 * two_nu as f64 + 1.0;
    while z < target - 0.25 {
        g *= z;
        z += 1.0;
    }
    g
}

fn bessel_series(two_nu: i32, x: f64) -> f64 {
    let nu = 0.5 * two_nu as f64;
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powf(nu) / gamma_order_plus_one(two_nu);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn miller_start(order: f64, x: f64) -> usize {
    let m = order.max(x);
    let start = m + 20.0 + (40.0 * m.max(1.0)).sqrt();
    // even starting index keeps the integer normalization sum aligned
    2 * ((start as usize) / 2 + 1)
}

/// J_n(x) for integer n ≥ 0 and x > 0 by Miller's backward recurrence,
/// normalized with J_0 + 2 Σ J_{2k} = 1.
fn bessel_int_miller(n: usize, x: f64) -> f64 {
    let start = miller_start(n as f64, x);
    let mut j_next = 0.0;
    let mut j_cur = 1e-30;
    let mut sum = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        // j_cur holds J_k
        if k == n {
            result = j_cur;
        }
        if k % 2 == 0 {
            sum += 2.0 * j_cur;
        }
        let j_prev = (2.0 * k as f64 / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RESCALE_BIG {
            j_cur *= RESCALE_SMALL;
            j_next *= RESCALE_SMALL;
            sum *= RESCALE_SMALL;
            result *= RESCALE_SMALL;
        }
    }
    // j_cur = J_0
    if n == 0 {
        result = j_cur;
    }
    sum += j_cur;
    result / sum
}

/// J_{n+1/2}(x) for n ≥ -1, x > 0.
fn bessel_half(n: i32, x: f64) -> f64 {
    let pref = (FRAC_2_PI / x).sqrt();
    let j_m = pref * x.cos(); // J_{-1/2}
    let j_p = pref * x.sin(); // J_{1/2}
    match n {
        -1 => return j_m,
        0 => return j_p,
        _ => {}
    }
    let order = n as f64 + 0.5;
    if order < x {
        // upward recurrence is stable while the order stays below x
        let (mut a, mut b) = (j_m, j_p);
        for k in 0..n {
            let nu = k as f64 + 0.5;
            let c = (2.0 * nu / x) * b - a;
            a = b;
            b = c;
        }
        return b;
    }
    let start = miller_start(order, x);
    let mut j_next = 0.0;
    let mut j_cur = 1e-30;
    let mut result = 0.0;
    let mut at_half = 0.0;
    // j_cur holds J_{k+1/2}
    let mut k = start as i32;
    while k >= 0 {
        if k == n {
            result = j_cur;
        }
        if k == 0 {
            at_half = j_cur;
            break;
        }
        let nu = k as f64 + 0.5;
        let j_prev = (2.0 * nu / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RESCALE_BIG {
            j_cur *= RESCALE_SMALL;
            j_next *= RESCALE_SMALL;
            result *= RESCALE_SMALL;
        }
        k -= 1;
    }
    // one more step down to J_{-1/2}; normalize on the larger closed form
    let at_minus_half = (1.0 / x) * at_half - j_next;
    if j_p.abs() >= j_m.abs() {
        result * (j_p / at_half)
    } else {
        result * (j_m / at_minus_half)
    }
}

/// Smallest argument at which the large-x expansion is used for order n.
fn asymptotic_threshold(n: usize) -> f64 {
    25.0 + (n * n) as f64
}

/// Hankel's large-argument expansion for integer order. Above
/// [`asymptotic_threshold`] the smallest term is far below 1e-16, and the
/// cost no longer grows with x the way backward recurrence does.
fn bessel_int_asymptotic(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        // a_k / x^k enters P with sign (-1)^{k/2} for even k, Q likewise for odd k
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    // cos(x - φ) and sin(x - φ) with φ = (2n + 1)π/4, letting libm reduce x
    let phi = (2 * n + 1) as f64 * std::f64::consts::FRAC_PI_4;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_w = cx * cp + sx * sp;
    let sin_w = sx * cp - cx * sp;
    (FRAC_2_PI / x).sqrt() * (p * cos_w - q * sin_w)
}

/// Bessel function of the first kind J_ν(x) with ν = two_nu / 2,
/// two_nu ≥ -1, x ≥ 0.
pub fn bessel_j(two_nu: i32, x: f64) -> f64 {
    assert!(two_nu >= -1, "order must be >= -1/2");
    assert!(x >= 0.0, "argument must be non-negative");
    if x == 0.0 {
        return match two_nu {
            0 => 1.0,
            -1 => f64::INFINITY,
            _ => 0.0,
        };
    }
    if x <= SERIES_CUTOFF {
        return bessel_series(two_nu, x);
    }
    if two_nu % 2 == 0 {
        let n = (two_nu / 2) as usize;
        if x >= asymptotic_threshold(n) {
            bessel_int_asymptotic(n, x)
        } else {
            bessel_int_miller(n, x)
        }
    } else {
        bessel_half((two_nu - 1) / 2, x)
    }
}

/// The Hankel kernel J_ν(z)·√z, finite at z = 0 for every ν ≥ -1/2.
pub fn bessel_j_sqrt(two_nu: i32, z: f64) -> f64 {
    if z == 0.0 {
        return if two_nu == -1 { FRAC_2_PI.sqrt() } else { 0.0 };
    }
    match two_nu {
        -1 => FRAC_2_PI.sqrt() * z.cos(),
        1 => FRAC_2_PI.sqrt() * z.sin(),
        _ => bessel_j(two_nu, z) * z.sqrt(),
    }
}

/// Legendre polynomial P_n(x), valid for any real x.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Chebyshev polynomial of the first kind T_n(x), valid for any real x.
pub fn chebyshev_t(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut t0, mut t1) = (1.0, x);
            for _ in 1..n {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

/// Three-term coefficient of the normalized Legendre recurrence:
/// x P̄_k = a_k P̄_{k+1} + a_{k-1} P̄_{k-1}.
#[inline]
pub(crate) fn norm_legendre_a(k: usize) -> f64 {
    let kf = k as f64;
    (kf + 1.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0)).sqrt()
}

/// Evaluates Σ_k coeffs[k]·P̄_k(x) where P̄_k = √(k + 1/2)·P_k is the
/// L²[-1,1]-normalized Legendre polynomial.
pub fn normalized_legendre_series(coeffs: &[f64], x: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let mut p_prev = 0.0;
    let mut p_cur = std::f64::consts::FRAC_1_SQRT_2;
    let mut sum = coeffs[0] * p_cur;
    let mut a_prev = 0.0;
    for (k, &b) in coeffs.iter().enumerate().skip(1) {
        let a = norm_legendre_a(k - 1);
        let p_next = (x * p_cur - a_prev * p_prev) / a;
        p_prev = p_cur;
        p_cur = p_next;
        a_prev = a;
        sum += b * p_cur;
    }
    sum
}

/// Values P̄_0(x), …, P̄_{n-1}(x).
pub fn normalized_legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(std::f64::consts::FRAC_1_SQRT_2);
    let mut a_prev = 0.0;
    for k in 1..n {
        let a = norm_legendre_a(k - 1);
        let prev2 = if k >= 2 { out[k - 2] } else { 0.0 };
        out.push((x * out[k - 1] - a_prev * prev2) / a);
        a_prev = a;
    }
    out
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&t| half * t).collect(),
    )
}
