//! Minimal double-double arithmetic for refining tridiagonal eigenpairs.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = Dd::new(self.hi.sqrt());
        // one Newton step
        x + (self - x * x) / (x * Dd::new(2.0))
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Refines an approximate eigenpair of a symmetric tridiagonal matrix by
/// Rayleigh-quotient iteration carried out in double-double arithmetic.
pub(crate) fn refine_tridiagonal_eigenpair(
    diag: &[f64],
    off: &[f64],
    chi: f64,
    vec: &[f64],
    iterations: usize,
) -> (f64, Vec<f64>) {
    let n = diag.len();
    let d: Vec<Dd> = diag.iter().map(|&x| Dd::new(x)).collect();
    let e: Vec<Dd> = off.iter().map(|&x| Dd::new(x)).collect();
    let mut v: Vec<Dd> = vec.iter().map(|&x| Dd::new(x)).collect();
    normalize(&mut v);
    let mut lambda = Dd::new(chi);
    for _ in 0..iterations {
        match solve_shifted(&d, &e, lambda, &v) {
            Some(mut x) => {
                normalize(&mut x);
                v = x;
            }
            None => break,
        }
        lambda = rayleigh(&d, &e, &v);
    }
    let _ = n;
    (lambda.to_f64(), v.iter().map(|x| x.to_f64()).collect())
}

fn normalize(v: &mut [Dd]) {
    let norm = v.iter().fold(Dd::ZERO, |acc, &x| acc + x * x).sqrt();
    if norm.hi > 0.0 {
        v.iter_mut().for_each(|x| *x = *x / norm);
    }
}

fn rayleigh(d: &[Dd], e: &[Dd], v: &[Dd]) -> Dd {
    let n = d.len();
    let mut num = Dd::ZERO;
    let mut den = Dd::ZERO;
    for i in 0..n {
        let mut tv = d[i] * v[i];
        if i > 0 {
            tv = tv + e[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            tv = tv + e[i] * v[i + 1];
        }
        num = num + v[i] * tv;
        den = den + v[i] * v[i];
    }
    num / den
}

/// Solves (T - λI) x = b with Gaussian elimination and partial pivoting.
fn solve_shifted(d: &[Dd], e: &[Dd], lambda: Dd, b: &[Dd]) -> Option<Vec<Dd>> {
    let n = d.len();
    if n == 1 {
        let piv = d[0] - lambda;
        let piv = if piv.hi == 0.0 { Dd::new(1e-300) } else { piv };
        return Some(vec![b[0] / piv]);
    }
    // rows hold up to three upper entries after pivoting: (diag, sup1, sup2)
    let mut a: Vec<Dd> = d.iter().map(|&x| x - lambda).collect();
    let mut sup1: Vec<Dd> = e.to_vec();
    sup1.push(Dd::ZERO);
    let mut sup2 = vec![Dd::ZERO; n];
    let mut sub: Vec<Dd> = e.to_vec();
    let mut rhs = b.to_vec();
    for i in 0..n - 1 {
        if sub[i].abs().hi > a[i].abs().hi {
            // swap row i and i+1
            let (ai, s1, s2, r) = (a[i], sup1[i], sup2[i], rhs[i]);
            a[i] = sub[i];
            sup1[i] = a[i + 1];
            sup2[i] = sup1[i + 1];
            rhs[i] = rhs[i + 1];
            sub[i] = ai;
            a[i + 1] = s1;
            sup1[i + 1] = s2;
            rhs[i + 1] = r;
        }
        if a[i].hi == 0.0 {
            a[i] = Dd::new(1e-300);
        }
        let m = sub[i] / a[i];
        a[i + 1] = a[i + 1] - m * sup1[i];
        if i + 1 < n - 1 {
            sup1[i + 1] = sup1[i + 1] - m * sup2[i];
        }
        rhs[i + 1] = rhs[i + 1] - m * rhs[i];
    }
    if a[n - 1].hi == 0.0 {
        a[n - 1] = Dd::new(1e-300);
    }
    let mut x = vec![Dd::ZERO; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s = s - sup1[i] * x[i + 1];
        }
        if i + 2 < n {
            s = s - sup2[i] * x[i + 2];
        }
        x[i] = s / a[i];
        if !x[i].hi.is_finite() {
            return None;
        }
    }
    Some(x)
}
