//! Dense complex polynomials and an Aberth–Ehrlich root finder.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Polynomial with ascending coefficients `c[0] + c[1] s + ...`.
///
/// Trailing zero coefficients are trimmed, so the last stored coefficient is
/// nonzero unless the polynomial is identically zero (empty vector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `lead * prod (s - r)`.
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Self {
        let mut c = vec![lead];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Value, first and second derivative in one Horner pass.
    pub fn eval_derivs(&self, s: Complex64) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * s + d1;
            d1 = d1 * s + p;
            p = p * s + c;
        }
        (p, d1, d2 * 2.0)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or_default();
        Self::new((0..n).map(|i| get(&self.coeffs, i) - get(&other.coeffs, i)).collect())
    }

    /// All complex roots, with multiplicity, by Aberth–Ehrlich iteration
    /// followed by Newton polishing. The zero polynomial has no roots.
    pub fn roots(&self, max_degree: usize) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n > max_degree {
            return Err(Error::DegreeTooLarge { degree: n, max: max_degree });
        }
        if self.is_zero() || n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / lead]);
        }
        let monic: Vec<Complex64> = self.coeffs.iter().map(|&c| c / lead).collect();
        let p = Polynomial { coeffs: monic };
        let mut z = initial_guesses(&p);
        aberth(&p, &mut z);
        for r in z.iter_mut() {
            *r = polish(&p, *r);
        }
        z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(z)
    }
}

fn initial_guesses(p: &Polynomial) -> Vec<Complex64> {
    let n = p.degree();
    let c = p.coeffs();
    // Centroid of the roots, then a Fujiwara-type radius about it.
    let center = -c[n - 1] / n as f64;
    let shifted = taylor_shift(c, center);
    let radius = (0..n)
        .map(|k| {
            let a = shifted[k].norm();
            let e = (n - k) as f64;
            if k == 0 {
                (a / 2.0).powf(1.0 / e)
            } else {
                a.powf(1.0 / e)
            }
        })
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Coefficients of `p(s + a)`.
fn taylor_shift(c: &[Complex64], a: Complex64) -> Vec<Complex64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let hi = out[j + 1];
            out[j] += a * hi;
        }
    }
    out
}

fn aberth(p: &Polynomial, z: &mut [Complex64]) {
    let n = z.len();
    for _ in 0..1000 {
        let mut done = true;
        for i in 0..n {
            let (v, d, _) = p.eval_derivs(z[i]);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = if d == Complex64::new(0.0, 0.0) {
                Complex64::new(1e-8, 1e-8) * z[i].norm().max(1.0)
            } else {
                v / d
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff != Complex64::new(0.0, 0.0) {
                        sum += diff.inv();
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[i] -= w;
            if w.norm() > 4.0 * f64::EPSILON * z[i].norm().max(1e-300) {
                done = false;
            }
        }
        if done {
            break;
        }
    }
}

fn polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    let mut best = p.eval(z).norm();
    for _ in 0..3 {
        let (v, d, _) = p.eval_derivs(z);
        if d == Complex64::new(0.0, 0.0) {
            break;
        }
        let cand = z - v / d;
        let val = p.eval(cand).norm();
        if val < best && cand.re.is_finite() && cand.im.is_finite() {
            best = val;
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// Groups nearly coincident roots into `(center, multiplicity)` pairs.
pub fn cluster_roots(roots: &[Complex64], rel_tol: f64) -> Vec<(Complex64, u32)> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &r in roots {
        let tol = rel_tol * r.norm().max(1.0);
        match groups.iter_mut().find(|g| g.iter().any(|&q| (q - r).norm() <= tol)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|members| {
            let m = members.len();
            let sum: Complex64 = members.iter().sum();
            (sum / m as f64, m as u32)
        })
        .collect()
}
