//! Points, rectangles, numeric policy and checked complex arithmetic.
//!
//! Complex values are [`Complex64`] throughout. [`ComplexPoint`] is the
//! validated location type: its coordinates are always finite.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point `s = sigma + i t` of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Result<Self> {
        if !(sigma.is_finite() && t.is_finite()) {
            return Err(Error::NonFinite("ComplexPoint"));
        }
        Ok(Self { sigma, t })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    pub fn distance(self, other: ComplexPoint) -> f64 {
        (self.sigma - other.sigma).hypot(self.t - other.t)
    }
}

impl From<ComplexPoint> for Complex64 {
    fn from(p: ComplexPoint) -> Self {
        p.to_complex()
    }
}

/// Closed axis-aligned rectangle `[sigma_min, sigma_max] x [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Rectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let r = Self { sigma_min, sigma_max, t_min, t_max };
        r.validate()?;
        Ok(r)
    }

    /// Checks the ordering invariant; deserialized rectangles go through here.
    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma_min, self.sigma_max, self.t_min, self.t_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRectangle("non-finite bound".into()));
        }
        if !(self.sigma_min < self.sigma_max) || !(self.t_min < self.t_max) {
            return Err(Error::InvalidRectangle(format!(
                "need sigma_min < sigma_max and t_min < t_max, got [{}, {}] x [{}, {}]",
                self.sigma_min, self.sigma_max, self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn center(&self) -> ComplexPoint {
        ComplexPoint {
            sigma: 0.5 * (self.sigma_min + self.sigma_max),
            t: 0.5 * (self.t_min + self.t_max),
        }
    }

    pub fn contains(&self, p: ComplexPoint) -> bool {
        self.contains_with_slack(p, 0.0)
    }

    pub fn contains_with_slack(&self, p: ComplexPoint, slack: f64) -> bool {
        p.sigma >= self.sigma_min - slack
            && p.sigma <= self.sigma_max + slack
            && p.t >= self.t_min - slack
            && p.t <= self.t_max + slack
    }

    pub fn contains_complex(&self, z: Complex64) -> bool {
        z.re >= self.sigma_min && z.re <= self.sigma_max && z.im >= self.t_min && z.im <= self.t_max
    }

    /// Splits into four quadrants (lower-left, lower-right, upper-left, upper-right).
    pub fn quadrants(&self) -> [Rectangle; 4] {
        let c = self.center();
        [
            Rectangle { sigma_max: c.sigma, t_max: c.t, ..*self },
            Rectangle { sigma_min: c.sigma, t_max: c.t, ..*self },
            Rectangle { sigma_max: c.sigma, t_min: c.t, ..*self },
            Rectangle { sigma_min: c.sigma, t_min: c.t, ..*self },
        ]
    }

    /// Cell centers of an `n x n` subdivision, row-major in `t` then `sigma`.
    pub fn cell_centers(&self, n: usize) -> Vec<ComplexPoint> {
        let ds = self.width() / n as f64;
        let dt = self.height() / n as f64;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push(ComplexPoint {
                    sigma: self.sigma_min + (i as f64 + 0.5) * ds,
                    t: self.t_min + (j as f64 + 0.5) * dt,
                });
            }
        }
        out
    }

    /// Inclusive lattice of `n x n` points including the corners (`n >= 2`).
    pub fn lattice(&self, n: usize) -> Vec<ComplexPoint> {
        let n = n.max(2);
        let step = |lo: f64, hi: f64, k: usize| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push(ComplexPoint {
                    sigma: step(self.sigma_min, self.sigma_max, i),
                    t: step(self.t_min, self.t_max, j),
                });
            }
        }
        out
    }

    pub fn is_subrectangle_of(&self, other: &Rectangle) -> bool {
        self.sigma_min >= other.sigma_min
            && self.sigma_max <= other.sigma_max
            && self.t_min >= other.t_min
            && self.t_max <= other.t_max
    }
}

/// Tolerances and radii shared by the locator, the certifier and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Largest argument-gradient norm still treated as zero.
    pub grad_tol: f64,
    /// Bound on `|W'| / max(1, |W|)` for a confirmed root.
    pub residual_tol: f64,
    /// Exclusion radius around zeros and poles of `W`.
    pub singular_radius: f64,
    /// Relative finite-difference step.
    pub fd_step_scale: f64,
    pub newton_max_iter: u32,
    /// Roots closer than this are merged.
    pub dedup_radius: f64,
    /// Newton seeds per axis.
    pub grid_density: usize,
    /// Largest tolerated componentwise disagreement between gradient routes.
    pub route_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            grad_tol: 1e-7,
            residual_tol: 1e-6,
            singular_radius: 0.05,
            fd_step_scale: f64::EPSILON.cbrt(),
            newton_max_iter: 100,
            dedup_radius: 1e-6,
            grid_density: 64,
            route_tol: 1e-6,
        }
    }
}

impl NumericPolicy {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("residual_tol", self.residual_tol),
            ("singular_radius", self.singular_radius),
            ("fd_step_scale", self.fd_step_scale),
            ("dedup_radius", self.dedup_radius),
            ("route_tol", self.route_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidPolicy(format!("{name} must be positive, got {v}")));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidPolicy("newton_max_iter must be positive".into()));
        }
        if self.grid_density == 0 {
            return Err(Error::InvalidPolicy("grid_density must be positive".into()));
        }
        if self.singular_radius <= self.dedup_radius {
            return Err(Error::InvalidPolicy(
                "singular_radius must exceed dedup_radius".into(),
            ));
        }
        Ok(())
    }

    /// Central-difference step at `s`.
    pub fn fd_step(&self, s: Complex64) -> f64 {
        self.fd_step_scale * s.norm().max(1.0)
    }
}

pub fn complex_add(a: Complex64, b: Complex64) -> Complex64 {
    a + b
}

pub fn complex_mul(a: Complex64, b: Complex64) -> Complex64 {
    a * b
}

/// Smith's algorithm; avoids the overflow of the textbook `|b|^2` denominator.
pub fn complex_div(a: Complex64, b: Complex64) -> Result<Complex64> {
    if b.re == 0.0 && b.im == 0.0 {
        return Err(Error::Domain("complex division by zero".into()));
    }
    let q = if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    };
    if q.re.is_finite() && q.im.is_finite() {
        Ok(q)
    } else {
        Err(Error::NonFinite("complex_div"))
    }
}

pub fn complex_abs(a: Complex64) -> f64 {
    a.re.hypot(a.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_examples() {
        let p = complex_mul(Complex64::new(1.0, 2.0), Complex64::new(3.0, -1.0));
        assert_eq!(p, Complex64::new(5.0, 5.0));
        let q = complex_div(Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0)).unwrap();
        assert_eq!(q, Complex64::new(1.0, 0.0));
        assert_eq!(complex_abs(Complex64::new(3.0, 4.0)), 5.0);
        assert_eq!(
            complex_add(Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.5)),
            Complex64::new(0.0, 2.5)
        );
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let e = complex_div(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn points_reject_non_finite() {
        assert!(ComplexPoint::new(f64::NAN, 0.0).is_err());
        assert!(ComplexPoint::new(0.0, f64::INFINITY).is_err());
        assert!(ComplexPoint::new(1.0, -2.0).is_ok());
    }

    #[test]
    fn rectangle_ordering() {
        assert!(Rectangle::new(0.0, 1.0, 0.0, 1.0).is_ok());
        assert!(Rectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, 1.0, 2.0, 1.0).is_err());
        let r = Rectangle::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let l = r.lattice(3);
        assert_eq!(l.len(), 9);
        assert_eq!(l[4], ComplexPoint { sigma: 0.0, t: 0.0 });
        assert!(r.quadrants().iter().all(|q| q.is_subrectangle_of(&r)));
    }

    #[test]
    fn policy_validation() {
        assert!(NumericPolicy::default().validate().is_ok());
        let bad = NumericPolicy { singular_radius: 1e-7, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = NumericPolicy { grad_tol: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    fn arb_complex(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
        (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(lm, th)| Complex64::from_polar(10f64.powf(lm), th))
    }

    proptest! {
        #[test]
        fn div_inverts_mul(a in arb_complex(-3.0, 3.0), b in arb_complex(-6.0, 6.0)) {
            let q = complex_div(complex_mul(a, b), b).unwrap();
            let err = complex_abs(q - a);
            prop_assert!(err <= 8.0 * f64::EPSILON * complex_abs(a), "err {err:e} for a={a} b={b}");
        }

        #[test]
        fn abs_squared_matches_conjugate_product(a in arb_complex(-8.0, 8.0)) {
            let m = complex_abs(a);
            let p = (a * a.conj()).re;
            prop_assert!((m * m - p).abs() <= 1e-14 * p);
        }
    }
}
