//! The argument `phi(sigma, t) = arg W(sigma + i t)` and its two partial
//! derivatives.
//!
//! Three independent routes compute the gradient:
//!
//! * [`GradientRoute::CaseTableFiniteDifference`]: central differences of
//!   `u = Re W` and `v = Im W`, combined by the quotient formulas
//!   `(v_s u - u_s v) / (u^2 + v^2)` and `(v_t u - u_t v) / (u^2 + v^2)`.
//! * [`GradientRoute::LogDerivativeIdentity`]: `(Im L, Re L)` with `L = W'/W`,
//!   which follows from the quotient formulas and Cauchy–Riemann.
//! * [`GradientRoute::FactorSum`]: closed-form contributions of each factor.
//!
//! None of the routes branch on the sign of `u`; only [`argument_value`]
//! follows the four-case table.

use crate::complex::{ComplexPoint, NumericPolicy};
use crate::error::{Error, Result};
use crate::model::{FactorBase, FactoredFunction, Meromorphic, ZerosAndPoles};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `(d phi / d sigma, d phi / d t)` in radians per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArgGradient {
    pub d_sigma: f64,
    pub d_t: f64,
}

impl ArgGradient {
    pub fn new(d_sigma: f64, d_t: f64) -> Self {
        Self { d_sigma, d_t }
    }

    pub fn norm(&self) -> f64 {
        self.d_sigma.hypot(self.d_t)
    }

    /// `max(|d_sigma|, |d_t|)`.
    pub fn max_abs(&self) -> f64 {
        self.d_sigma.abs().max(self.d_t.abs())
    }

    pub fn max_diff(&self, other: &ArgGradient) -> f64 {
        (self.d_sigma - other.d_sigma).abs().max((self.d_t - other.d_t).abs())
    }

    /// The gradient encoded by a log-derivative value.
    pub fn from_log_derivative(l: Complex64) -> Self {
        Self { d_sigma: l.im, d_t: l.re }
    }

    fn is_finite(&self) -> bool {
        self.d_sigma.is_finite() && self.d_t.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientRoute {
    CaseTableFiniteDifference,
    LogDerivativeIdentity,
    FactorSum,
}

/// Argument of `w = u + i v` by the four-case arctangent table, with range
/// `(-pi/2, 3pi/2)`. The table does not cover `u = 0`.
pub fn argument_value(w: Complex64) -> Result<f64> {
    let (u, v) = (w.re, w.im);
    if u == 0.0 || !(u.is_finite() && v.is_finite()) {
        return Err(Error::UndefinedArgument { re: u, im: v });
    }
    Ok(match (u > 0.0, v >= 0.0) {
        (true, true) => (v / u).atan(),
        (false, true) => PI - (v / -u).atan(),
        (false, false) => PI + (v / u).atan(),
        (true, false) => -(-v / u).atan(),
    })
}

/// Gradient contribution of one factor; zero for constants.
pub fn factor_gradient(base: &FactorBase, multiplicity: i32, s: Complex64) -> ArgGradient {
    let m = multiplicity as f64;
    match *base {
        FactorBase::Linear(r) | FactorBase::Scaled(r) => {
            let x = s.re - r.re;
            let y = s.im - r.im;
            let q = x * x + y * y;
            ArgGradient { d_sigma: -m * y / q, d_t: m * x / q }
        }
        FactorBase::Exponential(c) => ArgGradient { d_sigma: m * c.im, d_t: m * c.re },
        FactorBase::Constant(_) => ArgGradient::default(),
    }
}

/// Sum of closed-form factor contributions.
pub fn factor_sum(f: &FactoredFunction, s: Complex64) -> ArgGradient {
    let rate = f.exp_rate();
    let mut g = ArgGradient { d_sigma: rate.im, d_t: rate.re };
    for &(r, m) in f.roots() {
        let part = factor_gradient(&FactorBase::Linear(r), m, s);
        g.d_sigma += part.d_sigma;
        g.d_t += part.d_t;
    }
    g
}

/// Fourth-order derivative of `f` at `s` along the step `dir`, divided by
/// `|dir|`.
fn central_difference(f: &impl Fn(Complex64) -> Result<Complex64>, s: Complex64, dir: Complex64) -> Result<Complex64> {
    let near = f(s + dir)? - f(s - dir)?;
    let far = f(s + 2.0 * dir)? - f(s - 2.0 * dir)?;
    Ok((8.0 * near - far) / (12.0 * dir.norm()))
}

/// All three routes at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteComparison {
    pub fd: ArgGradient,
    pub logd: ArgGradient,
    pub factor_sum: Option<ArgGradient>,
}

impl RouteComparison {
    pub fn max_discrepancy(&self) -> f64 {
        let mut d = self.fd.max_diff(&self.logd);
        if let Some(fs) = &self.factor_sum {
            d = d.max(fs.max_diff(&self.fd)).max(fs.max_diff(&self.logd));
        }
        d
    }
}

/// Gradient field of one model under a numeric policy.
///
/// Every query enforces the clearance precondition: points closer than
/// `singular_radius` to a zero or pole of `W` are rejected.
pub struct ArgField<'a, M: Meromorphic + ?Sized> {
    model: &'a M,
    singular: ZerosAndPoles,
    policy: NumericPolicy,
}

impl<'a, M: Meromorphic + ?Sized> ArgField<'a, M> {
    pub fn new(model: &'a M, policy: NumericPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(Self { model, singular: model.zeros_and_poles()?, policy })
    }

    pub fn with_singularities(model: &'a M, singular: ZerosAndPoles, policy: NumericPolicy) -> Self {
        Self { model, singular, policy }
    }

    pub fn model(&self) -> &M {
        self.model
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    pub fn singularities(&self) -> &ZerosAndPoles {
        &self.singular
    }

    pub fn clearance(&self, s: Complex64) -> Result<()> {
        let d = self.singular.nearest_distance(s);
        if d < self.policy.singular_radius {
            return Err(Error::NearSingularity { sigma: s.re, t: s.im, distance: d });
        }
        Ok(())
    }

    /// Five-point central differences of `u` and `v` fed into the quotient
    /// formulas.
    pub fn grad_fd(&self, p: ComplexPoint) -> Result<ArgGradient> {
        let s = p.to_complex();
        self.clearance(s)?;
        let h = self.policy.fd_step(s);
        let w = self.model.evaluate(s)?;
        let scale = w.norm();
        if scale == 0.0 {
            return Err(Error::NearSingularity { sigma: s.re, t: s.im, distance: 0.0 });
        }
        // Normalising by |W| keeps u^2 + v^2 near 1.
        let ev = |z: Complex64| -> Result<Complex64> { Ok(self.model.evaluate(z)? / scale) };
        let w = w / scale;
        let ds = central_difference(&ev, s, Complex64::new(h, 0.0))?;
        let dt = central_difference(&ev, s, Complex64::new(0.0, h))?;
        let (u, v) = (w.re, w.im);
        let q = u * u + v * v;
        let g = ArgGradient {
            d_sigma: (ds.im * u - ds.re * v) / q,
            d_t: (dt.im * u - dt.re * v) / q,
        };
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonFinite("grad_fd"))
        }
    }

    pub fn grad_logd(&self, p: ComplexPoint) -> Result<ArgGradient> {
        let s = p.to_complex();
        self.clearance(s)?;
        Ok(ArgGradient::from_log_derivative(self.model.log_derivative(s)?))
    }

    /// Factor-sum route; `None` when the model has no product form.
    pub fn grad_factor_sum(&self, p: ComplexPoint) -> Result<Option<ArgGradient>> {
        let s = p.to_complex();
        self.clearance(s)?;
        let Some(f) = self.model.factored_form() else {
            return Ok(None);
        };
        let mut g = factor_sum(f, s);
        let extra = self.model.residual_log_derivative(s)?;
        g.d_sigma += extra.im;
        g.d_t += extra.re;
        Ok(Some(g))
    }

    pub fn grad(&self, p: ComplexPoint, route: GradientRoute) -> Result<Option<ArgGradient>> {
        match route {
            GradientRoute::CaseTableFiniteDifference => self.grad_fd(p).map(Some),
            GradientRoute::LogDerivativeIdentity => self.grad_logd(p).map(Some),
            GradientRoute::FactorSum => self.grad_factor_sum(p),
        }
    }

    pub fn compare_routes(&self, p: ComplexPoint) -> Result<RouteComparison> {
        Ok(RouteComparison {
            fd: self.grad_fd(p)?,
            logd: self.grad_logd(p)?,
            factor_sum: self.grad_factor_sum(p)?,
        })
    }

    /// Log-derivative gradient, verified against the other routes.
    /// Disagreement beyond `route_tol` is an error carrying all values.
    pub fn grad_checked(&self, p: ComplexPoint) -> Result<ArgGradient> {
        let cmp = self.compare_routes(p)?;
        if cmp.max_discrepancy() > self.policy.route_tol {
            return Err(Error::RouteDisagreement {
                sigma: p.sigma,
                t: p.t,
                fd: cmp.fd,
                logd: cmp.logd,
                factor_sum: cmp.factor_sum,
            });
        }
        Ok(cmp.logd)
    }

    /// Finite-difference Cauchy–Riemann residual
    /// `max(|u_s - v_t|, |u_t + v_s|)` and `|W'(s)|`.
    pub fn cauchy_riemann_residual(&self, p: ComplexPoint) -> Result<(f64, f64)> {
        let s = p.to_complex();
        self.clearance(s)?;
        let h = self.policy.fd_step(s);
        let ev = |z| self.model.evaluate(z);
        let ds = central_difference(&ev, s, Complex64::new(h, 0.0))?;
        let dt = central_difference(&ev, s, Complex64::new(0.0, h))?;
        let r1 = (ds.re - dt.im).abs();
        let r2 = (dt.re + ds.im).abs();
        let wprime = (self.model.log_derivative(s)? * self.model.evaluate(s)?).norm();
        Ok((r1.max(r2), wprime))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Factor, RationalFunction};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(sigma: f64, t: f64) -> ComplexPoint {
        ComplexPoint::new(sigma, t).unwrap()
    }

    #[test]
    fn four_case_table() {
        assert!((argument_value(c(1.0, 1.0)).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((argument_value(c(-1.0, 1.0)).unwrap() - 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((argument_value(c(-1.0, -1.0)).unwrap() - 5.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((argument_value(c(1.0, -1.0)).unwrap() + FRAC_PI_4).abs() < 1e-15);
        assert!((argument_value(c(-2.0, 0.0)).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn undefined_on_imaginary_axis() {
        assert!(matches!(argument_value(c(0.0, 1.0)), Err(Error::UndefinedArgument { .. })));
        assert!(matches!(argument_value(c(0.0, 0.0)), Err(Error::UndefinedArgument { .. })));
    }

    #[test]
    fn identity_function_gradient() {
        let f = FactoredFunction::new(vec![Factor::linear(c(0.0, 0.0), 1)]).unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        let p = pt(1.0, 1.0);
        let expect = ArgGradient::new(-0.5, 0.5);
        assert!(field.grad_fd(p).unwrap().max_diff(&expect) < 1e-9);
        assert!(field.grad_logd(p).unwrap().max_diff(&expect) < 1e-15);
        assert!(field.grad_factor_sum(p).unwrap().unwrap().max_diff(&expect) < 1e-15);

        let p = pt(0.0, 1.0);
        let expect = ArgGradient::new(-1.0, 0.0);
        assert!(field.grad_logd(p).unwrap().max_diff(&expect) < 1e-15);
        assert!(field.grad_factor_sum(p).unwrap().unwrap().max_diff(&expect) < 1e-15);
        // u = 0 at this point; the quotient formulas still apply
        assert!(field.grad_fd(p).unwrap().max_diff(&expect) < 1e-9);
    }

    #[test]
    fn pole_flips_sign() {
        let f = FactoredFunction::new(vec![Factor::linear(c(0.0, 0.0), -1)]).unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        let g = field.grad_factor_sum(pt(0.0, 1.0)).unwrap().unwrap();
        assert!(g.max_diff(&ArgGradient::new(1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn exponential_gradient() {
        let gamma = 0.8;
        let f = FactoredFunction::new(vec![Factor::exponential(c(gamma, 0.0), 1)]).unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        for p in [pt(0.3, -2.0), pt(-1.0, 4.0)] {
            let expect = ArgGradient::new(0.0, gamma);
            assert!(field.grad_fd(p).unwrap().max_diff(&expect) < 1e-9);
            assert!(field.grad_logd(p).unwrap().max_diff(&expect) < 1e-15);
            assert!(field.grad_factor_sum(p).unwrap().unwrap().max_diff(&expect) < 1e-15);
        }
    }

    #[test]
    fn vanishes_at_derivative_zero() {
        let f = RationalFunction::new(vec![c(0.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        assert!(field.grad_fd(pt(1.0, 0.0)).unwrap().norm() < 1e-9);

        let f = RationalFunction::new(vec![c(0.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0)])
            .unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        assert!(field.grad_logd(pt(1.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn clearance_is_enforced() {
        let f = FactoredFunction::new(vec![Factor::linear(c(0.0, 0.0), 1)]).unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        assert!(matches!(field.grad_logd(pt(0.01, 0.0)), Err(Error::NearSingularity { .. })));
        assert!(matches!(field.grad_fd(pt(0.0, 0.0)), Err(Error::NearSingularity { .. })));
    }

    #[test]
    fn rotation_and_scaling_invariance() {
        let base = vec![Factor::linear(c(1.0, 2.0), 2), Factor::linear(c(-1.0, 0.5), -1), Factor::exponential(c(0.3, 0.1), 1)];
        let f = FactoredFunction::new(base.clone()).unwrap();
        let rotated = f.with_factors([Factor::constant(c(0.0, 1.0))]).unwrap();
        let scaled = f.with_factors([Factor::constant(c(-3.5, 2.0))]).unwrap();
        let policy = NumericPolicy::default();
        let (a, b, d) = (
            ArgField::new(&f, policy).unwrap(),
            ArgField::new(&rotated, policy).unwrap(),
            ArgField::new(&scaled, policy).unwrap(),
        );
        for p in [pt(0.0, 0.0), pt(2.0, -1.0), pt(-2.5, 3.0)] {
            let g = a.grad_logd(p).unwrap();
            assert_eq!(g, b.grad_logd(p).unwrap());
            assert_eq!(g, d.grad_logd(p).unwrap());
            assert_eq!(a.grad_factor_sum(p).unwrap(), d.grad_factor_sum(p).unwrap());
            assert!(g.max_diff(&b.grad_fd(p).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn conjugate_symmetric_parity() {
        let f = FactoredFunction::new(vec![
            Factor::linear(c(1.0, 2.0), 1),
            Factor::linear(c(1.0, -2.0), 1),
            Factor::linear(c(-0.5, 0.0), -1),
            Factor::exponential(c(0.7, 0.0), 1),
        ])
        .unwrap();
        let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
        for (s, t) in [(0.3, 0.9), (-2.0, 1.5), (2.0, 3.0)] {
            let up = field.grad_logd(pt(s, t)).unwrap();
            let down = field.grad_logd(pt(s, -t)).unwrap();
            assert!((up.d_sigma + down.d_sigma).abs() < 1e-9);
            assert!((up.d_t - down.d_t).abs() < 1e-9);
        }
    }

    #[test]
    fn route_disagreement_is_reported() {
        // A model whose factor-sum form deliberately differs from its log-derivative.
        struct Skewed(FactoredFunction);
        impl Meromorphic for Skewed {
            fn evaluate(&self, s: Complex64) -> Result<Complex64> {
                self.0.evaluate(s)
            }
            fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
                Ok(self.0.log_derivative(s)? + 1e-3)
            }
            fn log_derivative_prime(&self, s: Complex64) -> Result<Complex64> {
                self.0.log_derivative_prime(s)
            }
            fn zeros_and_poles(&self) -> Result<ZerosAndPoles> {
                self.0.zeros_and_poles()
            }
            fn factored_form(&self) -> Option<&FactoredFunction> {
                Some(&self.0)
            }
        }
        let m = Skewed(FactoredFunction::new(vec![Factor::linear(c(0.0, 0.0), 1)]).unwrap());
        let field = ArgField::new(&m, NumericPolicy::default()).unwrap();
        assert!(matches!(field.grad_checked(pt(1.0, 1.0)), Err(Error::RouteDisagreement { .. })));
    }

    fn arb_factors() -> impl Strategy<Value = Vec<Factor>> {
        let root = (-3.0f64..3.0, -3.0f64..3.0, prop_oneof![Just(-2), Just(-1), Just(1), Just(2)])
            .prop_map(|(a, b, m)| Factor::linear(c(a, b), m));
        let expo = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Factor::exponential(c(a, b), 1));
        (proptest::collection::vec(root, 1..6), proptest::option::of(expo)).prop_map(|(mut v, e)| {
            v.extend(e);
            v
        })
    }

    proptest! {
        #[test]
        fn routes_agree_and_invariances_hold(
            factors in arb_factors(), sx in -4.0f64..4.0, tx in -4.0f64..4.0, re in -3.0f64..3.0, im in -3.0f64..3.0
        ) {
            prop_assume!(re.hypot(im) > 1e-3);
            let f = FactoredFunction::new(factors).unwrap();
            let p = pt(sx, tx);
            prop_assume!(f.zeros_and_poles().unwrap().nearest_distance(p.to_complex()) >= 0.5);
            let policy = NumericPolicy::default();
            let field = ArgField::new(&f, policy).unwrap();
            let cmp = field.compare_routes(p).unwrap();
            prop_assert!(cmp.max_discrepancy() <= 1e-6, "{cmp:?}");
            let (cr, wprime) = field.cauchy_riemann_residual(p).unwrap();
            prop_assert!(cr <= 1e-6 * (1.0 + wprime));

            let rotated = f.with_factors([Factor::constant(c(0.0, 1.0))]).unwrap();
            let scaled = f.with_factors([Factor::constant(c(re, im))]).unwrap();
            let g = field.grad_logd(p).unwrap();
            prop_assert_eq!(g, ArgField::new(&rotated, policy).unwrap().grad_logd(p).unwrap());
            prop_assert_eq!(g, ArgField::new(&scaled, policy).unwrap().grad_logd(p).unwrap());
            prop_assert_eq!(
                field.grad_factor_sum(p).unwrap(),
                ArgField::new(&scaled, policy).unwrap().grad_factor_sum(p).unwrap()
            );
        }

        #[test]
        fn conjugate_closed_models_have_parity(
            roots in proptest::collection::vec((-3.0f64..3.0, 0.0f64..3.0, prop_oneof![Just(-1), Just(1)]), 1..4),
            rate in -1.0f64..1.0, sx in -4.0f64..4.0, tx in 0.1f64..4.0
        ) {
            let mut factors = vec![Factor::exponential(c(rate, 0.0), 1)];
            for (a, b, m) in roots {
                factors.push(Factor::linear(c(a, b), m));
                if b != 0.0 {
                    factors.push(Factor::linear(c(a, -b), m));
                }
            }
            let Ok(f) = FactoredFunction::new(factors) else { return Ok(()) };
            prop_assume!(f.zeros_and_poles().unwrap().nearest_distance(c(sx, tx)) >= 0.5);
            let field = ArgField::new(&f, NumericPolicy::default()).unwrap();
            let up = field.grad_logd(pt(sx, tx)).unwrap();
            let down = field.grad_logd(pt(sx, -tx)).unwrap();
            prop_assert!((up.d_sigma + down.d_sigma).abs() <= 1e-9);
            prop_assert!((up.d_t - down.d_t).abs() <= 1e-9);
        }
    }
}
