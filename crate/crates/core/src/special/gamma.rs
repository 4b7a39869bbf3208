use super::{GradientTail, TailBound};
use crate::argfield::ArgGradient;
use crate::certifier::Partial;
use crate::complex::{ComplexPoint, NumericPolicy, Rectangle};
use crate::error::{Error, Result};
use crate::model::{ln_1p, CompensatedSum, Factor, FactoredFunction, Meromorphic, ZerosAndPoles};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// The constant `r` of the Weierstrass product.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const MIN_TRUNCATION: usize = 10;
/// `2 zeta(6) / (2 pi)^6`, the Euler–Maclaurin remainder constant after
/// the `B_6` term.
const EM_REMAINDER: f64 = 3.307_4e-5 * 1.000_1;

/// `Gamma(s) = 1 / (s e^{r s} prod_{k <= N} (1 + s/k) e^{-s/k})` as a
/// factored model, plus an Euler–Maclaurin estimate of the omitted
/// `k > N` factors.
///
/// The factored form (used by the certifier and the factor-sum route) is
/// the plain truncation; the estimate enters through
/// [`Meromorphic::residual_log_derivative`] and makes `L` accurate to
/// about `4e-3 / (N - |sigma|)^6`.
#[derive(Debug, Clone)]
pub struct GammaModel {
    truncation_n: usize,
    euler_gamma: f64,
    tail_correction: bool,
    factored: FactoredFunction,
}

pub fn build_gamma(n: usize) -> Result<GammaModel> {
    if n < MIN_TRUNCATION {
        return Err(Error::Domain(format!("gamma truncation must be at least {MIN_TRUNCATION}, got {n}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut factors = vec![Factor::linear(zero, -1), Factor::exponential(Complex64::new(EULER_GAMMA, 0.0), -1)];
    for k in 1..=n {
        let k = k as f64;
        factors.push(Factor::scaled(Complex64::new(-k, 0.0), -1));
        factors.push(Factor::exponential(Complex64::new(-1.0 / k, 0.0), -1));
    }
    Ok(GammaModel { truncation_n: n, euler_gamma: EULER_GAMMA, tail_correction: true, factored: FactoredFunction::new(factors)? })
}

impl GammaModel {
    pub fn truncation_n(&self) -> usize {
        self.truncation_n
    }

    pub fn euler_gamma(&self) -> f64 {
        self.euler_gamma
    }

    pub fn factored(&self) -> &FactoredFunction {
        &self.factored
    }

    pub fn tail_correction(&self) -> bool {
        self.tail_correction
    }

    /// Switches the Euler–Maclaurin tail estimate on or off; off gives the
    /// bare truncated product.
    pub fn with_tail_correction(mut self, on: bool) -> Self {
        self.tail_correction = on;
        self
    }

    fn n(&self) -> f64 {
        self.truncation_n as f64
    }

    /// Bound on the error of the Euler–Maclaurin estimate of `L` at `s`.
    pub fn correction_error(&self, s: Complex64) -> Result<f64> {
        let n = self.n();
        let gap = n - s.re.abs();
        if gap <= 1.0 {
            return Err(self.too_small(s.re));
        }
        Ok(EM_REMAINDER * 120.0 * (n.powi(-6) + gap.powi(-6)))
    }

    fn too_small(&self, sigma: f64) -> Error {
        Error::TruncationTooSmall {
            n: self.truncation_n,
            reason: format!("need N > |sigma| + 10 at sigma = {sigma}"),
        }
    }

    /// Interval containing `sum_{k>N}` of each gradient component at `s`.
    pub fn tail_at(&self, s: ComplexPoint) -> Result<GradientTail> {
        self.tail_over(s.sigma.abs(), s.t.abs(), s.t.signum_or_zero())
    }

    /// Tail interval of `partial` valid everywhere on `region`.
    pub fn tail_margin(&self, region: &Rectangle, partial: Partial) -> Result<TailBound> {
        let s_max = region.sigma_min.abs().max(region.sigma_max.abs());
        let t_max = region.t_min.abs().max(region.t_max.abs());
        let t_sign = if region.t_min >= 0.0 {
            1.0
        } else if region.t_max <= 0.0 {
            -1.0
        } else {
            f64::NAN
        };
        let tail = self.tail_over(s_max, t_max, t_sign)?;
        Ok(match partial {
            Partial::Sigma => tail.d_sigma,
            Partial::T => tail.d_t,
        })
    }

    /// `t_sign` is the sign shared by all `t` considered (0 for the real
    /// axis, NaN when mixed).
    fn tail_over(&self, s_max: f64, t_max: f64, t_sign: f64) -> Result<GradientTail> {
        let n = self.n();
        if n <= s_max + 10.0 {
            return Err(self.too_small(s_max));
        }
        // t / ((sigma+k)^2 + t^2) summed over k > N is at most
        // |t| * int_{N-|sigma|}^inf dx / (x^2 + t^2)
        let b = if t_max == 0.0 { 0.0 } else { FRAC_PI_2 - ((n - s_max) / t_max).atan() };
        let d_sigma = if t_sign > 0.0 {
            TailBound { lower: 0.0, upper: b }
        } else if t_sign < 0.0 {
            TailBound { lower: -b, upper: 0.0 }
        } else if t_sign == 0.0 {
            TailBound { lower: 0.0, upper: 0.0 }
        } else {
            TailBound::symmetric(b)
        };
        // |1/k - (sigma+k)/|s+k|^2| = |sigma k + |s|^2| / (k |s+k|^2)
        let c = 1.0 - s_max / n;
        let d_t = (s_max / n + (s_max * s_max + t_max * t_max) / (2.0 * n * n)) / (c * c);
        Ok(GradientTail { d_sigma, d_t: TailBound::symmetric(d_t) })
    }

    /// `Psi(x)` for real `x` from the model (with the tail estimate if on).
    pub fn psi_real(&self, x: f64) -> Result<f64> {
        Ok(self.log_derivative(Complex64::new(x, 0.0))?.re)
    }

    fn tail_l(&self, s: Complex64) -> Complex64 {
        let n = Complex64::new(self.n(), 0.0);
        let ns = n + s;
        let p = |k: i32| n.powi(-k) - ns.powi(-k);
        let f = p(1);
        let f1 = -p(2);
        let f3 = -6.0 * p(4);
        let f5 = -120.0 * p(6);
        ln_1p(s / n) - f / 2.0 - f1 / 12.0 + f3 / 720.0 - f5 / 30240.0
    }

    fn tail_l_prime(&self, s: Complex64) -> Complex64 {
        let ns = Complex64::new(self.n(), 0.0) + s;
        let g = ns.powi(-2);
        let g1 = -2.0 * ns.powi(-3);
        let g3 = -24.0 * ns.powi(-5);
        let g5 = -720.0 * ns.powi(-7);
        ns.inv() - g / 2.0 - g1 / 12.0 + g3 / 720.0 - g5 / 30240.0
    }

    /// `sum_{k>N} (s/k - ln(1 + s/k))`, the log of the omitted factors.
    fn tail_log(&self, s: Complex64) -> Complex64 {
        let n = self.n();
        let nc = Complex64::new(n, 0.0);
        let z = s / n;
        let integral = ((1.0 + z) * ln_1p(z) - z) * n;
        let q = s / n - ln_1p(z);
        let q1 = 1.0 / n - (nc + s).inv() - s / (n * n);
        let q3 = -6.0 * s / n.powi(4) - 2.0 * (nc + s).powi(-3) + 2.0 / n.powi(3);
        integral - q / 2.0 - q1 / 12.0 + q3 / 720.0
    }
}

trait SignumOrZero {
    fn signum_or_zero(self) -> f64;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(self) -> f64 {
        if self == 0.0 {
            0.0
        } else {
            self.signum()
        }
    }
}

impl Meromorphic for GammaModel {
    fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let w = self.factored.evaluate(s)?;
        if !self.tail_correction {
            return Ok(w);
        }
        crate::model::finite(w * self.tail_log(s).exp(), "gamma")
    }

    fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.factored.log_derivative(s)? + self.residual_log_derivative(s)?)
    }

    fn log_derivative_prime(&self, s: Complex64) -> Result<Complex64> {
        let lp = self.factored.log_derivative_prime(s)?;
        if !self.tail_correction {
            return Ok(lp);
        }
        Ok(lp + self.tail_l_prime(s))
    }

    fn zeros_and_poles(&self) -> Result<ZerosAndPoles> {
        self.factored.zeros_and_poles()
    }

    fn factored_form(&self) -> Option<&FactoredFunction> {
        Some(&self.factored)
    }

    fn residual_log_derivative(&self, s: Complex64) -> Result<Complex64> {
        if !self.tail_correction {
            return Ok(Complex64::new(0.0, 0.0));
        }
        crate::model::finite(self.tail_l(s), "gamma tail")
    }
}

/// Truncated gradient sums, the interval holding the omitted `k > N`
/// terms, and the tail-corrected estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaGradient {
    pub truncated: ArgGradient,
    pub tail: GradientTail,
    pub corrected: ArgGradient,
}

/// Both argument partials of the truncated Gamma product at `s`:
///
/// `d_sigma = t/|s|^2 + sum_k t/((sigma+k)^2 + t^2)`
/// `d_t = -sigma/|s|^2 - r - sum_k ((sigma+k)/((sigma+k)^2 + t^2) - 1/k)`
///
/// summed in ascending `k` with compensation; the `d_t` terms stay paired
/// with `1/k` because the halves diverge separately.
pub fn gamma_grad(model: &GammaModel, s: ComplexPoint) -> Result<GammaGradient> {
    let radius = NumericPolicy::default().singular_radius;
    let (sigma, t) = (s.sigma, s.t);
    let tail = model.tail_at(s)?;
    let nearest_pole = if sigma > 0.0 { 0.0 } else { sigma.round().max(-model.n()) };
    let distance = (sigma - nearest_pole).hypot(t);
    if distance < radius {
        return Err(Error::NearSingularity { sigma, t, distance });
    }
    let q0 = sigma * sigma + t * t;
    let mut acc = CompensatedSum::default();
    acc.add(Complex64::new(-sigma / q0 - model.euler_gamma, t / q0));
    for k in 1..=model.truncation_n {
        let kf = k as f64;
        let x = sigma + kf;
        let q = x * x + t * t;
        acc.add(Complex64::new(1.0 / kf - x / q, t / q));
    }
    let sum = acc.total();
    let truncated = ArgGradient { d_sigma: sum.im, d_t: sum.re };
    let extra = model.residual_log_derivative(s.to_complex())?;
    let corrected = ArgGradient { d_sigma: sum.im + extra.im, d_t: sum.re + extra.re };
    Ok(GammaGradient { truncated, tail, corrected })
}

/// Real zeros of the digamma function: the positive one, then one in each
/// `(-m, -m+1)`, `m = 1..count-1`, by bisection on `Psi` (the `d_t`
/// component on the real axis) from the model of truncation `n`.
pub fn digamma_real_zeros(count: usize, n: usize) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-8;
    if count > 20 {
        return Err(Error::Domain(format!("at most 20 digamma zeros, requested {count}")));
    }
    let model = build_gamma(n)?;
    let reach = count as f64;
    if (n as f64) <= reach + 10.0 {
        return Err(model.too_small(-reach));
    }
    // an error e in Psi moves a zero by about e / Psi' and Psi' > 0.9 on
    // the real axis
    let err = model.correction_error(Complex64::new(-reach, 0.0))?;
    if err > 0.1 * TOL {
        return Err(Error::TruncationTooSmall {
            n,
            reason: format!("tail estimate error {err:e} exceeds the bisection tolerance {TOL:e}"),
        });
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (lo, hi) = if i == 0 { (1.0, 2.0) } else { (-(i as f64) + 1e-9, -(i as f64) + 1.0 - 1e-9) };
        out.push(bisect(|x| model.psi_real(x), lo, hi)?);
    }
    Ok(out)
}

/// Root of an increasing-through-zero function on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Domain(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argfield::{ArgField, GradientRoute};
    use crate::certifier::{certify_termwise, Sign};
    use crate::locator::locate;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Digamma by upward recurrence to x >= 20 and the asymptotic series.
    fn psi_oracle(mut x: f64) -> f64 {
        let mut acc = 0.0;
        while x < 20.0 {
            acc -= 1.0 / x;
            x += 1.0;
        }
        let x2 = 1.0 / (x * x);
        acc + x.ln() - 0.5 / x - x2 * (1.0 / 12.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 / 240.0)))
    }

    fn oracle_zero(lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if psi_oracle(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    /// Gamma(x) for real x > 0 from Stirling's series after shifting up.
    fn gamma_oracle(x: f64) -> f64 {
        let mut y = x;
        let mut scale = 1.0;
        while y < 20.0 {
            scale *= y;
            y += 1.0;
        }
        let ln = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * y)
            - 1.0 / (360.0 * y.powi(3))
            + 1.0 / (1260.0 * y.powi(5));
        ln.exp() / scale
    }

    #[test]
    fn oracle_sanity() {
        assert!((psi_oracle(1.0) + EULER_GAMMA).abs() < 1e-13);
        assert!((gamma_oracle(5.0) - 24.0).abs() < 24.0 * 2e-12);
    }

    #[test]
    fn evaluates_gamma_at_one() {
        let bare = build_gamma(100).unwrap().with_tail_correction(false);
        let v = bare.evaluate(c(1.0, 0.0)).unwrap();
        assert!((v.re - 1.0).abs() < 0.02 && v.im.abs() < 1e-15, "{v}");
        // at s = 1 the product telescopes to exp(H_N - r) / (N + 1)
        let harmonic: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
        assert!((v.re - (harmonic - EULER_GAMMA).exp() / 101.0).abs() < 1e-13);
        let corrected = build_gamma(100).unwrap().evaluate(c(1.0, 0.0)).unwrap();
        assert!((corrected.re - 1.0).abs() < 1e-12, "{corrected}");
        let g = build_gamma(100).unwrap().evaluate(c(3.7, 0.0)).unwrap().re;
        assert!((g - gamma_oracle(3.7)).abs() < 1e-11 * g);
    }

    #[test]
    fn poles_are_nonpositive_integers() {
        let zp = build_gamma(25).unwrap().zeros_and_poles().unwrap();
        assert!(zp.zeros.is_empty());
        let mut poles: Vec<f64> = zp.poles.iter().map(|p| p.point.sigma).collect();
        poles.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (0..=25).rev().map(|k| -(k as f64)).collect();
        assert_eq!(poles, expected);
        assert!(zp.poles.iter().all(|p| p.multiplicity == 1 && p.point.t == 0.0));
        assert!(build_gamma(9).is_err());
    }

    #[test]
    fn sigma_partial_is_positive_above_the_axis() {
        let m = build_gamma(1000).unwrap();
        let g = gamma_grad(&m, ComplexPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert!(g.truncated.d_sigma > 0.9);
        let field = ArgField::new(&m, NumericPolicy::default()).unwrap();
        let fs = field.grad(ComplexPoint::new(0.0, 1.0).unwrap(), GradientRoute::FactorSum).unwrap().unwrap();
        assert!(fs.d_sigma > 0.0);
    }

    #[test]
    fn d_t_on_the_real_axis_is_digamma() {
        let m = build_gamma(1000).unwrap();
        for x in [0.3, 1.0, 1.4616, 2.5, 7.0, -0.5, -3.3] {
            let g = gamma_grad(&m, ComplexPoint::new(x, 0.0).unwrap()).unwrap();
            assert!((g.corrected.d_t - psi_oracle_any(x)).abs() < 1e-12, "x = {x}");
            assert_eq!(g.truncated.d_sigma, 0.0);
        }
        let g = gamma_grad(&m, ComplexPoint::new(1.461_632_1, 0.001).unwrap()).unwrap();
        assert!(g.corrected.norm() < 2e-3);
    }

    /// Psi for any real non-pole x via the reflection formula.
    fn psi_oracle_any(x: f64) -> f64 {
        if x > 0.0 {
            psi_oracle(x)
        } else {
            psi_oracle(1.0 - x) - std::f64::consts::PI / (std::f64::consts::PI * x).tan()
        }
    }

    #[test]
    fn digamma_zeros_match_the_oracle() {
        let zeros = digamma_real_zeros(7, 1000).unwrap();
        let mut expected = vec![oracle_zero(1.0, 2.0)];
        for m in 1..7 {
            let m = m as f64;
            // reflection turns the negative zeros into a search for Psi(1-x) = pi cot(pi x)
            let (mut lo, mut hi) = (-m + 1e-9, -m + 1.0 - 1e-9);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if psi_oracle_any(mid) < 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            expected.push(0.5 * (lo + hi));
        }
        for (z, e) in zeros.iter().zip(&expected) {
            assert!((z - e).abs() < 1e-9, "{z} vs {e}");
        }
        assert!((zeros[0] - 1.461_632_14).abs() < 1e-6);
        assert!((zeros[1] + 0.504_083_00).abs() < 1e-6);
        // the interval (-5, 2) holds the positive zero and four negative ones
        // plus the one in (-5, -4)
        assert_eq!(zeros.iter().filter(|z| **z > -5.0 && **z < 2.0).count(), 6);
    }

    #[test]
    fn digamma_preconditions() {
        assert!(matches!(digamma_real_zeros(21, 1000), Err(Error::Domain(_))));
        assert!(matches!(digamma_real_zeros(5, 15), Err(Error::TruncationTooSmall { .. })));
        // N = 16 clears |sigma| + 10 but its tail estimate is too coarse
        assert!(matches!(digamma_real_zeros(5, 16), Err(Error::TruncationTooSmall { .. })));
        assert!(digamma_real_zeros(5, 40).is_ok());
        assert!(digamma_real_zeros(0, 100).unwrap().is_empty());
    }

    #[test]
    fn grad_errors() {
        let m = build_gamma(20).unwrap();
        assert!(matches!(
            gamma_grad(&m, ComplexPoint::new(-2.01, 0.0).unwrap()),
            Err(Error::NearSingularity { .. })
        ));
        assert!(matches!(
            gamma_grad(&m, ComplexPoint::new(-10.5, 1.0).unwrap()),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn conjugate_parity(sigma in -9.0..9.0f64, t in 0.1..9.0f64) {
            let m = build_gamma(200).unwrap();
            let up = gamma_grad(&m, ComplexPoint::new(sigma, t).unwrap()).unwrap();
            let down = gamma_grad(&m, ComplexPoint::new(sigma, -t).unwrap()).unwrap();
            prop_assert_eq!(up.truncated.d_sigma, -down.truncated.d_sigma);
            prop_assert_eq!(up.truncated.d_t, down.truncated.d_t);
        }

        #[test]
        fn built_models_are_closed_under_conjugation(n in 10usize..400) {
            prop_assert!(build_gamma(n).unwrap().factored().is_conjugate_symmetric(0.0));
        }
    }

    #[test]
    fn doubling_the_truncation_stays_inside_the_tail() {
        use rand::{Rng, SeedableRng};
        let small = build_gamma(1000).unwrap();
        let large = build_gamma(2000).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 1000 {
            let p = ComplexPoint::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)).unwrap();
            let Ok(a) = gamma_grad(&small, p) else { continue };
            let b = gamma_grad(&large, p).unwrap();
            checked += 1;
            assert!(a.tail.d_sigma.contains(b.truncated.d_sigma - a.truncated.d_sigma), "{p:?}");
            assert!(a.tail.d_t.contains(b.truncated.d_t - a.truncated.d_t), "{p:?}");
            // the corrected values agree far more tightly
            assert!(a.corrected.max_diff(&b.corrected) < 1e-12);
        }
    }

    #[test]
    fn upper_half_plane_certificate() {
        let m = build_gamma(1000).unwrap();
        let region = Rectangle::new(-10.0, 10.0, 0.1, 10.0).unwrap();
        let out = certify_termwise(m.factored(), region, Partial::Sigma).unwrap();
        let cert = out.certificate().expect("certified");
        assert_eq!(cert.sign, Sign::Positive);
        let tail = m.tail_margin(&region, Partial::Sigma).unwrap();
        assert_eq!(tail.adverse(Sign::Positive), 0.0);
        assert!(super::super::covers_tail(cert, &tail));
    }

    #[test]
    fn located_roots_are_the_real_digamma_zeros() {
        let m = build_gamma(1000).unwrap();
        let report = locate(&m, Rectangle::new(-6.0, 4.0, -5.0, 5.0).unwrap(), &NumericPolicy::default()).unwrap();
        let roots: Vec<_> = report.confirmed().collect();
        let zeros = digamma_real_zeros(7, 1000).unwrap();
        assert_eq!(roots.len(), zeros.len());
        for r in &roots {
            assert!(r.point.t.abs() <= 1e-7);
            assert!(zeros.iter().any(|z| (z - r.point.sigma).abs() < 1e-6), "{r:?}");
        }
    }
}
