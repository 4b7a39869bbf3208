use super::{finite, Factor, FactoredFunction, Meromorphic, Singularity, ZerosAndPoles};
use crate::complex::ComplexPoint;
use crate::error::{Error, Result};
use crate::poly::{cluster_roots, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest numerator/denominator degree handled by the root-finding paths.
pub const MAX_ORACLE_DEGREE: usize = 12;

/// Relative radius used to group roots of `N` or `D` into multiple roots.
const MULTIPLICITY_TOL: f64 = 1e-5;

/// Numerator roots closer than this to a denominator root make the model invalid.
const COMMON_ROOT_TOL: f64 = 1e-6;

/// `W = N / D` with dense complex coefficients.
///
/// For degrees up to [`MAX_ORACLE_DEGREE`] the zeros and poles are found
/// once at construction and cached, together with the equivalent product
/// form.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    numerator: Polynomial,
    denominator: Polynomial,
    cache: Option<(ZerosAndPoles, FactoredFunction)>,
}

#[derive(Serialize, Deserialize)]
struct RationalRecord {
    numerator: Vec<[f64; 2]>,
    denominator: Vec<[f64; 2]>,
}

impl Serialize for RationalFunction {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let pack = |p: &Polynomial| p.coeffs().iter().map(|c| [c.re, c.im]).collect();
        RationalRecord { numerator: pack(&self.numerator), denominator: pack(&self.denominator) }
            .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for RationalFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = RationalRecord::deserialize(de)?;
        let unpack = |v: &[[f64; 2]]| v.iter().map(|&[a, b]| Complex64::new(a, b)).collect::<Vec<_>>();
        RationalFunction::new(unpack(&r.numerator), unpack(&r.denominator)).map_err(serde::de::Error::custom)
    }
}

impl RationalFunction {
    /// Builds `N/D` from ascending coefficient lists.
    pub fn new(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        Self::from_polynomials(Polynomial::new(numerator), Polynomial::new(denominator))
    }

    pub fn from_polynomials(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        for p in [&numerator, &denominator] {
            if p.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::InvalidModel("non-finite coefficient".into()));
            }
        }
        if numerator.is_zero() {
            return Err(Error::InvalidModel("numerator is identically zero".into()));
        }
        if denominator.is_zero() {
            return Err(Error::InvalidModel("denominator is identically zero".into()));
        }
        let mut f = Self { numerator, denominator, cache: None };
        if f.numerator.degree() <= MAX_ORACLE_DEGREE && f.denominator.degree() <= MAX_ORACLE_DEGREE {
            let zn = f.numerator.roots(MAX_ORACLE_DEGREE)?;
            let zd = f.denominator.roots(MAX_ORACLE_DEGREE)?;
            for a in &zn {
                if let Some(b) = zd.iter().find(|b| (*b - a).norm() <= COMMON_ROOT_TOL) {
                    return Err(Error::InvalidModel(format!(
                        "numerator and denominator share the root {b}"
                    )));
                }
            }
            let zeros = cluster_roots(&zn, MULTIPLICITY_TOL);
            let poles = cluster_roots(&zd, MULTIPLICITY_TOL);
            let to_sing = |v: &[(Complex64, u32)]| -> Result<Vec<Singularity>> {
                v.iter()
                    .map(|&(z, m)| Ok(Singularity { point: ComplexPoint::from_complex(z)?, multiplicity: m }))
                    .collect()
            };
            let zp = ZerosAndPoles { zeros: to_sing(&zeros)?, poles: to_sing(&poles)? };
            let mut factors = vec![Factor::constant(f.numerator.leading() / f.denominator.leading())];
            factors.extend(zeros.iter().map(|&(z, m)| Factor::linear(z, m as i32)));
            factors.extend(poles.iter().map(|&(z, m)| Factor::linear(z, -(m as i32))));
            f.cache = Some((zp, FactoredFunction::new(factors)?));
        }
        Ok(f)
    }

    /// Builds `lead * prod (s - z_i) / prod (s - p_j)`.
    pub fn from_roots(lead: Complex64, zeros: &[Complex64], poles: &[Complex64]) -> Result<Self> {
        Self::from_polynomials(
            Polynomial::from_roots(lead, zeros),
            Polynomial::from_roots(Complex64::new(1.0, 0.0), poles),
        )
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    /// `N' D - N D'`, the numerator of `W'`.
    pub fn wprime_numerator(&self) -> Polynomial {
        self.numerator
            .derivative()
            .mul(&self.denominator)
            .sub(&self.numerator.mul(&self.denominator.derivative()))
    }

    /// Zeros of `W'` away from the poles of `W`, found purely by polynomial
    /// algebra: roots of `N'D - ND'` with roots of `D` removed.
    ///
    /// Serves as the independent reference for the locator.
    pub fn wprime_numerator_roots(&self, dedup_radius: f64) -> Result<Vec<Complex64>> {
        let max = MAX_ORACLE_DEGREE;
        for p in [&self.numerator, &self.denominator] {
            if p.degree() > max {
                return Err(Error::DegreeTooLarge { degree: p.degree(), max });
            }
        }
        let p = self.wprime_numerator();
        if p.is_zero() {
            return Ok(Vec::new());
        }
        let poles = self.denominator.roots(max)?;
        let roots = p.roots(2 * max)?;
        Ok(roots
            .into_iter()
            .map(|r| self.polish_wprime_root(r))
            .filter(|r| poles.iter().all(|q| (q - r).norm() > dedup_radius))
            .collect())
    }

    /// Newton on `N'D - ND'` evaluated from the factors rather than the
    /// expanded product, which is better conditioned.
    fn polish_wprime_root(&self, mut z: Complex64) -> Complex64 {
        let g = |s: Complex64| {
            let (n, n1, n2) = self.numerator.eval_derivs(s);
            let (d, d1, d2) = self.denominator.eval_derivs(s);
            (n1 * d - n * d1, n2 * d - n * d2)
        };
        let mut best = g(z).0.norm();
        for _ in 0..4 {
            let (v, dv) = g(z);
            if dv == Complex64::new(0.0, 0.0) {
                break;
            }
            let cand = z - v / dv;
            let val = g(cand).0.norm();
            if !(val < best) || (cand - z).norm() > 1e-3 {
                break;
            }
            best = val;
            z = cand;
        }
        z
    }
}

impl Meromorphic for RationalFunction {
    fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let d = self.denominator.eval(s);
        if d == Complex64::new(0.0, 0.0) {
            return Err(Error::PoleHit { sigma: s.re, t: s.im });
        }
        finite(self.numerator.eval(s) / d, "evaluate")
            .map_err(|_| Error::PoleHit { sigma: s.re, t: s.im })
    }

    fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
        let (n, n1, _) = self.numerator.eval_derivs(s);
        let (d, d1, _) = self.denominator.eval_derivs(s);
        finite(n1 / n - d1 / d, "log_derivative")
    }

    fn log_derivative_prime(&self, s: Complex64) -> Result<Complex64> {
        let (n, n1, n2) = self.numerator.eval_derivs(s);
        let (d, d1, d2) = self.denominator.eval_derivs(s);
        let a = n1 / n;
        let b = d1 / d;
        // (N''N - N'^2)/N^2 - (D''D - D'^2)/D^2
        finite((n2 / n - a * a) - (d2 / d - b * b), "log_derivative_prime")
    }

    fn zeros_and_poles(&self) -> Result<ZerosAndPoles> {
        match &self.cache {
            Some((zp, _)) => Ok(zp.clone()),
            None => Err(Error::DegreeTooLarge {
                degree: self.numerator.degree().max(self.denominator.degree()),
                max: MAX_ORACLE_DEGREE,
            }),
        }
    }

    fn factored_form(&self) -> Option<&FactoredFunction> {
        self.cache.as_ref().map(|(_, f)| f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v
    }

    #[test]
    fn wprime_roots_of_cubic() {
        let f = RationalFunction::new(real(&[0.0, -3.0, 0.0, 1.0]), real(&[1.0])).unwrap();
        let r = sorted(f.wprime_numerator_roots(1e-6).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn wprime_roots_of_quadratic() {
        let f = RationalFunction::new(real(&[0.0, -2.0, 1.0]), real(&[1.0])).unwrap();
        let r = f.wprime_numerator_roots(1e-6).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wprime_roots_of_quotient() {
        // (s^2 + 1)/s: N'D - ND' = s^2 - 1
        let f = RationalFunction::new(real(&[1.0, 0.0, 1.0]), real(&[0.0, 1.0])).unwrap();
        assert_eq!(f.wprime_numerator(), Polynomial::from_real(&[-1.0, 0.0, 1.0]));
        let r = sorted(f.wprime_numerator_roots(1e-6).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).norm() < 1e-14 && (r[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn constant_and_linear_have_no_wprime_roots() {
        let f = RationalFunction::new(real(&[2.0, 1.0]), real(&[1.0])).unwrap();
        assert!(f.wprime_numerator_roots(1e-6).unwrap().is_empty());
    }

    #[test]
    fn zeros_and_poles_of_quadratic() {
        let f = RationalFunction::new(real(&[-1.0, 0.0, 1.0]), real(&[1.0])).unwrap();
        let zp = f.zeros_and_poles().unwrap();
        assert!(zp.poles.is_empty());
        let mut z: Vec<f64> = zp.zeros.iter().map(|s| s.point.sigma).collect();
        z.sort_by(f64::total_cmp);
        assert!((z[0] + 1.0).abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
        assert!(zp.zeros.iter().all(|s| s.multiplicity == 1));
    }

    #[test]
    fn double_root_multiplicity() {
        let f = RationalFunction::from_roots(c(1.0, 0.0), &[c(1.0, 1.0), c(1.0, 1.0)], &[c(-2.0, 0.0)]).unwrap();
        let zp = f.zeros_and_poles().unwrap();
        assert_eq!(zp.zeros.len(), 1);
        assert_eq!(zp.zeros[0].multiplicity, 2);
    }

    #[test]
    fn degree_limit() {
        let f = RationalFunction::from_roots(c(1.0, 0.0), &vec![c(0.1, 0.0); 13], &[]).unwrap();
        assert!(matches!(f.zeros_and_poles(), Err(Error::DegreeTooLarge { .. })));
        assert!(matches!(f.wprime_numerator_roots(1e-6), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn rejects_common_roots_and_zero_polynomials() {
        assert!(RationalFunction::from_roots(c(1.0, 0.0), &[c(1.0, 0.0)], &[c(1.0, 0.0)]).is_err());
        assert!(RationalFunction::new(real(&[0.0]), real(&[1.0])).is_err());
        assert!(RationalFunction::new(real(&[1.0]), real(&[])).is_err());
    }

    #[test]
    fn log_derivatives_match_factored_form() {
        let f = RationalFunction::from_roots(c(2.0, 1.0), &[c(1.0, 2.0), c(-3.0, 0.5)], &[c(0.0, -1.0)]).unwrap();
        let g = f.factored_form().unwrap();
        let s = c(0.7, 0.2);
        assert!((f.log_derivative(s).unwrap() - g.log_derivative(s).unwrap()).norm() < 1e-13);
        assert!((f.log_derivative_prime(s).unwrap() - g.log_derivative_prime(s).unwrap()).norm() < 1e-13);
        assert!((f.evaluate(s).unwrap() - g.evaluate(s).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn oracle_residual_is_small() {
        let f = RationalFunction::from_roots(
            c(1.0, 0.0),
            &[c(1.0, 2.0), c(-3.0, 0.5), c(4.0, -4.0), c(0.0, 0.0)],
            &[c(0.0, -1.0), c(2.5, 2.5)],
        )
        .unwrap();
        let p = f.wprime_numerator();
        let scale = p.max_coeff_abs();
        for r in f.wprime_numerator_roots(1e-6).unwrap() {
            assert!(p.eval(r).norm() <= 1e-8 * scale);
        }
    }
}
