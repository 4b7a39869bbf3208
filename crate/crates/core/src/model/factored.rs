use super::{finite, Meromorphic, Singularity, ZerosAndPoles};
use crate::complex::ComplexPoint;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// Base of a single factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorBase {
    /// `(s - rho)`
    Linear(Complex64),
    /// `(1 - s/rho)`, `rho != 0`
    Scaled(Complex64),
    /// `exp(c s)`
    Exponential(Complex64),
    /// `a`, `a != 0`
    Constant(Complex64),
}

impl FactorBase {
    pub fn kind(&self) -> &'static str {
        match self {
            FactorBase::Linear(_) => "linear",
            FactorBase::Scaled(_) => "scaled",
            FactorBase::Exponential(_) => "exponential",
            FactorBase::Constant(_) => "constant",
        }
    }

    pub fn value(&self) -> Complex64 {
        match *self {
            FactorBase::Linear(z)
            | FactorBase::Scaled(z)
            | FactorBase::Exponential(z)
            | FactorBase::Constant(z) => z,
        }
    }

    /// Location of the zero of the base, if it has one.
    pub fn root(&self) -> Option<Complex64> {
        match *self {
            FactorBase::Linear(r) | FactorBase::Scaled(r) => Some(r),
            _ => None,
        }
    }

    fn conj(&self) -> Self {
        match *self {
            FactorBase::Linear(z) => FactorBase::Linear(z.conj()),
            FactorBase::Scaled(z) => FactorBase::Scaled(z.conj()),
            FactorBase::Exponential(z) => FactorBase::Exponential(z.conj()),
            FactorBase::Constant(z) => FactorBase::Constant(z.conj()),
        }
    }
}

/// `base ^ multiplicity`; negative multiplicities are pole factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FactorRecord", try_from = "FactorRecord")]
pub struct Factor {
    pub base: FactorBase,
    pub multiplicity: i32,
}

impl Factor {
    pub fn new(base: FactorBase, multiplicity: i32) -> Result<Self> {
        let f = Self { base, multiplicity };
        f.validate()?;
        Ok(f)
    }

    pub fn linear(rho: Complex64, m: i32) -> Self {
        Self { base: FactorBase::Linear(rho), multiplicity: m }
    }

    pub fn scaled(rho: Complex64, m: i32) -> Self {
        Self { base: FactorBase::Scaled(rho), multiplicity: m }
    }

    pub fn exponential(c: Complex64, m: i32) -> Self {
        Self { base: FactorBase::Exponential(c), multiplicity: m }
    }

    pub fn constant(a: Complex64) -> Self {
        Self { base: FactorBase::Constant(a), multiplicity: 1 }
    }

    fn validate(&self) -> Result<()> {
        let v = self.base.value();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite {} factor", self.base.kind())));
        }
        if self.multiplicity == 0 {
            return Err(Error::InvalidModel("factor multiplicity must be nonzero".into()));
        }
        match self.base {
            FactorBase::Scaled(r) if r == Complex64::new(0.0, 0.0) => {
                Err(Error::InvalidModel("scaled factor needs rho != 0".into()))
            }
            FactorBase::Constant(a) if a == Complex64::new(0.0, 0.0) => {
                Err(Error::InvalidModel("constant factor must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Flat record form used in model files: `{base_kind, re, im, multiplicity}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorRecord {
    pub base_kind: String,
    pub re: f64,
    pub im: f64,
    pub multiplicity: i32,
}

impl From<Factor> for FactorRecord {
    fn from(f: Factor) -> Self {
        let v = f.base.value();
        Self { base_kind: f.base.kind().to_string(), re: v.re, im: v.im, multiplicity: f.multiplicity }
    }
}

impl TryFrom<FactorRecord> for Factor {
    type Error = Error;

    fn try_from(r: FactorRecord) -> Result<Self> {
        let z = Complex64::new(r.re, r.im);
        let base = match r.base_kind.as_str() {
            "linear" => FactorBase::Linear(z),
            "scaled" => FactorBase::Scaled(z),
            "exponential" | "exp" => FactorBase::Exponential(z),
            "constant" | "const" => FactorBase::Constant(z),
            other => return Err(Error::InvalidModel(format!("unknown base_kind {other:?}"))),
        };
        Factor::new(base, r.multiplicity)
    }
}

/// Product of factors. Identical bases are merged at construction and
/// bases whose multiplicities cancel are dropped, so zeros and poles never
/// coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredFunction {
    factors: Vec<Factor>,
    roots: Vec<(Complex64, i32)>,
    exp_rate: Complex64,
}

impl Serialize for FactoredFunction {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.factors.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FactoredFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let factors = Vec::<Factor>::deserialize(de)?;
        FactoredFunction::new(factors).map_err(serde::de::Error::custom)
    }
}

#[derive(Hash, PartialEq, Eq)]
struct BaseKey(u8, u64, u64);

fn key(base: &FactorBase) -> BaseKey {
    let tag = match base {
        FactorBase::Linear(_) => 0,
        FactorBase::Scaled(_) => 1,
        FactorBase::Exponential(_) => 2,
        FactorBase::Constant(_) => 3,
    };
    let v = base.value();
    // +0.0 and -0.0 must hash alike
    BaseKey(tag, (v.re + 0.0).to_bits(), (v.im + 0.0).to_bits())
}

impl FactoredFunction {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut merged: Vec<Factor> = Vec::with_capacity(factors.len());
        let mut index: HashMap<BaseKey, usize> = HashMap::new();
        let mut constant = Complex64::new(1.0, 0.0);
        let mut has_constant = false;
        for f in factors {
            f.validate()?;
            if let FactorBase::Constant(a) = f.base {
                constant *= a.powi(f.multiplicity);
                has_constant = true;
                continue;
            }
            match index.get(&key(&f.base)) {
                Some(&i) => merged[i].multiplicity += f.multiplicity,
                None => {
                    index.insert(key(&f.base), merged.len());
                    merged.push(f);
                }
            }
        }
        merged.retain(|f| f.multiplicity != 0);
        if has_constant {
            if constant == Complex64::new(0.0, 0.0) || !constant.re.is_finite() || !constant.im.is_finite() {
                return Err(Error::InvalidModel("constant factors do not combine to a finite nonzero value".into()));
            }
            merged.push(Factor::constant(constant));
        }

        let mut roots: Vec<(Complex64, i32)> = Vec::new();
        let mut root_index: HashMap<(u64, u64), (usize, u8)> = HashMap::new();
        let mut exp_rate = Complex64::new(0.0, 0.0);
        for f in &merged {
            match f.base {
                FactorBase::Linear(r) | FactorBase::Scaled(r) => {
                    let tag = if matches!(f.base, FactorBase::Linear(_)) { 0 } else { 1 };
                    let k = ((r.re + 0.0).to_bits(), (r.im + 0.0).to_bits());
                    match root_index.get(&k) {
                        Some(&(_, other)) if other != tag => {
                            return Err(Error::InvalidModel(format!(
                                "linear and scaled factors share the point {r}"
                            )))
                        }
                        Some(&(i, _)) => roots[i].1 += f.multiplicity,
                        None => {
                            root_index.insert(k, (roots.len(), tag));
                            roots.push((r, f.multiplicity));
                        }
                    }
                }
                FactorBase::Exponential(c) => exp_rate += c * f.multiplicity as f64,
                FactorBase::Constant(_) => {}
            }
        }
        Ok(Self { factors: merged, roots, exp_rate })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Distinct zero/pole locations with signed multiplicity.
    pub fn roots(&self) -> &[(Complex64, i32)] {
        &self.roots
    }

    /// Sum of `m c` over exponential factors; the constant part of `L`.
    pub fn exp_rate(&self) -> Complex64 {
        self.exp_rate
    }

    /// Returns this product multiplied by further factors.
    pub fn with_factors(&self, extra: impl IntoIterator<Item = Factor>) -> Result<Self> {
        let mut all = self.factors.clone();
        all.extend(extra);
        Self::new(all)
    }

    /// SHA-256 of the canonical JSON factor list.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(&self.factors).expect("factor records serialize");
        hex::encode(Sha256::digest(json))
    }

    /// True if the factor multiset is closed under complex conjugation.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let mut used = vec![false; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate() {
            if used[i] {
                continue;
            }
            let target = f.base.conj();
            let partner = (0..self.factors.len()).find(|&j| {
                !used[j]
                    && (j != i || (target.value() - f.base.value()).norm() <= tol)
                    && self.factors[j].multiplicity == f.multiplicity
                    && self.factors[j].base.kind() == target.kind()
                    && (self.factors[j].base.value() - target.value()).norm() <= tol
            });
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return false,
            }
        }
        true
    }
}

/// `ln(1 + z)` without the cancellation of forming `1 + z` for small `z`.
pub(crate) fn ln_1p(z: Complex64) -> Complex64 {
    if z.norm() > 0.5 {
        return (Complex64::new(1.0, 0.0) + z).ln();
    }
    let (x, y) = (z.re, z.im);
    let re = 0.5 * (x * (2.0 + x) + y * y).ln_1p();
    let im = y.atan2(1.0 + x);
    Complex64::new(re, im)
}

/// Neumaier-compensated complex accumulator.
#[derive(Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: Complex64) {
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.comp.im);
    }

    pub(crate) fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier(sum: f64, v: f64, comp: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *comp += (sum - t) + v;
    } else {
        *comp += (v - t) + sum;
    }
    t
}

impl Meromorphic for FactoredFunction {
    fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let mut log = CompensatedSum::default();
        let mut vanishes = false;
        for f in &self.factors {
            let m = f.multiplicity as f64;
            match f.base {
                FactorBase::Linear(r) | FactorBase::Scaled(r) => {
                    if s == r {
                        if f.multiplicity > 0 {
                            vanishes = true;
                            continue;
                        }
                        return Err(Error::PoleHit { sigma: s.re, t: s.im });
                    }
                    let ln = match f.base {
                        FactorBase::Linear(_) => (s - r).ln(),
                        _ => ln_1p(-s / r),
                    };
                    log.add(ln * m);
                }
                FactorBase::Exponential(c) => log.add(c * s * m),
                FactorBase::Constant(a) => log.add(a.ln() * m),
            }
        }
        if vanishes {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let w = log.total().exp();
        if w.re.is_finite() && w.im.is_finite() {
            Ok(w)
        } else {
            Err(Error::PoleHit { sigma: s.re, t: s.im })
        }
    }

    fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
        let mut l = self.exp_rate;
        for &(r, m) in &self.roots {
            l += (s - r).inv() * m as f64;
        }
        finite(l, "log_derivative")
    }

    fn log_derivative_prime(&self, s: Complex64) -> Result<Complex64> {
        let mut lp = Complex64::new(0.0, 0.0);
        for &(r, m) in &self.roots {
            let d = s - r;
            lp -= (d * d).inv() * m as f64;
        }
        finite(lp, "log_derivative_prime")
    }

    fn zeros_and_poles(&self) -> Result<ZerosAndPoles> {
        let mut out = ZerosAndPoles::default();
        for &(r, m) in &self.roots {
            let s = Singularity { point: ComplexPoint::from_complex(r)?, multiplicity: m.unsigned_abs() };
            if m > 0 {
                out.zeros.push(s);
            } else if m < 0 {
                out.poles.push(s);
            }
        }
        Ok(out)
    }

    fn factored_form(&self) -> Option<&FactoredFunction> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn evaluate_examples() {
        let f = FactoredFunction::new(vec![Factor::linear(c(1.0, 0.0), 1), Factor::linear(c(-1.0, 0.0), 1)]).unwrap();
        assert!(close(f.evaluate(c(2.0, 0.0)).unwrap(), c(3.0, 0.0), 1e-14));

        let f = FactoredFunction::new(vec![Factor::linear(c(0.0, 1.0), -1)]).unwrap();
        assert!(close(f.evaluate(c(0.0, 0.0)).unwrap(), c(0.0, 1.0), 1e-15));

        let f = FactoredFunction::new(vec![Factor::exponential(c(2.0, 0.0), 1)]).unwrap();
        let w = f.evaluate(c(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(close(w, c(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn evaluate_at_zero_and_pole() {
        let f = FactoredFunction::new(vec![Factor::linear(c(1.0, 0.0), 2), Factor::linear(c(0.0, 0.0), -1)]).unwrap();
        assert_eq!(f.evaluate(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(f.evaluate(c(0.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn log_derivative_examples() {
        let f = FactoredFunction::new(vec![Factor::linear(c(0.0, 0.0), 1)]).unwrap();
        assert!(close(f.log_derivative(c(1.0, 1.0)).unwrap(), c(0.5, -0.5), 1e-16));

        let f = FactoredFunction::new(vec![Factor::exponential(c(3.0, -2.0), 1)]).unwrap();
        assert_eq!(f.log_derivative(c(0.3, 7.0)).unwrap(), c(3.0, -2.0));
        assert_eq!(f.log_derivative_prime(c(0.3, 7.0)).unwrap(), c(0.0, 0.0));

        let f = FactoredFunction::new(vec![Factor::linear(c(1.0, 0.0), 2), Factor::linear(c(-1.0, 0.0), -1)]).unwrap();
        assert!(close(f.log_derivative(c(0.0, 0.0)).unwrap(), c(-3.0, 0.0), 1e-15));
    }

    #[test]
    fn log_derivative_prime_examples() {
        let f = FactoredFunction::new(vec![Factor::linear(c(0.0, 0.0), 1)]).unwrap();
        assert!(close(f.log_derivative_prime(c(0.0, 1.0)).unwrap(), c(1.0, 0.0), 1e-15));
        let f = FactoredFunction::new(vec![Factor::linear(c(2.0, 0.0), 3)]).unwrap();
        assert!(close(f.log_derivative_prime(c(3.0, 0.0)).unwrap(), c(-3.0, 0.0), 1e-15));
    }

    #[test]
    fn scaled_and_linear_share_log_derivative() {
        let rho = c(2.0, -1.0);
        let a = FactoredFunction::new(vec![Factor::linear(rho, 2)]).unwrap();
        let b = FactoredFunction::new(vec![Factor::scaled(rho, 2)]).unwrap();
        let s = c(0.3, 0.4);
        assert_eq!(a.log_derivative(s).unwrap(), b.log_derivative(s).unwrap());
        // (s - rho) = -rho (1 - s/rho)
        let ratio = a.evaluate(s).unwrap() / b.evaluate(s).unwrap();
        assert!(close(ratio, rho * rho, 1e-13));
    }

    #[test]
    fn zeros_and_poles_read_from_factors() {
        let f = FactoredFunction::new(vec![Factor::linear(c(1.0, 0.0), 1), Factor::linear(c(0.0, -1.0), -2)]).unwrap();
        let zp = f.zeros_and_poles().unwrap();
        assert_eq!(zp.zeros, vec![Singularity { point: ComplexPoint { sigma: 1.0, t: 0.0 }, multiplicity: 1 }]);
        assert_eq!(zp.poles, vec![Singularity { point: ComplexPoint { sigma: 0.0, t: -1.0 }, multiplicity: 2 }]);

        let f = FactoredFunction::new(vec![Factor::constant(c(5.0, 0.0))]).unwrap();
        assert!(f.zeros_and_poles().unwrap().is_empty());
    }

    #[test]
    fn opposite_multiplicities_cancel() {
        let f = FactoredFunction::new(vec![
            Factor::linear(c(1.0, 0.0), 2),
            Factor::linear(c(1.0, 0.0), -2),
            Factor::linear(c(2.0, 0.0), 1),
        ])
        .unwrap();
        assert_eq!(f.factors().len(), 1);
        assert_eq!(f.zeros_and_poles().unwrap().zeros.len(), 1);
        assert!(f.zeros_and_poles().unwrap().poles.is_empty());
    }

    #[test]
    fn rejects_invalid_factors() {
        assert!(Factor::new(FactorBase::Scaled(c(0.0, 0.0)), 1).is_err());
        assert!(Factor::new(FactorBase::Constant(c(0.0, 0.0)), 1).is_err());
        assert!(Factor::new(FactorBase::Linear(c(1.0, 0.0)), 0).is_err());
        assert!(FactoredFunction::new(vec![Factor::linear(c(1.0, 0.0), 1), Factor::scaled(c(1.0, 0.0), -1)]).is_err());
    }

    #[test]
    fn record_round_trip() {
        let f = FactoredFunction::new(vec![
            Factor::linear(c(1.0, 2.0), -1),
            Factor::exponential(c(0.5, 0.0), 1),
            Factor::constant(c(2.0, 0.0)),
        ])
        .unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"base_kind\":\"linear\""));
        let back: FactoredFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.digest(), f.digest());
    }

    #[test]
    fn conjugate_symmetry_detection() {
        let sym = FactoredFunction::new(vec![Factor::scaled(c(0.5, 14.0), 1), Factor::scaled(c(0.5, -14.0), 1)]).unwrap();
        assert!(sym.is_conjugate_symmetric(0.0));
        let asym = FactoredFunction::new(vec![Factor::scaled(c(0.5, 14.0), 1)]).unwrap();
        assert!(!asym.is_conjugate_symmetric(0.0));
    }

    fn arb_factors() -> impl Strategy<Value = Vec<Factor>> {
        let root = (-3.0f64..3.0, -3.0f64..3.0, prop_oneof![Just(-2), Just(-1), Just(1), Just(2), Just(3)], any::<bool>())
            .prop_map(|(a, b, m, scaled)| {
                if scaled && (a != 0.0 || b != 0.0) {
                    Factor::scaled(c(a, b), m)
                } else {
                    Factor::linear(c(a, b), m)
                }
            });
        let expo = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Factor::exponential(c(a, b), 1));
        (proptest::collection::vec(root, 1..6), proptest::option::of(expo)).prop_map(|(mut v, e)| {
            v.extend(e);
            v
        })
    }

    proptest! {
        #[test]
        fn log_derivative_matches_finite_differences(
            factors in arb_factors(), sx in -4.0f64..4.0, tx in -4.0f64..4.0
        ) {
            let f = FactoredFunction::new(factors).unwrap();
            let s = c(sx, tx);
            let zp = f.zeros_and_poles().unwrap();
            prop_assume!(zp.nearest_distance(s) >= 0.5);
            let h = f64::EPSILON.cbrt() * s.norm().max(1.0);
            let w = f.evaluate(s).unwrap();
            let dw = (f.evaluate(s + h).unwrap() - f.evaluate(s - h).unwrap()) / (2.0 * h);
            let l = f.log_derivative(s).unwrap();
            prop_assert!((dw / w - l).norm() <= 1e-6 * l.norm().max(1.0));

            let dl = (f.log_derivative(s + h).unwrap() - f.log_derivative(s - h).unwrap()) / (2.0 * h);
            let lp = f.log_derivative_prime(s).unwrap();
            prop_assert!((dl - lp).norm() <= 1e-5 * lp.norm().max(1.0));
        }
    }
}
