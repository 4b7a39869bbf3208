use super::TailBound;
use crate::certifier::{certify_termwise, CertifyOutcome, ExclusionCertificate, Partial, Sign};
use crate::complex::{NumericPolicy, Rectangle};
use crate::error::{Error, Result};
use crate::locator::{locate_with_singularities, RootStatus};
use crate::model::{Factor, FactoredFunction, Meromorphic, ZerosAndPoles};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::io::Read;

/// First 200 zeta-zero ordinates shipped with the crate.
pub const BUNDLED_ZEROS: &str = include_str!("../../data/zeta_zeros_200.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaZeroTable {
    pub ordinates: Vec<f64>,
    /// SHA-256 of the ingested bytes.
    pub source_digest: String,
}

impl ZetaZeroTable {
    pub fn bundled() -> Self {
        ingest_zeta_zeros(BUNDLED_ZEROS.as_bytes()).expect("bundled table is well formed")
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

/// Parses one ordinate per line; blank lines and lines starting with `#`
/// are skipped. Line numbers in errors are 1-based.
pub fn ingest_zeta_zeros<R: Read>(mut source: R) -> Result<ZetaZeroTable> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Parse { line: 0, message: e.to_string() })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse { line: 0, message: e.to_string() })?;
    let mut ordinates: Vec<f64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let v: f64 = s.parse().map_err(|_| Error::Parse { line, message: format!("not a number: {s:?}") })?;
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Parse { line, message: format!("ordinate must be positive and finite, got {s}") });
        }
        if ordinates.last().is_some_and(|&prev| v <= prev) {
            return Err(Error::NonMonotone { line });
        }
        ordinates.push(v);
    }
    Ok(ZetaZeroTable { ordinates, source_digest: hex::encode(Sha256::digest(&bytes)) })
}

/// Hadamard product `(1/2) prod (1 - s/rho)` over the first `n` ordinates,
/// with zeros placed at `assumed_sigma +- i t` and, off the critical line,
/// also at `1 - assumed_sigma +- i t`.
#[derive(Debug, Clone)]
pub struct XiModel {
    ordinates: Vec<f64>,
    /// First omitted ordinate, when the table has one.
    next_ordinate: Option<f64>,
    assumed_sigma: f64,
    source_digest: String,
    factored: FactoredFunction,
}

pub fn build_xi(table: &ZetaZeroTable, n: usize, assumed_sigma: f64) -> Result<XiModel> {
    if n == 0 || n > table.len() {
        return Err(Error::Domain(format!("truncation {n} outside 1..={}", table.len())));
    }
    if !(assumed_sigma > 0.0 && assumed_sigma < 1.0) {
        return Err(Error::Domain(format!("assumed_sigma must lie in (0, 1), got {assumed_sigma}")));
    }
    if table.ordinates[0] <= 14.0 {
        return Err(Error::Domain(format!("first ordinate {} is not above 14", table.ordinates[0])));
    }
    let ordinates = table.ordinates[..n].to_vec();
    let mut columns = vec![assumed_sigma];
    if assumed_sigma != 0.5 {
        columns.push(1.0 - assumed_sigma);
    }
    let mut factors = vec![Factor::constant(Complex64::new(0.5, 0.0))];
    for &t in &ordinates {
        for &sigma in &columns {
            factors.push(Factor::scaled(Complex64::new(sigma, t), 1));
            factors.push(Factor::scaled(Complex64::new(sigma, -t), 1));
        }
    }
    Ok(XiModel {
        ordinates,
        next_ordinate: table.ordinates.get(n).copied(),
        assumed_sigma,
        source_digest: table.source_digest.clone(),
        factored: FactoredFunction::new(factors)?,
    })
}

/// Upper bound on `N(T)`, the number of zeta zeros with `0 < t <= T`.
fn zero_count_upper(t: f64) -> f64 {
    if t < 14.0 {
        return 0.0;
    }
    let main = t / (2.0 * PI) * (t / (2.0 * PI * std::f64::consts::E)).ln() + 7.0 / 8.0;
    main + 0.112 * t.ln() + 0.278 * t.ln().ln() + 2.51
}

impl XiModel {
    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn truncation_n(&self) -> usize {
        self.ordinates.len()
    }

    pub fn assumed_sigma(&self) -> f64 {
        self.assumed_sigma
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn factored(&self) -> &FactoredFunction {
        &self.factored
    }

    /// Interval holding the contribution of the zeros beyond the table
    /// prefix to `partial` anywhere on `region`, assuming those zeros lie
    /// in the open critical strip. Outside the strip the `d_t` terms of the
    /// omitted zeros share the sign of `sigma - 1/2`, which collapses one
    /// side of the interval.
    pub fn tail_margin(&self, region: &Rectangle, partial: Partial) -> Result<TailBound> {
        let t_reach = region.t_min.abs().max(region.t_max.abs());
        let start = self.next_ordinate.unwrap_or(*self.ordinates.last().expect("nonempty"));
        if start <= t_reach + 1.0 {
            return Err(Error::TruncationTooSmall {
                n: self.truncation_n(),
                reason: format!("omitted ordinates start at {start}, within reach of |t| <= {t_reach}"),
            });
        }
        let x = region.sigma_max.abs().max((1.0 - region.sigma_min).abs()).max(region.sigma_min.abs()).max((region.sigma_max - 1.0).abs());
        // bound per omitted ordinate u on the pair rho, conj(rho)
        let (pair_bound, pair_slope): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match partial {
            Partial::T => (
                Box::new(move |u| 2.0 * x / (u - t_reach).powi(2)),
                Box::new(move |u| 4.0 * x / (u - t_reach).powi(3)),
            ),
            Partial::Sigma => (
                Box::new(move |u| 2.0 * t_reach / (u - t_reach).powi(2) + 2.0 * x * x / (u - t_reach).powi(3)),
                Box::new(move |u| 4.0 * t_reach / (u - t_reach).powi(3) + 6.0 * x * x / (u - t_reach).powi(4)),
            ),
        };
        let magnitude = stieltjes_tail(start, t_reach, self.truncation_n() as f64, &*pair_bound, &*pair_slope);
        Ok(match partial {
            Partial::T if region.sigma_min >= 1.0 => TailBound { lower: 0.0, upper: magnitude },
            Partial::T if region.sigma_max <= 0.0 => TailBound { lower: -magnitude, upper: 0.0 },
            _ => TailBound::symmetric(magnitude),
        })
    }
}

/// `sum_{gamma >= start} f(gamma)` over zeta ordinates beyond the first
/// `n`, for decreasing `f`, via
/// `int_start^inf (N(u) - n) (-f'(u)) du` with `N` replaced by its upper
/// bound. Quadrature after `u = reach + (start - reach) / w^2`.
fn stieltjes_tail(start: f64, reach: f64, n: f64, f: &dyn Fn(f64) -> f64, neg_slope: &dyn Fn(f64) -> f64) -> f64 {
    const PANELS: usize = 4096;
    let d = start - reach;
    let integrand = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let u = reach + d / (w * w);
        let excess = (zero_count_upper(u) - n).max(0.0);
        excess * neg_slope(u) * 2.0 * d / (w * w * w)
    };
    // composite Simpson on (0, 1]
    let h = 1.0 / PANELS as f64;
    let mut sum = integrand(0.0) + integrand(1.0);
    for i in 1..PANELS {
        let w = i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(w);
    }
    let integral = sum * h / 3.0;
    // the boundary term at `start` when the count bound already exceeds n
    let boundary = (zero_count_upper(start) - n).max(0.0) * f(start);
    1.05 * integral.max(0.0) + boundary
}

impl Meromorphic for XiModel {
    fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        self.factored.evaluate(s)
    }

    fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
        self.factored.log_derivative(s)
    }

    fn log_derivative_prime(&self, s: Complex64) -> Result<Complex64> {
        self.factored.log_derivative_prime(s)
    }

    fn zeros_and_poles(&self) -> Result<ZerosAndPoles> {
        self.factored.zeros_and_poles()
    }

    fn factored_form(&self) -> Option<&FactoredFunction> {
        Some(&self.factored)
    }
}

/// Roots of `xi'` found between one pair of consecutive ordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRoots {
    pub lower_ordinate: f64,
    pub upper_ordinate: f64,
    pub roots: Vec<f64>,
    pub max_sigma_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLineReport {
    pub band_half_width: f64,
    pub gaps: Vec<GapRoots>,
    /// Certificates for the band on either side of the critical line.
    pub band_certificates: Vec<ExclusionCertificate>,
}

impl CriticalLineReport {
    pub fn roots(&self) -> Vec<f64> {
        self.gaps.iter().flat_map(|g| g.roots.iter().copied()).collect()
    }
}

/// Half-width of the searched band around the critical line.
pub const BAND_HALF_WIDTH: f64 = 0.25;
/// Roots closer than this to the critical line count as on it.
pub const LINE_TOL: f64 = 1e-8;

/// Zeros of `xi'` of the truncated model between consecutive ordinates
/// inside `t_range`. Each gap is searched on the thin rectangle
/// `|sigma - 1/2| <= BAND_HALF_WIDTH`; the parts of that band off the line
/// are then certified root-free with the `d_t` partial, whose terms
/// `(sigma - 1/2) / |s - rho|^2` all share the sign of `sigma - 1/2`.
pub fn xi_critical_line_derivative_zeros(model: &XiModel, t_range: (f64, f64)) -> Result<CriticalLineReport> {
    if model.assumed_sigma != 0.5 {
        return Err(Error::Domain("critical-line search needs zeros placed on sigma = 1/2".into()));
    }
    let (lo, hi) = t_range;
    let ords = model.ordinates();
    if !(lo < hi) || lo < ords[0] || hi > *ords.last().expect("nonempty") {
        return Err(Error::Domain(format!("t range [{lo}, {hi}] outside the ordinate span [{}, {}]", ords[0], ords[ords.len() - 1])));
    }
    let singular = model.zeros_and_poles()?;
    let policy = NumericPolicy { grid_density: 16, ..Default::default() };
    let w = BAND_HALF_WIDTH;
    let mut gaps = Vec::new();
    let mut band_certificates = Vec::new();
    for pair in ords.windows(2).filter(|p| p[0] >= lo && p[1] <= hi) {
        let (a, b) = (pair[0], pair[1]);
        let region = Rectangle::new(0.5 - w, 0.5 + w, a, b)?;
        let report = locate_with_singularities(model, &singular, region, &policy)?;
        let mut roots = Vec::new();
        let mut deviation: f64 = 0.0;
        for r in report.roots.iter().filter(|r| r.status == RootStatus::Confirmed) {
            let dev = (r.point.sigma - 0.5).abs();
            if dev > LINE_TOL {
                return Err(Error::OffLineRoot { sigma: r.point.sigma, t: r.point.t });
            }
            deviation = deviation.max(dev);
            roots.push(r.point.t);
        }
        for (side, expected) in [(Rectangle::new(0.5 + LINE_TOL, 0.5 + w, a, b)?, Sign::Positive), (Rectangle::new(0.5 - w, 0.5 - LINE_TOL, a, b)?, Sign::Negative)] {
            match certify_termwise(&model.factored, side, Partial::T)? {
                CertifyOutcome::Certified(c) if c.sign == expected => band_certificates.push(c),
                other => {
                    return Err(Error::BandNotCertified(format!(
                        "sigma in [{}, {}], t in [{a}, {b}]: {other:?}",
                        side.sigma_min, side.sigma_max
                    )))
                }
            }
        }
        gaps.push(GapRoots { lower_ordinate: a, upper_ordinate: b, roots, max_sigma_deviation: deviation });
    }
    Ok(CriticalLineReport { band_half_width: w, gaps, band_certificates })
}
