//! Exclusion certificates: proofs that one partial of the argument keeps a
//! strict sign on a rectangle, so `W'` has no zero there.
//!
//! Every Linear/Scaled factor contributes `m/(s - rho)` to `L`, i.e.
//! `m * K(x, y)` to `d_t` and `-m * K(y, x)` to `d_sigma` where
//! `x = sigma - sigma_rho`, `y = t - t_rho` and `K(p, q) = p / (p^2 + q^2)`.
//! Exponential factors add constants. Both methods bound `K` in closed form
//! over boxes.

use crate::complex::Rectangle;
use crate::error::{Error, Result};
use crate::model::{Factor, FactorBase, FactoredFunction};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const DEFAULT_MAX_DEPTH: u32 = 12;
/// Largest number of cells examined on one subdivision level.
pub const CELL_BUDGET: usize = 1 << 16;
/// Undecided cells listed in a failure record.
pub const MAX_REPORTED_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partial {
    Sigma,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMethod {
    TermwiseSign,
    IntervalBound,
}

impl fmt::Display for Partial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partial::Sigma => "sigma",
            Partial::T => "t",
        })
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

impl fmt::Display for CertMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertMethod::TermwiseSign => "termwise_sign",
            CertMethod::IntervalBound => "interval_bound",
        })
    }
}

/// `partial` has sign `sign` and magnitude at least `margin` everywhere on
/// `region`, for the model whose digest is `model_digest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionCertificate {
    pub region: Rectangle,
    pub partial: Partial,
    pub sign: Sign,
    pub method: CertMethod,
    pub margin: f64,
    pub model_digest: String,
}

impl ExclusionCertificate {
    /// `key: value` text record.
    pub fn to_record(&self) -> String {
        let r = &self.region;
        format!(
            "region: {} {} {} {}\npartial: {}\nsign: {}\nmethod: {}\nmargin: {:e}\nmodel: {}\n",
            r.sigma_min, r.sigma_max, r.t_min, r.t_max, self.partial, self.sign, self.method, self.margin, self.model_digest
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum CertificateFailure {
    /// A term whose sign is not fixed on the region or opposes the others.
    /// `factor` is `None` for the combined exponential part.
    OffendingTerm { factor: Option<Factor>, lower: f64, upper: f64 },
    /// Every term has a fixed sign but none is bounded away from zero.
    NoStrictTerm,
    /// Cells where the summed bound still contains zero at the depth limit.
    Undecided { cells: Vec<Rectangle>, undecided_count: usize, max_depth: u32 },
    /// Cells proven positive and cells proven negative: the partial changes
    /// sign inside the region.
    MixedLeafSigns { positive: Rectangle, negative: Rectangle },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertifyOutcome {
    Certified(ExclusionCertificate),
    Failed(CertificateFailure),
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&ExclusionCertificate> {
        match self {
            CertifyOutcome::Certified(c) => Some(c),
            CertifyOutcome::Failed(_) => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certificate().is_some()
    }
}

/// Range of `K(p, q) = p / (p^2 + q^2)` over `[p0, p1] x [q0, q1]`.
/// Infinite when the box contains the origin.
pub fn k_range(p0: f64, p1: f64, q0: f64, q1: f64) -> (f64, f64) {
    let lo = -k_max(-p1, -p0, q0, q1);
    (lo, k_max(p0, p1, q0, q1))
}

fn k_max(p0: f64, p1: f64, q0: f64, q1: f64) -> f64 {
    let q_near = if q0 <= 0.0 && q1 >= 0.0 { 0.0 } else { q0.abs().min(q1.abs()) };
    let q_far = q0.abs().max(q1.abs());
    let k = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p / (p * p + q * q) };
    if p1 > 0.0 {
        // positive values: nearest q, p as close to q_near as allowed
        let a = p0.max(0.0);
        if q_near == 0.0 {
            return if a > 0.0 { 1.0 / a } else { f64::INFINITY };
        }
        let p = q_near.clamp(a, p1);
        k(p, q_near)
    } else {
        // all p <= 0: the value closest to zero sits at an endpoint, far q
        k(p0, q_far).max(k(p1, q_far))
    }
}

/// Bounds of each term of `partial` over `region`; the last entry is the
/// combined exponential constant (if nonzero).
fn term_ranges(f: &FactoredFunction, region: &Rectangle, partial: Partial) -> Vec<(Option<Factor>, f64, f64)> {
    let mut out = Vec::with_capacity(f.factors().len() + 1);
    for factor in f.factors() {
        let r = match factor.base {
            FactorBase::Linear(r) | FactorBase::Scaled(r) => r,
            _ => continue,
        };
        let (lo, hi) = root_term_range(r, factor.multiplicity, region, partial);
        out.push((Some(*factor), lo, hi));
    }
    let c = exp_constant(f, partial);
    if c != 0.0 {
        out.push((None, c, c));
    }
    out
}

fn exp_constant(f: &FactoredFunction, partial: Partial) -> f64 {
    match partial {
        Partial::Sigma => f.exp_rate().im,
        Partial::T => f.exp_rate().re,
    }
}

fn root_term_range(r: Complex64, m: i32, region: &Rectangle, partial: Partial) -> (f64, f64) {
    let (x0, x1) = (region.sigma_min - r.re, region.sigma_max - r.re);
    let (y0, y1) = (region.t_min - r.im, region.t_max - r.im);
    let (lo, hi, scale) = match partial {
        Partial::T => {
            let (lo, hi) = k_range(x0, x1, y0, y1);
            (lo, hi, m as f64)
        }
        Partial::Sigma => {
            let (lo, hi) = k_range(y0, y1, x0, x1);
            (lo, hi, -(m as f64))
        }
    };
    if scale >= 0.0 {
        (scale * lo, scale * hi)
    } else {
        (scale * hi, scale * lo)
    }
}

/// Relative slack covering rounding in `n` closed-form terms and their sum.
fn rounding_slack(n: usize, magnitude: f64) -> f64 {
    (n as f64 + 4.0) * 4.0 * f64::EPSILON * magnitude
}

fn check_region(f: &FactoredFunction, region: &Rectangle) -> Result<()> {
    region.validate()?;
    for &(r, _) in f.roots() {
        if region.contains_complex(r) {
            return Err(Error::RegionTouchesSingularity { sigma: r.re, t: r.im });
        }
    }
    Ok(())
}

/// Certifies by checking that every term shares one sign over the region.
/// The margin is the sum of per-term minima of `|term|`, less rounding slack.
pub fn certify_termwise(f: &FactoredFunction, region: Rectangle, partial: Partial) -> Result<CertifyOutcome> {
    check_region(f, &region)?;
    let terms = term_ranges(f, &region, partial);
    let positive = terms.iter().filter(|(_, lo, _)| *lo > 0.0).count();
    let negative = terms.iter().filter(|(_, _, hi)| *hi < 0.0).count();
    let sign = if positive >= negative { Sign::Positive } else { Sign::Negative };
    let conforms = |lo: f64, hi: f64| match sign {
        Sign::Positive => lo >= 0.0,
        Sign::Negative => hi <= 0.0,
    };
    if let Some((factor, lo, hi)) = terms.iter().find(|(_, lo, hi)| !conforms(*lo, *hi)) {
        return Ok(CertifyOutcome::Failed(CertificateFailure::OffendingTerm {
            factor: *factor,
            lower: *lo,
            upper: *hi,
        }));
    }
    let nearest: Vec<f64> = terms
        .iter()
        .map(|(_, lo, hi)| match sign {
            Sign::Positive => *lo,
            Sign::Negative => -*hi,
        })
        .collect();
    let total: f64 = nearest.iter().sum();
    let margin = total - rounding_slack(f.roots().len() + 1, total);
    if !(margin > 0.0) {
        return Ok(CertifyOutcome::Failed(CertificateFailure::NoStrictTerm));
    }
    Ok(CertifyOutcome::Certified(ExclusionCertificate {
        region,
        partial,
        sign,
        method: CertMethod::TermwiseSign,
        margin,
        model_digest: f.digest(),
    }))
}

/// Bounds the whole partial over `cell` by summing closed-form term ranges.
pub fn partial_bounds(f: &FactoredFunction, cell: &Rectangle, partial: Partial) -> (f64, f64) {
    let c = exp_constant(f, partial);
    let (mut lo, mut hi, mut lo_mag, mut hi_mag) = (c, c, c.abs(), c.abs());
    for &(r, m) in f.roots() {
        let (a, b) = root_term_range(r, m, cell, partial);
        lo += a;
        hi += b;
        lo_mag += a.abs();
        hi_mag += b.abs();
    }
    let n = f.roots().len() + 1;
    (lo - rounding_slack(n, lo_mag), hi + rounding_slack(n, hi_mag))
}

enum Cell {
    Signed(Sign, f64),
    Split,
    Undecided,
}

/// Certifies by adaptive quadrisection; each cell is decided by the summed
/// term bounds. The margin is the smallest distance from zero over leaves.
pub fn certify_interval(f: &FactoredFunction, region: Rectangle, partial: Partial) -> Result<CertifyOutcome> {
    certify_interval_with_depth(f, region, partial, DEFAULT_MAX_DEPTH)
}

pub fn certify_interval_with_depth(
    f: &FactoredFunction,
    region: Rectangle,
    partial: Partial,
    max_depth: u32,
) -> Result<CertifyOutcome> {
    check_region(f, &region)?;
    let mut level = vec![region];
    let mut depth = 0;
    let mut margin = f64::INFINITY;
    let mut seen: Option<(Sign, Rectangle)> = None;
    let mut undecided: Vec<Rectangle> = Vec::new();
    let mut undecided_count = 0;
    while !level.is_empty() {
        let last = depth >= max_depth;
        let verdicts: Vec<Cell> = level
            .par_iter()
            .map(|cell| {
                let (lo, hi) = partial_bounds(f, cell, partial);
                if lo > 0.0 {
                    Cell::Signed(Sign::Positive, lo)
                } else if hi < 0.0 {
                    Cell::Signed(Sign::Negative, -hi)
                } else if last {
                    Cell::Undecided
                } else {
                    Cell::Split
                }
            })
            .collect();
        let mut next = Vec::new();
        for (cell, verdict) in level.iter().zip(verdicts) {
            match verdict {
                Cell::Signed(sign, m) => {
                    match seen {
                        Some((s, other)) if s != sign => {
                            let (positive, negative) = if sign == Sign::Positive { (*cell, other) } else { (other, *cell) };
                            return Ok(CertifyOutcome::Failed(CertificateFailure::MixedLeafSigns { positive, negative }));
                        }
                        Some(_) => {}
                        None => seen = Some((sign, *cell)),
                    }
                    margin = margin.min(m);
                }
                Cell::Split => next.extend(cell.quadrants()),
                Cell::Undecided => {
                    undecided_count += 1;
                    if undecided.len() < MAX_REPORTED_CELLS {
                        undecided.push(*cell);
                    }
                }
            }
        }
        if next.len() > CELL_BUDGET {
            undecided_count += next.len();
            undecided.extend(next.iter().take(MAX_REPORTED_CELLS.saturating_sub(undecided.len())));
            next.clear();
        }
        level = next;
        depth += 1;
    }
    if undecided_count > 0 {
        return Ok(CertifyOutcome::Failed(CertificateFailure::Undecided { cells: undecided, undecided_count, max_depth }));
    }
    let (sign, _) = seen.expect("a nonempty region has at least one decided leaf");
    Ok(CertifyOutcome::Certified(ExclusionCertificate {
        region,
        partial,
        sign,
        method: CertMethod::IntervalBound,
        margin,
        model_digest: f.digest(),
    }))
}

pub fn certify(f: &FactoredFunction, region: Rectangle, partial: Partial, method: CertMethod) -> Result<CertifyOutcome> {
    match method {
        CertMethod::TermwiseSign => certify_termwise(f, region, partial),
        CertMethod::IntervalBound => certify_interval(f, region, partial),
    }
}

/// Value of `partial` at `s` from the closed-form factor sum.
pub fn partial_value(f: &FactoredFunction, s: Complex64, partial: Partial) -> f64 {
    let g = crate::argfield::factor_sum(f, s);
    match partial {
        Partial::Sigma => g.d_sigma,
        Partial::T => g.d_t,
    }
}
