//! Zeros of `W'` inside a rectangle.
//!
//! A zero of `W'` away from zeros and poles of `W` is exactly a point where
//! `(d phi/d sigma, d phi/d t) = (Im L, Re L)` vanishes. The locator seeds
//! a uniform grid and runs damped Newton on that real 2-D system, whose
//! Jacobian is `[[Im L', Re L'], [Re L', -Im L']]` with determinant
//! `-|L'|^2`.

use crate::argfield::ArgField;
use crate::complex::{ComplexPoint, NumericPolicy, Rectangle};
use crate::error::{Error, Result};
use crate::model::{Meromorphic, ZerosAndPoles};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Below this `|L'|` the Newton step is not taken.
pub const JACOBIAN_FLOOR: f64 = 1e-14;

/// A converged point with `|L'|` below this is treated as a multiple root
/// of `W'` and not confirmed.
pub const MULTIPLE_ROOT_SLOPE: f64 = 1e-7;

const MAX_HALVINGS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootStatus {
    Confirmed,
    NearSingularity,
    Unconverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCandidate {
    pub point: ComplexPoint,
    /// Norm of the argument gradient at `point`.
    pub grad_norm: f64,
    /// `|W'(point)|`, computed as `|L W|`; `None` if `W` could not be evaluated.
    pub wprime_residual: Option<f64>,
    pub status: RootStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonStats {
    /// Iteration count -> number of seeds that converged in that many steps.
    pub iterations: BTreeMap<u32, u32>,
    pub seeds: u32,
    /// Seeds dropped because they started within `singular_radius` of a zero or pole.
    pub discarded_seeds: u32,
    /// Seeds whose iterates left the region.
    pub escaped: u32,
    pub degenerate_jacobian: u32,
    pub exhausted: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateReport {
    pub region: Rectangle,
    pub roots: Vec<RootCandidate>,
    pub grid_density: usize,
    pub newton_stats: NewtonStats,
}

impl LocateReport {
    pub fn confirmed(&self) -> impl Iterator<Item = &RootCandidate> {
        self.roots.iter().filter(|r| r.status == RootStatus::Confirmed)
    }

    pub fn confirmed_points(&self) -> Vec<Complex64> {
        self.confirmed().map(|r| r.point.to_complex()).collect()
    }
}

enum SeedOutcome {
    Discarded,
    Escaped,
    Converged { z: Complex64, iterations: u32 },
    Degenerate { z: Complex64 },
    Exhausted { z: Complex64 },
}

/// Finds the zeros of `W'` in `region`.
pub fn locate<M: Meromorphic + ?Sized>(f: &M, region: Rectangle, policy: &NumericPolicy) -> Result<LocateReport> {
    let singular = f.zeros_and_poles()?;
    locate_with_singularities(f, &singular, region, policy)
}

/// [`locate`] with the zeros and poles of `W` supplied by the caller.
pub fn locate_with_singularities<M: Meromorphic + ?Sized>(
    f: &M,
    singular: &ZerosAndPoles,
    region: Rectangle,
    policy: &NumericPolicy,
) -> Result<LocateReport> {
    policy.validate()?;
    region.validate().map_err(|_| Error::EmptyRegion)?;
    let mut seeds = region.cell_centers(policy.grid_density);
    seeds.extend(refinement_seeds(singular, &region, policy));
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|seed| newton_from_seed(f, singular, &region, policy, seed.to_complex()))
        .collect();

    let mut stats = NewtonStats { seeds: seeds.len() as u32, ..Default::default() };
    let mut found: Vec<RootCandidate> = Vec::new();
    let mut unconverged: Vec<RootCandidate> = Vec::new();
    for outcome in outcomes {
        match outcome {
            SeedOutcome::Discarded => stats.discarded_seeds += 1,
            SeedOutcome::Escaped => stats.escaped += 1,
            SeedOutcome::Converged { z, .. }
                if f.log_derivative_prime(z).map_or(true, |lp| lp.norm() < MULTIPLE_ROOT_SLOPE) =>
            {
                stats.degenerate_jacobian += 1;
                if let Some(c) = unconverged_candidate(f, &region, z) {
                    unconverged.push(c);
                }
            }
            SeedOutcome::Converged { z, iterations } => {
                *stats.iterations.entry(iterations).or_insert(0) += 1;
                if let Some(c) = classify(f, singular, &region, policy, z) {
                    found.push(c);
                }
            }
            SeedOutcome::Degenerate { z } => {
                stats.degenerate_jacobian += 1;
                if let Some(c) = unconverged_candidate(f, &region, z) {
                    unconverged.push(c);
                }
            }
            SeedOutcome::Exhausted { z } => {
                stats.exhausted += 1;
                if let Some(c) = unconverged_candidate(f, &region, z) {
                    unconverged.push(c);
                }
            }
        }
    }
    let mut roots = cluster(found, policy.dedup_radius);
    roots.extend(cluster(unconverged, policy.singular_radius));
    roots.sort_by(|a, b| point_order(&a.point, &b.point));
    Ok(LocateReport { region, roots, grid_density: policy.grid_density, newton_stats: stats })
}

/// Extra seeds near zeros and poles of `W`, where critical points can have
/// basins smaller than a grid cell: rings around each singularity and
/// points along the segment joining singularities closer than a few cells.
fn refinement_seeds(singular: &ZerosAndPoles, region: &Rectangle, policy: &NumericPolicy) -> Vec<ComplexPoint> {
    let n = policy.grid_density as f64;
    let cell = (region.width() / n).hypot(region.height() / n);
    let near: Vec<Complex64> = singular
        .iter()
        .filter(|s| region.contains_with_slack(s.point, cell))
        .map(|s| s.point.to_complex())
        .collect();
    let mut out = Vec::new();
    let mut push = |z: Complex64| {
        if region.contains_complex(z) {
            if let Ok(p) = ComplexPoint::from_complex(z) {
                out.push(p);
            }
        }
    };
    for &z in &near {
        for (radius, count) in [(2.0 * policy.singular_radius, 16), (0.5 * cell, 8)] {
            for k in 0..count {
                let angle = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
                push(z + Complex64::from_polar(radius, angle));
            }
        }
    }
    for (i, &a) in near.iter().enumerate() {
        for &b in &near[i + 1..] {
            if (a - b).norm() < 4.0 * cell {
                for frac in [0.25, 0.5, 0.75] {
                    push(a + (b - a) * frac);
                }
            }
        }
    }
    out
}

fn point_order(a: &ComplexPoint, b: &ComplexPoint) -> std::cmp::Ordering {
    a.sigma.total_cmp(&b.sigma).then(a.t.total_cmp(&b.t))
}

fn newton_from_seed<M: Meromorphic + ?Sized>(
    f: &M,
    singular: &ZerosAndPoles,
    region: &Rectangle,
    policy: &NumericPolicy,
    seed: Complex64,
) -> SeedOutcome {
    if singular.nearest_distance(seed) < policy.singular_radius {
        return SeedOutcome::Discarded;
    }
    // Iterates may wander a little outside the region before settling.
    let slack = 0.25 * region.width().max(region.height());
    let inside = |z: Complex64| {
        ComplexPoint::new(z.re, z.im).is_ok_and(|p| region.contains_with_slack(p, slack))
    };
    let mut z = seed;
    let Ok(mut l) = f.log_derivative(z) else {
        return SeedOutcome::Escaped;
    };
    for iter in 1..=policy.newton_max_iter {
        if l == Complex64::new(0.0, 0.0) {
            return SeedOutcome::Converged { z, iterations: iter - 1 };
        }
        let Ok(lp) = f.log_derivative_prime(z) else {
            return SeedOutcome::Escaped;
        };
        if lp.norm() < JACOBIAN_FLOOR {
            // Flat L with a nonzero value has no nearby root of W'.
            return if l.norm() <= policy.grad_tol.sqrt() {
                SeedOutcome::Degenerate { z }
            } else {
                SeedOutcome::Escaped
            };
        }
        let step = newton_step(l, lp);
        let g0 = l.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = z + step * lambda;
            if let Ok(lc) = f.log_derivative(cand) {
                if lc.norm() < g0 {
                    accepted = Some((cand, lc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let scale = z.norm().max(1.0);
        match accepted {
            Some((cand, lc)) => {
                let moved = (cand - z).norm();
                z = cand;
                l = lc;
                if moved <= 1e-14 * scale {
                    return SeedOutcome::Converged { z, iterations: iter };
                }
            }
            None => {
                // No decrease: either at the rounding floor of L or stuck.
                if step.norm() <= 1e-9 * scale {
                    return SeedOutcome::Converged { z, iterations: iter };
                }
                z += step * (lambda * 2.0);
                match f.log_derivative(z) {
                    Ok(v) => l = v,
                    Err(_) => return SeedOutcome::Escaped,
                }
            }
        }
        if !inside(z) {
            return SeedOutcome::Escaped;
        }
    }
    SeedOutcome::Exhausted { z }
}

/// Solves `J d = -g` for `g = (Im L, Re L)` and returns `d` as a complex step.
fn newton_step(l: Complex64, lp: Complex64) -> Complex64 {
    let (a, b) = (lp.im, lp.re); // J = [[a, b], [b, -a]]
    let det = -(a * a + b * b);
    let (g1, g2) = (l.im, l.re);
    let ds = (-g1 * -a - b * -g2) / det;
    let dt = (a * -g2 - b * -g1) / det;
    Complex64::new(ds, dt)
}

fn residual<M: Meromorphic + ?Sized>(f: &M, z: Complex64, l: Complex64) -> (Option<f64>, f64) {
    match f.evaluate(z) {
        Ok(w) => {
            let r = (l * w).norm();
            (r.is_finite().then_some(r), w.norm())
        }
        Err(_) => (None, f64::INFINITY),
    }
}

fn classify<M: Meromorphic + ?Sized>(
    f: &M,
    singular: &ZerosAndPoles,
    region: &Rectangle,
    policy: &NumericPolicy,
    z: Complex64,
) -> Option<RootCandidate> {
    let point = ComplexPoint::from_complex(z).ok()?;
    if !region.contains(point) {
        return None;
    }
    let l = f.log_derivative(z).ok()?;
    let grad_norm = l.norm();
    let (wprime_residual, wnorm) = residual(f, z, l);
    let status = if singular.nearest_distance(z) < policy.singular_radius {
        RootStatus::NearSingularity
    } else if grad_norm <= policy.grad_tol
        && wprime_residual.is_some_and(|r| r <= policy.residual_tol * wnorm.max(1.0))
    {
        RootStatus::Confirmed
    } else {
        RootStatus::Unconverged
    };
    Some(RootCandidate { point, grad_norm, wprime_residual, status })
}

fn unconverged_candidate<M: Meromorphic + ?Sized>(f: &M, region: &Rectangle, z: Complex64) -> Option<RootCandidate> {
    let point = ComplexPoint::from_complex(z).ok()?;
    if !region.contains(point) {
        return None;
    }
    let l = f.log_derivative(z).ok()?;
    Some(RootCandidate {
        point,
        grad_norm: l.norm(),
        wprime_residual: residual(f, z, l).0,
        status: RootStatus::Unconverged,
    })
}

/// Sorts by `(sigma, t)` and merges candidates within `radius`, keeping the
/// one with the smallest gradient norm.
fn cluster(mut items: Vec<RootCandidate>, radius: f64) -> Vec<RootCandidate> {
    items.sort_by(|a, b| point_order(&a.point, &b.point));
    let mut reps: Vec<RootCandidate> = Vec::new();
    for c in items {
        match reps.iter_mut().find(|r| r.point.distance(c.point) <= radius && r.status == c.status) {
            Some(r) => {
                let better = c.grad_norm < r.grad_norm
                    || (c.grad_norm == r.grad_norm && point_order(&c.point, &r.point).is_lt());
                if better {
                    *r = c;
                }
            }
            None => reps.push(c),
        }
    }
    reps
}

/// Outcome of [`exclusion_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionScan {
    /// `true` when the locator found no confirmed zero of `W'`.
    pub no_roots: bool,
    /// Minimum over the seed grid of `max(|d_sigma|, |d_t|)`.
    pub witness: f64,
}

/// Runs [`locate`] and also reports how far the gradient stays from zero on
/// the grid: at every non-root at least one partial is nonzero.
pub fn exclusion_scan<M: Meromorphic + ?Sized>(f: &M, region: Rectangle, policy: &NumericPolicy) -> Result<ExclusionScan> {
    let report = locate(f, region, policy)?;
    let field = ArgField::new(f, *policy)?;
    let witness = region
        .cell_centers(policy.grid_density)
        .par_iter()
        .filter_map(|p| field.grad_logd(*p).ok().map(|g| g.max_abs()))
        .reduce(|| f64::INFINITY, f64::min);
    let no_roots = report.confirmed().next().is_none();
    Ok(ExclusionScan { no_roots, witness })
}
