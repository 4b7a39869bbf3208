//! Oracle-equivalence harness: the locator against polynomial algebra on
//! seeded random rational functions.

use crate::complex::{NumericPolicy, Rectangle};
use crate::error::Result;
use crate::locator::locate;
use crate::model::{Meromorphic, RationalFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Largest distance at which a located root pairs with an oracle root.
pub const PAIRING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub instances: usize,
    pub seed: u64,
    pub max_degree: usize,
    /// Roots are drawn uniformly from `[-root_box, root_box]^2`.
    pub root_box: f64,
    pub region: Rectangle,
    /// Record wall-clock time per instance; off by default so that
    /// summaries are reproducible byte for byte.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            instances: 200,
            seed: 42,
            max_degree: 6,
            root_box: 5.0,
            region: Rectangle { sigma_min: -6.0, sigma_max: 6.0, t_min: -6.0, t_max: 6.0 },
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: usize,
    pub numerator_degree: usize,
    pub denominator_degree: usize,
    pub oracle_roots: usize,
    pub located: usize,
    pub matched: usize,
    pub missed: usize,
    pub spurious: usize,
    pub max_pair_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub config: BenchConfig,
    pub pairing_tol: f64,
    pub total_oracle_roots: usize,
    pub total_matched: usize,
    pub total_missed: usize,
    pub total_spurious: usize,
    pub max_pair_distance: f64,
    pub instances: Vec<InstanceResult>,
}

impl BenchSummary {
    pub fn passed(&self) -> bool {
        self.total_missed == 0 && self.total_spurious == 0
    }
}

/// Deterministic stream of random rational functions.
pub fn random_instances(config: &BenchConfig) -> Vec<RationalFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let b = config.root_box;
    let mut out = Vec::with_capacity(config.instances);
    while out.len() < config.instances {
        let dn = rng.gen_range(0..=config.max_degree);
        let dd = rng.gen_range(0..=config.max_degree);
        let mut point = || Complex64::new(rng.gen_range(-b..=b), rng.gen_range(-b..=b));
        let zeros: Vec<Complex64> = (0..dn).map(|_| point()).collect();
        let poles: Vec<Complex64> = (0..dd).map(|_| point()).collect();
        let lead = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        if dn + dd == 0 {
            // constant W: W' vanishes identically
            continue;
        }
        if let Ok(f) = RationalFunction::from_roots(lead, &zeros, &poles) {
            out.push(f);
        }
    }
    out
}

/// Compares located roots with oracle roots inside `region` that are at
/// least `singular_radius` away from zeros and poles of `f`.
pub fn compare_instance(
    index: usize,
    f: &RationalFunction,
    region: Rectangle,
    policy: &NumericPolicy,
    timing: bool,
) -> Result<InstanceResult> {
    let start = Instant::now();
    let zp = f.zeros_and_poles()?;
    let oracle: Vec<Complex64> = f
        .wprime_numerator_roots(policy.dedup_radius)?
        .into_iter()
        .filter(|r| region.contains_complex(*r) && zp.nearest_distance(*r) >= policy.singular_radius)
        .collect();
    let report = locate(f, region, policy)?;
    let located = report.confirmed_points();
    let (matched, max_pair_distance, spurious) = pair(&oracle, &located);
    Ok(InstanceResult {
        index,
        numerator_degree: f.numerator().degree(),
        denominator_degree: f.denominator().degree(),
        oracle_roots: oracle.len(),
        located: located.len(),
        matched,
        missed: oracle.len() - matched,
        spurious,
        max_pair_distance,
        elapsed_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Greedy one-to-one pairing within [`PAIRING_TOL`]; returns
/// `(matched, max distance among matched, unmatched located)`.
pub fn pair(oracle: &[Complex64], located: &[Complex64]) -> (usize, f64, usize) {
    let mut used = vec![false; located.len()];
    let mut matched = 0;
    let mut worst: f64 = 0.0;
    for r in oracle {
        let best = located
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, l)| (j, (l - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, d)) = best {
            if d <= PAIRING_TOL {
                used[j] = true;
                matched += 1;
                worst = worst.max(d);
            }
        }
    }
    (matched, worst, used.iter().filter(|u| !**u).count())
}

pub fn run_bench(config: &BenchConfig, policy: &NumericPolicy) -> Result<BenchSummary> {
    let instances = random_instances(config);
    let results = instances
        .iter()
        .enumerate()
        .map(|(i, f)| compare_instance(i, f, config.region, policy, config.timing))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchSummary {
        config: *config,
        pairing_tol: PAIRING_TOL,
        total_oracle_roots: results.iter().map(|r| r.oracle_roots).sum(),
        total_matched: results.iter().map(|r| r.matched).sum(),
        total_missed: results.iter().map(|r| r.missed).sum(),
        total_spurious: results.iter().map(|r| r.spurious).sum(),
        max_pair_distance: results.iter().map(|r| r.max_pair_distance).fold(0.0, f64::max),
        instances: results,
    })
}
