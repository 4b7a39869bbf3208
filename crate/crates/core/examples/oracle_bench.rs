//! Locator versus the polynomial oracle on random rational functions.

use merozero::bench::{run_bench, BenchConfig};
use merozero::NumericPolicy;

fn main() -> merozero::Result<()> {
    let config = BenchConfig { instances: 50, seed: 42, ..Default::default() };
    let summary = run_bench(&config, &NumericPolicy::default())?;
    for r in summary.instances.iter().filter(|r| r.missed + r.spurious > 0) {
        println!("instance {}: {} missed, {} spurious", r.index, r.missed, r.spurious);
    }
    println!(
        "{} instances, {} oracle roots, {} matched, {} missed, {} spurious, worst pair distance {:.1e}",
        summary.instances.len(),
        summary.total_oracle_roots,
        summary.total_matched,
        summary.total_missed,
        summary.total_spurious,
        summary.max_pair_distance
    );
    Ok(())
}
