//! Locate the zeros of W' for W(s) = (s^2 + 1)/s and compare with the
//! roots of the numerator of W' computed from the polynomials directly.

use merozero::locator::locate;
use merozero::{Complex64, NumericPolicy, RationalFunction, Rectangle};

fn main() -> merozero::Result<()> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let w = RationalFunction::new(vec![one, zero, one], vec![zero, one])?;
    let region = Rectangle::new(-3.0, 3.0, -3.0, 3.0)?;
    let policy = NumericPolicy::default();

    let report = locate(&w, region, &policy)?;
    println!("newton: {:?}", report.newton_stats);
    for r in &report.roots {
        println!("{:?} at {:+.12} {:+.12}i  |grad| {:.1e}", r.status, r.point.sigma, r.point.t, r.grad_norm);
    }
    println!("oracle: {:?}", w.wprime_numerator_roots(policy.dedup_radius)?);
    Ok(())
}
