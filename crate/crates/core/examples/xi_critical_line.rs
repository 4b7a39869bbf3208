//! Truncated xi built from the bundled zeta-zero ordinates: zeros of xi'
//! between consecutive ordinates on the critical line, and the certificate
//! that none lie right of the strip.

use merozero::certifier::{certify_termwise, Partial};
use merozero::special::{build_xi, covers_tail, xi_critical_line_derivative_zeros, ZetaZeroTable};
use merozero::Rectangle;

fn main() -> merozero::Result<()> {
    let table = ZetaZeroTable::bundled();
    let xi = build_xi(&table, 100, 0.5)?;
    let ords = xi.ordinates();

    let report = xi_critical_line_derivative_zeros(&xi, (ords[0], ords[10]))?;
    for gap in &report.gaps {
        println!("({:.6}, {:.6}): {:?}", gap.lower_ordinate, gap.upper_ordinate, gap.roots);
    }

    let region = Rectangle::new(1.05, 3.0, -60.0, 60.0)?;
    let outcome = certify_termwise(xi.factored(), region, Partial::T)?;
    let tail = xi.tail_margin(&region, Partial::T)?;
    if let Some(cert) = outcome.certificate() {
        println!("right of the strip: margin {:.3e}, tail {tail:?}, covered: {}", cert.margin, covers_tail(cert, &tail));
    }
    Ok(())
}
