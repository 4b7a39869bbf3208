//! Exclusion certificates: a rectangle away from the critical points of
//! s^3 - 3s is certified by both methods; one containing s = 1 is not.

use merozero::certifier::{certify, CertMethod, Partial};
use merozero::{Complex64, Factor, FactoredFunction, Rectangle};

fn main() -> merozero::Result<()> {
    let w = FactoredFunction::new(vec![
        Factor::linear(Complex64::new(0.0, 0.0), 1),
        Factor::linear(Complex64::new(3f64.sqrt(), 0.0), 1),
        Factor::linear(Complex64::new(-(3f64.sqrt()), 0.0), 1),
    ])?;
    let cases = [
        (Rectangle::new(2.0, 3.0, -1.0, 1.0)?, Partial::T),
        (Rectangle::new(-0.5, 0.5, 0.5, 2.0)?, Partial::Sigma),
        (Rectangle::new(0.9, 1.1, -0.1, 0.1)?, Partial::T),
    ];
    for (region, partial) in cases {
        for method in [CertMethod::TermwiseSign, CertMethod::IntervalBound] {
            let outcome = certify(&w, region, partial, method)?;
            println!("{region:?} d_{partial} {method}: {}", serde_json::to_string(&outcome).unwrap());
        }
    }
    Ok(())
}
