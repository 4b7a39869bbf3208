//! Real zeros of the digamma function from the truncated Gamma product,
//! and the certificate that Gamma' has no zeros off the real axis.

use merozero::certifier::{certify_termwise, Partial};
use merozero::special::{build_gamma, covers_tail, digamma_real_zeros};
use merozero::Rectangle;

fn main() -> merozero::Result<()> {
    let n = 100_000;
    for (k, x) in digamma_real_zeros(5, n)?.iter().enumerate() {
        println!("zero {k}: {x:.15}");
    }

    let model = build_gamma(1000)?;
    let region = Rectangle::new(-10.0, 10.0, 0.1, 10.0)?;
    let outcome = certify_termwise(model.factored(), region, Partial::Sigma)?;
    let tail = model.tail_margin(&region, Partial::Sigma)?;
    match outcome.certificate() {
        Some(cert) => println!(
            "d_sigma has sign {:?} on {region:?}, margin {:.3e}, tail {tail:?}, holds for Gamma: {}",
            cert.sign,
            cert.margin,
            covers_tail(cert, &tail)
        ),
        None => println!("not certified: {outcome:?}"),
    }
    Ok(())
}
