//! The argument gradient by finite differences, by the log-derivative and
//! by the factor sum, at a few points of a factored model.

use merozero::{ArgField, Complex64, ComplexPoint, Factor, FactoredFunction, NumericPolicy};

fn main() -> merozero::Result<()> {
    // W(s) = (s - 1)^2 (s + 2i)^-1 exp(s/2)
    let w = FactoredFunction::new(vec![
        Factor::linear(Complex64::new(1.0, 0.0), 2),
        Factor::linear(Complex64::new(0.0, -2.0), -1),
        Factor::exponential(Complex64::new(0.5, 0.0), 1),
    ])?;
    let field = ArgField::new(&w, NumericPolicy::default())?;
    for (sigma, t) in [(0.0, 0.0), (2.5, 1.0), (-1.0, 3.0), (0.3, -0.7)] {
        let cmp = field.compare_routes(ComplexPoint::new(sigma, t)?)?;
        println!("s = {sigma:+} {t:+}i");
        println!("  fd         {:+.12} {:+.12}", cmp.fd.d_sigma, cmp.fd.d_t);
        println!("  logd       {:+.12} {:+.12}", cmp.logd.d_sigma, cmp.logd.d_t);
        if let Some(fs) = cmp.factor_sum {
            println!("  factor sum {:+.12} {:+.12}", fs.d_sigma, fs.d_t);
        }
        println!("  max discrepancy {:.2e}", cmp.max_discrepancy());
    }
    Ok(())
}
