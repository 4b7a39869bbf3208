//! Write the gradient field of s^3 - 3s as CSV through the command-line
//! front end, the same output `merozero field --format csv` produces.
//!
//!     cargo run --example field_export > field.csv

fn main() {
    let args = [
        "merozero", "field", "--model", "poly: 0 -3 0 1", "--region", "-2", "2", "-2", "2", "--grid", "41", "--format",
        "csv",
    ];
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    std::process::exit(merozero::cli::run(args, &mut stdout, &mut stderr));
}
