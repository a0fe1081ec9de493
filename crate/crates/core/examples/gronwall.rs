//! The Gronwall-type bound against exact solutions of
//! `y = c + p ∫ y` on `[0, 1]`, whose norm is `c / (1 − p)`.
//!
//!     cargo run --example gronwall

use urysohn::gronwall_bound;

fn main() -> urysohn::Result<()> {
    println!("{:>6} {:>6} {:>12} {:>12}", "c", "p", "‖y‖", "bound");
    for (c, p) in [(1.0, 0.5), (1.0, 0.25), (2.0, 0.1), (0.3, 0.7)] {
        let exact = c / (1.0 - p);
        println!("{c:>6} {p:>6} {exact:>12.6} {:>12.6}", gronwall_bound(c, p)?);
    }
    // the kernel norm must stay below 1/√2
    println!("p = 0.75: {}", gronwall_bound(1.0, 0.75).unwrap_err());
    Ok(())
}
