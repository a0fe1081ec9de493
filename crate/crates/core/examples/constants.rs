//! Error constants and contraction test for every built-in system.
//!
//!     cargo run --example constants

use urysohn::cli::print_constants;
use urysohn::registry::BUILTIN_NAMES;

fn main() {
    for name in BUILTIN_NAMES {
        // two-dimensional domains get a coarser grid per axis
        let cells = if *name == "PLANE" { 24 } else { 128 };
        match print_constants(name, cells) {
            Ok(table) => println!("{table}"),
            Err(e) => eprintln!("{name}: {}", e.message),
        }
    }
}
