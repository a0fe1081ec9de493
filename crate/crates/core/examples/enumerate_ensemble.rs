//! Enumerates small finite control families and compares the count with the
//! size estimate used by dry runs.
//!
//!     cargo run --example enumerate_ensemble

use std::sync::Arc;

use urysohn::ensemble::estimate_family_size;
use urysohn::{delta_partition, enumerate_controls, sphere_net, uniform_levels, DomainBox, Error, FamilyDesign};

fn main() -> urysohn::Result<()> {
    let halves = Arc::new(delta_partition(&DomainBox::unit(1), 0.5)?);
    let family = enumerate_controls(&halves, &uniform_levels(2.0, 2)?, &sphere_net(1, 1.0)?, 1.0, 100)?;
    println!("2 cells, levels {{0, 1, 2}}, directions {{+1, -1}}, rho = 1: {} controls", family.len());
    for u in &family.controls {
        let values: Vec<f64> = (0..u.cells()).map(|i| u.value(i)[0]).collect();
        println!("  {values:?}  resource {}", u.resource());
    }

    let square = Arc::new(delta_partition(&DomainBox::unit(2), 0.75)?);
    for sigma in [1.0, 0.5] {
        let design = FamilyDesign { partition: square.clone(), ladder: uniform_levels(2.0, 4)?, net: sphere_net(2, sigma)? };
        let estimate = estimate_family_size(&design, 1.0);
        match enumerate_controls(&design.partition, &design.ladder, &design.net, 1.0, 50_000) {
            Ok(f) => println!("unit square, {} cells, sigma {sigma}: {} controls (estimate {estimate:?})", square.len(), f.len()),
            Err(Error::EnumerationTooLarge { cap }) => println!("sigma {sigma}: more than {cap} controls (estimate {estimate:?})"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
