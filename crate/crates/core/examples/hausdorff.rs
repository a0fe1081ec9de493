//! L2 Hausdorff distance between the trajectory sets of a coarse and a
//! refined control family for LIN1.
//!
//!     cargo run --example hausdorff

use urysohn::ensemble::directed_hausdorff_l2;
use urysohn::{
    build_grid, builtin_system, enumerate_controls, hausdorff_l2, sphere_net, trajectory_set, uniform_levels, SolverOptions,
};

fn main() -> urysohn::Result<()> {
    let sys = builtin_system("LIN1")?;
    let grid = build_grid(&sys.domain, &[64])?;
    let opts = SolverOptions::default();
    let net = sphere_net(1, 1.0)?;

    let coarse_p = std::sync::Arc::new(urysohn::delta_partition(&sys.domain, 0.5)?);
    let fine_p = std::sync::Arc::new(coarse_p.refine(2));
    let coarse = enumerate_controls(&coarse_p, &uniform_levels(2.0, 4)?, &net, sys.rho, 10_000)?;
    let fine = enumerate_controls(&fine_p, &uniform_levels(2.0, 8)?, &net, sys.rho, 100_000)?;
    let a = trajectory_set(&sys, &coarse, &grid, &opts)?;
    let b = trajectory_set(&sys, &fine, &grid, &opts)?;

    println!("coarse family {} controls, fine family {} controls", a.len(), b.len());
    println!("coarse into fine {:.3e}", directed_hausdorff_l2(&a, &b, &grid)?);
    println!("fine into coarse {:.3e}", directed_hausdorff_l2(&b, &a, &grid)?);
    println!("Hausdorff        {:.3e}", hausdorff_l2(&a, &b, &grid)?);
    Ok(())
}
