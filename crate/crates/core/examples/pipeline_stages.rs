//! Pushes a few random admissible controls through truncation, Steklov
//! averaging, cell averaging and the two quantizers, printing each stage's
//! error next to its bound.
//!
//!     cargo run --example pipeline_stages

use urysohn::ensemble::sample_admissible;
use urysohn::{build_grid, builtin_system, compute_constants, full_pipeline, schedule, FamilyDesign, Grid, SteklovPolicy};

fn main() -> urysohn::Result<()> {
    let sys = builtin_system("NL2")?;
    let grid = build_grid(&sys.domain, &[240])?;
    let bounds = compute_constants(&sys, &grid)?;
    let sched = schedule(&bounds, 0.5, 2.0, None)?;
    let design = FamilyDesign::from_schedule(&sys.domain, sys.control_dim, &sched)?;
    // node cells must nest inside partition cells
    let grid = Grid::refining(&design.partition, 240)?;
    println!(
        "alpha = {:.3}, {} cells, {} levels (step {:.3}), {} net points (sigma {:.3})",
        design.ladder.top(),
        design.partition.len(),
        design.ladder.levels().len(),
        design.ladder.step(),
        design.net.len(),
        design.net.sigma()
    );

    for (i, u) in sample_admissible(&sys, &grid, 4, 42)?.iter().enumerate() {
        let out = full_pipeline(u, &grid, &sched, &design, sys.rho, SteklovPolicy::Auto)?;
        let e = out.errors;
        println!("control {i}: ‖u‖ = {:.3}, member of family: {}", e.l2_norms[0], design.contains(&out.control, sys.rho));
        println!("  truncation  excess measure {:.2e} <= {:.2e}", e.truncation_excess_measure, e.truncation_excess_bound);
        println!("  steklov     eta {:?}, Lipschitz {:.3} (R* {})", e.steklov_eta, e.steklov_lipschitz, sched.r_star);
        println!("  cells       sup error {:.4} <= {:.4}", e.cell_sup_error, e.cell_error_bound);
        println!("  magnitude   sup error {:.4} <= {:.4}", e.magnitude_sup_error, e.magnitude_bound);
        println!("  direction   sup error {:.4} <= {:.4}", e.direction_sup_error, e.direction_bound);
        println!("  L2 norms    {:.4?}", e.l2_norms);
    }
    Ok(())
}
