//! Empirical check of `h₂ ≤ (c*+1)ε` for LIN1, at the schedule's own family
//! and at a family refined twofold.
//!
//!     cargo run --release --example theorem_check

use urysohn::{build_grid, builtin_system, compute_constants, schedule, verify_theorem, ExperimentOptions, FamilyDesign};

fn main() -> urysohn::Result<()> {
    let sys = builtin_system("LIN1")?;
    let grid = build_grid(&sys.domain, &[240])?;
    let bounds = compute_constants(&sys, &grid)?;
    for eps in [0.4, 0.2, 0.1] {
        let sched = schedule(&bounds, eps, 0.5, None)?;
        let base = FamilyDesign::from_schedule(&sys.domain, sys.control_dim, &sched)?;
        for (label, design) in [("schedule", base.clone()), ("refined x2", base.refined(2)?)] {
            let opts = ExperimentOptions { sample_count: 200, seed: 7, design: Some(design), ..Default::default() };
            let r = verify_theorem(&sys, &grid, &bounds, &sched, &opts)?;
            println!(
                "eps {eps:<4} {label:<10} family {:>6} ({:<10}) sampled {:.3e} bound {:.6} margin {:>6.1}x residual violations {} {}",
                r.family_size,
                r.generation.as_str(),
                r.sampled_max_distance,
                r.bound,
                r.bound / r.sampled_max_distance,
                r.residual_violations,
                if r.pass { "pass" } else { "FAILURE" }
            );
        }
    }
    Ok(())
}
