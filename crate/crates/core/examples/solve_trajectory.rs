//! Nyström/Picard solves checked against the closed form, plus one nonlinear
//! system with a two-dimensional state and control.
//!
//!     cargo run --example solve_trajectory

use urysohn::registry::lin1_spec;
use urysohn::{build_grid, builtin_system, linear_trajectory, solve_trajectory, GridControl, SolverOptions};

fn main() -> urysohn::Result<()> {
    let spec = lin1_spec();
    let lin1 = spec.system("LIN1");
    let grid = build_grid(&lin1.domain, &[1024])?;
    let opts = SolverOptions::default();

    for (label, u) in [
        ("u = 1", GridControl::constant(&grid, &[1.0])),
        ("u = s", GridControl::from_fn(&grid, 1, |s, o| o[0] = s[0])),
        ("u = cos 2πs", GridControl::from_fn(&grid, 1, |s, o| o[0] = (2.0 * std::f64::consts::PI * s[0]).cos())),
    ] {
        let x = solve_trajectory(&lin1, &u, &grid, &opts)?;
        let exact = linear_trajectory(&spec, &u, &grid)?;
        println!(
            "LIN1 {label:<12} x(0.5) = {:.9}  sweeps = {:>2}  residual = {:.1e}  |x - exact| = {:.1e}",
            x.at(512)[0],
            x.iterations,
            x.residual_l2,
            x.l2_distance(&exact, &grid)
        );
    }

    let nl2 = builtin_system("NL2")?;
    let grid = build_grid(&nl2.domain, &[256])?;
    let u = GridControl::from_fn(&grid, 2, |s, o| {
        o[0] = 0.8 * (3.0 * s[0]).sin();
        o[1] = 0.4;
    });
    let x = solve_trajectory(&nl2, &u, &grid, &opts)?;
    println!(
        "NL2  ‖u‖ = {:.4}  ‖x‖ = {:.6}  sweeps = {}  residual = {:.1e}",
        u.l2_norm(&grid),
        x.l2_norm(&grid),
        x.iterations,
        x.residual_l2
    );
    Ok(())
}
