//! Solver against closed-form linear trajectories.

use std::sync::Arc;

use urysohn::ensemble::sample_admissible;
use urysohn::{build_grid, linear_trajectory, solve_trajectory, DomainBox, LinearSpec, SolverOptions};

fn check(spec: &LinearSpec, cells: &[usize], count: usize) {
    let sys = spec.system("oracle");
    let grid = build_grid(&spec.domain, cells).unwrap();
    let opts = SolverOptions { tol: 1e-11, max_iter: 2000 };
    for u in sample_admissible(&sys, &grid, count, 8).unwrap() {
        let x = solve_trajectory(&sys, &u, &grid, &opts).unwrap();
        let exact = linear_trajectory(spec, &u, &grid).unwrap();
        assert!(x.l2_distance(&exact, &grid) <= 1e-10, "{spec:?}");
    }
}

#[test]
fn coupled_kernel_with_state_feedback() {
    let spec = LinearSpec {
        a: 0.2,
        b: 0.3,
        lambda: 0.5,
        rho: 1.0,
        state_dim: 1,
        control_dim: 1,
        domain: DomainBox::unit(1),
        kernel: Arc::new(|xi, s, out| out[0] = (-(xi[0] - s[0]).abs()).exp()),
    };
    check(&spec, &[200], 20);
}

#[test]
fn vector_state_on_a_rectangle() {
    // n = 2, m = 3 gain on [0,2]×[0,1]
    let spec = LinearSpec {
        a: -0.3,
        b: 0.1,
        lambda: 0.2,
        rho: 2.0,
        state_dim: 2,
        control_dim: 3,
        domain: DomainBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap(),
        kernel: Arc::new(|xi, s, out| {
            let d = (xi[0] - s[0]).hypot(xi[1] - s[1]);
            out.copy_from_slice(&[d.cos(), 0.5, -s[1], xi[0] * 0.1, (-d).exp(), 0.0]);
        }),
    };
    check(&spec, &[12, 8], 10);
}
