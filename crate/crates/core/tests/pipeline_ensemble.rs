//! Pipeline images, family membership and ensemble refinement.

use std::sync::Arc;

use urysohn::ensemble::{sample_admissible, Generation};
use urysohn::pipeline::{lipschitz_estimate, SteklovPolicy};
use urysohn::{
    build_grid, builtin_system, compute_constants, enumerate_controls, full_pipeline, schedule, sphere_net,
    trajectory_set, uniform_levels, verify_theorem, ExperimentOptions, FamilyDesign, Grid, GridControl,
    SolverOptions,
};

#[test]
fn pipeline_images_are_family_members() {
    for (name, eps, r_star) in [("LIN1", 0.2, 0.5), ("NL2", 0.5, 2.0), ("TRI3", 1.0, 1.0), ("PLANE", 0.5, 1.0)] {
        let sys = builtin_system(name).unwrap();
        let coarse = build_grid(&sys.domain, &vec![16; sys.domain_dim()]).unwrap();
        let bounds = compute_constants(&sys, &coarse).unwrap();
        let sched = schedule(&bounds, eps, r_star, None).unwrap();
        let design = FamilyDesign::from_schedule(&sys.domain, sys.control_dim, &sched).unwrap();
        let grid = Grid::refining(&design.partition, if sys.domain_dim() == 1 { 120 } else { 16 }).unwrap();
        for u in sample_admissible(&sys, &grid, 20, 1).unwrap() {
            let out = full_pipeline(&u, &grid, &sched, &design, sys.rho, SteklovPolicy::Auto).unwrap();
            assert!(design.contains(&out.control, sys.rho), "{name}");
            assert!(out.errors.within_bounds(1e-12), "{name}: {:?}", out.errors);
            assert!(out.errors.steklov_lipschitz <= r_star + 1e-12);
            // every stage after truncation is an average or rounds down
            let n = out.errors.l2_norms;
            assert!(n[1] <= n[0] + 1e-12 && n[2] <= n[1] + 1e-12 && n[3] <= n[2] + 1e-12 && n[4] <= n[3] + 1e-12);
        }
    }
}

#[test]
fn lin1_constant_control_keeps_its_magnitude() {
    let sys = builtin_system("LIN1").unwrap();
    let grid = build_grid(&sys.domain, &[240]).unwrap();
    let bounds = compute_constants(&sys, &grid).unwrap();
    let sched = schedule(&bounds, 0.2, 1.0, None).unwrap();
    let design = FamilyDesign::from_schedule(&sys.domain, 1, &sched).unwrap();
    let grid = Grid::refining(&design.partition, 240).unwrap();
    let out = full_pipeline(&GridControl::constant(&grid, &[1.0]), &grid, &sched, &design, 1.0, SteklovPolicy::Auto).unwrap();
    let expected = design.ladder.levels()[design.ladder.floor_index(1.0).unwrap()];
    assert!(out.control.magnitudes().iter().all(|&r| r == expected));
    assert!(out.control.directions().iter().all(|&b| b == 1.0));
    assert_eq!(out.errors.steklov_eta, None);
}

#[test]
fn steklov_policy_reaches_the_lipschitz_target() {
    let sys = builtin_system("LIN1").unwrap();
    let grid = build_grid(&sys.domain, &[256]).unwrap();
    let bounds = compute_constants(&sys, &grid).unwrap();
    for r_star in [0.25, 2.0, 20.0] {
        let sched = schedule(&bounds, 0.4, r_star, None).unwrap();
        let design = FamilyDesign::from_schedule(&sys.domain, 1, &sched).unwrap();
        let grid = Grid::refining(&design.partition, 256).unwrap();
        for u in sample_admissible(&sys, &grid, 10, 3).unwrap() {
            let out = full_pipeline(&u, &grid, &sched, &design, 1.0, SteklovPolicy::Auto).unwrap();
            assert!(lipschitz_estimate(&out.averaged, &grid).unwrap() <= r_star);
        }
    }
}

#[test]
fn refinement_does_not_increase_the_distance() {
    let sys = builtin_system("LIN1").unwrap();
    let grid = build_grid(&sys.domain, &[120]).unwrap();
    let bounds = compute_constants(&sys, &grid).unwrap();
    let sched = schedule(&bounds, 0.4, 0.5, None).unwrap();
    let base = FamilyDesign::from_schedule(&sys.domain, 1, &sched).unwrap();
    let opts = |design| ExperimentOptions { sample_count: 40, seed: 5, design: Some(design), ..Default::default() };
    let coarse = verify_theorem(&sys, &grid, &bounds, &sched, &opts(base.clone())).unwrap();
    let fine = verify_theorem(&sys, &grid, &bounds, &sched, &opts(base.refined(2).unwrap())).unwrap();
    assert_eq!(coarse.generation, Generation::Enumerated);
    assert_eq!(fine.generation, Generation::Enumerated);
    assert!(fine.family_size > coarse.family_size);
    assert!(fine.sampled_max_distance <= coarse.sampled_max_distance + 2.0 * coarse.solver_tol);
    assert!(coarse.pass && fine.pass);
}

#[test]
fn lin1_bound_at_tenth() {
    let sys = builtin_system("LIN1").unwrap();
    let grid = build_grid(&sys.domain, &[128]).unwrap();
    let bounds = compute_constants(&sys, &grid).unwrap();
    let sched = schedule(&bounds, 0.1, 1.0, None).unwrap();
    let opts = ExperimentOptions { sample_count: 30, family_samples: 200, ..Default::default() };
    let r = verify_theorem(&sys, &grid, &bounds, &sched, &opts).unwrap();
    assert!((r.bound - 0.162854).abs() < 1e-6);
    assert!(r.pass);
    assert_eq!(r.membership_violations, 0);
    assert_eq!(r.stage_violations, 0);
}

#[test]
fn zero_system_trajectories_vanish() {
    let sys = builtin_system("ZERO").unwrap();
    let grid = build_grid(&sys.domain, &[20]).unwrap();
    let p = Arc::new(urysohn::delta_partition(&sys.domain, 0.25).unwrap());
    let family = enumerate_controls(&p, &uniform_levels(2.0, 2).unwrap(), &sphere_net(1, 1.0).unwrap(), 1.0, 1000).unwrap();
    let set = trajectory_set(&sys, &family, &grid, &SolverOptions::default()).unwrap();
    assert_eq!(set.len(), family.len());
    assert!(set.iter().all(|t| t.values.iter().all(|&v| v == 0.0)));
}
