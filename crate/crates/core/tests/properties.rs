//! Property tests for the discretisation objects and pipeline stages.

use std::sync::Arc;

use proptest::prelude::*;

use urysohn::control::{GridControl, PiecewiseConstantControl};
use urysohn::pipeline::{cell_average, quantize_direction, quantize_magnitude, steklov_average, truncate_control};
use urysohn::{build_grid, delta_partition, sphere_net, uniform_levels, DomainBox, Grid};

fn grid_control(k: usize, cells: usize, m: usize) -> impl Strategy<Value = (Grid, GridControl)> {
    let grid = build_grid(&DomainBox::unit(k), &vec![cells; k]).unwrap();
    let n = grid.len() * m;
    prop::collection::vec(-3.0f64..3.0, n).prop_map(move |values| (grid.clone(), GridControl { dim: m, values }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_is_bounded_and_shrinks((grid, u) in grid_control(1, 40, 2), alpha in 0.1f64..4.0) {
        let t = truncate_control(&u, &grid, alpha).unwrap();
        prop_assert!(t.control.sup_norm() <= alpha * (1.0 + 1e-12));
        prop_assert!(t.control.l2_norm(&grid) <= u.l2_norm(&grid) + 1e-12);
        prop_assert!(t.excess_measure * alpha * alpha <= u.l2_norm(&grid).powi(2) + 1e-12);
    }

    #[test]
    fn steklov_is_nonexpansive((grid, u) in grid_control(2, 12, 1), eta in 0.05f64..1.5) {
        let w = steklov_average(&u, &grid, eta).unwrap().control;
        prop_assert!(w.sup_norm() <= u.sup_norm() + 1e-12);
        prop_assert!(w.l2_norm(&grid) <= u.l2_norm(&grid) + 1e-12);
    }

    #[test]
    fn cell_average_does_not_raise_the_norm((grid, u) in grid_control(1, 60, 2), cells in 1usize..7) {
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 1.0 / cells as f64).unwrap());
        let grid = if 60 % p.len() == 0 { grid } else { return Ok(()) };
        let avg = cell_average(&u, &grid, &p).unwrap();
        prop_assert!(avg.resource().sqrt() <= u.l2_norm(&grid) + 1e-12);
    }

    #[test]
    fn quantizers_respect_bounds(
        mags in prop::collection::vec(0.0f64..=2.0, 4),
        angles in prop::collection::vec(0.0f64..6.3, 4),
        q in 1usize..10,
        sigma in 0.1f64..2.0,
    ) {
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 0.25).unwrap());
        let dirs: Vec<f64> = angles.iter().flat_map(|a| [a.cos(), a.sin()]).collect();
        let u = PiecewiseConstantControl::new(p, 2, mags, dirs).unwrap();
        let ladder = uniform_levels(2.0, q).unwrap();
        let net = sphere_net(2, sigma).unwrap();
        let m = quantize_magnitude(&u, &ladder).unwrap();
        let d = quantize_direction(&m, &net).unwrap();
        prop_assert!(u.sup_distance(&m) <= ladder.step() + 1e-12);
        prop_assert!(m.resource() <= u.resource() + 1e-12);
        prop_assert!(m.sup_distance(&d) <= 2.0 * sigma + 1e-12);
        prop_assert!((d.resource() - m.resource()).abs() < 1e-12);
        for i in 0..d.cells() {
            prop_assert!(net.index_of(d.direction(i), 1e-12).is_some());
        }
    }

    #[test]
    fn partitions_are_valid(k in 1usize..4, delta in 0.2f64..2.0) {
        let p = delta_partition(&DomainBox::unit(k), delta).unwrap();
        prop_assert!(p.max_cell_diameter() <= delta * (1.0 + 1e-12));
        let measure: f64 = (0..p.len()).map(|i| p.cell_measure(i)).sum();
        prop_assert!((measure - 1.0).abs() < 1e-12);
        prop_assert!(p.verify(200, 1).all());
    }

    #[test]
    fn ladder_floor_is_within_one_step(alpha in 0.1f64..10.0, q in 1usize..50, t in 0.0f64..=1.0) {
        let l = uniform_levels(alpha, q).unwrap();
        let r = t * alpha;
        let j = l.floor_index(r).unwrap();
        prop_assert!(l.levels()[j] <= r + 1e-12);
        prop_assert!(r - l.levels()[j] <= l.step() * (1.0 + 1e-12));
    }
}

#[test]
fn nets_cover_the_sphere() {
    for m in 2..=4 {
        for sigma in [1.2, 0.6, 0.3] {
            let net = sphere_net(m, sigma).unwrap();
            assert!(net.sampled_covering_radius(5000, 77) <= sigma, "m={m} sigma={sigma}");
            for p in net.points() {
                assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
