//! The chain that maps an arbitrary admissible control to a member of the
//! finite family `V_ρ^{α,Γ,Λ,σ}`:
//!
//! 1. truncation of the pointwise norm at `α`,
//! 2. Steklov ball-averaging into a Lipschitz control,
//! 3. averaging over the cells of a Δ-partition,
//! 4. rounding cell magnitudes down onto a uniform ladder,
//! 5. snapping cell directions to a σ-net on the sphere.
//!
//! Every stage reports the pointwise error it introduced next to the bound
//! that the error analysis assigns to it.

use std::sync::Arc;

use crate::bounds::ApproxSchedule;
use crate::control::{GridControl, PiecewiseConstantControl};
use crate::discretization::{delta_partition, sphere_net, uniform_levels, DeltaPartition, Grid, LevelLadder, SphereNet};
use crate::error::{Error, Result};
use crate::system::DomainBox;

#[derive(Debug, Clone)]
pub struct Truncation {
    pub control: GridControl,
    /// Quadrature measure of `{s : ‖u(s)‖ > α}`.
    pub excess_measure: f64,
}

/// Radial truncation `v*(s) = v(s)·min(1, α/‖v(s)‖)`.
pub fn truncate_control(u: &GridControl, grid: &Grid, alpha: f64) -> Result<Truncation> {
    if !(alpha > 0.0) {
        return Err(Error::validation(format!("truncation level must be positive, got {alpha}")));
    }
    let mut values = u.values.clone();
    let mut excess_measure = 0.0;
    for (v, w) in values.chunks_exact_mut(u.dim).zip(grid.weights()) {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > alpha {
            excess_measure += w;
            let scale = alpha / norm;
            v.iter_mut().for_each(|c| *c *= scale);
        }
    }
    Ok(Truncation { control: GridControl { dim: u.dim, values }, excess_measure })
}

#[derive(Debug, Clone)]
pub struct SteklovAverage {
    pub control: GridControl,
    pub eta: f64,
    /// Lipschitz bound `2‖w‖∞·v_{k-1} / (v_k·η)` of the exact ball average.
    pub lipschitz_bound: f64,
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * std::f64::consts::PI / k as f64,
    }
}

/// Offsets (in grid cells) of the lattice points strictly inside the
/// η-ball around a lattice point.
fn ball_offsets(spacing: &[f64], eta: f64) -> Vec<Vec<isize>> {
    let k = spacing.len();
    let reach: Vec<isize> = spacing.iter().map(|h| (eta / h).ceil() as isize).collect();
    let mut offsets = Vec::new();
    let mut d: Vec<isize> = reach.iter().map(|r| -r).collect();
    loop {
        let r2: f64 = d.iter().zip(spacing).map(|(&di, h)| (di as f64 * h).powi(2)).sum();
        if r2 < eta * eta {
            offsets.push(d.clone());
        }
        let mut a = k;
        loop {
            if a == 0 {
                return offsets;
            }
            a -= 1;
            d[a] += 1;
            if d[a] <= reach[a] {
                break;
            }
            d[a] = -reach[a];
        }
    }
}

/// Steklov average `w_η(s) = (1/v_η) ∫_{B(s,η)} w` with `w` extended by zero
/// outside `E`, evaluated at the nodes.
///
/// The ball measure `v_η` is replaced by the quadrature measure of the ball
/// on the grid lattice extended past `E`, so that constants are reproduced
/// exactly away from the boundary and the discrete operator remains an
/// average (sup- and L2-nonexpansive).
pub fn steklov_average(u: &GridControl, grid: &Grid, eta: f64) -> Result<SteklovAverage> {
    if !(eta > 0.0) {
        return Err(Error::validation(format!("Steklov radius must be positive, got {eta}")));
    }
    let offsets = ball_offsets(grid.spacing(), eta);
    if offsets.is_empty() {
        return Err(Error::validation("Steklov radius is below the grid resolution"));
    }
    let dims = grid.cells_per_axis();
    let cell_weight: f64 = grid.spacing().iter().product();
    let lattice_measure = offsets.len() as f64 * cell_weight;
    let m = u.dim;
    let mut values = vec![0.0; u.values.len()];
    let mut neighbour = vec![0usize; dims.len()];
    for (i, out) in values.chunks_exact_mut(m).enumerate() {
        let idx = grid.multi_index(i);
        'offsets: for d in &offsets {
            for (a, (&base, &di)) in idx.iter().zip(d).enumerate() {
                let j = base as isize + di;
                if j < 0 || j >= dims[a] as isize {
                    continue 'offsets;
                }
                neighbour[a] = j as usize;
            }
            let j = grid.flat_index(&neighbour);
            for (o, v) in out.iter_mut().zip(u.at(j)) {
                *o += grid.weights()[j] * v;
            }
        }
        out.iter_mut().for_each(|o| *o /= lattice_measure);
    }
    let k = grid.dim();
    let lipschitz_bound = 2.0 * u.sup_norm() * unit_ball_volume(k - 1) / (unit_ball_volume(k) * eta);
    Ok(SteklovAverage { control: GridControl { dim: m, values }, eta, lipschitz_bound })
}

/// Steklov average at an arbitrary point of `E`, normalised like
/// [`steklov_average`].
pub fn steklov_average_at(u: &GridControl, grid: &Grid, eta: f64, point: &[f64]) -> Result<Vec<f64>> {
    if !(eta > 0.0) || point.len() != grid.dim() {
        return Err(Error::validation("Steklov evaluation needs eta > 0 and a point of the domain dimension"));
    }
    let k = grid.dim();
    let (h, lower, dims) = (grid.spacing(), grid.domain().lower(), grid.cells_per_axis());
    // lattice index range per axis: positions lower + (i + 1/2) h within η of the point
    let ranges: Vec<(isize, isize)> = (0..k)
        .map(|a| {
            let t = (point[a] - lower[a]) / h[a] - 0.5;
            ((t - eta / h[a]).floor() as isize, (t + eta / h[a]).ceil() as isize)
        })
        .collect();
    let mut idx: Vec<isize> = ranges.iter().map(|r| r.0).collect();
    let mut count = 0usize;
    let mut sum = vec![0.0; u.dim];
    let mut inside = vec![0usize; k];
    loop {
        let r2: f64 = (0..k).map(|a| (lower[a] + (idx[a] as f64 + 0.5) * h[a] - point[a]).powi(2)).sum();
        if r2 < eta * eta {
            count += 1;
            if (0..k).all(|a| idx[a] >= 0 && (idx[a] as usize) < dims[a]) {
                inside.iter_mut().zip(&idx).for_each(|(o, &i)| *o = i as usize);
                let j = grid.flat_index(&inside);
                sum.iter_mut().zip(u.at(j)).for_each(|(s, v)| *s += grid.weights()[j] * v);
            }
        }
        let mut a = k;
        loop {
            if a == 0 {
                let measure = count as f64 * h.iter().product::<f64>();
                if count == 0 {
                    return Err(Error::validation("Steklov radius is below the grid resolution"));
                }
                return Ok(sum.into_iter().map(|s| s / measure).collect());
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] <= ranges[a].1 {
                break;
            }
            idx[a] = ranges[a].0;
        }
    }
}

/// Largest difference quotient `‖u(s₁) − u(s₂)‖ / ‖s₁ − s₂‖` over pairs of
/// nodes adjacent along one axis.
pub fn lipschitz_estimate(u: &GridControl, grid: &Grid) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::validation("Lipschitz estimate needs at least two nodes"));
    }
    let dims = grid.cells_per_axis();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let mut idx = grid.multi_index(i);
        for a in 0..grid.dim() {
            if idx[a] + 1 < dims[a] {
                idx[a] += 1;
                let j = grid.flat_index(&idx);
                idx[a] -= 1;
                let diff = u.at(i).iter().zip(u.at(j)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(diff / grid.spacing()[a]);
            }
        }
    }
    Ok(worst)
}

/// Cell means of `u`; zero means get the canonical direction `e_1`.
pub fn cell_average(u: &GridControl, grid: &Grid, partition: &Arc<DeltaPartition>) -> Result<PiecewiseConstantControl> {
    let cells = grid.cell_assignment(partition)?;
    let m = u.dim;
    let mut sums = vec![0.0; partition.len() * m];
    let mut mass = vec![0.0; partition.len()];
    for (i, &c) in cells.iter().enumerate() {
        let w = grid.weights()[i];
        mass[c] += w;
        for (s, v) in sums[c * m..(c + 1) * m].iter_mut().zip(u.at(i)) {
            *s += w * v;
        }
    }
    let mut magnitudes = Vec::with_capacity(partition.len());
    let mut directions = Vec::with_capacity(partition.len() * m);
    for (c, mean) in sums.chunks_exact_mut(m).enumerate() {
        mean.iter_mut().for_each(|v| *v /= mass[c]);
        push_polar(mean, &mut magnitudes, &mut directions);
    }
    PiecewiseConstantControl::new(partition.clone(), m, magnitudes, directions)
}

fn push_polar(v: &[f64], magnitudes: &mut Vec<f64>, directions: &mut Vec<f64>) {
    let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if r > 0.0 {
        magnitudes.push(r);
        directions.extend(v.iter().map(|c| c / r));
    } else {
        magnitudes.push(0.0);
        directions.push(1.0);
        directions.extend(std::iter::repeat_n(0.0, v.len() - 1));
    }
}

/// Tolerance for treating a magnitude as equal to the ladder top.
const TOP_TOL: f64 = 1e-12;

/// Rounds every cell magnitude down to the ladder; `0` and the top are kept.
pub fn quantize_magnitude(u: &PiecewiseConstantControl, ladder: &LevelLadder) -> Result<PiecewiseConstantControl> {
    let top = ladder.top();
    let magnitudes = u
        .magnitudes()
        .iter()
        .map(|&r| {
            if r > top * (1.0 + TOP_TOL) {
                return Err(Error::validation(format!("cell magnitude {r} exceeds ladder top {top}")));
            }
            let r = r.min(top);
            let j = ladder.floor_index(r).expect("magnitude within ladder range");
            Ok(ladder.levels()[j])
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseConstantControl::new(u.partition().clone(), u.dim(), magnitudes, u.directions().to_vec())
}

/// Replaces every cell direction by its nearest net point (lowest index on
/// ties); zero-magnitude cells get the first net point.
pub fn quantize_direction(u: &PiecewiseConstantControl, net: &SphereNet) -> Result<PiecewiseConstantControl> {
    if net.dim() != u.dim() {
        return Err(Error::validation(format!("net dimension {} != control dimension {}", net.dim(), u.dim())));
    }
    let mut directions = Vec::with_capacity(u.directions().len());
    for i in 0..u.cells() {
        let l = if u.magnitude(i) == 0.0 { 0 } else { net.nearest(u.direction(i)).0 };
        directions.extend_from_slice(net.point(l));
    }
    PiecewiseConstantControl::new(u.partition().clone(), u.dim(), u.magnitudes().to_vec(), directions)
}

/// Partition, ladder and net defining one finite control family.
#[derive(Debug, Clone)]
pub struct FamilyDesign {
    pub partition: Arc<DeltaPartition>,
    pub ladder: LevelLadder,
    pub net: SphereNet,
}

impl FamilyDesign {
    /// Coarsest design allowed by a schedule: `Δ = Δ*`, ladder top `α*` with
    /// `q = ceil(α*/δ*)`, `σ = σ*`. Unbounded parameters are clamped to
    /// `diam(E)`, a single ladder step and `σ = 2`.
    pub fn from_schedule(domain: &DomainBox, control_dim: usize, schedule: &ApproxSchedule) -> Result<Self> {
        let partition = Arc::new(delta_partition(domain, schedule.partition_diameter.min(domain.diameter()))?);
        let alpha = schedule.alpha_star;
        let q = if schedule.level_step.is_finite() {
            ((alpha / schedule.level_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
        } else {
            1
        };
        let ladder = uniform_levels(alpha, q)?;
        let net = sphere_net(control_dim, schedule.sigma_star.min(2.0))?;
        Ok(Self { partition, ladder, net })
    }

    /// Partition cells split `factor` times per axis, ladder step divided by
    /// `factor`, net radius divided by `factor`. Partition and ladder of the
    /// result contain those of `self`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let factor = factor.max(1);
        Ok(Self {
            partition: Arc::new(self.partition.refine(factor)),
            ladder: uniform_levels(self.ladder.top(), self.ladder.intervals() * factor)?,
            net: sphere_net(self.net.dim(), self.net.sigma() / factor as f64)?,
        })
    }

    /// Whether `u` belongs to the family with resource budget `ρ²`.
    pub fn contains(&self, u: &PiecewiseConstantControl, rho: f64) -> bool {
        u.partition().as_ref() == self.partition.as_ref()
            && u.dim() == self.net.dim()
            && u.magnitudes().iter().all(|&r| self.ladder.level_index(r, 1e-12 * self.ladder.top().max(1.0)).is_some())
            && (0..u.cells()).all(|i| self.net.index_of(u.direction(i), 1e-12).is_some())
            && u.resource() <= rho * rho * (1.0 + 1e-12)
    }

    /// Checks the design against a schedule's maxima.
    pub fn check_against(&self, schedule: &ApproxSchedule) -> Result<()> {
        let slack = 1.0 + 1e-12;
        if self.partition.max_cell_diameter() > schedule.partition_diameter * slack {
            return Err(Error::validation("partition is coarser than the schedule allows"));
        }
        if self.ladder.step() > schedule.level_step * slack {
            return Err(Error::validation("ladder step exceeds the schedule's level step"));
        }
        if (self.ladder.top() - schedule.alpha_star).abs() > 1e-12 * schedule.alpha_star {
            return Err(Error::validation("ladder top differs from the truncation level"));
        }
        if self.net.dim() > 1 && self.net.sigma() > schedule.sigma_star * slack {
            return Err(Error::validation("sphere net radius exceeds the schedule's sigma"));
        }
        Ok(())
    }
}

/// How the Steklov radius is picked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteklovPolicy {
    /// Skip averaging when the input is already Lipschitz with constant at
    /// most `R*`; otherwise take the smallest `η` in `diam(E)·2^{-j}` whose
    /// output satisfies it, falling back to `Δ*/2`.
    Auto,
    Fixed(f64),
}

/// Per-stage errors, each next to its certified bound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageErrors {
    pub truncation_excess_measure: f64,
    /// `ρ²/α²`.
    pub truncation_excess_bound: f64,
    pub truncation_sup_change: f64,
    /// `None` when the input already had Lipschitz estimate ≤ `R*`.
    pub steklov_eta: Option<f64>,
    pub steklov_lipschitz: f64,
    pub steklov_l2_change: f64,
    pub cell_sup_error: f64,
    /// `R̂·Δ` with `R̂` the Lipschitz estimate of the stage input.
    pub cell_error_bound: f64,
    pub magnitude_sup_error: f64,
    /// Ladder step `δ`.
    pub magnitude_bound: f64,
    pub direction_sup_error: f64,
    /// `α·σ`.
    pub direction_bound: f64,
    /// L2 norms: input, truncated, averaged, cell-averaged, magnitude, direction.
    pub l2_norms: [f64; 6],
}

impl StageErrors {
    /// Whether every measured error is within its bound (up to `tol`).
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.truncation_excess_measure <= self.truncation_excess_bound + tol
            && self.cell_sup_error <= self.cell_error_bound + tol
            && self.magnitude_sup_error <= self.magnitude_bound + tol
            && self.direction_sup_error <= self.direction_bound + tol
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub control: PiecewiseConstantControl,
    pub errors: StageErrors,
    pub truncated: GridControl,
    pub averaged: GridControl,
    pub cell_averaged: PiecewiseConstantControl,
    pub magnitude_quantized: PiecewiseConstantControl,
}

/// Runs the five stages in order. `rho` is the admissible-ball radius used
/// for the truncation bound.
pub fn full_pipeline(
    u: &GridControl,
    grid: &Grid,
    schedule: &ApproxSchedule,
    design: &FamilyDesign,
    rho: f64,
    policy: SteklovPolicy,
) -> Result<PipelineOutput> {
    design.check_against(schedule)?;
    let alpha = design.ladder.top();
    let cells = grid.cell_assignment(&design.partition)?;
    let input_norm = u.l2_norm(grid);

    let truncation = truncate_control(u, grid, alpha)?;
    let truncated = truncation.control;

    let (averaged, steklov_eta) = steklov_stage(&truncated, grid, schedule, policy)?;
    let steklov_lipschitz = lipschitz_estimate(&averaged, grid)?;

    let cell_averaged = cell_average(&averaged, grid, &design.partition)?;
    let sampled = cell_averaged.to_grid_with(&cells);
    let cell_sup_error = averaged.sup_distance(&sampled);

    let magnitude_quantized = quantize_magnitude(&cell_averaged, &design.ladder)?;
    let control = quantize_direction(&magnitude_quantized, &design.net)?;

    let errors = StageErrors {
        truncation_excess_measure: truncation.excess_measure,
        truncation_excess_bound: rho * rho / (alpha * alpha),
        truncation_sup_change: u.sup_distance(&truncated),
        steklov_eta,
        steklov_lipschitz,
        steklov_l2_change: grid.l2_distance(&truncated.values, &averaged.values, u.dim),
        cell_sup_error,
        cell_error_bound: steklov_lipschitz * design.partition.max_cell_diameter(),
        magnitude_sup_error: cell_averaged.sup_distance(&magnitude_quantized),
        magnitude_bound: design.ladder.step(),
        direction_sup_error: magnitude_quantized.sup_distance(&control),
        direction_bound: alpha * design.net.sigma(),
        l2_norms: [
            input_norm,
            truncated.l2_norm(grid),
            averaged.l2_norm(grid),
            cell_averaged.resource().sqrt(),
            magnitude_quantized.resource().sqrt(),
            control.resource().sqrt(),
        ],
    };
    Ok(PipelineOutput { control, errors, truncated, averaged, cell_averaged, magnitude_quantized })
}

/// Largest Lipschitz estimate among the Steklov averages (radius `eta`) of
/// `controls`; a data-driven choice of `R*`.
pub fn estimate_r_star(controls: &[GridControl], grid: &Grid, eta: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in controls {
        worst = worst.max(lipschitz_estimate(&steklov_average(u, grid, eta)?.control, grid)?);
    }
    Ok(worst)
}

fn steklov_stage(
    u: &GridControl,
    grid: &Grid,
    schedule: &ApproxSchedule,
    policy: SteklovPolicy,
) -> Result<(GridControl, Option<f64>)> {
    let eta = match policy {
        SteklovPolicy::Fixed(eta) => eta,
        SteklovPolicy::Auto => {
            if lipschitz_estimate(u, grid)? <= schedule.r_star {
                return Ok((u.clone(), None));
            }
            let h_max = grid.spacing().iter().cloned().fold(0.0, f64::max);
            let diam = grid.domain().diameter();
            let mut chosen = None;
            let mut eta = diam;
            while eta >= 2.0 * h_max {
                let avg = steklov_average(u, grid, eta)?;
                if lipschitz_estimate(&avg.control, grid)? > schedule.r_star {
                    break;
                }
                chosen = Some((avg.control, eta));
                eta /= 2.0;
            }
            if let Some((control, eta)) = chosen {
                return Ok((control, Some(eta)));
            }
            (schedule.partition_diameter / 2.0).clamp(2.0 * h_max, diam)
        }
    };
    Ok((steklov_average(u, grid, eta)?.control, Some(eta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_grid;

    fn grid(n: usize) -> Grid {
        build_grid(&DomainBox::unit(1), &[n]).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let g = grid(1 << 14);
        let u = GridControl::from_fn(&g, 1, |s, o| o[0] = s[0].powf(-0.25));
        let t = truncate_control(&u, &g, 2.0).unwrap();
        // ‖u‖ > 2 exactly on (0, 1/16)
        assert!((t.excess_measure - 0.0625).abs() < 1e-12);
        assert!(t.control.sup_norm() <= 2.0);
        assert!(t.control.l2_norm(&g) <= u.l2_norm(&g));

        let half = GridControl::constant(&g, &[0.5]);
        let t = truncate_control(&half, &g, 1.0).unwrap();
        assert_eq!(t.control, half);
        assert_eq!(t.excess_measure, 0.0);

        let g = grid(10);
        let t = truncate_control(&GridControl::constant(&g, &[3.0]), &g, 2.0).unwrap();
        assert!(t.control.values.iter().all(|&v| v == 2.0));
        assert!((t.excess_measure - 1.0).abs() < 1e-12);
        assert!(truncate_control(&GridControl::constant(&g, &[3.0]), &g, 0.0).is_err());
    }

    #[test]
    fn steklov_examples() {
        let g = grid(1000);
        let ramp = GridControl::from_fn(&g, 1, |s, o| o[0] = s[0]);
        let mid = steklov_average_at(&ramp, &g, 0.1, &[0.5]).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-12);
        let edge = steklov_average_at(&ramp, &g, 0.1, &[0.0]).unwrap();
        assert!((edge[0] - 0.025).abs() < 1e-12);

        let c = GridControl::constant(&g, &[0.7]);
        let avg = steklov_average(&c, &g, 0.1).unwrap();
        // interior nodes reproduce the constant
        assert!((avg.control.at(500)[0] - 0.7).abs() < 1e-12);
        assert!(avg.control.sup_norm() <= 0.7 + 1e-12);
        assert!(avg.control.l2_norm(&g) <= c.l2_norm(&g));
        assert!((avg.lipschitz_bound - 0.7 / 0.1).abs() < 1e-12);
    }

    #[test]
    fn steklov_grid_matches_pointwise() {
        let g = build_grid(&DomainBox::unit(2), &[20, 20]).unwrap();
        let u = GridControl::from_fn(&g, 2, |s, o| {
            o[0] = s[0] * s[1];
            o[1] = (s[0] - s[1]).sin();
        });
        let avg = steklov_average(&u, &g, 0.17).unwrap();
        for i in [0, 37, 210, 399] {
            let at = steklov_average_at(&u, &g, 0.17, g.node(i)).unwrap();
            for (a, b) in at.iter().zip(avg.control.at(i)) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn lipschitz_examples() {
        let g = grid(200);
        let ramp = GridControl::from_fn(&g, 1, |s, o| o[0] = s[0]);
        assert!((lipschitz_estimate(&ramp, &g).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(lipschitz_estimate(&GridControl::constant(&g, &[3.0]), &g).unwrap(), 0.0);
        let tent = GridControl::from_fn(&g, 1, |s, o| o[0] = (2.0 * s[0] - 1.0).abs());
        assert!((lipschitz_estimate(&tent, &g).unwrap() - 2.0).abs() < 1e-9);
        assert!(lipschitz_estimate(&GridControl::constant(&grid(1), &[1.0]), &grid(1)).is_err());
    }

    #[test]
    fn cell_average_examples() {
        let g = grid(1000);
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 0.5).unwrap());
        assert_eq!(p.len(), 2);
        let ramp = GridControl::from_fn(&g, 1, |s, o| o[0] = s[0]);
        let avg = cell_average(&ramp, &g, &p).unwrap();
        assert!((avg.magnitude(0) - 0.25).abs() < 1e-12);
        assert!((avg.magnitude(1) - 0.75).abs() < 1e-12);
        let err = ramp.sup_distance(&avg.to_grid(&g).unwrap());
        assert!(err <= 0.25 + 1e-12 && err <= 1.0 * 0.5);
        assert!((avg.resource().sqrt() - 0.3125f64.sqrt()).abs() < 1e-12);
        assert!(avg.resource().sqrt() <= ramp.l2_norm(&g));

        let c = cell_average(&GridControl::constant(&g, &[-0.4]), &g, &p).unwrap();
        assert!(c.magnitudes().iter().all(|r| (r - 0.4).abs() < 1e-12));
        assert!(c.directions().iter().all(|&d| d == -1.0));

        let misaligned = grid(7);
        assert!(cell_average(&GridControl::zeros(&misaligned, 1), &misaligned, &p).is_err());
    }

    #[test]
    fn magnitude_examples() {
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 1.0 / 3.0).unwrap());
        let ladder = uniform_levels(1.0, 2).unwrap();
        let u = PiecewiseConstantControl::new(p.clone(), 1, vec![0.7, 1.0, 0.0], vec![1.0, -1.0, 1.0]).unwrap();
        let q = quantize_magnitude(&u, &ladder).unwrap();
        assert_eq!(q.magnitudes(), &[0.5, 1.0, 0.0]);
        assert_eq!(q.directions(), u.directions());
        assert!((u.sup_distance(&q) - 0.2).abs() < 1e-12);
        assert!(q.resource() <= u.resource());

        let too_big = PiecewiseConstantControl::new(p, 1, vec![1.1, 0.0, 0.0], vec![1.0; 3]).unwrap();
        assert!(quantize_magnitude(&too_big, &ladder).is_err());
    }

    #[test]
    fn direction_examples() {
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 1.0).unwrap());
        let net = SphereNet::from_points(
            2,
            2f64.sqrt(),
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
        )
        .unwrap();
        let u = PiecewiseConstantControl::new(p.clone(), 2, vec![1.0], vec![0.3f64.cos(), 0.3f64.sin()]).unwrap();
        let q = quantize_direction(&u, &net).unwrap();
        assert_eq!(q.direction(0), &[1.0, 0.0]);
        assert!((u.sup_distance(&q) - 2.0 * 0.15f64.sin()).abs() < 1e-12);
        assert!((q.resource() - u.resource()).abs() < 1e-15);

        let on_net = PiecewiseConstantControl::new(p.clone(), 2, vec![0.5], vec![0.0, -1.0]).unwrap();
        assert_eq!(quantize_direction(&on_net, &net).unwrap(), on_net);

        let m1 = sphere_net(1, 0.5).unwrap();
        let neg = PiecewiseConstantControl::new(p.clone(), 1, vec![0.5], vec![-1.0]).unwrap();
        assert_eq!(quantize_direction(&neg, &m1).unwrap().direction(0), &[-1.0]);
        assert!(quantize_direction(&neg, &net).is_err());
    }
}
