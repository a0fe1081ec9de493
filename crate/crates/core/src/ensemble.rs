//! Finite control families, their trajectory sets, L2 Hausdorff distances and
//! the empirical check of the `(c*+1)ε` approximation bound.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{ApproxSchedule, BoundReport};
use crate::control::{GridControl, PiecewiseConstantControl};
use crate::discretization::{DeltaPartition, Grid, LevelLadder, SphereNet};
use crate::error::{Error, Result};
use crate::pipeline::{full_pipeline, FamilyDesign, StageErrors, SteklovPolicy};
use crate::solver::{Nystrom, SolverOptions};
use crate::system::{ControlId, SystemSpec, Trajectory};

/// Relative slack on the resource budget `ρ²`.
const BUDGET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generation {
    Enumerated,
    Sampled,
}

impl Generation {
    pub fn as_str(self) -> &'static str {
        match self {
            Generation::Enumerated => "enumerated",
            Generation::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlEnsemble {
    pub controls: Vec<PiecewiseConstantControl>,
    pub generation: Generation,
    /// The declared `(α, Γ, Λ, σ)`.
    pub design: FamilyDesign,
    pub rho: f64,
}

impl ControlEnsemble {
    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    /// Samples every member on the grid.
    pub fn to_grid(&self, grid: &Grid) -> Result<Vec<GridControl>> {
        let cells = grid.cell_assignment(&self.design.partition)?;
        Ok(self.controls.iter().map(|u| u.to_grid_with(&cells)).collect())
    }
}

/// Per-cell resource cost of every ladder level, ascending.
fn level_costs(partition: &DeltaPartition, ladder: &LevelLadder) -> Vec<Vec<f64>> {
    (0..partition.len())
        .map(|i| ladder.levels().iter().map(|r| partition.cell_measure(i) * r * r).collect())
        .collect()
}

/// Counts family members (magnitude patterns weighted by direction choices),
/// giving up once the count exceeds `cap`.
fn count_members(costs: &[Vec<f64>], directions: usize, budget: f64, cap: usize) -> Option<usize> {
    fn go(costs: &[Vec<f64>], cell: usize, remaining: f64, c: usize, cap: usize, total: &mut usize, weight: usize) -> bool {
        if cell == costs.len() {
            *total += weight;
            return *total <= cap;
        }
        for (j, &cost) in costs[cell].iter().enumerate() {
            if cost > remaining {
                break;
            }
            let w = if j == 0 { weight } else { weight.saturating_mul(c) };
            if w > cap || !go(costs, cell + 1, remaining - cost, c, cap, total, w) {
                return false;
            }
        }
        true
    }
    let mut total = 0usize;
    go(costs, 0, budget, directions, cap, &mut total, 1).then_some(total)
}

/// Every member of the family
/// `{ Σ r_{j_i} b_{l_i} 1_{E_i} : Σ μ(E_i) r_{j_i}² ≤ ρ² }`, zero cells carrying
/// the first net point.
pub fn enumerate_controls(
    partition: &Arc<DeltaPartition>,
    ladder: &LevelLadder,
    net: &SphereNet,
    rho: f64,
    cap: usize,
) -> Result<ControlEnsemble> {
    if cap == 0 {
        return Err(Error::validation("enumeration cap must be positive"));
    }
    let costs = level_costs(partition, ladder);
    let budget = rho * rho * (1.0 + BUDGET_SLACK);
    if count_members(&costs, net.len(), budget, cap).is_none() {
        return Err(Error::EnumerationTooLarge { cap });
    }

    let cells = partition.len();
    let m = net.dim();
    let mut patterns: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::with_capacity(cells);
    magnitude_patterns(&costs, budget, &mut current, &mut patterns);

    let mut controls = Vec::new();
    for pattern in &patterns {
        let magnitudes: Vec<f64> = pattern.iter().map(|&j| ladder.levels()[j]).collect();
        let active: Vec<usize> = (0..cells).filter(|&i| pattern[i] != 0).collect();
        let mut choice = vec![0usize; active.len()];
        loop {
            let mut directions = Vec::with_capacity(cells * m);
            let mut next = 0;
            for i in 0..cells {
                if next < active.len() && active[next] == i {
                    directions.extend_from_slice(net.point(choice[next]));
                    next += 1;
                } else {
                    directions.extend_from_slice(net.point(0));
                }
            }
            controls.push(PiecewiseConstantControl::new(partition.clone(), m, magnitudes.clone(), directions)?);
            if !advance(&mut choice, net.len()) {
                break;
            }
        }
    }
    Ok(ControlEnsemble {
        controls,
        generation: Generation::Enumerated,
        design: FamilyDesign { partition: partition.clone(), ladder: ladder.clone(), net: net.clone() },
        rho,
    })
}

fn magnitude_patterns(costs: &[Vec<f64>], remaining: f64, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let cell = current.len();
    if cell == costs.len() {
        out.push(current.clone());
        return;
    }
    for (j, &cost) in costs[cell].iter().enumerate() {
        if cost > remaining {
            break;
        }
        current.push(j);
        magnitude_patterns(costs, remaining - cost, current, out);
        current.pop();
    }
}

/// Odometer increment; false once every digit has wrapped.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Size of the family, counted without materialising it. `None` when the
/// count is too expensive to obtain; the count is exact for partitions with
/// equal cell measures.
pub fn estimate_family_size(design: &FamilyDesign, rho: f64) -> Option<f64> {
    let p = &design.partition;
    let mu = p.cell_measure(0);
    if (0..p.len()).any(|i| (p.cell_measure(i) - mu).abs() > 1e-12 * mu) {
        return count_members(&level_costs(p, &design.ladder), design.net.len(), rho * rho * (1.0 + BUDGET_SLACK), 10_000_000)
            .map(|c| c as f64);
    }
    // levels are j·step, so the constraint reads Σ j_i² ≤ B
    let step = design.ladder.step();
    let budget = (rho * rho * (1.0 + BUDGET_SLACK) / (mu * step * step)).floor();
    let q = design.ladder.intervals();
    let cells = p.len();
    if !(budget.is_finite()) || (cells as f64) * budget * (budget.sqrt().min(q as f64) + 1.0) > 5e8 {
        return None;
    }
    let b = budget as usize;
    let c = design.net.len() as f64;
    // ways[s] = weighted number of prefixes with Σ j² = s
    let mut ways = vec![0.0; b + 1];
    ways[0] = 1.0;
    for _ in 0..cells {
        let mut next = vec![0.0; b + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            next[s] += w;
            for j in 1..=q {
                let t = s + j * j;
                if t > b {
                    break;
                }
                next[t] += w * c;
            }
        }
        ways = next;
    }
    Some(ways.iter().sum())
}

/// Random family members: cells are visited in random order and each takes a
/// uniformly random level among those the remaining budget allows and a
/// uniformly random net point.
pub fn sample_family_members(design: &FamilyDesign, rho: f64, count: usize, seed: u64) -> Result<Vec<PiecewiseConstantControl>> {
    let partition = &design.partition;
    let costs = level_costs(partition, &design.ladder);
    let m = design.net.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..partition.len()).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        order.shuffle(&mut rng);
        let mut remaining = rho * rho * (1.0 + BUDGET_SLACK);
        let mut magnitudes = vec![0.0; partition.len()];
        let mut directions = vec![0.0; partition.len() * m];
        for &i in &order {
            let feasible = costs[i].iter().take_while(|&&c| c <= remaining).count();
            let j = rng.random_range(0..feasible);
            remaining -= costs[i][j];
            magnitudes[i] = design.ladder.levels()[j];
            let l = if j == 0 { 0 } else { rng.random_range(0..design.net.len()) };
            directions[i * m..(i + 1) * m].copy_from_slice(design.net.point(l));
        }
        out.push(PiecewiseConstantControl::new(partition.clone(), m, magnitudes, directions)?);
    }
    Ok(out)
}

/// Random admissible controls: i.i.d. standard normal node values rescaled to
/// L2 norm `t·ρ` with `t ~ U[0, 1)`.
pub fn sample_admissible(system: &SystemSpec, grid: &Grid, count: usize, seed: u64) -> Result<Vec<GridControl>> {
    if count == 0 {
        return Err(Error::validation("sample count must be at least 1"));
    }
    let m = system.control_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut values: Vec<f64> = (0..grid.len() * m).map(|_| rng.sample(StandardNormal)).collect();
        let t: f64 = rng.random();
        let norm = grid.l2_norm(&values, m);
        let scale = if norm > 0.0 { t * system.rho / norm } else { 0.0 };
        values.iter_mut().for_each(|v| *v *= scale);
        out.push(GridControl { dim: m, values });
    }
    Ok(out)
}

/// Solves for every control in parallel; ids are `first_id + index`.
pub fn solve_all(op: &Nystrom<'_>, controls: &[GridControl], opts: &SolverOptions, first_id: u64) -> Result<Vec<Trajectory>> {
    controls
        .par_iter()
        .enumerate()
        .map(|(i, u)| op.solve(u, opts, ControlId(first_id + i as u64)))
        .collect()
}

/// One trajectory per ensemble member, in ensemble order.
pub fn trajectory_set(system: &SystemSpec, ensemble: &ControlEnsemble, grid: &Grid, opts: &SolverOptions) -> Result<Vec<Trajectory>> {
    let op = Nystrom::new(system, grid)?;
    solve_all(&op, &ensemble.to_grid(grid)?, opts, 0)
}

fn check_sets(a: &[Trajectory], b: &[Trajectory], grid: &Grid) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::validation("Hausdorff distance needs two nonempty sets"));
    }
    let len = a[0].values.len();
    if a.iter().chain(b).any(|t| t.values.len() != len || t.values.len() != grid.len() * t.state_dim) {
        return Err(Error::validation("trajectories are not sampled on the same grid"));
    }
    Ok(())
}

/// `min_{b ∈ set} ‖x − b‖₂`.
pub fn distance_to_set(x: &Trajectory, set: &[Trajectory], grid: &Grid) -> f64 {
    set.iter().map(|b| x.l2_distance(b, grid)).fold(f64::INFINITY, f64::min)
}

/// `max_{a ∈ A} min_{b ∈ B} ‖a − b‖₂`.
pub fn directed_hausdorff_l2(a: &[Trajectory], b: &[Trajectory], grid: &Grid) -> Result<f64> {
    check_sets(a, b, grid)?;
    let nearest: Vec<f64> = a.par_iter().map(|x| distance_to_set(x, b, grid)).collect();
    Ok(nearest.into_iter().fold(0.0, f64::max))
}

pub fn hausdorff_l2(a: &[Trajectory], b: &[Trajectory], grid: &Grid) -> Result<f64> {
    Ok(directed_hausdorff_l2(a, b, grid)?.max(directed_hausdorff_l2(b, a, grid)?))
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub sample_count: usize,
    /// Largest family that is enumerated in full.
    pub cap: usize,
    /// Random family members added when enumeration is over the cap.
    pub family_samples: usize,
    pub seed: u64,
    pub solver: SolverOptions,
    /// Overrides the coarsest design derived from the schedule.
    pub design: Option<FamilyDesign>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            sample_count: 200,
            cap: 100_000,
            family_samples: 2000,
            seed: 0,
            solver: SolverOptions::default(),
            design: None,
        }
    }
}

/// Outcome of one empirical check of `h₂ ≤ (c*+1)ε`.
///
/// Sampling admissible controls can only under-report the left-hand side:
/// the statement is worst case over all of `V_ρ`.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub epsilon: f64,
    pub c_star: f64,
    /// `(c*+1)ε`.
    pub bound: f64,
    /// Largest distance from a sampled trajectory to the finite trajectory set.
    pub sampled_max_distance: f64,
    pub pass: bool,
    pub sample_count: usize,
    pub family_size: usize,
    pub generation: Generation,
    /// Finite-set trajectories whose residual exceeds the solver tolerance.
    pub residual_violations: usize,
    pub max_residual: f64,
    /// Pipeline images that are not members of the declared family.
    pub membership_violations: usize,
    /// Pipeline images whose stage errors exceed their bounds.
    pub stage_violations: usize,
    /// Componentwise maximum over the sampled controls.
    pub stage_errors: StageErrors,
    pub solver_tol: f64,
    pub grid_nodes: usize,
    pub partition_cells: usize,
    pub partition_diameter: f64,
    pub ladder_levels: usize,
    pub ladder_step: f64,
    pub net_points: usize,
    pub net_sigma: f64,
    pub wall_time: Duration,
}

/// Samples admissible controls, solves them and measures their distance to
/// the trajectories of the finite family built from `schedule`.
///
/// The family is enumerated when it has at most `cap` members; otherwise it
/// is replaced by the pipeline images of the samples plus random members.
/// Every finite-set trajectory is certified to lie in the full trajectory set
/// by its residual, so the reverse Hausdorff side is zero up to solver
/// tolerance.
pub fn verify_theorem(
    system: &SystemSpec,
    grid: &Grid,
    bounds: &BoundReport,
    schedule: &ApproxSchedule,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let design = match &opts.design {
        Some(d) => d.clone(),
        None => FamilyDesign::from_schedule(&system.domain, system.control_dim, schedule)?,
    };
    design.check_against(schedule)?;
    let grid = match grid.cell_assignment(&design.partition) {
        Ok(_) => grid.clone(),
        Err(_) => Grid::refining(&design.partition, grid.cells_per_axis().iter().copied().max().unwrap_or(1))?,
    };
    let op = Nystrom::new(system, &grid)?;
    let tol = opts.solver.tol;

    let samples = sample_admissible(system, &grid, opts.sample_count, opts.seed)?;
    let images: Vec<_> = samples
        .par_iter()
        .map(|u| full_pipeline(u, &grid, schedule, &design, system.rho, SteklovPolicy::Auto))
        .collect::<Result<_>>()?;
    let membership_violations = images.iter().filter(|p| !design.contains(&p.control, system.rho)).count();
    let stage_violations = images.iter().filter(|p| !p.errors.within_bounds(1e-9)).count();
    let stage_errors = images.iter().fold(StageErrors::default(), |acc, p| max_errors(&acc, &p.errors));

    let ensemble = match enumerate_controls(&design.partition, &design.ladder, &design.net, system.rho, opts.cap) {
        Ok(e) => e,
        Err(Error::EnumerationTooLarge { .. }) => {
            let mut controls: Vec<_> = images.iter().map(|p| p.control.clone()).collect();
            controls.extend(sample_family_members(&design, system.rho, opts.family_samples, opts.seed ^ FAMILY_SEED)?);
            ControlEnsemble { controls, generation: Generation::Sampled, design: design.clone(), rho: system.rho }
        }
        Err(e) => return Err(e),
    };
    let finite = solve_all(&op, &ensemble.to_grid(&grid)?, &opts.solver, 0)?;
    let residual_violations = finite.iter().filter(|t| t.residual_l2 > tol).count();
    let max_residual = finite.iter().map(|t| t.residual_l2).fold(0.0, f64::max);

    let sampled = solve_all(&op, &samples, &opts.solver, finite.len() as u64)?;
    let sampled_max_distance = directed_hausdorff_l2(&sampled, &finite, &grid)?;

    let bound = bounds.bound(schedule.epsilon);
    Ok(ExperimentReport {
        epsilon: schedule.epsilon,
        c_star: bounds.c_star,
        bound,
        sampled_max_distance,
        pass: sampled_max_distance <= bound + 2.0 * tol,
        sample_count: samples.len(),
        family_size: ensemble.len(),
        generation: ensemble.generation,
        residual_violations,
        max_residual,
        membership_violations,
        stage_violations,
        stage_errors,
        solver_tol: tol,
        grid_nodes: grid.len(),
        partition_cells: design.partition.len(),
        partition_diameter: design.partition.max_cell_diameter(),
        ladder_levels: design.ladder.levels().len(),
        ladder_step: design.ladder.step(),
        net_points: design.net.len(),
        net_sigma: design.net.sigma(),
        wall_time: started.elapsed(),
    })
}

/// Decorrelates the family sampler from the admissible-control sampler.
const FAMILY_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

fn max_errors(a: &StageErrors, b: &StageErrors) -> StageErrors {
    let mut l2_norms = a.l2_norms;
    l2_norms.iter_mut().zip(b.l2_norms).for_each(|(x, y)| *x = x.max(y));
    StageErrors {
        truncation_excess_measure: a.truncation_excess_measure.max(b.truncation_excess_measure),
        truncation_excess_bound: a.truncation_excess_bound.max(b.truncation_excess_bound),
        truncation_sup_change: a.truncation_sup_change.max(b.truncation_sup_change),
        steklov_eta: match (a.steklov_eta, b.steklov_eta) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        },
        steklov_lipschitz: a.steklov_lipschitz.max(b.steklov_lipschitz),
        steklov_l2_change: a.steklov_l2_change.max(b.steklov_l2_change),
        cell_sup_error: a.cell_sup_error.max(b.cell_sup_error),
        cell_error_bound: a.cell_error_bound.max(b.cell_error_bound),
        magnitude_sup_error: a.magnitude_sup_error.max(b.magnitude_sup_error),
        magnitude_bound: a.magnitude_bound.max(b.magnitude_bound),
        direction_sup_error: a.direction_sup_error.max(b.direction_sup_error),
        direction_bound: a.direction_bound.max(b.direction_bound),
        l2_norms,
    }
}
