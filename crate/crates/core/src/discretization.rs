//! Quadrature grids, Δ-partitions of the domain box, uniform magnitude
//! ladders and σ-nets on the unit sphere.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::system::DomainBox;

/// Tensor-product midpoint rule on a box. Nodes are stored flat
/// (`nodes[i * k .. (i + 1) * k]`), last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: DomainBox,
    cells_per_axis: Vec<usize>,
    spacing: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub fn build_grid(domain: &DomainBox, cells_per_axis: &[usize]) -> Result<Grid> {
    let k = domain.dim();
    if cells_per_axis.len() != k {
        return Err(Error::validation(format!(
            "grid needs {k} per-axis cell counts, got {}",
            cells_per_axis.len()
        )));
    }
    if cells_per_axis.iter().any(|&c| c == 0) {
        return Err(Error::validation("cells_per_axis must be at least 1 on every axis"));
    }
    let spacing: Vec<f64> = (0..k).map(|a| domain.side(a) / cells_per_axis[a] as f64).collect();
    let total: usize = cells_per_axis.iter().product();
    let weight: f64 = spacing.iter().product();

    let mut nodes = Vec::with_capacity(total * k);
    let mut idx = vec![0usize; k];
    for _ in 0..total {
        for a in 0..k {
            nodes.push(domain.lower()[a] + (idx[a] as f64 + 0.5) * spacing[a]);
        }
        for a in (0..k).rev() {
            idx[a] += 1;
            if idx[a] < cells_per_axis[a] {
                break;
            }
            idx[a] = 0;
        }
    }

    Ok(Grid {
        domain: domain.clone(),
        cells_per_axis: cells_per_axis.to_vec(),
        spacing,
        nodes,
        weights: vec![weight; total],
    })
}

impl Grid {
    /// Grid whose cells subdivide every partition cell into an integer number
    /// of grid cells, with at least `min_cells_per_axis` cells per axis.
    pub fn refining(partition: &DeltaPartition, min_cells_per_axis: usize) -> Result<Grid> {
        let cells: Vec<usize> = partition
            .cells_per_axis
            .iter()
            .map(|&p| p * min_cells_per_axis.div_ceil(p).max(1))
            .collect();
        build_grid(&partition.domain, &cells)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        let k = self.dim();
        &self.nodes[i * k..(i + 1) * k]
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let k = self.dim();
        let mut idx = vec![0; k];
        for a in (0..k).rev() {
            idx[a] = i % self.cells_per_axis[a];
            i /= self.cells_per_axis[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.cells_per_axis).fold(0, |acc, (&i, &c)| acc * c + i)
    }

    /// Midpoint-rule integral of a scalar field sampled at the nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn l2_norm(&self, values: &[f64], dim: usize) -> f64 {
        self.weights
            .iter()
            .zip(values.chunks_exact(dim))
            .map(|(w, v)| w * v.iter().map(|c| c * c).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_distance(&self, a: &[f64], b: &[f64], dim: usize) -> f64 {
        self.weights
            .iter()
            .zip(a.chunks_exact(dim).zip(b.chunks_exact(dim)))
            .map(|(w, (x, y))| w * x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest pointwise Euclidean norm over the nodes.
    pub fn sup_norm(values: &[f64], dim: usize) -> f64 {
        values
            .chunks_exact(dim)
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Samples a vector-valued function at every node.
    pub fn sample(&self, dim: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Vec<f64> {
        let mut out = vec![0.0; self.len() * dim];
        for (i, chunk) in out.chunks_exact_mut(dim).enumerate() {
            f(self.node(i), chunk);
        }
        out
    }

    /// Partition cell of every node. Fails unless the grid refines the
    /// partition exactly.
    pub fn cell_assignment(&self, partition: &DeltaPartition) -> Result<Vec<usize>> {
        if self.domain != partition.domain {
            return Err(Error::validation("grid and partition live on different domains"));
        }
        let k = self.dim();
        let mut ratio = Vec::with_capacity(k);
        for a in 0..k {
            let (g, p) = (self.cells_per_axis[a], partition.cells_per_axis[a]);
            if g % p != 0 {
                return Err(Error::validation(format!(
                    "grid ({g} cells) does not refine partition ({p} cells) on axis {a}"
                )));
            }
            ratio.push(g / p);
        }
        Ok((0..self.len())
            .map(|i| {
                let idx = self.multi_index(i);
                idx.iter()
                    .zip(&ratio)
                    .zip(&partition.cells_per_axis)
                    .fold(0, |acc, ((&gi, &r), &p)| acc * p + gi / r)
            })
            .collect())
    }
}

/// Finite Δ-partition of a box into congruent axis-aligned sub-boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPartition {
    domain: DomainBox,
    delta: f64,
    cells_per_axis: Vec<usize>,
    cells: Vec<DomainBox>,
}

/// Uniform partition with `ceil(side_a·√k / Δ)` cells on axis `a`, so every
/// cell has diameter at most `Δ`. Returns the single cell `E` when
/// `Δ ≥ diam(E)`.
pub fn delta_partition(domain: &DomainBox, delta: f64) -> Result<DeltaPartition> {
    if !(delta > 0.0) || delta.is_nan() {
        return Err(Error::validation(format!("delta must be positive, got {delta}")));
    }
    let k = domain.dim();
    let cells_per_axis: Vec<usize> = if delta >= domain.diameter() {
        vec![1; k]
    } else {
        let root_k = (k as f64).sqrt();
        (0..k)
            .map(|a| {
                let ratio = domain.side(a) * root_k / delta;
                // absorb representation error in ratios like 1/0.2
                let mut c = (ratio * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                if domain.side(a) / c as f64 * root_k > delta * (1.0 + 1e-12) {
                    c += 1;
                }
                c
            })
            .collect()
    };
    Ok(DeltaPartition::uniform(domain, delta, cells_per_axis))
}

impl DeltaPartition {
    /// Splits every cell into `factor^k` congruent sub-cells; the result is
    /// nested in `self` and is a `Δ/factor`-partition.
    pub fn refine(&self, factor: usize) -> DeltaPartition {
        let factor = factor.max(1);
        let cells = self.cells_per_axis.iter().map(|c| c * factor).collect();
        Self::uniform(&self.domain, self.delta / factor as f64, cells)
    }

    fn uniform(domain: &DomainBox, delta: f64, cells_per_axis: Vec<usize>) -> Self {
        let k = domain.dim();
        let total: usize = cells_per_axis.iter().product();
        let mut cells = Vec::with_capacity(total);
        let mut idx = vec![0usize; k];
        for _ in 0..total {
            let lo: Vec<f64> = (0..k)
                .map(|a| domain.lower()[a] + domain.side(a) * idx[a] as f64 / cells_per_axis[a] as f64)
                .collect();
            let hi: Vec<f64> = (0..k)
                .map(|a| {
                    if idx[a] + 1 == cells_per_axis[a] {
                        domain.upper()[a]
                    } else {
                        domain.lower()[a] + domain.side(a) * (idx[a] + 1) as f64 / cells_per_axis[a] as f64
                    }
                })
                .collect();
            cells.push(DomainBox::new(lo, hi).expect("sub-box of a valid box"));
            for a in (0..k).rev() {
                idx[a] += 1;
                if idx[a] < cells_per_axis[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Self { domain: domain.clone(), delta, cells_per_axis, cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn cells(&self) -> &[DomainBox] {
        &self.cells
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    pub fn cell_measure(&self, i: usize) -> f64 {
        self.cells[i].measure()
    }

    pub fn max_cell_diameter(&self) -> f64 {
        self.cells.iter().map(DomainBox::diameter).fold(0.0, f64::max)
    }

    /// Index of the cell containing `p` (half-open cells, the last one closed).
    pub fn locate(&self, p: &[f64]) -> Option<usize> {
        if !self.domain.contains(p) {
            return None;
        }
        let mut flat = 0;
        for (a, &c) in self.cells_per_axis.iter().enumerate() {
            let t = (p[a] - self.domain.lower()[a]) / self.domain.side(a);
            let i = ((t * c as f64).floor() as usize).min(c - 1);
            flat = flat * c + i;
        }
        Some(flat)
    }

    /// Checks the four partition clauses: cells inside `E`, pairwise
    /// disjoint interiors, union equal to `E`, diameters at most `Δ`.
    /// Coverage is checked by measure and by locating `samples` random points.
    pub fn verify(&self, samples: usize, seed: u64) -> PartitionCheck {
        let inside = self.cells.iter().all(|c| {
            c.lower().iter().zip(self.domain.lower()).all(|(a, b)| a >= b)
                && c.upper().iter().zip(self.domain.upper()).all(|(a, b)| a <= b)
        });
        let mut disjoint = true;
        'outer: for i in 0..self.cells.len() {
            for j in i + 1..self.cells.len() {
                if overlap_volume(&self.cells[i], &self.cells[j]) > 0.0 {
                    disjoint = false;
                    break 'outer;
                }
            }
        }
        let measure_sum: f64 = self.cells.iter().map(DomainBox::measure).sum();
        let mut covered = (measure_sum - self.domain.measure()).abs() <= 1e-12 * self.domain.measure();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = vec![0.0; self.domain.dim()];
        for _ in 0..samples {
            self.domain.sample_point(&mut rng, &mut p);
            match self.locate(&p) {
                Some(i) if self.cells[i].contains(&p) => {}
                _ => {
                    covered = false;
                    break;
                }
            }
        }
        let diameters = self.max_cell_diameter() <= self.delta * (1.0 + 1e-12);
        PartitionCheck { inside, disjoint, covered, diameters }
    }
}

fn overlap_volume(a: &DomainBox, b: &DomainBox) -> f64 {
    (0..a.dim())
        .map(|i| (a.upper()[i].min(b.upper()[i]) - a.lower()[i].max(b.lower()[i])).max(0.0))
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionCheck {
    pub inside: bool,
    pub disjoint: bool,
    pub covered: bool,
    pub diameters: bool,
}

impl PartitionCheck {
    pub fn all(&self) -> bool {
        self.inside && self.disjoint && self.covered && self.diameters
    }
}

/// Uniform levels `0 = r_0 < r_1 < … < r_q = α`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLadder {
    levels: Vec<f64>,
    step: f64,
}

pub fn uniform_levels(alpha: f64, q: usize) -> Result<LevelLadder> {
    if q == 0 {
        return Err(Error::validation("level count q must be at least 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!("ladder top must be positive, got {alpha}")));
    }
    let step = alpha / q as f64;
    let mut levels: Vec<f64> = (0..=q).map(|j| j as f64 * step).collect();
    levels[q] = alpha;
    Ok(LevelLadder { levels, step })
}

impl LevelLadder {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn top(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    /// Number of intervals `q`.
    pub fn intervals(&self) -> usize {
        self.levels.len() - 1
    }

    /// Largest `j` with `r_j ≤ r`. `None` when `r` is negative or above the top.
    pub fn floor_index(&self, r: f64) -> Option<usize> {
        let q = self.intervals();
        if r < 0.0 || r > self.top() || r.is_nan() {
            return None;
        }
        let mut j = ((r / self.step).floor() as usize).min(q);
        while j > 0 && self.levels[j] > r {
            j -= 1;
        }
        while j < q && self.levels[j + 1] <= r {
            j += 1;
        }
        Some(j)
    }

    /// Index of a level equal to `r` within `tol`.
    pub fn level_index(&self, r: f64, tol: f64) -> Option<usize> {
        let j = ((r / self.step).round().max(0.0) as usize).min(self.intervals());
        ((self.levels[j] - r).abs() <= tol).then_some(j)
    }
}

/// Finite σ-net on the unit sphere of `R^m`; points stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNet {
    dim: usize,
    sigma: f64,
    points: Vec<f64>,
}

const NET_SAMPLES: usize = 10_000;
const NET_REFINEMENTS: usize = 8;
const NET_MAX_POINTS: usize = 4_000_000;

/// Builds a σ-net on the unit sphere of `R^m`.
///
/// * `m = 1`: `{+1, -1}`.
/// * `m = 2`: equiangular points with step at most `2·arcsin(σ/2)`.
/// * `m ≥ 3`: cell centres of a uniform grid on every face of `[-1, 1]^m`,
///   projected radially. Radial projection from outside the ball is
///   1-Lipschitz, so `p = ceil(√(m-1)/σ)` cells per face axis covers within σ.
///
/// Every net for `m ≥ 2` is then checked against random unit vectors and
/// refined if a sample is farther than σ.
pub fn sphere_net(m: usize, sigma: f64) -> Result<SphereNet> {
    if m == 0 {
        return Err(Error::validation("sphere dimension must be at least 1"));
    }
    if !(sigma > 0.0) || sigma.is_nan() {
        return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
    }
    if m == 1 {
        return Ok(SphereNet { dim: 1, sigma, points: vec![1.0, -1.0] });
    }

    let mut resolution = initial_resolution(m, sigma);
    for _ in 0..NET_REFINEMENTS {
        let points = if m == 2 { circle_points(resolution) } else { cube_face_points(m, resolution)? };
        let net = SphereNet { dim: m, sigma, points };
        if net.sampled_covering_radius(NET_SAMPLES, 0x5eed) <= sigma {
            return Ok(net);
        }
        resolution += 1;
    }
    Err(Error::NetCoverage { dim: m, sigma, attempts: NET_REFINEMENTS })
}

fn initial_resolution(m: usize, sigma: f64) -> usize {
    if m == 2 {
        if sigma >= 2.0 {
            return 2;
        }
        let step = 2.0 * (sigma / 2.0).asin();
        ((2.0 * PI / step) * (1.0 - 1e-12)).ceil().max(2.0) as usize
    } else {
        (((m - 1) as f64).sqrt() / sigma).ceil().max(1.0) as usize
    }
}

fn circle_points(count: usize) -> Vec<f64> {
    (0..count)
        .flat_map(|i| {
            let t = 2.0 * PI * i as f64 / count as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

fn cube_face_points(m: usize, p: usize) -> Result<Vec<f64>> {
    let per_face = p
        .checked_pow((m - 1) as u32)
        .filter(|c| c.saturating_mul(2 * m) <= NET_MAX_POINTS)
        .ok_or_else(|| Error::validation(format!("sphere net for m={m} would exceed {NET_MAX_POINTS} points")))?;
    let mut points = Vec::with_capacity(2 * m * per_face * m);
    let mut v = vec![0.0; m];
    for axis in 0..m {
        for sign in [1.0, -1.0] {
            let mut idx = vec![0usize; m - 1];
            for _ in 0..per_face {
                let mut t = 0;
                for (a, c) in v.iter_mut().enumerate() {
                    if a == axis {
                        *c = sign;
                    } else {
                        *c = -1.0 + (2 * idx[t] + 1) as f64 / p as f64;
                        t += 1;
                    }
                }
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                points.extend(v.iter().map(|c| c / norm));
                for a in (0..m - 1).rev() {
                    idx[a] += 1;
                    if idx[a] < p {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
    }
    Ok(points)
}

impl SphereNet {
    /// Net from explicit points; each is normalised.
    pub fn from_points(dim: usize, sigma: f64, points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("a sphere net needs at least one point"));
        }
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            if p.len() != dim || norm == 0.0 {
                return Err(Error::validation("net points must be nonzero vectors of the net dimension"));
            }
            flat.extend(p.iter().map(|c| c / norm));
        }
        Ok(Self { dim, sigma, points: flat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, l: usize) -> &[f64] {
        &self.points[l * self.dim..(l + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Nearest net point to `v` and its distance; ties go to the lowest index.
    pub fn nearest(&self, v: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (l, b) in self.points().enumerate() {
            let d2: f64 = b.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum();
            if d2 < best.1 {
                best = (l, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// Position of `v` in the net, up to `tol` per coordinate.
    pub fn index_of(&self, v: &[f64], tol: f64) -> Option<usize> {
        self.points().position(|b| b.iter().zip(v).all(|(x, y)| (x - y).abs() <= tol))
    }

    /// Largest distance from `samples` random unit vectors to the net.
    pub fn sampled_covering_radius(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = vec![0.0; self.dim];
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            random_unit_vector(&mut rng, &mut v);
            worst = worst.max(self.nearest(&v).1);
        }
        worst
    }
}

pub(crate) fn random_unit_vector<R: Rng>(rng: &mut R, out: &mut [f64]) {
    loop {
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let norm = out.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.iter_mut().for_each(|c| *c /= norm);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(k: usize) -> DomainBox {
        DomainBox::unit(k)
    }

    #[test]
    fn midpoint_nodes_on_unit_interval() {
        let g = build_grid(&unit(1), &[4]).unwrap();
        assert_eq!(g.nodes(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(g.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn unit_square_weights_sum_to_one() {
        let g = build_grid(&unit(2), &[5, 5]).unwrap();
        assert_eq!(g.len(), 25);
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((0..g.len()).all(|i| g.domain().contains(g.node(i))));
    }

    #[test]
    fn affine_integrand_is_exact() {
        let g = build_grid(&unit(1), &[256]).unwrap();
        let v = g.sample(1, |s, o| o[0] = s[0]);
        assert!((g.integrate(&v) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_cells_rejected() {
        assert!(build_grid(&unit(2), &[3, 0]).is_err());
        assert!(build_grid(&unit(2), &[3]).is_err());
    }

    #[test]
    fn multi_index_roundtrip() {
        let g = build_grid(&unit(3), &[2, 3, 4]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(i)), i);
        }
        // last axis fastest
        assert_eq!(g.multi_index(1), vec![0, 0, 1]);
    }

    #[test]
    fn partition_of_interval() {
        let p = delta_partition(&unit(1), 0.3).unwrap();
        assert_eq!(p.len(), 4);
        for c in p.cells() {
            assert!((c.side(0) - 0.25).abs() < 1e-15);
        }
        assert!(p.max_cell_diameter() <= 0.3);
        assert!(p.verify(1000, 1).all());
    }

    #[test]
    fn partition_of_square() {
        let p = delta_partition(&unit(2), 0.3).unwrap();
        assert_eq!(p.len(), 25);
        assert!((p.max_cell_diameter() - 0.2 * 2f64.sqrt()).abs() < 1e-12);
        assert!(p.verify(1000, 2).all());
    }

    #[test]
    fn coarse_delta_gives_single_cell() {
        let b = DomainBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let p = delta_partition(&b, b.diameter()).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.cells()[0], b);
    }

    #[test]
    fn exact_ratio_delta_does_not_overshoot() {
        let p = delta_partition(&unit(1), 0.2).unwrap();
        assert_eq!(p.len(), 5);
        let p = delta_partition(&unit(1), 0.1).unwrap();
        assert_eq!(p.len(), 10);
    }

    #[test]
    fn grid_refines_partition() {
        let p = delta_partition(&unit(1), 0.225).unwrap();
        let g = Grid::refining(&p, 1000).unwrap();
        assert_eq!(g.len(), 1000);
        let cells = g.cell_assignment(&p).unwrap();
        assert_eq!(cells[0], 0);
        assert_eq!(cells[999], 4);
        let misaligned = build_grid(&unit(1), &[7]).unwrap();
        assert!(misaligned.cell_assignment(&p).is_err());
    }

    #[test]
    fn ladders() {
        let l = uniform_levels(2.0, 4).unwrap();
        assert_eq!(l.levels(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(l.step(), 0.5);
        let l = uniform_levels(1.0, 1).unwrap();
        assert_eq!(l.levels(), &[0.0, 1.0]);
        let l = uniform_levels(10.0, 8).unwrap();
        assert_eq!(l.step(), 1.25);
        assert_eq!(l.levels()[3], 3.75);
        assert!(uniform_levels(1.0, 0).is_err());
    }

    #[test]
    fn floor_index_edges() {
        let l = uniform_levels(1.0, 2).unwrap();
        assert_eq!(l.floor_index(0.7), Some(1));
        assert_eq!(l.floor_index(1.0), Some(2));
        assert_eq!(l.floor_index(0.0), Some(0));
        assert_eq!(l.floor_index(0.5), Some(1));
        assert_eq!(l.floor_index(1.0 + 1e-9), None);
        let l = uniform_levels(0.3, 3).unwrap();
        // 0.1 * 3 is not exactly 0.3 in floating point; top must still be reachable
        assert_eq!(l.floor_index(0.3), Some(3));
    }

    #[test]
    fn one_dimensional_net() {
        let n = sphere_net(1, 0.01).unwrap();
        assert_eq!(n.len(), 2);
        assert_eq!(n.point(0), &[1.0]);
        assert_eq!(n.point(1), &[-1.0]);
    }

    #[test]
    fn circle_net_count_and_coverage() {
        let n = sphere_net(2, 0.5).unwrap();
        assert_eq!(n.len(), 13);
        assert!(n.sampled_covering_radius(10_000, 99) <= 0.5);
        let n = sphere_net(2, 2.0).unwrap();
        assert_eq!(n.len(), 2);
        assert!(n.sampled_covering_radius(10_000, 98) <= 2.0);
    }

    #[test]
    fn net_points_are_unit() {
        for m in 1..=4 {
            let n = sphere_net(m, 0.5).unwrap();
            for p in n.points() {
                let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let n = SphereNet::from_points(2, 2.0, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let v = [std::f64::consts::FRAC_1_SQRT_2; 2];
        assert_eq!(n.nearest(&v).0, 0);
    }
}
