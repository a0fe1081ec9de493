//! Control representations: grid-sampled controls and piecewise-constant
//! controls on a Δ-partition.

use std::sync::Arc;

use crate::discretization::{DeltaPartition, Grid};
use crate::error::{Error, Result};

/// A control sampled at the nodes of a [`Grid`], node-major like trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct GridControl {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl GridControl {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::validation("control values must be a whole number of vectors"));
        }
        Ok(Self { dim, values })
    }

    pub fn zeros(grid: &Grid, dim: usize) -> Self {
        Self { dim, values: vec![0.0; grid.len() * dim] }
    }

    pub fn constant(grid: &Grid, value: &[f64]) -> Self {
        Self { dim: value.len(), values: value.repeat(grid.len()) }
    }

    pub fn from_fn(grid: &Grid, dim: usize, f: impl FnMut(&[f64], &mut [f64])) -> Self {
        Self { dim, values: grid.sample(dim, f) }
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        grid.l2_norm(&self.values, self.dim)
    }

    pub fn sup_norm(&self) -> f64 {
        Grid::sup_norm(&self.values, self.dim)
    }

    /// Largest pointwise distance to another control on the same grid.
    pub fn sup_distance(&self, other: &GridControl) -> f64 {
        self.values
            .chunks_exact(self.dim)
            .zip(other.values.chunks_exact(self.dim))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// `u(s) = r_i · b_i` for `s ∈ E_i`, with `r_i ≥ 0` and `‖b_i‖ = 1`.
#[derive(Debug, Clone)]
pub struct PiecewiseConstantControl {
    partition: Arc<DeltaPartition>,
    dim: usize,
    magnitudes: Vec<f64>,
    directions: Vec<f64>,
}

impl PartialEq for PiecewiseConstantControl {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.magnitudes == other.magnitudes && self.directions == other.directions
    }
}

impl PiecewiseConstantControl {
    pub fn new(
        partition: Arc<DeltaPartition>,
        dim: usize,
        magnitudes: Vec<f64>,
        directions: Vec<f64>,
    ) -> Result<Self> {
        if magnitudes.len() != partition.len() || directions.len() != partition.len() * dim {
            return Err(Error::validation(format!(
                "piecewise-constant control needs {} magnitudes and {} direction entries",
                partition.len(),
                partition.len() * dim
            )));
        }
        if magnitudes.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::validation("magnitudes must be finite and nonnegative"));
        }
        for b in directions.chunks_exact(dim) {
            let norm = b.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!("direction {b:?} is not a unit vector")));
            }
        }
        Ok(Self { partition, dim, magnitudes, directions })
    }

    /// All-zero control with the canonical direction `e_1` on every cell.
    pub fn zero(partition: Arc<DeltaPartition>, dim: usize) -> Self {
        let mut directions = vec![0.0; partition.len() * dim];
        directions.iter_mut().step_by(dim).for_each(|c| *c = 1.0);
        let magnitudes = vec![0.0; partition.len()];
        Self { partition, dim, magnitudes, directions }
    }

    pub fn partition(&self) -> &Arc<DeltaPartition> {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn directions(&self) -> &[f64] {
        &self.directions
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        self.magnitudes[i]
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.dim..(i + 1) * self.dim]
    }

    /// `r_i · b_i`.
    pub fn value(&self, i: usize) -> Vec<f64> {
        self.direction(i).iter().map(|b| b * self.magnitudes[i]).collect()
    }

    /// Consumed control resource `Σ μ(E_i)·r_i²`.
    pub fn resource(&self) -> f64 {
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(i, r)| self.partition.cell_measure(i) * r * r)
            .sum()
    }

    /// Largest cell-wise distance `‖r_i b_i − r'_i b'_i‖`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        (0..self.cells())
            .map(|i| {
                let (a, b) = (self.value(i), other.value(i));
                a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_grid(&self, grid: &Grid) -> Result<GridControl> {
        let cells = grid.cell_assignment(&self.partition)?;
        Ok(self.to_grid_with(&cells))
    }

    /// Samples onto a grid given a precomputed node-to-cell map.
    pub fn to_grid_with(&self, node_cells: &[usize]) -> GridControl {
        let mut values = Vec::with_capacity(node_cells.len() * self.dim);
        for &c in node_cells {
            let r = self.magnitudes[c];
            values.extend(self.direction(c).iter().map(|b| b * r));
        }
        GridControl { dim: self.dim, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, delta_partition};
    use crate::system::DomainBox;

    #[test]
    fn resource_and_sampling() {
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 0.5).unwrap());
        let u = PiecewiseConstantControl::new(p.clone(), 1, vec![1.0, 2.0], vec![1.0, -1.0]).unwrap();
        assert_eq!(u.resource(), 0.5 + 2.0);
        let g = build_grid(&DomainBox::unit(1), &[4]).unwrap();
        assert_eq!(u.to_grid(&g).unwrap().values, vec![1.0, 1.0, -2.0, -2.0]);
    }

    #[test]
    fn rejects_non_unit_direction() {
        let p = Arc::new(delta_partition(&DomainBox::unit(1), 1.0).unwrap());
        assert!(PiecewiseConstantControl::new(p, 1, vec![1.0], vec![0.5]).is_err());
    }
}
