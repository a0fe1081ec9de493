//! Nyström discretisation of the controlled Urysohn equation and its
//! fixed-point solver.
//!
//! The quadrature grid doubles as the collocation set, so the discrete
//! problem is `x = T_u(x)` with
//!
//! ```text
//! T_u(x)_i = f(ξ_i, x_i) + λ Σ_j w_j [K1(ξ_i, s_j, x_j) + K2(ξ_i, s_j, x_j) u_j]
//! ```
//!
//! Under the contraction condition `T_u` has Lipschitz constant at most
//! `L = κ0 + λκ1 + λκ2·ρ·√μ(E)` in the quadrature L2 norm, with `κ1` the
//! quadrature norm of `γ1`. Picard iteration from `x ≡ 0` stops once the
//! iterate gap certifies distance `tol` to the discrete fixed point.

use rayon::prelude::*;

use crate::control::GridControl;
use crate::discretization::Grid;
use crate::error::{Error, NonConvergence, Result};
use crate::system::{ControlId, SolveWarning, SystemSpec, Trajectory};

/// Constants of the contraction condition
/// `6[κ0² + λ²κ1² + λ²ρ²κ2²μ(E)] < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    pub kappa0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mu_e: f64,
    pub lambda: f64,
    pub rho: f64,
    pub condition_value: f64,
    pub contraction_factor: f64,
    pub passes: bool,
}

impl ContractionReport {
    /// Assembles the report from raw constants.
    pub fn from_constants(kappa0: f64, kappa1: f64, kappa2: f64, mu_e: f64, lambda: f64, rho: f64) -> Self {
        let condition_value =
            6.0 * (kappa0 * kappa0 + lambda * lambda * kappa1 * kappa1 + lambda * lambda * rho * rho * kappa2 * kappa2 * mu_e);
        Self {
            kappa0,
            kappa1,
            kappa2,
            mu_e,
            lambda,
            rho,
            condition_value,
            contraction_factor: kappa0 + lambda * kappa1 + lambda * kappa2 * rho * mu_e.sqrt(),
            passes: condition_value < 1.0,
        }
    }

    /// Contraction factor for a control of norm `control_norm`, which may
    /// exceed `ρ`.
    pub fn factor_for(&self, control_norm: f64) -> f64 {
        self.kappa0 + self.lambda * self.kappa1 + self.lambda * self.kappa2 * self.rho.max(control_norm) * self.mu_e.sqrt()
    }
}

/// Evaluates the contraction condition; `κ1` is the quadrature L2 norm of
/// `γ1` over `E × E`. A failing system still yields a report.
pub fn contraction_report(system: &SystemSpec, grid: &Grid) -> ContractionReport {
    let w = grid.weights();
    let rows: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xi = grid.node(i);
            (0..grid.len()).map(|j| w[j] * (system.gamma1)(xi, grid.node(j)).powi(2)).sum::<f64>() * w[i]
        })
        .collect();
    let kappa1 = rows.iter().sum::<f64>().sqrt();
    ContractionReport::from_constants(
        system.gamma0_bound,
        kappa1,
        system.gamma2_bound,
        grid.weights().iter().sum(),
        system.lambda,
        system.rho,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target L2 distance to the discrete fixed point.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 1000 }
    }
}

/// Upper bound on cached `K2` entries (`N² · n · m`).
const K2_CACHE_LIMIT: usize = 1 << 23;

/// The discrete Picard operator for one system on one grid.
///
/// When `K2` does not depend on the state, its node values are cached and the
/// control term `λ Σ_j w_j K2(ξ_i, s_j) u_j` is assembled once per control.
pub struct Nystrom<'a> {
    system: &'a SystemSpec,
    grid: &'a Grid,
    report: ContractionReport,
    k2_cache: Option<Vec<f64>>,
}

/// A control bound to a [`Nystrom`] operator.
pub struct PreparedControl<'u> {
    control: &'u GridControl,
    norm: f64,
    /// `Σ_j w_j K2(ξ_i, s_j) u_j`, node-major, for state-free `K2`.
    control_term: Option<Vec<f64>>,
}

impl PreparedControl<'_> {
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

impl<'a> Nystrom<'a> {
    pub fn new(system: &'a SystemSpec, grid: &'a Grid) -> Result<Self> {
        system.validate()?;
        if grid.domain() != &system.domain {
            return Err(Error::validation("grid does not cover the system domain"));
        }
        let report = contraction_report(system, grid);
        let (n, m, len) = (system.state_dim, system.control_dim, grid.len());
        let entries = len.saturating_mul(len).saturating_mul(n * m);
        let k2_cache = (!system.k2_state_dependent && entries <= K2_CACHE_LIMIT).then(|| {
            let zero = vec![0.0; n];
            let mut cache = vec![0.0; entries];
            cache.par_chunks_mut(len * n * m).enumerate().for_each(|(i, row)| {
                let xi = grid.node(i);
                for (j, block) in row.chunks_exact_mut(n * m).enumerate() {
                    system.eval_k2(xi, grid.node(j), &zero, block);
                }
            });
            cache
        });
        Ok(Self { system, grid, report, k2_cache })
    }

    pub fn report(&self) -> &ContractionReport {
        &self.report
    }

    pub fn system(&self) -> &SystemSpec {
        self.system
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn prepare<'u>(&self, control: &'u GridControl) -> Result<PreparedControl<'u>> {
        let (n, m) = (self.system.state_dim, self.system.control_dim);
        if control.dim != m || control.nodes() != self.grid.len() {
            return Err(Error::validation(format!(
                "control has {} nodes of dim {}, expected {} of dim {m}",
                control.nodes(),
                control.dim,
                self.grid.len()
            )));
        }
        let norm = control.l2_norm(self.grid);
        let control_term = (!self.system.k2_state_dependent).then(|| {
            let (grid, system, w) = (self.grid, self.system, self.grid.weights());
            let len = grid.len();
            let mut term = vec![0.0; len * n];
            term.par_chunks_mut(n).enumerate().for_each_init(
                || (vec![0.0; n * m], vec![0.0; n]),
                |(k2, zero), (i, acc)| {
                    let xi = grid.node(i);
                    for j in 0..len {
                        let block = match &self.k2_cache {
                            Some(cache) => &cache[(i * len + j) * n * m..(i * len + j + 1) * n * m],
                            None => {
                                system.eval_k2(xi, grid.node(j), zero, k2);
                                &k2[..]
                            }
                        };
                        mat_vec_acc(block, control.at(j), w[j], acc);
                    }
                },
            );
            term
        });
        Ok(PreparedControl { control, norm, control_term })
    }

    /// One Picard sweep `out = T_u(x)`.
    pub fn apply(&self, u: &PreparedControl<'_>, x: &[f64], out: &mut [f64]) {
        let (system, grid) = (self.system, self.grid);
        let (n, m) = (system.state_dim, system.control_dim);
        let (len, w, lambda) = (grid.len(), grid.weights(), system.lambda);
        out.par_chunks_mut(n).enumerate().for_each_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n * m]),
            |(acc, k1, k2), (i, out_i)| {
                let xi = grid.node(i);
                acc.fill(0.0);
                if system.k1.is_some() {
                    for j in 0..len {
                        system.eval_k1(xi, grid.node(j), &x[j * n..(j + 1) * n], k1);
                        for (a, v) in acc.iter_mut().zip(k1.iter()) {
                            *a += w[j] * v;
                        }
                    }
                }
                match &u.control_term {
                    Some(term) => {
                        for (a, t) in acc.iter_mut().zip(&term[i * n..(i + 1) * n]) {
                            *a += t;
                        }
                    }
                    None => {
                        for j in 0..len {
                            system.eval_k2(xi, grid.node(j), &x[j * n..(j + 1) * n], k2);
                            mat_vec_acc(k2, u.control.at(j), w[j], acc);
                        }
                    }
                }
                system.eval_f(xi, &x[i * n..(i + 1) * n], out_i);
                for (o, a) in out_i.iter_mut().zip(acc.iter()) {
                    *o += lambda * a;
                }
            },
        );
    }

    /// L2 norm of `x − T_u(x)`.
    pub fn residual(&self, u: &PreparedControl<'_>, x: &[f64]) -> f64 {
        let mut tx = vec![0.0; x.len()];
        self.apply(u, x, &mut tx);
        self.grid.l2_distance(x, &tx, self.system.state_dim)
    }

    pub fn solve(&self, control: &GridControl, opts: &SolverOptions, id: ControlId) -> Result<Trajectory> {
        let start = vec![0.0; self.grid.len() * self.system.state_dim];
        self.solve_from(control, opts, id, start)
    }

    /// Picard iteration from an arbitrary start.
    pub fn solve_from(
        &self,
        control: &GridControl,
        opts: &SolverOptions,
        id: ControlId,
        start: Vec<f64>,
    ) -> Result<Trajectory> {
        if !self.report.passes {
            return Err(Error::validation(format!(
                "system `{}` violates the contraction condition (value {})",
                self.system.name, self.report.condition_value
            )));
        }
        if !(opts.tol > 0.0) || opts.max_iter == 0 {
            return Err(Error::validation("solver needs tol > 0 and max_iter ≥ 1"));
        }
        let n = self.system.state_dim;
        if start.len() != self.grid.len() * n {
            return Err(Error::validation("start iterate has the wrong length"));
        }
        let u = self.prepare(control)?;
        let mut warnings = Vec::new();
        if u.norm > self.system.rho * (1.0 + 1e-12) {
            warnings.push(SolveWarning::ControlOutsideBall { norm: u.norm, rho: self.system.rho });
        }
        let factor = self.report.factor_for(u.norm);
        let threshold = if factor <= 0.0 {
            f64::INFINITY
        } else if factor < 1.0 {
            opts.tol * (1.0 - factor) / factor
        } else {
            opts.tol
        };

        let mut x = start;
        let mut next = vec![0.0; x.len()];
        let mut gap = f64::INFINITY;
        for sweep in 1..=opts.max_iter {
            self.apply(&u, &x, &mut next);
            gap = self.grid.l2_distance(&x, &next, n);
            std::mem::swap(&mut x, &mut next);
            if gap <= threshold {
                let residual_l2 = self.residual(&u, &x);
                return Ok(Trajectory { values: x, state_dim: n, residual_l2, control_id: id, iterations: sweep, warnings });
            }
        }
        Err(Error::NonConvergence(Box::new(NonConvergence {
            control_id: Some(id.0),
            iterations: opts.max_iter,
            gap,
            threshold,
            last_iterate: x,
        })))
    }
}

#[inline]
fn mat_vec_acc(matrix: &[f64], u: &[f64], weight: f64, acc: &mut [f64]) {
    let m = u.len();
    for (a, row) in acc.iter_mut().zip(matrix.chunks_exact(m)) {
        let dot: f64 = row.iter().zip(u).map(|(k, v)| k * v).sum();
        *a += weight * dot;
    }
}

/// Solves for the trajectory generated by `control`.
pub fn solve_trajectory(
    system: &SystemSpec,
    control: &GridControl,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    Nystrom::new(system, grid)?.solve(control, opts, ControlId::default())
}

/// L2 norm of `x − f(·, x) − λ∫[K1 + K2 u]` on the grid.
pub fn residual(system: &SystemSpec, control: &GridControl, values: &[f64], grid: &Grid) -> Result<f64> {
    let op = Nystrom::new(system, grid)?;
    if values.len() != grid.len() * system.state_dim {
        return Err(Error::validation("trajectory values do not match the grid"));
    }
    let u = op.prepare(control)?;
    Ok(op.residual(&u, values))
}
