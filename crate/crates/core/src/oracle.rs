//! Closed-form trajectories for the linear family
//!
//! ```text
//! x(ξ) = a·x(ξ) + λ ∫_E [b·x(s) + G(ξ, s) u(s)] ds
//! ```
//!
//! With `C(ξ) = ∫ G(ξ, s) u(s) ds`, integrating the equation over `E` gives
//! `X = ∫x = λ∫C / ((1−a) − λbμ(E))` and then
//! `x(ξ) = λ(bX + C(ξ)) / (1 − a)`. All integrals use the grid's quadrature,
//! so the result is the exact solution of the discretised equation.

use std::sync::Arc;

use crate::control::GridControl;
use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::system::{ControlId, DomainBox, SystemSpec, Trajectory};

/// `G(ξ, s) -> n×m`, row-major.
pub type ControlGain = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct LinearSpec {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub rho: f64,
    pub state_dim: usize,
    pub control_dim: usize,
    pub domain: DomainBox,
    pub kernel: ControlGain,
}

impl std::fmt::Debug for LinearSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSpec")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("lambda", &self.lambda)
            .field("rho", &self.rho)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl LinearSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.a.abs() < 1.0) {
            return Err(Error::validation(format!("|a| must be below 1, got {}", self.a)));
        }
        if self.b != 0.0 && ((1.0 - self.a) - self.lambda * self.b * self.domain.measure()).abs() < 1e-14 {
            return Err(Error::validation("(1 − a) − λ·b·μ(E) vanishes; the linear system is singular"));
        }
        Ok(())
    }

    /// The equivalent general system.
    pub fn system(&self, name: &str) -> SystemSpec {
        let (a, b) = (self.a, self.b);
        let kernel = self.kernel.clone();
        SystemSpec {
            name: name.to_string(),
            state_dim: self.state_dim,
            control_dim: self.control_dim,
            domain: self.domain.clone(),
            lambda: self.lambda,
            rho: self.rho,
            f: Arc::new(move |_, x, out| {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = a * v;
                }
            }),
            k1: (b != 0.0).then(|| -> crate::system::Kernel {
                Arc::new(move |_, _, x, out| {
                    for (o, v) in out.iter_mut().zip(x) {
                        *o = b * v;
                    }
                })
            }),
            k2: Arc::new(move |xi, s, _, out| kernel(xi, s, out)),
            k2_state_dependent: false,
            gamma0_bound: a.abs(),
            gamma1: Arc::new(move |_, _| b.abs()),
            gamma2_bound: 0.0,
        }
    }
}

pub fn linear_trajectory(spec: &LinearSpec, u: &GridControl, grid: &Grid) -> Result<Trajectory> {
    spec.validate()?;
    let (n, m) = (spec.state_dim, spec.control_dim);
    if u.dim != m || u.nodes() != grid.len() {
        return Err(Error::validation("control does not match the grid or control dimension"));
    }
    let w = grid.weights();
    let mut gain = vec![0.0; n * m];
    // C(ξ_i) = Σ_j w_j G(ξ_i, s_j) u_j
    let mut c = vec![0.0; grid.len() * n];
    for (i, ci) in c.chunks_exact_mut(n).enumerate() {
        let xi = grid.node(i);
        for j in 0..grid.len() {
            (spec.kernel)(xi, grid.node(j), &mut gain);
            for (acc, row) in ci.iter_mut().zip(gain.chunks_exact(m)) {
                *acc += w[j] * row.iter().zip(u.at(j)).map(|(g, v)| g * v).sum::<f64>();
            }
        }
    }

    let lambda = spec.lambda;
    let one_minus_a = 1.0 - spec.a;
    let mut total = vec![0.0; n];
    if spec.b != 0.0 {
        let denom = one_minus_a - lambda * spec.b * grid.weights().iter().sum::<f64>();
        for (i, ci) in c.chunks_exact(n).enumerate() {
            for (t, v) in total.iter_mut().zip(ci) {
                *t += w[i] * v;
            }
        }
        total.iter_mut().for_each(|t| *t *= lambda / denom);
    }
    let values = c
        .chunks_exact(n)
        .flat_map(|ci| ci.iter().zip(&total).map(|(cv, x)| lambda * (spec.b * x + cv) / one_minus_a).collect::<Vec<_>>())
        .collect();

    Ok(Trajectory {
        values,
        state_dim: n,
        residual_l2: 0.0,
        control_id: ControlId::default(),
        iterations: 0,
        warnings: Vec::new(),
    })
}
