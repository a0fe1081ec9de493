//! Problem instances of the controlled Urysohn equation
//!
//! ```text
//! x(ξ) = f(ξ, x(ξ)) + λ ∫_E [K1(ξ, s, x(s)) + K2(ξ, s, x(s)) u(s)] ds
//! ```
//!
//! over an axis-aligned box `E ⊂ R^k`, with state `x ∈ R^n` and control
//! `u ∈ R^m` taken from the L2 ball of radius `ρ`.
//!
//! Evaluators write into caller-provided buffers so that the solver can run
//! its inner loops without allocating. They must be pure.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::discretization::Grid;
use crate::error::{Error, Result};

/// `f(ξ, x) -> R^n`.
pub type Drift = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
/// `K(ξ, s, x)`; writes `n` entries for K1, `n*m` row-major entries for K2.
pub type Kernel = Arc<dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;
/// Scalar kernel `γ(ξ, s)`.
pub type Weight = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Axis-aligned box `[lower_0, upper_0] × … × [lower_{k-1}, upper_{k-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::validation(format!(
                "box corners must be nonempty and of equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::validation(format!(
                    "degenerate box side on axis {axis}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^k`.
    pub fn unit(k: usize) -> Self {
        Self { lower: vec![0.0; k], upper: vec![1.0; k] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Lebesgue measure `μ(E)`.
    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    pub(crate) fn sample_point<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.lower[a] + rng.random::<f64>() * self.side(a);
        }
    }
}

/// A concrete instance of the controlled Urysohn equation.
///
/// Lipschitz data is carried as the constants the error analysis uses:
/// `κ0 = ‖γ0‖∞` and `κ2 = ‖γ2‖∞` as numbers, `γ1` as a kernel because only
/// its L2 norm over `E × E` enters. Matrix norms of `K2` are Frobenius norms.
#[derive(Clone)]
pub struct SystemSpec {
    pub name: String,
    pub state_dim: usize,
    pub control_dim: usize,
    pub domain: DomainBox,
    pub lambda: f64,
    pub rho: f64,
    pub f: Drift,
    /// `None` means `K1 ≡ 0`.
    pub k1: Option<Kernel>,
    pub k2: Kernel,
    /// `false` when `K2(ξ, s, x)` does not depend on `x`; lets the solver
    /// assemble the control term once per control.
    pub k2_state_dependent: bool,
    pub gamma0_bound: f64,
    pub gamma1: Weight,
    pub gamma2_bound: f64,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("control_dim", &self.control_dim)
            .field("domain", &self.domain)
            .field("lambda", &self.lambda)
            .field("rho", &self.rho)
            .field("k1", &self.k1.is_some())
            .field("k2_state_dependent", &self.k2_state_dependent)
            .field("gamma0_bound", &self.gamma0_bound)
            .field("gamma2_bound", &self.gamma2_bound)
            .finish_non_exhaustive()
    }
}

impl SystemSpec {
    pub fn domain_dim(&self) -> usize {
        self.domain.dim()
    }

    /// Checks the structural invariants that do not need quadrature.
    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.control_dim == 0 {
            return Err(Error::validation("state and control dimensions must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::validation(format!("rho must be positive, got {}", self.rho)));
        }
        if !(0.0..1.0).contains(&self.gamma0_bound) {
            return Err(Error::validation(format!(
                "kappa0 must lie in [0, 1), got {}",
                self.gamma0_bound
            )));
        }
        if !(self.gamma2_bound >= 0.0 && self.gamma2_bound.is_finite()) {
            return Err(Error::validation("kappa2 must be a nonnegative number"));
        }
        Ok(())
    }

    #[inline]
    pub fn eval_f(&self, xi: &[f64], x: &[f64], out: &mut [f64]) {
        (self.f)(xi, x, out)
    }

    #[inline]
    pub fn eval_k1(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]) {
        match &self.k1 {
            Some(k1) => k1(xi, s, x, out),
            None => out.fill(0.0),
        }
    }

    #[inline]
    pub fn eval_k2(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]) {
        (self.k2)(xi, s, x, out)
    }

    /// Random spot check of the declared Lipschitz bounds.
    ///
    /// States are drawn from `N(0, x_scale²)` per component, points uniformly
    /// from `E`. A sample counts as a violation when the observed ratio
    /// exceeds the declared constant by more than `1e-9` relative.
    pub fn spot_check_lipschitz(&self, samples: usize, x_scale: f64, seed: u64) -> LipschitzSpotCheck {
        let n = self.state_dim;
        let nm = n * self.control_dim;
        let k = self.domain_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut xi, mut s) = (vec![0.0; k], vec![0.0; k]);
        let (mut x1, mut x2) = (vec![0.0; n], vec![0.0; n]);
        let (mut a, mut b) = (vec![0.0; nm], vec![0.0; nm]);
        let mut report = LipschitzSpotCheck { samples, ..Default::default() };

        for _ in 0..samples {
            self.domain.sample_point(&mut rng, &mut xi);
            self.domain.sample_point(&mut rng, &mut s);
            for v in x1.iter_mut().chain(x2.iter_mut()) {
                *v = x_scale * rng.sample::<f64, _>(StandardNormal);
            }
            let dx = dist(&x1, &x2);
            if dx == 0.0 {
                continue;
            }

            self.eval_f(&xi, &x1, &mut a[..n]);
            self.eval_f(&xi, &x2, &mut b[..n]);
            let r0 = dist(&a[..n], &b[..n]) / dx;
            report.worst_f = report.worst_f.max(r0 / self.gamma0_bound.max(f64::MIN_POSITIVE));
            if r0 > self.gamma0_bound * (1.0 + 1e-9) + 1e-15 {
                report.violations += 1;
            }

            self.eval_k1(&xi, &s, &x1, &mut a[..n]);
            self.eval_k1(&xi, &s, &x2, &mut b[..n]);
            let g1 = (self.gamma1)(&xi, &s);
            let r1 = dist(&a[..n], &b[..n]) / dx;
            report.worst_k1 = report.worst_k1.max(r1 / g1.max(f64::MIN_POSITIVE));
            if r1 > g1 * (1.0 + 1e-9) + 1e-15 {
                report.violations += 1;
            }

            self.eval_k2(&xi, &s, &x1, &mut a);
            self.eval_k2(&xi, &s, &x2, &mut b);
            let r2 = dist(&a, &b) / dx;
            report.worst_k2 = report.worst_k2.max(r2 / self.gamma2_bound.max(f64::MIN_POSITIVE));
            if r2 > self.gamma2_bound * (1.0 + 1e-9) + 1e-15 {
                report.violations += 1;
            }
        }
        report
    }
}

/// Result of [`SystemSpec::spot_check_lipschitz`]. `worst_*` are the largest
/// observed ratios of measured to declared Lipschitz constant.
#[derive(Debug, Clone, Default)]
pub struct LipschitzSpotCheck {
    pub samples: usize,
    pub violations: usize,
    pub worst_f: f64,
    pub worst_k1: f64,
    pub worst_k2: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Identifier of the control that generated a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ControlId(pub u64);

impl fmt::Display for ControlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveWarning {
    /// The control's quadrature L2 norm exceeds `ρ`.
    ControlOutsideBall { norm: f64, rho: f64 },
}

/// Grid-sampled solution for one control. `values` is node-major:
/// `values[i * n .. (i + 1) * n]` is the state at node `i`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub values: Vec<f64>,
    pub state_dim: usize,
    pub residual_l2: f64,
    pub control_id: ControlId,
    pub iterations: usize,
    pub warnings: Vec<SolveWarning>,
}

impl Trajectory {
    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        grid.l2_norm(&self.values, self.state_dim)
    }

    pub fn l2_distance(&self, other: &Trajectory, grid: &Grid) -> f64 {
        grid.l2_distance(&self.values, &other.values, self.state_dim)
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.state_dim..(node + 1) * self.state_dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_box_rejected() {
        assert!(DomainBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(DomainBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(DomainBox::new(vec![1.0], vec![0.5]).is_err());
    }

    #[test]
    fn box_measure_and_diameter() {
        let b = DomainBox::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(b.measure(), 4.0);
        assert!((b.diameter() - 8f64.sqrt()).abs() < 1e-15);
        assert!(b.contains(&[1.0, 0.0]));
        assert!(!b.contains(&[2.5, 0.0]));
    }
}
