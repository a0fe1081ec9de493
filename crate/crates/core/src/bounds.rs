//! Gronwall-type bound calculators, the error constants of the finite
//! approximation and the discretisation schedule they induce.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;

use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::solver::{contraction_report, ContractionReport};
use crate::system::SystemSpec;

/// Bound `‖y‖₂ ≤ √(2‖h‖² / (1 − 2‖ψ‖²))` for nonnegative `y` satisfying
/// `y ≤ h + ∫ψ(·, s) y(s) ds`. Requires `‖ψ‖₂ < 1/√2`.
pub fn gronwall_bound(h_norm: f64, psi_norm: f64) -> Result<f64> {
    if !(h_norm >= 0.0) || !(psi_norm >= 0.0) {
        return Err(Error::Domain(format!("norms must be nonnegative (h={h_norm}, psi={psi_norm})")));
    }
    if psi_norm >= FRAC_1_SQRT_2 {
        return Err(Error::Domain(format!("kernel norm {psi_norm} is not below 1/sqrt(2)")));
    }
    Ok((2.0 * h_norm * h_norm / (1.0 - 2.0 * psi_norm * psi_norm)).sqrt())
}

/// `√2·λ/(1−κ0) · √(κ1² + ρ²κ2²μ(E))`, the L2 bound on the kernel
/// `λ/(1−κ0)·[γ1(ξ,s) + κ2‖u(s)‖]` over admissible controls.
pub fn psi_norm_from(report: &ContractionReport) -> Result<f64> {
    let ContractionReport { kappa0, kappa1, kappa2, mu_e, lambda, rho, .. } = *report;
    if kappa0 >= 1.0 {
        return Err(Error::Inconsistent(format!("kappa0 = {kappa0} is not below 1")));
    }
    let psi = 2f64.sqrt() * lambda / (1.0 - kappa0) * (kappa1 * kappa1 + rho * rho * kappa2 * kappa2 * mu_e).sqrt();
    if psi >= FRAC_1_SQRT_2 {
        return Err(Error::Inconsistent(format!(
            "kernel bound {psi} is not below 1/sqrt(2); the contraction condition cannot hold"
        )));
    }
    Ok(psi)
}

pub fn psi_norm_bound(system: &SystemSpec, grid: &Grid) -> Result<f64> {
    psi_norm_from(&contraction_report(system, grid))
}

/// `√(2β1²μ(E) + 2β2²ω*²)`, the L2 bound on `β1 + β2·(∫‖K2(ξ,s,0)‖² ds)^{1/2}`.
pub fn h_star_bound(beta1: f64, beta2: f64, mu_e: f64, omega_star: f64) -> Result<f64> {
    if [beta1, beta2, mu_e, omega_star].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::validation("h_star_bound inputs must be nonnegative"));
    }
    Ok((2.0 * beta1 * beta1 * mu_e + 2.0 * beta2 * beta2 * omega_star * omega_star).sqrt())
}

/// Error constants for one system on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub contraction: ContractionReport,
    /// `(∫∫‖K2(ξ,s,0)‖²)^{1/2}`.
    pub omega_star: f64,
    /// `max ‖K2(ξ,s,0)‖` over node pairs.
    pub m_eps: f64,
    /// `‖h‖₂` of the a-priori forcing term used for `β*`.
    pub h_norm: f64,
    pub psi_norm: f64,
    /// Bound on `‖x‖₂` over all trajectories.
    pub beta_star: f64,
    pub c_star: f64,
    pub g1: f64,
    pub g2: f64,
    /// `(1−κ0)² − 4λ²[κ1² + ρ²κ2²μ(E)]`.
    pub denominator: f64,
}

impl BoundReport {
    /// Assembles the constants from their ingredients.
    pub fn from_parts(contraction: ContractionReport, omega_star: f64, m_eps: f64, h_norm: f64) -> Result<Self> {
        let ContractionReport { kappa0, kappa1, kappa2, mu_e, lambda, rho, .. } = contraction;
        let psi_norm = psi_norm_from(&contraction)?;
        let beta_star = gronwall_bound(h_norm, psi_norm)?;
        let denominator = (1.0 - kappa0).powi(2) - 4.0 * lambda * lambda * (kappa1 * kappa1 + rho * rho * kappa2 * kappa2 * mu_e);
        if !(denominator > 0.0) {
            return Err(Error::Inconsistent(format!("nonpositive error-constant denominator {denominator}")));
        }
        let l2 = lambda * lambda;
        let c_star = (16.0 * l2 * rho * rho * ((kappa2 + 1.0).powi(2) * mu_e + 1.0) / denominator).sqrt();
        let k2b2 = kappa2 * kappa2 * beta_star * beta_star;
        let g1 = (4.0 * l2 * (k2b2 * mu_e + omega_star * omega_star) / denominator).sqrt();
        let g2 = (4.0 * l2 * (k2b2 + omega_star * omega_star) * mu_e / denominator).sqrt();
        Ok(Self { contraction, omega_star, m_eps, h_norm, psi_norm, beta_star, c_star, g1, g2, denominator })
    }

    /// The approximation bound `(c* + 1)·ε`.
    pub fn bound(&self, epsilon: f64) -> f64 {
        (self.c_star + 1.0) * epsilon
    }
}

pub fn compute_constants(system: &SystemSpec, grid: &Grid) -> Result<BoundReport> {
    let contraction = contraction_report(system, grid);
    if !contraction.passes {
        return Err(Error::Inconsistent(format!(
            "contraction condition fails (value {})",
            contraction.condition_value
        )));
    }
    let (n, m) = (system.state_dim, system.control_dim);
    let w = grid.weights();
    let (lambda, rho, kappa0) = (system.lambda, system.rho, system.gamma0_bound);

    // per node: (∫‖K2‖², max‖K2‖, h(ξ))
    let rows: Vec<(f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n * m]),
            |(zero, buf, k2), i| {
                let xi = grid.node(i);
                let (mut k2_sq, mut k2_max, mut k1_int) = (0.0, 0.0f64, 0.0);
                for j in 0..grid.len() {
                    let s = grid.node(j);
                    system.eval_k2(xi, s, zero, k2);
                    let norm_sq: f64 = k2.iter().map(|v| v * v).sum();
                    k2_sq += w[j] * norm_sq;
                    k2_max = k2_max.max(norm_sq.sqrt());
                    system.eval_k1(xi, s, zero, buf);
                    k1_int += w[j] * norm(buf);
                }
                system.eval_f(xi, zero, buf);
                let h = (norm(buf) + lambda * k1_int + lambda * rho * k2_sq.sqrt()) / (1.0 - kappa0);
                (k2_sq, k2_max, h)
            },
        )
        .collect();

    let omega_star = rows.iter().zip(w).map(|((k2_sq, _, _), wi)| wi * k2_sq).sum::<f64>().sqrt();
    let m_eps = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let h_norm = rows.iter().zip(w).map(|((_, _, h), wi)| wi * h * h).sum::<f64>().sqrt();
    BoundReport::from_parts(contraction, omega_star, m_eps, h_norm)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Discretisation parameters that guarantee the `(c*+1)ε` bound.
///
/// Unbounded entries (for example when `g2 = 0`) are `f64::INFINITY`;
/// consumers clamp them to the natural scale of the object they build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxSchedule {
    pub epsilon: f64,
    pub tau_star: f64,
    /// Truncation level and top of the magnitude ladder.
    pub alpha_star: f64,
    pub r_star: f64,
    /// Largest admissible partition diameter Δ*.
    pub partition_diameter: f64,
    /// Largest admissible ladder step δ*.
    pub level_step: f64,
    /// Largest admissible net radius σ*.
    pub sigma_star: f64,
}

/// `τ* = min(ε²/M², μ(E), cap)`, `α* = ρ/√τ*`, `Δ* = ε/(4 g2 R*)`,
/// `δ* = ε/(4 g2)`, `σ* = ε/(4 g2 α*)`.
pub fn schedule(bounds: &BoundReport, epsilon: f64, r_star: f64, tau_cap: Option<f64>) -> Result<ApproxSchedule> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::validation(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(r_star > 0.0 && r_star.is_finite()) {
        return Err(Error::validation(format!("R* must be positive, got {r_star}")));
    }
    if let Some(cap) = tau_cap {
        if !(cap > 0.0) {
            return Err(Error::validation(format!("tau cap must be positive, got {cap}")));
        }
    }
    let c = &bounds.contraction;
    let mut tau_star = (epsilon / bounds.m_eps).powi(2).min(c.mu_e);
    if let Some(cap) = tau_cap {
        tau_star = tau_star.min(cap);
    }
    let alpha_star = c.rho / tau_star.sqrt();
    let g2 = bounds.g2;
    Ok(ApproxSchedule {
        epsilon,
        tau_star,
        alpha_star,
        r_star,
        partition_diameter: epsilon / (4.0 * g2 * r_star),
        level_step: epsilon / (4.0 * g2),
        sigma_star: epsilon / (4.0 * g2 * alpha_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_grid;
    use crate::registry::builtin_system;
    use crate::system::DomainBox;
    use std::sync::Arc;

    fn lin1_bounds() -> BoundReport {
        let g = build_grid(&DomainBox::unit(1), &[64]).unwrap();
        compute_constants(&builtin_system("LIN1").unwrap(), &g).unwrap()
    }

    #[test]
    fn gronwall_examples() {
        assert!((gronwall_bound(1.0, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((gronwall_bound(1.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(gronwall_bound(0.0, 0.3).unwrap(), 0.0);
        assert!(matches!(gronwall_bound(1.0, FRAC_1_SQRT_2), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_examples() {
        let g = build_grid(&DomainBox::unit(1), &[32]).unwrap();
        assert_eq!(psi_norm_bound(&builtin_system("LIN1").unwrap(), &g).unwrap(), 0.0);
        let mut sys = builtin_system("LIN1").unwrap();
        sys.gamma1 = Arc::new(|_, _| 1.0);
        let psi = psi_norm_bound(&sys, &g).unwrap();
        assert!((psi - 2f64.sqrt() * (0.1 / 0.9)).abs() < 1e-12);
        assert!((psi - 0.157135).abs() < 1e-6);
    }

    #[test]
    fn h_star_examples() {
        assert_eq!(h_star_bound(0.0, 0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!((h_star_bound(1.0, 0.0, 4.0, 0.0).unwrap() - 8f64.sqrt()).abs() < 1e-15);
        assert!((h_star_bound(1.0, 1.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(h_star_bound(-1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lin1_constants() {
        let b = lin1_bounds();
        assert!((b.omega_star - 1.0).abs() < 1e-12);
        assert_eq!(b.m_eps, 1.0);
        assert!((b.c_star - (0.32f64 / 0.81).sqrt()).abs() < 1e-12);
        assert!((b.c_star - 0.628539).abs() < 1e-6);
        assert!((b.g2 - 0.2 / 0.9).abs() < 1e-12);
        assert!((b.beta_star - 2f64.sqrt() * 0.1 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn zero_system_constants() {
        let g = build_grid(&DomainBox::unit(1), &[16]).unwrap();
        let b = compute_constants(&builtin_system("ZERO").unwrap(), &g).unwrap();
        assert_eq!((b.omega_star, b.m_eps, b.beta_star, b.g1, b.g2), (0.0, 0.0, 0.0, 0.0, 0.0));
        // c* depends on λ, ρ and the κ's only
        assert!((b.c_star - 0.32f64.sqrt()).abs() < 1e-12);
        let s = schedule(&b, 0.1, 1.0, None).unwrap();
        assert_eq!(s.tau_star, 1.0);
        assert_eq!(s.alpha_star, 1.0);
        assert!(s.level_step.is_infinite());
    }

    #[test]
    fn lin1_schedule() {
        let b = lin1_bounds();
        let s = schedule(&b, 0.1, 1.0, None).unwrap();
        assert!((s.tau_star - 0.01).abs() < 1e-15);
        assert!((s.alpha_star - 10.0).abs() < 1e-12);
        assert!((s.level_step - 0.1125).abs() < 1e-12);
        assert!((s.partition_diameter - 0.1125).abs() < 1e-12);
        assert!((s.sigma_star - 0.01125).abs() < 1e-12);

        let s2 = schedule(&b, 0.2, 1.0, None).unwrap();
        assert!((s2.level_step - 0.225).abs() < 1e-12);

        let capped = schedule(&b, 0.1, 1.0, Some(0.0025)).unwrap();
        assert!((capped.alpha_star - 20.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_rejects_bad_input() {
        let b = lin1_bounds();
        assert!(schedule(&b, 0.0, 1.0, None).is_err());
        assert!(schedule(&b, 0.1, -1.0, None).is_err());
        assert!(schedule(&b, 0.1, 1.0, Some(0.0)).is_err());
    }

    #[test]
    fn failing_system_has_no_constants() {
        let mut sys = builtin_system("LIN1").unwrap();
        sys.gamma0_bound = 0.5;
        sys.gamma1 = Arc::new(|_, _| 0.3);
        sys.lambda = 1.0;
        let g = build_grid(&DomainBox::unit(1), &[8]).unwrap();
        assert!(matches!(compute_constants(&sys, &g), Err(Error::Inconsistent(_))));
    }
}
