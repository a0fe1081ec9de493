//! Built-in test systems.
//!
//! | name    | k | n | m | notes                                              |
//! |---------|---|---|---|----------------------------------------------------|
//! | `LIN1`  | 1 | 1 | 1 | `f = 0.1x`, `K1 ≡ 0`, `K2 ≡ 1`, `λ = 0.1`, `ρ = 1` |
//! | `ZERO`  | 1 | 1 | 1 | everything zero, `λ = 0.1`, `ρ = 1`                |
//! | `LINB`  | 1 | 1 | 1 | linear with state-dependent `K1 = 0.3x`            |
//! | `NL2`   | 1 | 2 | 2 | nonlinear, state-dependent `K2`, 2-D control       |
//! | `PLANE` | 2 | 1 | 1 | nonlinear on the unit square                       |
//! | `TRI3`  | 1 | 1 | 3 | 3-D control, exercises the general sphere net      |

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::LinearSpec;
use crate::system::{DomainBox, SystemSpec};

pub const BUILTIN_NAMES: &[&str] = &["LIN1", "ZERO", "LINB", "NL2", "PLANE", "TRI3", "STRONG"];

pub fn builtin_system(name: &str) -> Result<SystemSpec> {
    match name {
        "LIN1" => Ok(lin1_spec().system("LIN1")),
        "ZERO" => Ok(zero()),
        "LINB" => Ok(LinearSpec {
            a: 0.2,
            b: 0.3,
            lambda: 0.5,
            rho: 1.0,
            state_dim: 1,
            control_dim: 1,
            domain: DomainBox::unit(1),
            kernel: Arc::new(|xi, s, out| out[0] = (-(xi[0] - s[0]).abs()).exp()),
        }
        .system("LINB")),
        "NL2" => Ok(nl2()),
        "PLANE" => Ok(plane()),
        "TRI3" => Ok(tri3()),
        // coupling too strong for the contraction condition (value 1.02)
        "STRONG" => Ok(LinearSpec {
            a: 0.1,
            b: 0.8,
            lambda: 0.5,
            rho: 1.0,
            state_dim: 1,
            control_dim: 1,
            domain: DomainBox::unit(1),
            kernel: Arc::new(|_, _, out| out[0] = 1.0),
        }
        .system("STRONG")),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

/// The linear family behind `LIN1`, for use with the closed-form oracle.
pub fn lin1_spec() -> LinearSpec {
    LinearSpec {
        a: 0.1,
        b: 0.0,
        lambda: 0.1,
        rho: 1.0,
        state_dim: 1,
        control_dim: 1,
        domain: DomainBox::unit(1),
        kernel: Arc::new(|_, _, out| out[0] = 1.0),
    }
}

fn zero() -> SystemSpec {
    SystemSpec {
        name: "ZERO".into(),
        state_dim: 1,
        control_dim: 1,
        domain: DomainBox::unit(1),
        lambda: 0.1,
        rho: 1.0,
        f: Arc::new(|_, _, out| out.fill(0.0)),
        k1: None,
        k2: Arc::new(|_, _, _, out| out.fill(0.0)),
        k2_state_dependent: false,
        gamma0_bound: 0.0,
        gamma1: Arc::new(|_, _| 0.0),
        gamma2_bound: 0.0,
    }
}

fn nl2() -> SystemSpec {
    SystemSpec {
        name: "NL2".into(),
        state_dim: 2,
        control_dim: 2,
        domain: DomainBox::unit(1),
        lambda: 0.2,
        rho: 1.0,
        f: Arc::new(|_, x, out| {
            out[0] = 0.1 * x[0].sin();
            out[1] = 0.1 * x[1].sin();
        }),
        k1: Some(Arc::new(|xi, s, x, out| {
            let w = 0.2 * xi[0] * s[0];
            out[0] = w * x[0].tanh();
            out[1] = w * x[1].tanh();
        })),
        k2: Arc::new(|xi, s, x, out| {
            out[0] = (PI * (xi[0] - s[0])).cos();
            out[1] = 0.1 * x[0].sin();
            out[2] = 0.1 * x[1].sin();
            out[3] = 1.0;
        }),
        k2_state_dependent: true,
        gamma0_bound: 0.1,
        gamma1: Arc::new(|xi, s| 0.2 * xi[0] * s[0]),
        gamma2_bound: 0.1,
    }
}

fn plane() -> SystemSpec {
    SystemSpec {
        name: "PLANE".into(),
        state_dim: 1,
        control_dim: 1,
        domain: DomainBox::unit(2),
        lambda: 0.1,
        rho: 1.0,
        f: Arc::new(|xi, x, out| out[0] = 0.1 * x[0].tanh() + 0.05 * xi[0]),
        k1: Some(Arc::new(|xi, s, x, out| {
            let d2 = (xi[0] - s[0]).powi(2) + (xi[1] - s[1]).powi(2);
            out[0] = 0.1 * (-d2).exp() * x[0].sin() + 0.02;
        })),
        k2: Arc::new(|xi, s, x, out| out[0] = 1.0 + 0.1 * x[0].cos() * xi[1] * s[1]),
        k2_state_dependent: true,
        gamma0_bound: 0.1,
        gamma1: Arc::new(|xi, s| {
            let d2 = (xi[0] - s[0]).powi(2) + (xi[1] - s[1]).powi(2);
            0.1 * (-d2).exp()
        }),
        gamma2_bound: 0.1,
    }
}

fn tri3() -> SystemSpec {
    SystemSpec {
        name: "TRI3".into(),
        state_dim: 1,
        control_dim: 3,
        domain: DomainBox::unit(1),
        lambda: 0.1,
        rho: 1.0,
        f: Arc::new(|_, x, out| out[0] = 0.2 * x[0]),
        k1: None,
        k2: Arc::new(|xi, s, _, out| {
            let c = (xi[0] - s[0]).cos();
            out[0] = c;
            out[1] = 0.5 * c;
            out[2] = 0.25;
        }),
        k2_state_dependent: false,
        gamma0_bound: 0.2,
        gamma1: Arc::new(|_, _| 0.0),
        gamma2_bound: 0.0,
    }
}
