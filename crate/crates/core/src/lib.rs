//! Trajectories of Urysohn-type integral control systems with integrally
//! constrained controls, and their approximation by the trajectories of a
//! finite family of piecewise-constant controls.
//!
//! The pieces, bottom up:
//!
//! - [`system`] and [`registry`]: system descriptions and built-in examples;
//! - [`discretization`]: quadrature grids, Δ-partitions, magnitude ladders
//!   and σ-nets on the unit sphere;
//! - [`solver`]: the contraction test and Nyström/Picard solution of the
//!   state equation;
//! - [`bounds`]: a-priori trajectory bounds, error constants and the
//!   ε-schedule;
//! - [`pipeline`]: the stages that map an admissible control into the finite
//!   family, each with its error certificate;
//! - [`ensemble`]: family enumeration, Hausdorff distances and the empirical
//!   check of the `(c*+1)ε` bound;
//! - [`oracle`]: closed-form solutions of linear systems;
//! - [`cli`]: the config-driven experiment runner.

pub mod bounds;
pub mod cli;
pub mod control;
pub mod discretization;
pub mod ensemble;
pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod registry;
pub mod solver;
pub mod system;

pub use bounds::{compute_constants, gronwall_bound, schedule, ApproxSchedule, BoundReport};
pub use control::{GridControl, PiecewiseConstantControl};
pub use discretization::{build_grid, delta_partition, sphere_net, uniform_levels, DeltaPartition, Grid, LevelLadder, SphereNet};
pub use ensemble::{enumerate_controls, hausdorff_l2, sample_admissible, trajectory_set, verify_theorem, ControlEnsemble, ExperimentOptions, ExperimentReport};
pub use error::{Error, Result};
pub use oracle::{linear_trajectory, LinearSpec};
pub use pipeline::{full_pipeline, FamilyDesign, SteklovPolicy};
pub use registry::builtin_system;
pub use solver::{contraction_report, solve_trajectory, ContractionReport, Nystrom, SolverOptions};
pub use system::{DomainBox, SystemSpec, Trajectory};
