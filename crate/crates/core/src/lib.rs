//! Periodic orbits of N-body type problems from a discrete variational
//! principle.
//!
//! A periodic path is sampled at `k` uniform nodes and joined piecewise
//! linearly. The discrete action (kinetic quadratic form minus the summed
//! pair potential) is minimized by steepest descent over the free variables
//! of a multi-radial symmetry class. Its critical points are exactly the
//! solutions of the second-difference equations of motion, and they converge
//! to true periodic orbits as the grid is refined.
//!
//! Modules, bottom up:
//!
//! * [`types`]: problem parameters and the periodic [`Trajectory`].
//! * [`potential`]: power-law pair potential, strong-force regularization.
//! * [`action`]: action value and gradient, equation residual, discrete energy.
//! * [`symmetry`]: fundamental-domain reduction for antiperiodic coordinate blocks.
//! * [`optimizer`]: steepest descent with Armijo backtracking.
//! * [`reference`]: Lagrange orbit and an RK4 oracle for convergence checks.
//! * [`cli`]: config files, CSV and report formats, SVG plots, and commands.

pub mod action;
pub mod cli;
pub mod error;
pub mod optimizer;
pub mod potential;
pub mod reference;
pub mod symmetry;
pub mod types;

pub use action::{action, discrete_energy, residual_n1, ActionReport, EnergySeries, Residual};
pub use error::{Error, Result};
pub use optimizer::{minimize, minimize_with, random_init, Minimized, OptimizerConfig, OrbitReport, StopReason};
pub use potential::{cutoff_phi, pair_force, pair_potential, regularized_pair_potential, total_potential};
pub use reference::{compare_to_flow, rk4_flow, sample_lagrange, LagrangeOrbit};
pub use symmetry::{check_symmetry, reconstruct, reduce_gradient, Block, ReducedVector, Reduction, SymmetrySpec};
pub use types::{PairSeparation, ProblemSpec, Trajectory};
