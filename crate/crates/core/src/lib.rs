//! Steklov spectra of `n`-dimensional submanifolds of revolution with one
//! boundary sphere.
//!
//! The metric `dr^2 + h(r)^2 g_{S^{n-1}}` on `[0, L] x S^{n-1}` separates
//! into one radial problem per spherical-harmonic degree `k`. Each radial
//! problem is solved three ways: shooting on `u`, a Riccati equation for the
//! log-derivative, and a finite-element minimisation of the energy. Annuli
//! have exact answers in [`closed_forms`].
//!
//! ```
//! use steklov_core::{build_cone, solve_mode, ModeProblem, SolverConfig};
//!
//! let ball = build_cone();
//! let e = solve_mode(&ball, &ModeProblem::pole(3, 2), &SolverConfig::default()).unwrap();
//! assert!((e.sigma - 2.0).abs() < 1e-8);
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod error;
pub mod fd_oracle;
pub mod io;
pub mod ode;
pub mod profile;
pub mod radial_solver;
pub mod spectrum;
mod tridiag;

pub use closed_forms::{
    annulus_sigma_d, annulus_sigma_n, annulus_sigma_n_deficit, lambda_k, multiplicity, sharp_bound, AnnulusSpec,
};
pub use error::{ProfileError, SolveError};
pub use fd_oracle::{fd_convergence_study, fd_mode, fd_sigma_on_grid, ConvergenceRow, Grid, GridSpec};
pub use profile::{
    build_cone, build_custom, build_increase, build_tent, load_profile, validate_profile, Invariant, Profile,
    ProfileSpec, Segment, SegmentKind, ValidationReport, Violation,
};
pub use radial_solver::{
    pole_exponent, solve_mode, solve_mode_riccati, solve_mode_with_scale, Method, ModeEigenvalue, ModeProblem,
    OuterCondition, SolverConfig,
};
pub use spectrum::{
    bracket_mode, compare_profiles, default_collar, full_spectrum, increase_experiment, sharpness_sweep, solve_with,
    truncation_convergence, BracketResult, Flag, IncreaseExperiment, SharpnessSweep, SpectrumResult,
    TruncationStudy,
};
