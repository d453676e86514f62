//! Stationary states of one-dimensional superexponential and power-law
//! oscillators: finite-difference Hamiltonians, a banded eigensolver,
//! observables, semiclassical estimates and the `sso` command-line front end.

pub mod banded;
pub mod cli_io;
pub mod discretization;
pub mod eigensolver;
pub mod error;
pub mod observables;
pub mod potentials;
pub mod semiclassics;

pub use banded::SymBandMatrix;
pub use discretization::{assemble_hamiltonian, stencil_coefficients, suggest_domain, BandedHamiltonian, Grid};
pub use eigensolver::{residual_norm, solve_lowest, EigenSolution, SolverOptions};
pub use error::{Error, Result};
pub use observables::{central_moment, count_bound, mean_position, node_count, spacing_analysis, MomentReport, SpectrumReport};
pub use potentials::{evaluate, landmarks, Family, Landmarks, PotentialSpec};
pub use semiclassics::{
    action_integral, classical_period, powerlaw_wkb_closed_form, turning_points, wkb_levels, ClassicalPeriodResult,
    WkbConfig,
};
