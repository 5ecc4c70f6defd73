//! Grid-free evaluation of viscosity solutions of Hamilton–Jacobi equations
//!
//! ```text
//! φ_t + H(x, ∇φ, t) = 0,   φ(x, 0) = g(x)
//! ```
//!
//! at individual points `(x, t)`. Each point solve minimises a functional of
//! the terminal costate `v` built from one backward bi-characteristic: a
//! Lax-type action functional for Hamiltonians convex in `p`, or a
//! Hopf-type functional involving `g*` otherwise. A 2-D Lax–Friedrichs
//! scheme is included as a grid reference.
//!
//! ```
//! use hjsolve::{Example, InitialKind, ProblemSpec, SolveConfig, solve_point};
//!
//! let ex = Example::Ex2Harmonic { sign: hjsolve::Sign::Plus };
//! let spec = ProblemSpec::example(ex, 2, InitialKind::Ellipse, None).unwrap();
//! // quadratic data stays quadratic under the oscillator, so φ(0, t) = g(0) = -1/2
//! let sol = solve_point(&spec, &[0.0, 0.0], 0.3, &SolveConfig::for_example(ex)).unwrap();
//! assert!(sol.converged && (sol.value + 0.5).abs() < 1e-3);
//! ```

pub mod characteristics;
pub mod compare;
pub mod error;
pub mod functionals;
pub mod hamiltonian;
pub mod lax_friedrichs;
pub mod levelset;
pub mod linalg;
pub mod optimizer;
pub mod pointwise_solver;
pub mod problem;

pub use characteristics::{integrate_backward, recover_terminal_costate, Trajectory};
pub use compare::{compare_fields, DiskMask, Discrepancy};
pub use error::{HjError, Result};
pub use functionals::{Objective, ObjectiveKind};
pub use hamiltonian::{
    make_example, make_initial_data, Example, Hamiltonian, HamiltonianModel, InitialData, InitialKind,
    SharedInitialData, Sign,
};
pub use lax_friedrichs::{estimate_dissipation, lf_solve, LFConfig};
pub use levelset::{distance_to_segments, extract_zero_levelset, hausdorff_distance, sample_bilinear, Segment};
pub use optimizer::{
    check_certificate, coordinate_descent, multi_start, DescentConfig, DescentResult, MultiStartResult,
};
pub use pointwise_solver::{
    solve_grid, solve_point, FieldSource, Grid2DField, GridOptions, GridSpec, PointSolution, SolveConfig,
};
pub use problem::{ProblemSpec, SolveMode};
