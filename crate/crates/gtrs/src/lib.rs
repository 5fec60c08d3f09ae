//! Sparse, matrix-free solver for the Generalized Trust Region Subproblem
//! (GTRS): minimize a nonconvex quadratic q0 subject to a nonconvex
//! quadratic inequality q1 <= 0.
//!
//! The solver works through the convex reformulation
//! `min_x max { q(gamma_-, x), q(gamma_+, x) }`, where `gamma_-` and
//! `gamma_+` are the endpoints of the interval on which the matrix pencil
//! `A0 + gamma A1` is positive semidefinite. The interval endpoints are
//! bracketed by bisection on the concave function
//! `lambda_min(A(gamma))` using a randomized Lanczos estimator, the
//! reformulation is solved by an accelerated constant-step scheme for
//! smooth minimax problems, and a feasible solution is recovered by moving
//! along an approximate null direction of the pencil at one endpoint until
//! the constraint is tight. Every stage touches the matrices only through
//! sparse matvecs, so the end-to-end cost is linear in the number of stored
//! entries (times accuracy- and conditioning-dependent factors).
//!
//! Module map:
//! - [`quad`]: quadratics, the pencil, matrix-free matvecs, normalization.
//! - [`lanczos`]: randomized smallest-eigenvalue estimation.
//! - [`regularity`]: certificates (xi, zeta, gamma_hat) and the exact
//!   diagonal fast path.
//! - [`gamma`]: endpoint bisection.
//! - [`minimax`]: the two-quadratic minimax engine with closed-form prox.
//! - [`hull`]: regime classification, hull membership, and the two-point
//!   boundary decomposition.
//! - [`pipeline`]: value/solution drivers and the end-to-end `solve`.
//! - [`oracle`]: dense, slow reference computations for verification.
//! - [`problem`]: problem/result file formats and the instance generator.
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `gtrs` binary exposes the same functionality as a CLI.

pub mod error;
pub mod fixtures;
pub mod gamma;
pub mod hull;
pub mod lanczos;
pub mod minimax;
pub mod oracle;
pub mod pipeline;
pub mod problem;
pub mod quad;
pub mod regularity;
pub mod seed;
pub(crate) mod vecops;

pub use error::{GtrsError, Result};
pub use pipeline::{solve, SolveMode, SolveOptions, SolveReport};
pub use quad::{normalize, NormalizationScales, Pencil, Quadratic, SparseSymMatrix};
pub use regularity::RegularityCertificate;
pub use seed::SeedStream;
