//! Small closed-form problem instances used by tests, examples, and the
//! instance generator's `fixture:*` kinds.

use crate::error::Result;
use crate::quad::{Pencil, Quadratic, SparseSymMatrix};

/// The 2x2 homogeneous instance with A0 = [[1,2],[2,1]], A1 = [[0,-1],[-1,0]].
/// Pencil interval endpoints are exactly (1, 3).
pub fn e1() -> Pencil {
    let a0 = SparseSymMatrix::new(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)]).unwrap();
    let a1 = SparseSymMatrix::new(2, vec![(0, 1, -1.0)]).unwrap();
    Pencil::new(
        Quadratic::new(a0, vec![0.0, 0.0], 0.0).unwrap(),
        Quadratic::new(a1, vec![0.0, 0.0], 0.0).unwrap(),
    )
    .unwrap()
}

/// `e1` with q0 scaled by 1/3 so the unit-norm bounds hold. Closed form:
/// lambda_min(A(gamma)) = 1/3 - |2/3 - gamma|, endpoints (1/3, 1),
/// xi* = 1/3 at gamma* = 2/3, zeta* = 1, kappa* = 3.
pub fn e1n() -> Pencil {
    let p = e1();
    Pencil::new(p.q0.scaled(1.0 / 3.0), p.q1).unwrap()
}

/// `e1n` with the linear term b0 = (0, -1/2) * (1/3). The optimum is exactly
/// -1/12, attained at x = (0, 1/2) on the constraint boundary.
pub fn e2() -> Pencil {
    let mut p = e1n();
    p.q0.b = vec![0.0, -0.5 / 3.0];
    p
}

/// Exact optimal value of `e2`.
pub const E2_OPT: f64 = -1.0 / 12.0;

/// Diagonal family A0 = Diag(1, 1, -1), A1 = Diag(1, -1/(1+alpha), 1).
/// Closed form: xi* = alpha/(2+alpha), zeta* = 1+alpha, endpoints (1, 1+alpha).
pub fn d_alpha(alpha: f64) -> Result<Pencil> {
    let a0 = SparseSymMatrix::diagonal(&[1.0, 1.0, -1.0])?;
    let a1 = SparseSymMatrix::diagonal(&[1.0, -1.0 / (1.0 + alpha), 1.0])?;
    Pencil::new(
        Quadratic::new(a0, vec![0.0; 3], 0.0)?,
        Quadratic::new(a1, vec![0.0; 3], 0.0)?,
    )
}

/// Diagonal instance with empty pencil interval: A0 = Diag(1,-1),
/// A1 = Diag(-1,-1); no gamma >= 0 makes A(gamma) PSD.
pub fn gamma_empty() -> Pencil {
    let a0 = SparseSymMatrix::diagonal(&[1.0, -1.0]).unwrap();
    let a1 = SparseSymMatrix::diagonal(&[-1.0, -1.0]).unwrap();
    Pencil::new(
        Quadratic::new(a0, vec![0.0; 2], 0.0).unwrap(),
        Quadratic::new(a1, vec![0.0; 2], 0.0).unwrap(),
    )
    .unwrap()
}

/// Convex-constraint instance: A0 = Diag(1,-1), A1 = Diag(1,1) (A1 positive
/// definite, Gamma unbounded above).
pub fn convex_constraint() -> Pencil {
    let a0 = SparseSymMatrix::diagonal(&[1.0, -1.0]).unwrap();
    let a1 = SparseSymMatrix::diagonal(&[1.0, 1.0]).unwrap();
    Pencil::new(
        Quadratic::new(a0, vec![0.0; 2], 0.0).unwrap(),
        Quadratic::new(a1, vec![0.0; 2], 0.0).unwrap(),
    )
    .unwrap()
}
