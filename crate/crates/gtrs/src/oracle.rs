//! Dense, slow, trusted reference computations for tests and derived
//! constants: a cyclic Jacobi eigensolver, exact pencil-interval endpoints
//! by high-precision bisection, and a ground-truth optimum via a dual
//! gamma-scan cross-validated (for tiny n) by direct grid search.
//!
//! Nothing here is a production path; dimensions are capped and every
//! result records its method and achieved tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::hull;
use crate::quad::Pencil;
use crate::vecops::{dot, norm2};

/// Hard cap for the dense eigensolver and endpoint bisection.
pub const DENSE_CAP: usize = 200;
/// Hard cap for the ground-truth optimum.
pub const BRUTE_CAP: usize = 50;

/// A reference quantity with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub quantity: String,
    pub values: Vec<f64>,
    pub method: String,
    pub tolerance: f64,
}

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi.
/// Returns eigenvalues (ascending) and matching unit eigenvectors.
pub fn jacobi_eig(a_in: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a_in.len();
    if n > DENSE_CAP {
        return Err(GtrsError::OracleCapExceeded { n, cap: DENSE_CAP });
    }
    let mut a: Vec<Vec<f64>> = a_in.to_vec();
    for row in &a {
        if row.len() != n {
            return Err(GtrsError::InvalidInput("non-square dense matrix".into()));
        }
    }
    // eigenvector accumulator, column k = eigenvector k
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let frob: f64 = a
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let diag_max = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    // both frob/sqrt(n) and max |a_ii| lower-bound the spectral norm, so this
    // threshold is at least as tight as 1e-13 * ||A||
    let tol = 1e-13 * (frob / (n as f64).sqrt()).max(diag_max);

    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0usize;
    while off(&a) > tol {
        sweeps += 1;
        if sweeps > 100 {
            return Err(GtrsError::NumericalError(
                "Jacobi eigensolver failed to converge".into(),
            ));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i][k]).collect();
            crate::vecops::normalize(&mut col);
            col
        })
        .collect();
    Ok((values, vectors))
}

/// Smallest eigenvalue and a unit eigenvector of a dense symmetric matrix.
pub fn dense_eig_min(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let (values, vectors) = jacobi_eig(a)?;
    Ok((values[0], vectors[0].clone()))
}

/// Spectral norm of a dense symmetric matrix (test helper).
pub fn dense_spectral_norm(a: &[Vec<f64>]) -> f64 {
    match jacobi_eig(a) {
        Ok((values, _)) => values
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max),
        Err(_) => f64::NAN,
    }
}

/// Dense pencil matrix A0 + gamma A1.
pub fn dense_pencil(p: &Pencil, gamma: f64) -> Vec<Vec<f64>> {
    let n = p.dim();
    let d0 = p.q0.a.to_dense();
    let d1 = p.q1.a.to_dense();
    (0..n)
        .map(|i| (0..n).map(|j| d0[i][j] + gamma * d1[i][j]).collect())
        .collect()
}

fn lambda_min_at(p: &Pencil, gamma: f64) -> Result<f64> {
    Ok(dense_eig_min(&dense_pencil(p, gamma))?.0)
}

/// Exact regularity data computed densely: interval endpoints, the interior
/// maximizer of lambda_min(A(gamma)), and the derived parameters.
#[derive(Debug, Clone, Copy)]
pub struct PencilAnalysis {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma_star: f64,
    /// lambda_min(A(gamma_star)), the uncapped definiteness margin.
    pub lambda_star: f64,
    pub xi_star: f64,
    pub zeta_star: f64,
    pub kappa_star: f64,
}

/// Golden-section maximization of the concave lambda_min(A(gamma)) over
/// [0, hi], followed by endpoint bisection. Requires the definite-point
/// regime: both matrices nonconvex and some A(gamma) positive definite.
pub fn pencil_analysis(p: &Pencil) -> Result<PencilAnalysis> {
    let n = p.dim();
    if n > DENSE_CAP {
        return Err(GtrsError::OracleCapExceeded { n, cap: DENSE_CAP });
    }
    let l0 = lambda_min_at(p, 0.0)?;
    let (l1, _) = dense_eig_min(&p.q1.a.to_dense())?;
    if l0 >= -1e-12 {
        return Err(GtrsError::RegimeMismatch(format!(
            "objective matrix has no negative eigenvalue (lambda_min(A0) = {l0:.3e})"
        )));
    }
    if l1 >= -1e-12 {
        return Err(GtrsError::RegimeMismatch(format!(
            "constraint matrix has no negative eigenvalue (lambda_min(A1) = {l1:.3e})"
        )));
    }
    let ub0 = crate::quad::spectral_norm_upper_bound(&p.q0.a);
    let hi = ub0 / (-l1) * 1.001 + 1e-6;

    // golden-section on the concave objective
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut up) = (0.0f64, hi);
    let mut x1 = up - phi * (up - lo);
    let mut x2 = lo + phi * (up - lo);
    let mut f1 = lambda_min_at(p, x1)?;
    let mut f2 = lambda_min_at(p, x2)?;
    for _ in 0..120 {
        if up - lo <= 1e-13 * (1.0 + up) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (up - lo);
            f2 = lambda_min_at(p, x2)?;
        } else {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - phi * (up - lo);
            f1 = lambda_min_at(p, x1)?;
        }
    }
    let gamma_star = 0.5 * (lo + up);
    let lambda_star = lambda_min_at(p, gamma_star)?;
    if lambda_star <= 1e-10 {
        return Err(GtrsError::RegimeMismatch(format!(
            "no certifiably positive definite pencil value (max lambda_min = {lambda_star:.3e})"
        )));
    }

    let bisect = |mut inside: f64, mut outside: f64| -> Result<f64> {
        // invariant: lambda_min > 0 at `inside`, < 0 at `outside`
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if (inside - outside).abs() <= 1e-13 * (1.0 + mid.abs()) {
                break;
            }
            let lm = lambda_min_at(p, mid)?;
            if lm > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };

    // ensure a sign change on each side
    let mut outside_hi = hi;
    while lambda_min_at(p, outside_hi)? >= 0.0 {
        outside_hi *= 2.0;
        if outside_hi > 1e12 {
            return Err(GtrsError::RegimeMismatch(
                "pencil interval appears unbounded above".into(),
            ));
        }
    }
    let gamma_plus = bisect(gamma_star, outside_hi)?;
    let gamma_minus = bisect(gamma_star, 0.0)?;

    let xi_star = 1.0f64.min(lambda_star);
    let zeta_star = 1.0f64.max(gamma_plus);
    Ok(PencilAnalysis {
        gamma_minus,
        gamma_plus,
        gamma_star,
        lambda_star,
        xi_star,
        zeta_star,
        kappa_star: zeta_star / xi_star,
    })
}

/// Exact endpoints of the pencil interval, to absolute tolerance 1e-10 with
/// |lambda_min(A(gamma_pm))| <= 1e-12.
pub fn gamma_exact(p: &Pencil) -> Result<(f64, f64)> {
    let analysis = pencil_analysis(p)?;
    Ok((analysis.gamma_minus, analysis.gamma_plus))
}

/// Ground-truth optimum with witness.
#[derive(Debug, Clone)]
pub struct BruteOpt {
    pub value: f64,
    pub witness: Vec<f64>,
    pub gamma_dual: f64,
    pub analysis: PencilAnalysis,
    /// |direct-grid value - dual value| when the cross-check ran (n <= 3).
    pub cross_check_gap: Option<f64>,
    pub result: OracleResult,
}

/// Dense Cholesky factor L with A = L L'.
fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(GtrsError::NumericalError(
                        "Cholesky pivot not positive".into(),
                    ));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solve L y = b (forward substitution).
fn forward_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    y
}

/// Solve L' x = y (back substitution with the stored lower factor).
fn backward_solve_t(l: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

/// Congruence transform of the pencil around the definite point:
/// A(gamma) = L Q diag(1 + (gamma-gamma*) lambda_i) Q' L'. The dual value
/// c(gamma) - b(gamma)' A(gamma)^+ b(gamma) then costs O(n) per gamma.
struct DualScan {
    lambdas: Vec<f64>,
    beta0: Vec<f64>,
    beta1: Vec<f64>,
    gamma_star: f64,
    l: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>, // columns are eigenvectors of the transformed A1
    c0: f64,
    c1: f64,
}

impl DualScan {
    fn new(p: &Pencil, gamma_star: f64) -> Result<Self> {
        let n = p.dim();
        let a_star = dense_pencil(p, gamma_star);
        let l = cholesky(&a_star)?;
        let d1 = p.q1.a.to_dense();
        // M = L^{-1} A1 L^{-T}, built column by column and symmetrized
        let mut m = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col_linv_t = backward_solve_t(&l, &e); // column j of L^{-T}
            let a1col: Vec<f64> = (0..n).map(|i| dot(&d1[i], &col_linv_t)).collect();
            let mj = forward_solve(&l, &a1col);
            for i in 0..n {
                m[i][j] = mj[i];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[i][j] + m[j][i]);
                m[i][j] = avg;
                m[j][i] = avg;
            }
        }
        let (lambdas, vectors) = jacobi_eig(&m)?;
        // q[i][k]: component i of eigenvector k
        let q: Vec<Vec<f64>> = {
            let mut q = vec![vec![0.0; n]; n];
            for (k, vec_k) in vectors.iter().enumerate() {
                for i in 0..n {
                    q[i][k] = vec_k[i];
                }
            }
            q
        };
        let project = |b: &[f64]| -> Vec<f64> {
            let y = forward_solve(&l, b);
            (0..n).map(|k| (0..n).map(|i| q[i][k] * y[i]).sum()).collect()
        };
        Ok(DualScan {
            lambdas,
            beta0: project(&p.q0.b),
            beta1: project(&p.q1.b),
            gamma_star,
            l,
            q,
            c0: p.q0.c,
            c1: p.q1.c,
        })
    }

    /// Dual value g(gamma); -infinity when b(gamma) leaves the range of A(gamma).
    fn value(&self, gamma: f64) -> f64 {
        let shift = gamma - self.gamma_star;
        let d: Vec<f64> = self.lambdas.iter().map(|lam| 1.0 + shift * lam).collect();
        let dmax = d.iter().cloned().fold(0.0, f64::max);
        let cutoff = 1e-10 * dmax.max(1e-300);
        let mut quad = 0.0;
        let mut bnorm = 0.0;
        let betas: Vec<f64> = self
            .beta0
            .iter()
            .zip(&self.beta1)
            .map(|(b0, b1)| b0 + gamma * b1)
            .collect();
        for b in &betas {
            bnorm += b * b;
        }
        let bnorm = bnorm.sqrt();
        for (bi, di) in betas.iter().zip(&d) {
            if *di <= cutoff {
                if bi.abs() > 1e-10 * (1.0 + bnorm) {
                    return f64::NEG_INFINITY;
                }
            } else {
                quad += bi * bi / di;
            }
        }
        self.c0 + gamma * self.c1 - quad
    }

    /// Primal point -A(gamma)^+ b(gamma), range-space solve.
    fn primal(&self, gamma: f64) -> Vec<f64> {
        let n = self.lambdas.len();
        let shift = gamma - self.gamma_star;
        let d: Vec<f64> = self.lambdas.iter().map(|lam| 1.0 + shift * lam).collect();
        let dmax = d.iter().cloned().fold(0.0, f64::max);
        let cutoff = 1e-10 * dmax.max(1e-300);
        let betas: Vec<f64> = self
            .beta0
            .iter()
            .zip(&self.beta1)
            .map(|(b0, b1)| b0 + gamma * b1)
            .collect();
        let w: Vec<f64> = betas
            .iter()
            .zip(&d)
            .map(|(b, di)| if *di <= cutoff { 0.0 } else { -b / di })
            .collect();
        let qw: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|k| self.q[i][k] * w[k]).sum())
            .collect();
        backward_solve_t(&self.l, &qw)
    }
}

/// Direct grid search over x for tiny n: coarse-to-fine zoom down to the
/// final 1e-3 spacing over the box [-10 kappa, 10 kappa]^n. Returns the best
/// feasible objective value found.
fn direct_grid_opt(p: &Pencil, kappa: f64) -> Result<f64> {
    let n = p.dim();
    let half = 10.0 * kappa;
    let mut center = vec![0.0; n];
    let mut radius = half;
    let mut best = f64::INFINITY;
    let per_dim: usize = match n {
        1 => 20001,
        2 => 201,
        _ => 61,
    };
    loop {
        let spacing = 2.0 * radius / (per_dim - 1) as f64;
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut best_point = center.clone();
        'outer: loop {
            for k in 0..n {
                x[k] = center[k] - radius + idx[k] as f64 * spacing;
            }
            if p.q1.eval(&x)? <= 0.0 {
                let v = p.q0.eval(&x)?;
                if v < best {
                    best = v;
                    best_point = x.clone();
                }
            }
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < per_dim {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == n {
                    break 'outer;
                }
            }
        }
        if spacing <= 1e-3 {
            break;
        }
        center = best_point;
        // keep a couple of coarse cells of slack around the incumbent
        radius = (spacing * 3.0).max(1e-3 * (per_dim - 1) as f64 / 2.0 * 0.5);
        for c in center.iter_mut() {
            *c = c.clamp(-half, half);
        }
    }
    Ok(best)
}

/// Ground-truth optimum via the dual gamma-scan (10^4-point grid plus
/// golden-section refinement on the concave dual), with a direct x-grid
/// cross-check for n <= 3 and a primal witness obtained from the dual
/// solution, rounded onto the constraint boundary when necessary.
pub fn brute_opt(p: &Pencil) -> Result<BruteOpt> {
    let n = p.dim();
    if n > BRUTE_CAP {
        return Err(GtrsError::OracleCapExceeded { n, cap: BRUTE_CAP });
    }
    let analysis = pencil_analysis(p)?;
    let scan = DualScan::new(p, analysis.gamma_star)?;

    let (glo, ghi) = (analysis.gamma_minus, analysis.gamma_plus);
    let grid_points = 10_000usize;
    let mut best_gamma = analysis.gamma_star;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..=grid_points {
        let gamma = glo + (ghi - glo) * k as f64 / grid_points as f64;
        let v = scan.value(gamma);
        if v > best_val {
            best_val = v;
            best_gamma = gamma;
        }
    }
    // golden refinement inside the bracketing cell
    let cell = (ghi - glo) / grid_points as f64;
    let mut lo = (best_gamma - cell).max(glo);
    let mut up = (best_gamma + cell).min(ghi);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = up - phi * (up - lo);
    let mut x2 = lo + phi * (up - lo);
    let mut f1 = scan.value(x1);
    let mut f2 = scan.value(x2);
    for _ in 0..90 {
        if up - lo <= 1e-14 * (1.0 + up.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (up - lo);
            f2 = scan.value(x2);
        } else {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - phi * (up - lo);
            f1 = scan.value(x1);
        }
    }
    let gamma_dual = 0.5 * (lo + up);
    let dual_value = scan.value(gamma_dual).max(best_val);

    // primal witness: dual point, rounded onto the boundary if needed
    let x_dual = scan.primal(gamma_dual);
    let q1x = p.q1.eval(&x_dual)?;
    let witness = if q1x.abs() <= 1e-9 * (1.0 + norm2(&x_dual)).powi(2) || q1x <= 0.0 {
        x_dual
    } else {
        let t_hat = p
            .eval(analysis.gamma_minus, &x_dual)?
            .max(p.eval(analysis.gamma_plus, &x_dual)?);
        let (_, dir_minus) = dense_eig_min(&dense_pencil(p, analysis.gamma_minus))?;
        let (_, dir_plus) = dense_eig_min(&dense_pencil(p, analysis.gamma_plus))?;
        let dec = hull::hull_decompose(
            p,
            analysis.gamma_minus,
            analysis.gamma_plus,
            &dir_minus,
            &dir_plus,
            &x_dual,
            t_hat,
        )?;
        let (x1p, _) = dec.endpoint1;
        let (x2p, _) = dec.endpoint2;
        if p.q0.eval(&x1p)? <= p.q0.eval(&x2p)? {
            x1p
        } else {
            x2p
        }
    };
    let primal_value = p.q0.eval(&witness)?;

    let cross_check_gap = if n <= 3 {
        let grid_value = direct_grid_opt(p, analysis.kappa_star)?;
        let gap = (grid_value - dual_value).abs();
        if gap > 1e-2 {
            return Err(GtrsError::OracleInconsistency(format!(
                "dual scan {dual_value:.6e} vs direct grid {grid_value:.6e} (gap {gap:.3e})"
            )));
        }
        Some(gap)
    } else {
        None
    };

    let tolerance = (primal_value - dual_value).abs();
    Ok(BruteOpt {
        value: dual_value,
        witness,
        gamma_dual,
        analysis,
        cross_check_gap,
        result: OracleResult {
            quantity: "gtrs-optimum".into(),
            values: vec![dual_value],
            method: "dual-scan-congruence".into(),
            tolerance,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dense_eig_min_examples() {
        let p = fixtures::e1();
        let (lam, vec) = dense_eig_min(&p.q0.a.to_dense()).unwrap();
        assert!((lam + 1.0).abs() < 1e-12);
        let expect = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
        let align = dot(&vec, &expect).abs();
        assert!((align - 1.0).abs() < 1e-10, "eigenvector misaligned: {vec:?}");

        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((dense_eig_min(&eye).unwrap().0 - 1.0).abs() < 1e-14);

        let (lam1, _) = dense_eig_min(&p.q1.a.to_dense()).unwrap();
        assert!((lam1 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_characteristic_polynomial_2x2_3x3() {
        // 2x2: eigenvalues of [[a,b],[b,c]] are ((a+c) +- sqrt((a-c)^2+4b^2))/2
        let cases = [
            [[1.0, 2.0], [2.0, 1.0]],
            [[0.0, -1.0], [-1.0, 0.0]],
            [[2.0, 0.5], [0.5, -3.0]],
        ];
        for m in cases {
            let dense = vec![m[0].to_vec(), m[1].to_vec()];
            let (vals, _) = jacobi_eig(&dense).unwrap();
            let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
            let disc = ((a - c).powi(2) + 4.0 * b * b).sqrt();
            let lo = 0.5 * (a + c - disc);
            let hi = 0.5 * (a + c + disc);
            assert!((vals[0] - lo).abs() < 1e-10);
            assert!((vals[1] - hi).abs() < 1e-10);
        }
        // 3x3 diagonal family has eigenvalues on the diagonal
        let d = fixtures::d_alpha(0.5).unwrap();
        let (vals, _) = jacobi_eig(&d.q0.a.to_dense()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_exact_examples() {
        let (gm, gp) = gamma_exact(&fixtures::e1()).unwrap();
        assert!((gm - 1.0).abs() < 1e-8, "gamma_minus = {gm}");
        assert!((gp - 3.0).abs() < 1e-8, "gamma_plus = {gp}");

        let (gm, gp) = gamma_exact(&fixtures::e1n()).unwrap();
        assert!((gm - 1.0 / 3.0).abs() < 1e-8);
        assert!((gp - 1.0).abs() < 1e-8);

        let (gm, gp) = gamma_exact(&fixtures::d_alpha(0.5).unwrap()).unwrap();
        assert!((gm - 1.0).abs() < 1e-8);
        assert!((gp - 1.5).abs() < 1e-8);
    }

    #[test]
    fn gamma_exact_endpoint_residuals_and_interior() {
        for p in [fixtures::e1(), fixtures::e1n(), fixtures::d_alpha(1.0).unwrap()] {
            let analysis = pencil_analysis(&p).unwrap();
            let lm = lambda_min_at(&p, analysis.gamma_minus).unwrap();
            let lp = lambda_min_at(&p, analysis.gamma_plus).unwrap();
            assert!(lm.abs() <= 1e-10, "residual at gamma_minus: {lm:.3e}");
            assert!(lp.abs() <= 1e-10, "residual at gamma_plus: {lp:.3e}");
            let mid = 0.5 * (analysis.gamma_minus + analysis.gamma_plus);
            assert!(lambda_min_at(&p, mid).unwrap() > 0.0);
        }
    }

    #[test]
    fn gamma_exact_regime_mismatch() {
        assert!(matches!(
            gamma_exact(&fixtures::convex_constraint()),
            Err(GtrsError::RegimeMismatch(_))
        ));
        assert!(matches!(
            gamma_exact(&fixtures::gamma_empty()),
            Err(GtrsError::RegimeMismatch(_))
        ));
    }

    #[test]
    fn brute_opt_homogeneous_is_zero() {
        let r = brute_opt(&fixtures::e1n()).unwrap();
        assert!(r.value.abs() < 1e-9, "value = {}", r.value);
        assert!(norm2(&r.witness) < 1e-4);
        assert!(r.cross_check_gap.unwrap() <= 1e-2);

        let d = fixtures::d_alpha(0.5).unwrap();
        let r = brute_opt(&d).unwrap();
        assert!(r.value.abs() < 1e-9);
    }

    #[test]
    fn brute_opt_e2_matches_pinned_constant() {
        let r = brute_opt(&fixtures::e2()).unwrap();
        assert!(
            (r.value - fixtures::E2_OPT).abs() < 1e-6,
            "value = {} vs {}",
            r.value,
            fixtures::E2_OPT
        );
        // witness is feasible and achieves the value
        let p = fixtures::e2();
        assert!(p.q1.eval(&r.witness).unwrap() <= 1e-8);
        assert!((p.q0.eval(&r.witness).unwrap() - fixtures::E2_OPT).abs() < 1e-6);
        assert!(r.cross_check_gap.unwrap() <= 1e-2);
        assert_eq!(r.result.method, "dual-scan-congruence");
    }
}
