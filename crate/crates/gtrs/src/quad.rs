//! Quadratic and matrix-pencil data model.
//!
//! A problem instance is a pair of quadratics `q_i(x) = x' A_i x + 2 b_i' x + c_i`
//! (note the factor 2 on the linear term) with sparse symmetric `A_i`.
//! Only the upper triangle of each matrix is stored, once, in coordinate
//! form; all vectors are dense. The pencil `A(gamma) = A0 + gamma * A1` is
//! never materialized: every algorithm touches it through matrix-free
//! matvecs costing O(N), where N is the total number of stored entries.

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::vecops::{all_finite, dot, norm2};

/// Sparse symmetric matrix in upper-triangular coordinate form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSymMatrix {
    n: usize,
    /// (row, col, value) with row <= col, indices in [0, n), no duplicates.
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymMatrix {
    /// Build from upper-triangle triplets. Rejects out-of-range indices,
    /// lower-triangle entries, duplicates, and non-finite values.
    pub fn new(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(GtrsError::InvalidInput("matrix dimension must be positive".into()));
        }
        for &(i, j, v) in &entries {
            if i >= n || j >= n {
                return Err(GtrsError::InvalidInput(format!(
                    "entry ({i}, {j}) out of range for n = {n}"
                )));
            }
            if i > j {
                return Err(GtrsError::InvalidInput(format!(
                    "entry ({i}, {j}) is below the diagonal; store the upper triangle only"
                )));
            }
            if !v.is_finite() {
                return Err(GtrsError::InvalidInput(format!(
                    "entry ({i}, {j}) has non-finite value {v}"
                )));
            }
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(GtrsError::InvalidInput(
                "duplicate coordinate entries; sum them before constructing".into(),
            ));
        }
        Ok(SparseSymMatrix { n, entries })
    }

    /// Build from triplets, summing duplicates (coordinate-format convention
    /// for file input). Returns the matrix and the number of duplicate pairs
    /// that were merged, so callers can warn.
    pub fn from_triplets_summing(
        n: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<(Self, usize)> {
        let mut sorted = triplets;
        sorted.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        let mut duplicates = 0usize;
        for (i, j, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => {
                    last.2 += v;
                    duplicates += 1;
                }
                _ => merged.push((i, j, v)),
            }
        }
        Ok((SparseSymMatrix::new(n, merged)?, duplicates))
    }

    /// The zero matrix of dimension n.
    pub fn zero(n: usize) -> Self {
        SparseSymMatrix { n, entries: Vec::new() }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        SparseSymMatrix::new(
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Number of stored entries (upper triangle).
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&(_, _, v)| v == 0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(i, j, _)| i == j)
    }

    /// Diagonal as a dense vector (missing entries are zero).
    pub fn diagonal_vector(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i] = v;
            }
        }
        d
    }

    /// y = A x, expanding the symmetric part of off-diagonal entries.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(GtrsError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// Quadratic form x' A x with one matvec.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        dot(x, &y)
    }

    /// Gershgorin bound: max row sum of absolute values, an upper bound on
    /// the spectral norm of a symmetric matrix.
    pub fn gershgorin_bound(&self) -> f64 {
        let mut row_abs = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            row_abs[i] += v.abs();
            if i != j {
                row_abs[j] += v.abs();
            }
        }
        row_abs.into_iter().fold(0.0, f64::max)
    }

    /// Dense n x n copy (oracle/test use).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for &(i, j, v) in &self.entries {
            m[i][j] += v;
            if i != j {
                m[j][i] += v;
            }
        }
        m
    }

    /// Scale all entries by `s`, returning a new matrix.
    pub fn scaled(&self, s: f64) -> Self {
        SparseSymMatrix {
            n: self.n,
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, s * v)).collect(),
        }
    }
}

/// A quadratic function q(x) = x' A x + 2 b' x + c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: SparseSymMatrix,
    pub b: Vec<f64>,
    pub c: f64,
}

impl Quadratic {
    pub fn new(a: SparseSymMatrix, b: Vec<f64>, c: f64) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(GtrsError::DimensionMismatch { expected: a.dim(), got: b.len() });
        }
        if !all_finite(&b) || !c.is_finite() {
            return Err(GtrsError::InvalidInput("non-finite linear or constant term".into()));
        }
        Ok(Quadratic { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// q(x) = x' A x + 2 b' x + c, one matvec.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(GtrsError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut y = vec![0.0; self.dim()];
        self.a.matvec_into(x, &mut y);
        Ok(dot(x, &y) + 2.0 * dot(&self.b, x) + self.c)
    }

    /// Gradient 2 (A x + b).
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(GtrsError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut y = vec![0.0; self.dim()];
        self.a.matvec_into(x, &mut y);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi = 2.0 * (*yi + bi);
        }
        Ok(y)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.iter().all(|&v| v == 0.0) && self.c == 0.0
    }

    /// s * q, scaling A, b and c together.
    pub fn scaled(&self, s: f64) -> Self {
        Quadratic {
            a: self.a.scaled(s),
            b: self.b.iter().map(|v| s * v).collect(),
            c: s * self.c,
        }
    }
}

/// The pair (q0, q1) defining the problem and the pencil A(gamma) = A0 + gamma A1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pencil {
    pub q0: Quadratic,
    pub q1: Quadratic,
}

impl Pencil {
    pub fn new(q0: Quadratic, q1: Quadratic) -> Result<Self> {
        if q0.dim() != q1.dim() {
            return Err(GtrsError::DimensionMismatch { expected: q0.dim(), got: q1.dim() });
        }
        Ok(Pencil { q0, q1 })
    }

    pub fn dim(&self) -> usize {
        self.q0.dim()
    }

    /// Total stored entries across A0 and A1 (the input size N).
    pub fn nnz(&self) -> usize {
        self.q0.a.nnz() + self.q1.a.nnz()
    }

    /// q(gamma, x) = q0(x) + gamma q1(x).
    pub fn eval(&self, gamma: f64, x: &[f64]) -> Result<f64> {
        Ok(self.q0.eval(x)? + gamma * self.q1.eval(x)?)
    }

    /// y = (A0 + gamma A1) x without materializing the sum.
    pub fn matvec_into(&self, gamma: f64, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        y.fill(0.0);
        for &(i, j, v) in self.q0.a.entries() {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        for &(i, j, v) in self.q1.a.entries() {
            let gv = gamma * v;
            y[i] += gv * x[j];
            if i != j {
                y[j] += gv * x[i];
            }
        }
    }

    pub fn matvec(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(GtrsError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(gamma, x, &mut y);
        Ok(y)
    }

    /// x' A(gamma) x.
    pub fn pencil_quad_form(&self, gamma: f64, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(gamma, x, &mut y);
        dot(x, &y)
    }

    /// b(gamma) = b0 + gamma b1.
    pub fn b_at(&self, gamma: f64) -> Vec<f64> {
        self.q0
            .b
            .iter()
            .zip(&self.q1.b)
            .map(|(b0, b1)| b0 + gamma * b1)
            .collect()
    }

    /// c(gamma) = c0 + gamma c1.
    pub fn c_at(&self, gamma: f64) -> f64 {
        self.q0.c + gamma * self.q1.c
    }

    /// The aggregated quadratic q(gamma, .) as an explicit Quadratic.
    /// Materializes the entry union; oracle/test use only.
    pub fn aggregated(&self, gamma: f64) -> Result<Quadratic> {
        let n = self.dim();
        let mut triplets: Vec<(usize, usize, f64)> =
            self.q0.a.entries().to_vec();
        triplets.extend(
            self.q1
                .a
                .entries()
                .iter()
                .map(|&(i, j, v)| (i, j, gamma * v)),
        );
        let (a, _) = SparseSymMatrix::from_triplets_summing(n, triplets)?;
        Quadratic::new(a, self.b_at(gamma), self.c_at(gamma))
    }

    pub fn both_diagonal(&self) -> bool {
        self.q0.a.is_diagonal() && self.q1.a.is_diagonal()
    }
}

/// Positive scales applied to q0 and q1 so the normalized data satisfies
/// the unit bounds ||A0||, ||A1||, ||b0||, ||b1||, |c1| <= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationScales {
    pub s0: f64,
    pub s1: f64,
    /// Certified upper bound on ||A0|| before scaling.
    pub a0_norm_bound: f64,
    /// Certified upper bound on ||A1|| before scaling.
    pub a1_norm_bound: f64,
}

impl NormalizationScales {
    /// Map a normalized-space gamma back to original units.
    pub fn gamma_to_original(&self, gamma: f64) -> f64 {
        gamma * self.s1 / self.s0
    }

    /// Map a normalized-space objective value back to original units.
    pub fn value_to_original(&self, value: f64) -> f64 {
        value / self.s0
    }
}

/// Deterministic power-iteration estimate of the spectral norm.
fn power_norm_estimate(a: &SparseSymMatrix) -> f64 {
    let n = a.dim();
    if a.is_zero() {
        return 0.0;
    }
    // Fixed pseudo-random start so normalize() is a pure function of its input.
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let h = crate::seed::SeedStream::new(0x6e6f_726d).child(i as u64).key();
            (h as f64 / u64::MAX as f64) - 0.5
        })
        .collect();
    if norm2(&v) == 0.0 {
        v[0] = 1.0;
    }
    crate::vecops::normalize(&mut v);
    let mut w = vec![0.0; n];
    let mut est = 0.0f64;
    for _ in 0..200 {
        a.matvec_into(&v, &mut w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let prev = est;
        est = nw;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (est - prev).abs() <= 1e-12 * est.max(1.0) {
            break;
        }
    }
    est
}

/// Certified upper bound on the spectral norm: the Gershgorin row-sum bound,
/// tightened by a power-iteration estimate with a 1.01 safety factor.
pub fn spectral_norm_upper_bound(a: &SparseSymMatrix) -> f64 {
    let gersh = a.gershgorin_bound();
    let power = power_norm_estimate(a) * 1.01;
    if power > 0.0 {
        gersh.min(power)
    } else {
        gersh
    }
}

/// Scale each quadratic by a positive scalar so the unit-norm bounds hold:
/// s0 = 1/max(1, ub(||A0||), ||b0||), s1 = 1/max(1, ub(||A1||), ||b1||, |c1|).
///
/// Positive scaling preserves the feasible set (q1) and the argmin set (q0);
/// the recorded scales un-map gamma and objective values.
pub fn normalize(p: &Pencil) -> Result<(Pencil, NormalizationScales)> {
    if p.q0.is_zero() && p.q1.is_zero() {
        return Err(GtrsError::DegenerateInput);
    }
    let ub0 = spectral_norm_upper_bound(&p.q0.a);
    let ub1 = spectral_norm_upper_bound(&p.q1.a);
    let m0 = 1.0f64.max(ub0).max(norm2(&p.q0.b));
    let m1 = 1.0f64.max(ub1).max(norm2(&p.q1.b)).max(p.q1.c.abs());
    let s0 = 1.0 / m0;
    let s1 = 1.0 / m1;
    let scaled = Pencil::new(p.q0.scaled(s0), p.q1.scaled(s1))?;
    Ok((
        scaled,
        NormalizationScales { s0, s1, a0_norm_bound: ub0, a1_norm_bound: ub1 },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::Rng;

    fn dense_matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter().map(|row| dot(row, x)).collect()
    }

    #[test]
    fn eval_examples() {
        let p = fixtures::e1();
        // picks the (1,1) diagonal entry
        assert_eq!(p.q0.eval(&[1.0, 0.0]).unwrap(), 1.0);
        // direct substitution in -2 x1 x2
        assert_eq!(p.q1.eval(&[1.0, -1.0]).unwrap(), 2.0);
        // constant term at the origin
        let q = Quadratic::new(
            SparseSymMatrix::new(3, vec![(0, 1, 2.0)]).unwrap(),
            vec![1.0, -2.0, 0.5],
            7.25,
        )
        .unwrap();
        assert_eq!(q.eval(&[0.0, 0.0, 0.0]).unwrap(), 7.25);
        assert_eq!(q.grad(&[0.0, 0.0, 0.0]).unwrap(), vec![2.0, -4.0, 1.0]);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let p = fixtures::e1();
        assert!(matches!(
            p.q0.eval(&[1.0]),
            Err(GtrsError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p.q0.grad(&[1.0, 2.0, 3.0]),
            Err(GtrsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grad_examples() {
        let p = fixtures::e1();
        assert_eq!(p.q0.grad(&[1.0, 0.0]).unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn grad_matches_central_differences() {
        let mut rng = crate::seed::SeedStream::new(11).rng();
        for _ in 0..20 {
            let n = rng.gen_range(2..8);
            let q = random_quadratic(n, &mut rng);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = q.grad(&x).unwrap();
            let h = 1e-5;
            for k in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (q.eval(&xp).unwrap() - q.eval(&xm).unwrap()) / (2.0 * h);
                let scale = 1.0f64.max(g[k].abs());
                assert!(
                    (fd - g[k]).abs() <= 1e-6 * scale,
                    "component {k}: fd {fd} vs grad {}",
                    g[k]
                );
            }
        }
    }

    fn random_quadratic(n: usize, rng: &mut impl Rng) -> Quadratic {
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in i..n {
                if rng.gen_bool(0.6) {
                    triplets.push((i, j, rng.gen_range(-1.5..1.5)));
                }
            }
        }
        let (a, _) = SparseSymMatrix::from_triplets_summing(n, triplets).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Quadratic::new(a, b, rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn pencil_matvec_examples() {
        let p = fixtures::e1();
        // A(2) = A0 + 2 A1 = I
        assert_eq!(p.matvec(2.0, &[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        // gamma = 0 reduces to A0
        let v = [0.3, -0.7];
        assert_eq!(p.matvec(0.0, &v).unwrap(), p.q0.a.matvec(&v).unwrap());
        // A(1) = [[1,1],[1,1]] annihilates (1,-1)
        assert_eq!(p.matvec(1.0, &[1.0, -1.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn pencil_matvec_matches_dense() {
        let mut rng = crate::seed::SeedStream::new(23).rng();
        for _ in 0..10 {
            let n = rng.gen_range(2..50);
            let q0 = random_quadratic(n, &mut rng);
            let q1 = random_quadratic(n, &mut rng);
            let p = Pencil::new(q0, q1).unwrap();
            let gamma = rng.gen_range(-3.0..3.0);
            let dense: Vec<Vec<f64>> = {
                let d0 = p.q0.a.to_dense();
                let d1 = p.q1.a.to_dense();
                (0..n)
                    .map(|i| (0..n).map(|j| d0[i][j] + gamma * d1[i][j]).collect())
                    .collect()
            };
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sparse = p.matvec(gamma, &x).unwrap();
            let exact = dense_matvec(&dense, &x);
            for (s, e) in sparse.iter().zip(&exact) {
                assert!((s - e).abs() <= 1e-12 * (1.0 + e.abs()));
            }
        }
    }

    #[test]
    fn pencil_eval_linear_in_gamma() {
        let mut rng = crate::seed::SeedStream::new(31).rng();
        for _ in 0..20 {
            let n = rng.gen_range(2..12);
            let p = Pencil::new(random_quadratic(n, &mut rng), random_quadratic(n, &mut rng))
                .unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let gamma = rng.gen_range(-4.0..4.0);
            let lhs = p.eval(gamma, &x).unwrap();
            let rhs = p.q0.eval(&x).unwrap() + gamma * p.q1.eval(&x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn normalize_e1_gives_one_third() {
        let p = fixtures::e1();
        let (pn, scales) = normalize(&p).unwrap();
        // ||A0|| = 3 (Gershgorin row sum is exactly 3), ||A1|| = 1
        assert_eq!(scales.s0, 1.0 / 3.0);
        assert_eq!(scales.s1, 1.0);
        let e1n = fixtures::e1n();
        assert_eq!(pn, e1n);
    }

    #[test]
    fn normalize_diagonal_family_is_identity() {
        let p = fixtures::d_alpha(0.5).unwrap();
        let (_, scales) = normalize(&p).unwrap();
        assert_eq!(scales.s0, 1.0);
        assert_eq!(scales.s1, 1.0);
    }

    #[test]
    fn normalize_linear_term_dominates() {
        let q0 = Quadratic::new(SparseSymMatrix::zero(2), vec![3.0, 4.0], 0.0).unwrap();
        let q1 = fixtures::e1().q1;
        let p = Pencil::new(q0, q1).unwrap();
        let (_, scales) = normalize(&p).unwrap();
        assert_eq!(scales.s0, 1.0 / 5.0);
    }

    #[test]
    fn normalize_rejects_zero_pencil() {
        let z0 = Quadratic::new(SparseSymMatrix::zero(2), vec![0.0, 0.0], 0.0).unwrap();
        let z1 = z0.clone();
        let p = Pencil::new(z0, z1).unwrap();
        assert!(matches!(normalize(&p), Err(GtrsError::DegenerateInput)));
    }

    #[test]
    fn normalize_bounds_hold_on_random_instances() {
        let mut rng = crate::seed::SeedStream::new(51).rng();
        for _ in 0..20 {
            let n = rng.gen_range(2..20);
            let p = Pencil::new(
                random_quadratic(n, &mut rng),
                random_quadratic(n, &mut rng),
            )
            .unwrap();
            if p.q0.is_zero() && p.q1.is_zero() {
                continue;
            }
            let (pn, _) = normalize(&p).unwrap();
            // dense spectral norms via the oracle
            let n0 = crate::oracle::dense_spectral_norm(&pn.q0.a.to_dense());
            let n1 = crate::oracle::dense_spectral_norm(&pn.q1.a.to_dense());
            assert!(n0 <= 1.0 + 1e-9, "||A0|| = {n0}");
            assert!(n1 <= 1.0 + 1e-9, "||A1|| = {n1}");
            assert!(norm2(&pn.q0.b) <= 1.0 + 1e-12);
            assert!(norm2(&pn.q1.b) <= 1.0 + 1e-12);
            assert!(pn.q1.c.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn duplicate_entries_rejected_by_new_summed_by_loader() {
        let dup = vec![(0, 0, 1.0), (0, 0, 2.0)];
        assert!(SparseSymMatrix::new(2, dup.clone()).is_err());
        let (m, merged) = SparseSymMatrix::from_triplets_summing(2, dup).unwrap();
        assert_eq!(merged, 1);
        assert_eq!(m.entries(), &[(0, 0, 3.0)]);
    }

    #[test]
    fn lower_triangle_rejected() {
        assert!(SparseSymMatrix::new(3, vec![(2, 1, 1.0)]).is_err());
    }
}
