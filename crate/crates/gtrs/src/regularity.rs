//! Estimation of the pencil regularity parameters (xi, zeta, gamma_hat).
//!
//! xi lower-bounds the best interior definiteness margin
//! max_gamma lambda_min(A(gamma)) (capped at 1), zeta upper-bounds
//! max(1, gamma_plus), and gamma_hat certifies lambda_min(A(gamma_hat)) >= xi.
//! kappa = zeta/xi is the pencil condition number driving every iteration
//! count downstream.
//!
//! The generic path is a guess-halving search (TestXi/ApproxXi) seeded by
//! the bootstrap bound zeta* <= 1/(-lambda_min(A1)), then a halving loop of
//! upper-endpoint bisections (ApproxZeta). Diagonal pencils take an exact
//! closed-form path instead.

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::gamma;
use crate::lanczos::{self, PencilAt};
use crate::quad::{Pencil, SparseSymMatrix};
use crate::seed::SeedStream;

/// How a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateProvenance {
    Estimated,
    ExactDiagonal,
    UserSupplied,
}

/// A regularity certificate (xi, zeta, gamma_hat) with kappa = zeta/xi.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub xi: f64,
    pub zeta: f64,
    pub gamma_hat: f64,
    pub provenance: CertificateProvenance,
}

impl RegularityCertificate {
    pub fn new(
        xi: f64,
        zeta: f64,
        gamma_hat: f64,
        provenance: CertificateProvenance,
    ) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(GtrsError::invalid_param("xi", format!("must lie in (0,1], got {xi}")));
        }
        if !(zeta >= 1.0) {
            return Err(GtrsError::invalid_param("zeta", format!("must be >= 1, got {zeta}")));
        }
        if !(gamma_hat >= 0.0) {
            return Err(GtrsError::invalid_param(
                "gamma_hat",
                format!("must be >= 0, got {gamma_hat}"),
            ));
        }
        Ok(RegularityCertificate { xi, zeta, gamma_hat, provenance })
    }

    pub fn user_supplied(xi: f64, zeta: f64, gamma_hat: f64) -> Result<Self> {
        Self::new(xi, zeta, gamma_hat, CertificateProvenance::UserSupplied)
    }

    pub fn kappa(&self) -> f64 {
        self.zeta / self.xi
    }
}

/// Sign classification of a minimum eigenvalue from a refined probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigSign {
    /// rayleigh + eta < 0: lambda_min < 0 holds deterministically.
    CertifiedNegative,
    /// rayleigh >= eta: lambda_min >= 0 with the probe's probability.
    LikelyNonnegative,
    /// |rayleigh| < eta at the refinement floor.
    Ambiguous,
}

#[derive(Debug, Clone, Copy)]
pub struct EigSignProbe {
    pub sign: EigSign,
    pub rayleigh: f64,
    pub eta: f64,
}

/// Refinement floor for sign probes.
const ETA_FLOOR: f64 = 1e-6;
/// Initial probe accuracy; re-run with eta halved until eta <= |rayleigh|/4
/// or 6 refinements elapse.
const ETA_INITIAL: f64 = 0.05;

/// Probe the sign of lambda_min(A) with an iteratively refined accuracy.
pub fn probe_min_eig_sign(
    a: &SparseSymMatrix,
    p_fail: f64,
    seed: SeedStream,
) -> Result<EigSignProbe> {
    probe_min_eig_sign_with(a, p_fail, seed, lanczos::EigOptions::default())
}

pub fn probe_min_eig_sign_with(
    a: &SparseSymMatrix,
    p_fail: f64,
    seed: SeedStream,
    options: lanczos::EigOptions,
) -> Result<EigSignProbe> {
    let rho = crate::quad::spectral_norm_upper_bound(a).max(1e-12);
    let p_each = p_fail / 7.0;
    let mut eta = ETA_INITIAL;
    let mut est = lanczos::approx_min_eig_with(a, rho, eta, p_each, seed.child(0), options)?;
    for refinement in 0..6 {
        if eta <= (est.rayleigh.abs() / 4.0).max(ETA_FLOOR) {
            break;
        }
        eta = (eta / 2.0).max(ETA_FLOOR);
        est = lanczos::approx_min_eig_with(
            a,
            rho,
            eta,
            p_each,
            seed.child(1 + refinement as u64),
            options,
        )?;
    }
    let sign = if est.rayleigh + eta < 0.0 {
        EigSign::CertifiedNegative
    } else if est.rayleigh >= eta {
        EigSign::LikelyNonnegative
    } else {
        EigSign::Ambiguous
    };
    Ok(EigSignProbe { sign, rayleigh: est.rayleigh, eta })
}

/// Bootstrap upper bound on zeta* from lambda_min(A1):
/// zeta_bar = max(1, 1/(-rayleigh - eta)) when rayleigh + eta < 0.
/// Signals "constraint possibly convex" otherwise.
pub fn zeta_upper_bound(p: &Pencil, p_fail: f64, seed: SeedStream) -> Result<f64> {
    zeta_upper_bound_with(p, p_fail, seed, lanczos::EigOptions::default())
}

pub fn zeta_upper_bound_with(
    p: &Pencil,
    p_fail: f64,
    seed: SeedStream,
    options: lanczos::EigOptions,
) -> Result<f64> {
    let probe = probe_min_eig_sign_with(&p.q1.a, p_fail, seed, options)?;
    match probe.sign {
        EigSign::CertifiedNegative => Ok(1.0f64.max(1.0 / (-probe.rayleigh - probe.eta))),
        _ => Err(GtrsError::ConstraintPossiblyConvex {
            rayleigh: probe.rayleigh,
            eta: probe.eta,
        }),
    }
}

/// One definiteness test at guess xi: bisection over [0, zeta_bar] driven by
/// the sign of x' A1 x for the test vectors. Returns Some(gamma_hat) with
/// lambda_min(A(gamma_hat)) >= xi/2 (with the stated probability) whenever
/// xi <= xi*; returns None ("Fail") whenever xi > 2 xi*; either in between.
pub fn test_xi(
    p: &Pencil,
    xi_guess: f64,
    zeta_bar: f64,
    p_xi: f64,
    seed: SeedStream,
) -> Result<Option<f64>> {
    test_xi_with(p, xi_guess, zeta_bar, p_xi, seed, lanczos::EigOptions::default())
}

pub fn test_xi_with(
    p: &Pencil,
    xi_guess: f64,
    zeta_bar: f64,
    p_xi: f64,
    seed: SeedStream,
    options: lanczos::EigOptions,
) -> Result<Option<f64>> {
    if !(xi_guess > 0.0 && xi_guess <= 1.0) {
        return Err(GtrsError::invalid_param(
            "xi_guess",
            format!("must lie in (0,1], got {xi_guess}"),
        ));
    }
    let t_rounds = {
        let t = (zeta_bar / xi_guess).log2().ceil();
        (if t.is_finite() && t > 0.0 { t as usize } else { 0 }) + 2
    };
    let rho = 2.0 * zeta_bar;
    let eta = xi_guess / 4.0;
    let accept = 3.0 * xi_guess / 4.0;
    let p_each = p_xi / (3 * t_rounds) as f64;

    let mut s = 0.0f64;
    let mut t = zeta_bar;
    for k in 0..t_rounds {
        let probe = |gamma: f64, which: u64, ctx: &Pencil| -> Result<lanczos::EigEstimate> {
            let op = PencilAt { pencil: ctx, gamma };
            lanczos::approx_min_eig_with(
                &op,
                rho,
                eta,
                p_each,
                seed.child_indexed(which, k as u64),
                options,
            )
        };
        let est_s = probe(s, 0, p)?;
        if est_s.rayleigh >= accept {
            return Ok(Some(s));
        }
        let est_t = probe(t, 1, p)?;
        if est_t.rayleigh >= accept {
            return Ok(Some(t));
        }
        let mid = 0.5 * (s + t);
        let est_m = probe(mid, 2, p)?;
        if est_m.rayleigh >= accept {
            return Ok(Some(mid));
        }
        // move toward where lambda_min(A(gamma)) can still be large; ties go right
        let a1_form = p.q1.a.quad_form(&est_m.vector);
        if a1_form >= 0.0 {
            s = mid;
        } else {
            t = mid;
        }
    }
    Ok(None)
}

/// Iteration cap for the guess-halving loop.
const APPROX_XI_CAP: usize = 60;

/// Guess-halving search: returns (xi, gamma_hat) with xi in [xi*/4, xi*]
/// and lambda_min(A(gamma_hat)) >= xi, with probability >= 1 - p_fail.
pub fn approx_xi(p: &Pencil, zeta_bar: f64, p_fail: f64, seed: SeedStream) -> Result<(f64, f64)> {
    match approx_xi_capped(p, zeta_bar, p_fail, APPROX_XI_CAP, seed)? {
        Some(pair) => Ok(pair),
        None => Err(GtrsError::NotCertifiablyDefinite { floor: 2f64.powi(-(APPROX_XI_CAP as i32)) }),
    }
}

/// As `approx_xi` but with an explicit guess-depth cap; `None` means no
/// definite point was found above 2^-cap.
pub fn approx_xi_capped(
    p: &Pencil,
    zeta_bar: f64,
    p_fail: f64,
    cap: usize,
    seed: SeedStream,
) -> Result<Option<(f64, f64)>> {
    approx_xi_capped_with(p, zeta_bar, p_fail, cap, seed, lanczos::EigOptions::default())
}

pub fn approx_xi_capped_with(
    p: &Pencil,
    zeta_bar: f64,
    p_fail: f64,
    cap: usize,
    seed: SeedStream,
    options: lanczos::EigOptions,
) -> Result<Option<(f64, f64)>> {
    for k in 1..=cap {
        let guess = 2f64.powi(-(k as i32 - 1)).min(1.0);
        let budget = 2f64.powi(-(k as i32)) * p_fail;
        if let Some(gamma_hat) =
            test_xi_with(p, guess, zeta_bar, budget, seed.child(k as u64), options)?
        {
            let xi = 2f64.powi(-(k as i32)).min(1.0);
            return Ok(Some((xi, gamma_hat)));
        }
    }
    Ok(None)
}

/// Halving-round cap for the zeta search.
const APPROX_ZETA_CAP: usize = 80;

/// Halving loop of upper-endpoint bisections: returns zeta with
/// zeta* <= zeta <= 4 zeta* (clamped below at 1, since zeta* >= 1 by
/// definition) with probability >= 1 - p_fail.
pub fn approx_zeta(
    p: &Pencil,
    xi: f64,
    zeta_bar: f64,
    gamma_hat: f64,
    p_fail: f64,
    seed: SeedStream,
) -> Result<f64> {
    approx_zeta_with(p, xi, zeta_bar, gamma_hat, p_fail, seed, lanczos::EigOptions::default())
}

pub fn approx_zeta_with(
    p: &Pencil,
    xi: f64,
    zeta_bar: f64,
    gamma_hat: f64,
    p_fail: f64,
    seed: SeedStream,
    options: lanczos::EigOptions,
) -> Result<f64> {
    for k in 1..=APPROX_ZETA_CAP {
        let zeta_k = 2f64.powi(-(k as i32 - 1)) * zeta_bar;
        let delta_k = 2f64.powi(-(k as i32 + 1)) * zeta_bar;
        let budget = 2f64.powi(-(k as i32)) * p_fail;
        let cert = RegularityCertificate::new(
            xi,
            zeta_k.max(1.0),
            gamma_hat,
            CertificateProvenance::Estimated,
        )?;
        // the bisection runs on the raw halved interval even when the
        // certificate clamps zeta to 1 for its own invariant
        let cert = RegularityCertificate { zeta: zeta_k, ..cert };
        let hat_zeta = gamma::approx_gamma_plus_with(
            p,
            &cert,
            delta_k,
            budget,
            seed.child(k as u64),
            options,
        )?;
        if hat_zeta.gamma <= delta_k {
            continue;
        }
        return Ok(zeta_k.max(1.0));
    }
    Err(GtrsError::BisectionFailed { rounds: APPROX_ZETA_CAP })
}

/// Full certificate estimation: bootstrap zeta_bar, then xi and gamma_hat,
/// then zeta. Budget split evenly across the three stages.
pub fn estimate_certificate(
    p: &Pencil,
    p_fail: f64,
    seed: SeedStream,
) -> Result<RegularityCertificate> {
    estimate_certificate_with(p, p_fail, seed, lanczos::EigOptions::default())
}

pub fn estimate_certificate_with(
    p: &Pencil,
    p_fail: f64,
    seed: SeedStream,
    options: lanczos::EigOptions,
) -> Result<RegularityCertificate> {
    let budget = p_fail / 3.0;
    let zeta_bar = zeta_upper_bound_with(p, budget, seed.child(1), options)?;
    let (xi, gamma_hat) = match approx_xi_capped_with(
        p,
        zeta_bar,
        budget,
        APPROX_XI_CAP,
        seed.child(2),
        options,
    )? {
        Some(pair) => pair,
        None => {
            return Err(GtrsError::NotCertifiablyDefinite {
                floor: 2f64.powi(-(APPROX_XI_CAP as i32)),
            })
        }
    };
    let zeta = approx_zeta_with(p, xi, zeta_bar, gamma_hat, budget, seed.child(3), options)?;
    RegularityCertificate::new(xi, zeta, gamma_hat, CertificateProvenance::Estimated)
}

/// Exact regularity data for a diagonal pencil.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiagRegularity {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub xi_star: f64,
    pub zeta_star: f64,
    pub gamma_star: f64,
    /// Uncapped peak margin max_gamma min_i (a0_i + gamma a1_i).
    pub peak: f64,
}

/// Closed-form endpoints and peak of min_i (a0_i + gamma a1_i) over
/// gamma >= 0, via the sorted lower envelope of the n lines. Exact up to
/// roundoff; O(n log n).
pub fn diag_regularity(a0: &[f64], a1: &[f64]) -> Result<DiagRegularity> {
    if a0.len() != a1.len() || a0.is_empty() {
        return Err(GtrsError::DimensionMismatch { expected: a0.len(), got: a1.len() });
    }
    // interval endpoints from per-line sign constraints
    let mut gamma_minus = 0.0f64;
    let mut gamma_plus = f64::INFINITY;
    for (&c0, &c1) in a0.iter().zip(a1) {
        if c1 > 0.0 {
            gamma_minus = gamma_minus.max(-c0 / c1);
        } else if c1 < 0.0 {
            gamma_plus = gamma_plus.min(-c0 / c1);
        } else if c0 < 0.0 {
            return Err(GtrsError::UnboundedBelow);
        }
    }
    if gamma_plus.is_infinite() {
        return Err(GtrsError::ConvexConstraintRegime);
    }
    if gamma_minus > gamma_plus {
        return Err(GtrsError::UnboundedBelow);
    }

    // lower envelope of the lines, slopes descending left to right
    let mut lines: Vec<(f64, f64)> = a1.iter().cloned().zip(a0.iter().cloned()).collect();
    lines.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    lines.dedup_by(|next, prev| {
        if next.0 == prev.0 {
            prev.1 = prev.1.min(next.1);
            true
        } else {
            false
        }
    });
    let cross = |a: (f64, f64), b: (f64, f64)| (a.1 - b.1) / (b.0 - a.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for line in lines {
        while hull.len() >= 2 {
            let top = hull[hull.len() - 1];
            let below = hull[hull.len() - 2];
            if cross(below, line) <= cross(below, top) {
                hull.pop();
            } else {
                break;
            }
        }
        if hull.len() == 1 && hull[0].0 == line.0 {
            hull.pop();
        }
        hull.push(line);
    }

    // peak of the concave envelope on [0, inf): last breakpoint where the
    // active slope is still positive, or gamma = 0 if none is
    let mut gamma_star = 0.0f64;
    for w in hull.windows(2) {
        let (upper, lower) = (w[0], w[1]);
        if upper.0 > 0.0 {
            let bp = cross(upper, lower);
            if bp > gamma_star {
                gamma_star = bp;
            }
        }
    }
    gamma_star = gamma_star.clamp(gamma_minus.max(0.0), gamma_plus);
    let eval = |g: f64| a0.iter().zip(a1).map(|(&c0, &c1)| c0 + g * c1).fold(f64::INFINITY, f64::min);
    let peak = eval(gamma_star).max(eval(0.0));
    let gamma_star = if eval(0.0) > eval(gamma_star) { 0.0 } else { gamma_star };

    if peak < 0.0 {
        return Err(GtrsError::UnboundedBelow);
    }
    Ok(DiagRegularity {
        gamma_minus,
        gamma_plus,
        xi_star: peak.min(1.0),
        zeta_star: gamma_plus.max(1.0),
        gamma_star,
        peak,
    })
}

/// Exact-diagonal certificate from the closed form.
pub fn diagonal_certificate(p: &Pencil) -> Result<RegularityCertificate> {
    if !p.both_diagonal() {
        return Err(GtrsError::InvalidInput("pencil is not diagonal".into()));
    }
    let reg = diag_regularity(&p.q0.a.diagonal_vector(), &p.q1.a.diagonal_vector())?;
    if reg.peak <= 0.0 {
        return Err(GtrsError::NotCertifiablyDefinite { floor: 0.0 });
    }
    RegularityCertificate::new(
        reg.xi_star,
        reg.zeta_star,
        reg.gamma_star,
        CertificateProvenance::ExactDiagonal,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;

    fn lambda_min_at(p: &Pencil, gamma: f64) -> f64 {
        oracle::dense_eig_min(&oracle::dense_pencil(p, gamma)).unwrap().0
    }

    #[test]
    fn zeta_upper_bound_examples() {
        // E1n: lambda_min(A1) = -1, eta stops at the initial 0.05
        let z = zeta_upper_bound(&fixtures::e1n(), 0.01, SeedStream::new(1)).unwrap();
        assert!((1.0..=1.1).contains(&z), "zeta_bar = {z}");

        // D(1/2): lambda_min(A1) = -2/3
        let z = zeta_upper_bound(&fixtures::d_alpha(0.5).unwrap(), 0.01, SeedStream::new(2)).unwrap();
        assert!((1.5..=1.7).contains(&z), "zeta_bar = {z}");

        // A1 = I: possibly-convex signal
        let eye_constraint = Pencil::new(
            fixtures::e1().q0,
            crate::quad::Quadratic::new(
                SparseSymMatrix::diagonal(&[1.0, 1.0]).unwrap(),
                vec![0.0; 2],
                0.0,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            zeta_upper_bound(&eye_constraint, 0.01, SeedStream::new(3)),
            Err(GtrsError::ConstraintPossiblyConvex { .. })
        ));
    }

    #[test]
    fn zeta_upper_bound_dominates_zeta_star() {
        // valid upper bound across seeds
        for s in 0..20u64 {
            let z = zeta_upper_bound(&fixtures::e1n(), 0.01, SeedStream::new(s)).unwrap();
            assert!(z >= 1.0);
            let z = zeta_upper_bound(&fixtures::d_alpha(0.5).unwrap(), 0.01, SeedStream::new(s))
                .unwrap();
            assert!(z >= 1.5);
        }
    }

    #[test]
    fn test_xi_examples() {
        let p = fixtures::e1n();
        // xi_guess <= xi* = 1/3 must succeed, with margin >= xi/2
        let got = test_xi(&p, 0.25, 1.1, 0.01, SeedStream::new(4)).unwrap();
        let gamma_hat = got.expect("test_xi must succeed for xi <= xi*");
        assert!(lambda_min_at(&p, gamma_hat) >= 0.125 - 1e-12);
        // the margin region is strictly inside (5/12, 11/12)
        assert!(gamma_hat > 5.0 / 12.0 && gamma_hat < 11.0 / 12.0);

        // xi_guess = 1 > 2 xi* must fail
        assert!(test_xi(&p, 1.0, 1.1, 0.01, SeedStream::new(5)).unwrap().is_none());

        // D(1/2), xi = 0.1: margin >= 0.05 near the peak at 1.2
        let d = fixtures::d_alpha(0.5).unwrap();
        let gamma_hat = test_xi(&d, 0.1, 1.7, 0.01, SeedStream::new(6))
            .unwrap()
            .expect("definite point exists");
        assert!(lambda_min_at(&d, gamma_hat) >= 0.05 - 1e-12);
    }

    #[test]
    fn approx_xi_windows() {
        for s in 0..10u64 {
            let (xi, gamma_hat) =
                approx_xi(&fixtures::e1n(), 1.1, 0.01, SeedStream::new(10 + s)).unwrap();
            assert!(xi == 0.25 || xi == 0.125, "xi = {xi}");
            assert!(lambda_min_at(&fixtures::e1n(), gamma_hat) >= xi - 1e-12);

            let d = fixtures::d_alpha(0.5).unwrap();
            let (xi, gamma_hat) = approx_xi(&d, 1.7, 0.01, SeedStream::new(30 + s)).unwrap();
            assert!(xi == 0.125 || xi == 0.0625, "xi = {xi}");
            assert!(lambda_min_at(&d, gamma_hat) >= xi - 1e-12);
        }
    }

    #[test]
    fn approx_xi_capped_gives_up_without_definite_point() {
        // A0 = A1 = Diag(1,-1): lambda_min(A(gamma)) <= 0 for all gamma >= 0
        let a = SparseSymMatrix::diagonal(&[1.0, -1.0]).unwrap();
        let p = Pencil::new(
            crate::quad::Quadratic::new(a.clone(), vec![0.0; 2], 0.0).unwrap(),
            crate::quad::Quadratic::new(a, vec![0.0; 2], 0.0).unwrap(),
        )
        .unwrap();
        let got = approx_xi_capped(&p, 1.0, 0.01, 12, SeedStream::new(8)).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn approx_zeta_brackets() {
        // E1n: zeta* = 1
        let cert_seed = SeedStream::new(40);
        let (xi, gamma_hat) = approx_xi(&fixtures::e1n(), 1.1, 0.01, cert_seed).unwrap();
        for s in 0..10u64 {
            let z = approx_zeta(&fixtures::e1n(), xi, 1.1, gamma_hat, 0.01, SeedStream::new(s))
                .unwrap();
            assert!((1.0..=4.0).contains(&z), "zeta = {z}");
        }

        // D(1/2): zeta* = 1.5
        let d = fixtures::d_alpha(0.5).unwrap();
        let (xi, gamma_hat) = approx_xi(&d, 1.7, 0.01, cert_seed.child(1)).unwrap();
        for s in 0..10u64 {
            let z = approx_zeta(&d, xi, 1.7, gamma_hat, 0.01, SeedStream::new(100 + s)).unwrap();
            assert!((1.5..=6.0).contains(&z), "zeta = {z}");
        }
    }

    #[test]
    fn approx_zeta_exact_bound_returns_first_round() {
        // zeta_bar = zeta* = 1 exactly on E1n: the first bisection lands in
        // (zeta_bar/4, zeta_bar] and the loop returns zeta_bar itself
        let p = fixtures::e1n();
        let z = approx_zeta(&p, 1.0 / 3.0, 1.0, 2.0 / 3.0, 0.01, SeedStream::new(3)).unwrap();
        assert_eq!(z, 1.0);
    }

    #[test]
    fn diag_regularity_examples() {
        let d = fixtures::d_alpha(0.5).unwrap();
        let reg = diag_regularity(
            &d.q0.a.diagonal_vector(),
            &d.q1.a.diagonal_vector(),
        )
        .unwrap();
        assert!((reg.gamma_minus - 1.0).abs() < 1e-15);
        assert!((reg.gamma_plus - 1.5).abs() < 1e-15);
        assert!((reg.xi_star - 0.2).abs() < 1e-15, "xi* = {}", reg.xi_star);
        assert!((reg.gamma_star - 1.2).abs() < 1e-15, "gamma* = {}", reg.gamma_star);
        assert!((reg.zeta_star - 1.5).abs() < 1e-15);

        let d1 = fixtures::d_alpha(1.0).unwrap();
        let reg = diag_regularity(&d1.q0.a.diagonal_vector(), &d1.q1.a.diagonal_vector()).unwrap();
        assert!((reg.xi_star - 1.0 / 3.0).abs() < 1e-12);
        assert!((reg.zeta_star - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diag_regularity_flags() {
        assert!(matches!(
            diag_regularity(&[1.0, 1.0], &[1.0, 1.0]),
            Err(GtrsError::ConvexConstraintRegime)
        ));
        assert!(matches!(
            diag_regularity(&[1.0, -1.0], &[-1.0, -1.0]),
            Err(GtrsError::UnboundedBelow)
        ));
    }

    #[test]
    fn diag_regularity_matches_remark_formulas() {
        for alpha in [0.25, 0.5, 1.0, 2.0] {
            let d = fixtures::d_alpha(alpha).unwrap();
            let reg =
                diag_regularity(&d.q0.a.diagonal_vector(), &d.q1.a.diagonal_vector()).unwrap();
            assert!(
                (reg.xi_star - alpha / (2.0 + alpha)).abs() <= 1e-12,
                "alpha {alpha}: xi* = {}",
                reg.xi_star
            );
            assert!((reg.zeta_star - (1.0 + alpha)).abs() <= 1e-12);
        }
    }

    #[test]
    fn lambda_min_is_concave_in_gamma() {
        let p = fixtures::e1n();
        let pairs = [(0.0, 0.6), (0.4, 1.0), (0.2, 1.4), (0.5, 0.9)];
        for (g1, g2) in pairs {
            let mid = 0.5 * (g1 + g2);
            let f1 = lambda_min_at(&p, g1);
            let f2 = lambda_min_at(&p, g2);
            let fm = lambda_min_at(&p, mid);
            assert!(fm >= 0.5 * (f1 + f2) - 1e-9, "concavity violated at ({g1}, {g2})");
        }
    }

    #[test]
    fn estimated_brackets_match_diag_truth_on_d_family() {
        for alpha in [0.25, 0.5, 1.0] {
            let d = fixtures::d_alpha(alpha).unwrap();
            let xi_star = alpha / (2.0 + alpha);
            let zeta_star = 1.0 + alpha;
            let mut ok = 0;
            let trials = 10;
            for s in 0..trials {
                let cert =
                    estimate_certificate(&d, 0.01, SeedStream::new(4000 + s as u64)).unwrap();
                let xi_ok = cert.xi >= xi_star / 4.0 - 1e-12 && cert.xi <= xi_star + 1e-12;
                let zeta_ok = cert.zeta >= zeta_star - 1e-12 && cert.zeta <= 4.0 * zeta_star + 1e-12;
                if xi_ok && zeta_ok {
                    ok += 1;
                }
            }
            assert!(ok >= trials - 1, "alpha {alpha}: only {ok}/{trials} in bracket");
        }
    }
}
