//! Bisection for the endpoints of the pencil-definiteness interval.
//!
//! `lambda_min(A(gamma))` is concave in gamma and 1-Lipschitz under the
//! unit-norm bounds, with zeros exactly at the interval endpoints. Each
//! search brackets an endpoint between the certified interior point and the
//! interval boundary, testing midpoints with the randomized eigenvalue
//! estimator and stopping once the observed Rayleigh quotient lands in the
//! window [delta/4kappa, delta/kappa]. The accepted gamma then satisfies
//! gamma_tilde_plus in [gamma_plus - delta, gamma_plus] (mirrored for the
//! lower endpoint) with lambda_min(A(gamma_tilde)) in [0, delta/kappa].

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::lanczos::{self, EigOptions, PencilAt};
use crate::quad::Pencil;
use crate::regularity::RegularityCertificate;
use crate::seed::SeedStream;

/// One eigenvalue test inside a bisection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BisectionRound {
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
    pub rayleigh: f64,
}

/// Outcome of one endpoint search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaSearch {
    pub gamma: f64,
    /// Rayleigh quotient accepted at `gamma`.
    pub residual: f64,
    pub rounds: Vec<BisectionRound>,
    pub eig_calls: usize,
    pub lanczos_iterations: usize,
}

/// The bracket (gamma_tilde_minus, gamma_tilde_plus) with its accuracy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaBracket {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub delta: f64,
    pub residual_minus: f64,
    pub residual_plus: f64,
}

impl GammaBracket {
    pub fn width(&self) -> f64 {
        self.gamma_plus - self.gamma_minus
    }
}

fn clamp_delta(delta: f64, zeta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(GtrsError::invalid_param("delta", format!("must be positive, got {delta}")));
    }
    // beyond double-precision resolution; avoids unbounded round counts
    Ok(delta.max(1e-12 * zeta))
}

fn round_budget(zeta: f64, kappa: f64, delta: f64) -> usize {
    let t = (zeta * kappa / delta).log2().ceil();
    let t = if t.is_finite() && t > 0.0 { t as usize } else { 0 };
    t + 2
}

struct SearchCtx<'a> {
    pencil: &'a Pencil,
    eta: f64,
    rho: f64,
    p_each: f64,
    options: EigOptions,
    rounds: Vec<BisectionRound>,
    eig_calls: usize,
    lanczos_iterations: usize,
}

impl SearchCtx<'_> {
    fn rayleigh_at(&mut self, gamma: f64, s: f64, t: f64, seed: SeedStream) -> Result<f64> {
        let op = PencilAt { pencil: self.pencil, gamma };
        let est = lanczos::approx_min_eig_with(&op, self.rho, self.eta, self.p_each, seed, self.options)?;
        self.eig_calls += 1;
        self.lanczos_iterations += est.iterations;
        self.rounds.push(BisectionRound { s, t, gamma, rayleigh: est.rayleigh });
        Ok(est.rayleigh)
    }
}

fn run_search(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    delta: f64,
    p_fail: f64,
    seed: SeedStream,
    options: EigOptions,
    upper: bool,
) -> Result<GammaSearch> {
    let zeta = cert.zeta;
    let kappa = cert.kappa();
    let delta = clamp_delta(delta, zeta)?;
    if !(p_fail > 0.0 && p_fail < 1.0) {
        return Err(GtrsError::invalid_param("p_fail", format!("must lie in (0,1), got {p_fail}")));
    }
    let t_rounds = round_budget(zeta, kappa, delta);
    let window_lo = delta / (4.0 * kappa);
    let window_hi = delta / kappa;
    let mut ctx = SearchCtx {
        pencil,
        eta: window_lo,
        rho: 2.0 * zeta,
        p_each: p_fail / (t_rounds + 1) as f64,
        options,
        rounds: Vec::new(),
        eig_calls: 0,
        lanczos_iterations: 0,
    };

    let (mut s, mut t) = if upper { (cert.gamma_hat, zeta) } else { (0.0, cert.gamma_hat) };

    // boundary test first: the interval edge may itself satisfy the window
    // (exactly known certificates), and for the lower search a definite
    // matrix at gamma = 0 pins gamma_minus = 0 without bisection.
    let edge = if upper { t } else { s };
    let r_edge = ctx.rayleigh_at(edge, s, t, seed.child_indexed(0, 0))?;
    if r_edge >= window_lo {
        // in-window, or certified definite at the edge: the endpoint is the edge
        return Ok(GammaSearch {
            gamma: edge,
            residual: r_edge,
            rounds: ctx.rounds,
            eig_calls: ctx.eig_calls,
            lanczos_iterations: ctx.lanczos_iterations,
        });
    }

    for k in 0..t_rounds {
        let gamma = 0.5 * (s + t);
        let r = ctx.rayleigh_at(gamma, s, t, seed.child_indexed(1, k as u64))?;
        if r < window_lo {
            // too close to (or beyond) the endpoint
            if upper {
                t = gamma;
            } else {
                s = gamma;
            }
        } else if r > window_hi {
            // certified well inside the interval
            if upper {
                s = gamma;
            } else {
                t = gamma;
            }
        } else {
            return Ok(GammaSearch {
                gamma,
                residual: r,
                rounds: ctx.rounds,
                eig_calls: ctx.eig_calls,
                lanczos_iterations: ctx.lanczos_iterations,
            });
        }
    }
    Err(GtrsError::BisectionFailed { rounds: t_rounds })
}

/// Upper-endpoint search (the analyzed bisection).
pub fn approx_gamma_plus(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    delta: f64,
    p_fail: f64,
    seed: SeedStream,
) -> Result<GammaSearch> {
    run_search(pencil, cert, delta, p_fail, seed, EigOptions::default(), true)
}

/// Lower-endpoint search; the exact mirror with the interval oriented
/// [0, gamma_hat].
pub fn approx_gamma_minus(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    delta: f64,
    p_fail: f64,
    seed: SeedStream,
) -> Result<GammaSearch> {
    run_search(pencil, cert, delta, p_fail, seed, EigOptions::default(), false)
}

pub(crate) fn approx_gamma_plus_with(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    delta: f64,
    p_fail: f64,
    seed: SeedStream,
    options: EigOptions,
) -> Result<GammaSearch> {
    run_search(pencil, cert, delta, p_fail, seed, options, true)
}

/// Both endpoint searches with the failure budget split evenly.
pub fn bracket(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    delta: f64,
    p_fail: f64,
    seed: SeedStream,
) -> Result<(GammaBracket, GammaSearch, GammaSearch)> {
    bracket_with(pencil, cert, delta, p_fail, seed, EigOptions::default())
}

pub(crate) fn bracket_with(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    delta: f64,
    p_fail: f64,
    seed: SeedStream,
    options: EigOptions,
) -> Result<(GammaBracket, GammaSearch, GammaSearch)> {
    let minus = run_search(pencil, cert, delta, p_fail / 2.0, seed.child(101), options, false)?;
    let plus = run_search(pencil, cert, delta, p_fail / 2.0, seed.child(102), options, true)?;
    let delta_used = clamp_delta(delta, cert.zeta)?;
    if !(minus.gamma <= cert.gamma_hat && cert.gamma_hat <= plus.gamma) {
        return Err(GtrsError::BisectionFailed { rounds: minus.rounds.len() + plus.rounds.len() });
    }
    Ok((
        GammaBracket {
            gamma_minus: minus.gamma,
            gamma_plus: plus.gamma,
            delta: delta_used,
            residual_minus: minus.residual,
            residual_plus: plus.residual,
        },
        minus,
        plus,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;
    use crate::regularity::RegularityCertificate;

    fn e1n_cert() -> RegularityCertificate {
        RegularityCertificate::user_supplied(1.0 / 3.0, 1.0, 2.0 / 3.0).unwrap()
    }

    fn d_half_cert() -> RegularityCertificate {
        RegularityCertificate::user_supplied(0.2, 1.5, 1.2).unwrap()
    }

    #[test]
    fn e1n_brackets_at_1e3() {
        let p = fixtures::e1n();
        let cert = e1n_cert();
        for s in 0..20u64 {
            let seed = SeedStream::new(s);
            let plus = approx_gamma_plus(&p, &cert, 1e-3, 0.01, seed).unwrap();
            assert!(plus.gamma >= 1.0 - 1e-3 && plus.gamma <= 1.0 + 1e-9, "plus {}", plus.gamma);
            let minus = approx_gamma_minus(&p, &cert, 1e-3, 0.01, seed.child(1)).unwrap();
            assert!(
                minus.gamma >= 1.0 / 3.0 - 1e-9 && minus.gamma <= 1.0 / 3.0 + 1e-3,
                "minus {}",
                minus.gamma
            );
        }
    }

    #[test]
    fn d_half_brackets() {
        let p = fixtures::d_alpha(0.5).unwrap();
        let cert = d_half_cert();
        let seed = SeedStream::new(7);
        let plus = approx_gamma_plus(&p, &cert, 1e-3, 0.01, seed).unwrap();
        assert!(plus.gamma >= 1.5 - 1e-3 && plus.gamma <= 1.5 + 1e-9, "plus {}", plus.gamma);
        let minus = approx_gamma_minus(&p, &cert, 1e-3, 0.01, seed.child(5)).unwrap();
        assert!(minus.gamma >= 1.0 - 1e-9 && minus.gamma <= 1.0 + 1e-3, "minus {}", minus.gamma);
    }

    #[test]
    fn degenerately_loose_delta_stops_fast() {
        let p = fixtures::e1n();
        let cert = e1n_cert();
        let delta = cert.zeta * cert.kappa(); // delta = zeta kappa
        let search = approx_gamma_plus(&p, &cert, delta, 0.01, SeedStream::new(3)).unwrap();
        assert!(search.rounds.len() <= 3, "rounds = {}", search.rounds.len());
        assert!(search.gamma <= 1.0 + 1e-9);
    }

    #[test]
    fn definite_origin_returns_zero_without_bisection() {
        // A0 positive definite: gamma_minus = 0 by convention
        let a0 = crate::quad::SparseSymMatrix::diagonal(&[1.0, 0.5]).unwrap();
        let a1 = crate::quad::SparseSymMatrix::diagonal(&[0.5, -1.0]).unwrap();
        let p = Pencil::new(
            crate::quad::Quadratic::new(a0, vec![0.0; 2], 0.0).unwrap(),
            crate::quad::Quadratic::new(a1, vec![0.0; 2], 0.0).unwrap(),
        )
        .unwrap();
        // gamma_plus = 1 (line 1 - gamma), xi* = 0.5 at gamma ~ 1/3
        let cert = RegularityCertificate::user_supplied(0.5, 1.0, 1.0 / 3.0).unwrap();
        let minus = approx_gamma_minus(&p, &cert, 1e-4, 0.01, SeedStream::new(11)).unwrap();
        assert_eq!(minus.gamma, 0.0);
        assert_eq!(minus.rounds.len(), 1);
    }

    #[test]
    fn nested_halving_intervals() {
        let p = fixtures::d_alpha(0.5).unwrap();
        let cert = d_half_cert();
        let search = approx_gamma_plus(&p, &cert, 1e-5, 0.01, SeedStream::new(19)).unwrap();
        // skip the initial edge test; the remaining rounds bisect
        let rounds = &search.rounds[1..];
        let len0 = rounds[0].t - rounds[0].s;
        for (k, w) in rounds.windows(2).enumerate() {
            let (prev, next) = (w[0], w[1]);
            assert!(next.s >= prev.s - 1e-15 && next.t <= prev.t + 1e-15, "not nested");
            let expected = len0 / 2f64.powi(k as i32 + 1);
            assert!(
                ((next.t - next.s) - expected).abs() <= 1e-12 * (1.0 + expected),
                "round {k}: width {} vs expected {}",
                next.t - next.s,
                expected
            );
        }
    }

    #[test]
    fn lipschitz_localization_and_no_overshoot_vs_oracle() {
        for (p, cert, gm, gp) in [
            (fixtures::e1n(), e1n_cert(), 1.0 / 3.0, 1.0),
            (fixtures::d_alpha(0.5).unwrap(), d_half_cert(), 1.0, 1.5),
        ] {
            for s in 0..10u64 {
                let seed = SeedStream::new(900 + s);
                let kappa = cert.kappa();
                let plus = approx_gamma_plus(&p, &cert, 1e-4, 0.01, seed).unwrap();
                let lam = oracle::dense_eig_min(&oracle::dense_pencil(&p, plus.gamma))
                    .unwrap()
                    .0;
                assert!(plus.gamma <= gp + 1e-9, "overshoot: {} > {gp}", plus.gamma);
                assert!((plus.gamma - gp).abs() <= kappa * lam.abs() + 1e-9);
                assert!(lam >= -1e-9 && lam <= 1e-4 / kappa + 1e-12);

                let minus = approx_gamma_minus(&p, &cert, 1e-4, 0.01, seed.child(2)).unwrap();
                let lam = oracle::dense_eig_min(&oracle::dense_pencil(&p, minus.gamma))
                    .unwrap()
                    .0;
                assert!(minus.gamma >= gm - 1e-9, "undershoot: {} < {gm}", minus.gamma);
                assert!((minus.gamma - gm).abs() <= kappa * lam.abs() + 1e-9);
                assert!(lam >= -1e-9 && lam <= 1e-4 / kappa + 1e-12);
            }
        }
    }

    #[test]
    fn bracket_keeps_gamma_hat_interior() {
        let p = fixtures::e1n();
        let cert = e1n_cert();
        let (bracket, _, _) = bracket(&p, &cert, 1e-3, 0.01, SeedStream::new(2)).unwrap();
        assert!(bracket.gamma_minus <= cert.gamma_hat);
        assert!(cert.gamma_hat <= bracket.gamma_plus);
        assert!(bracket.width() > 0.0);
    }
}
