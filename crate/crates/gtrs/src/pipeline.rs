//! End-to-end solve pipeline: value estimation via the bracketed convex
//! reformulation, boundary rounding to recover a feasible solution, and the
//! driver composing normalize -> classify -> certificate -> solve with
//! un-mapping back to original units.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::gamma::{self, GammaBracket};
use crate::hull::{self, RegimeKind};
use crate::lanczos::{self, EigOptions, PencilAt};
use crate::minimax::{self, MinimaxOptions, MinimaxProblem};
use crate::quad::{self, NormalizationScales, Pencil};
use crate::regularity::{self, RegularityCertificate};
use crate::seed::SeedStream;
use crate::vecops::{dot, norm2};

/// Problem variant being solved. All variants run the same pipeline; they
/// differ in whether rounding happens and which feasibility check applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Value estimate only, no solution recovery.
    Value,
    /// Feasible solution on the constraint boundary (q1 = 0).
    Boundary,
    /// Inequality-constrained solution (q1 <= 0); rounding is skipped when
    /// the reformulation solution is already feasible.
    Inequality,
    /// Equality-constrained variant; same boundary contract.
    Equality,
    /// Interval variant (-1 <= q1 <= 0); boundary contract plus the lower check.
    Interval,
    /// Hollow variant; boundary contract.
    Hollow,
}

impl SolveMode {
    pub fn wants_solution(self) -> bool {
        !matches!(self, SolveMode::Value)
    }
}

/// Iteration counters per pipeline stage.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct IterationCounts {
    pub gamma_minus_rounds: usize,
    pub gamma_plus_rounds: usize,
    pub gamma_lanczos_iterations: usize,
    pub minimax_iterations: usize,
    pub rounding_lanczos_iterations: usize,
}

/// Wall-clock seconds per stage. Excluded from reproducibility comparisons.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub normalize_s: f64,
    pub classify_s: f64,
    pub certificate_s: f64,
    pub bracket_s: f64,
    pub minimax_s: f64,
    pub rounding_s: f64,
    pub total_s: f64,
}

/// Output of the convex stage.
#[derive(Debug, Clone)]
pub struct ConvexOutcome {
    pub bracket: GammaBracket,
    pub x_tilde: Vec<f64>,
    /// max { q(gamma_tilde_minus, x_tilde), q(gamma_tilde_plus, x_tilde) },
    /// the certified value estimate (normalized units).
    pub value: f64,
    pub eps_requested: f64,
    pub eps_effective: f64,
    pub delta: f64,
    pub counts: IterationCounts,
    pub bracket_seconds: f64,
    pub minimax_seconds: f64,
}

/// Approximate the optimal value: bracket the endpoints to accuracy
/// delta = eps/(72 kappa^2), then solve the two-quadratic reformulation to
/// eps/2. With probability >= 1 - p_fail the returned value lies in
/// [Opt, Opt + eps].
pub fn approx_convex(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    eps: f64,
    p_fail: f64,
    seed: SeedStream,
) -> Result<ConvexOutcome> {
    approx_convex_with(pencil, cert, eps, p_fail, seed, PipelineTuning::default())
}

/// Internal tuning shared by the drivers.
#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineTuning {
    pub eig: EigOptions,
    pub minimax_early_exit: bool,
    pub record_minimax_iterates: bool,
}

pub fn approx_convex_with(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    eps: f64,
    p_fail: f64,
    seed: SeedStream,
    tuning: PipelineTuning,
) -> Result<ConvexOutcome> {
    if !(eps > 0.0) {
        return Err(GtrsError::invalid_param("eps", format!("must be positive, got {eps}")));
    }
    if !(p_fail > 0.0 && p_fail < 1.0) {
        return Err(GtrsError::invalid_param("p_fail", format!("must lie in (0,1), got {p_fail}")));
    }
    let kappa = cert.kappa();
    // inputs above the cap are clamped; the solution then carries a better
    // guarantee than requested
    let eps_effective = eps.min(kappa * kappa * cert.xi);
    let delta = eps_effective / (72.0 * kappa * kappa);

    let t0 = Instant::now();
    let bracket_result = gamma::bracket_with(pencil, cert, delta, p_fail, seed.child(1), tuning.eig);
    let (bracket, minus, plus) = match bracket_result {
        Ok(ok) => ok,
        Err(GtrsError::BisectionFailed { rounds }) => {
            // distinguish a refuted certificate from an eigensolver failure:
            // a Rayleigh quotient below xi/2 at gamma_hat disproves the
            // certificate deterministically
            let op = PencilAt { pencil, gamma: cert.gamma_hat };
            let probe = lanczos::approx_min_eig_with(
                &op,
                2.0 * cert.zeta,
                cert.xi / 4.0,
                0.01,
                seed.child(2),
                tuning.eig,
            )?;
            if probe.rayleigh < cert.xi / 2.0 {
                return Err(GtrsError::CertificateInvalid {
                    rayleigh: probe.rayleigh,
                    threshold: cert.xi / 2.0,
                });
            }
            return Err(GtrsError::BisectionFailed { rounds });
        }
        Err(e) => return Err(e),
    };
    let bracket_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mp = MinimaxProblem::new(pencil, bracket.gamma_minus, bracket.gamma_plus, cert);
    let (x_tilde, value, trace) = minimax::solve_minimax(
        &mp,
        eps_effective,
        MinimaxOptions {
            record_iterates: tuning.record_minimax_iterates,
            early_exit: tuning.minimax_early_exit,
        },
    )?;
    let minimax_seconds = t1.elapsed().as_secs_f64();

    Ok(ConvexOutcome {
        bracket,
        x_tilde,
        value,
        eps_requested: eps,
        eps_effective,
        delta,
        counts: IterationCounts {
            gamma_minus_rounds: minus.rounds.len(),
            gamma_plus_rounds: plus.rounds.len(),
            gamma_lanczos_iterations: minus.lanczos_iterations + plus.lanczos_iterations,
            minimax_iterations: trace.objective_values.len().saturating_sub(1),
            rounding_lanczos_iterations: 0,
        },
        bracket_seconds,
        minimax_seconds,
    })
}

/// Boundary rounding data.
#[derive(Debug, Clone)]
pub struct RoundingOutcome {
    pub x_bar: Vec<f64>,
    pub alpha: f64,
    pub slope: f64,
    /// q1(x_bar) in the solver's (normalized) units.
    pub residual: f64,
    pub moved: bool,
}

/// Move x_tilde along direction d (an approximate null vector of
/// A(gamma_pivot)) to the constraint boundary: solve q1(x + alpha d) = 0 as
/// a quadratic in alpha via the stable formula, take the nonnegative root
/// after orienting (d, e) so the epigraph height does not increase, and
/// polish with Newton steps.
pub fn round_to_boundary(
    pencil: &Pencil,
    gamma_pivot: f64,
    x_tilde: &[f64],
    d_in: &[f64],
) -> Result<RoundingOutcome> {
    let n = pencil.dim();
    if d_in.len() != n || x_tilde.len() != n {
        return Err(GtrsError::DimensionMismatch { expected: n, got: d_in.len() });
    }
    let mut d = d_in.to_vec();
    let ad = pencil.matvec(gamma_pivot, &d)?;
    let mut e = 2.0 * (dot(x_tilde, &ad) + dot(&pencil.b_at(gamma_pivot), &d));
    if e > 0.0 {
        for di in d.iter_mut() {
            *di = -*di;
        }
        e = -e;
    }

    // q1(x_tilde + alpha d) = c_hat + 2 b_hat alpha + a_hat alpha^2
    let a1d = pencil.q1.a.matvec(&d)?;
    let a_hat = dot(&d, &a1d);
    let mut a1x = pencil.q1.a.matvec(x_tilde)?;
    for (v, b1) in a1x.iter_mut().zip(&pencil.q1.b) {
        *v += b1;
    }
    let b_hat = dot(&d, &a1x);
    let c_hat = pencil.q1.eval(x_tilde)?;

    let scale = a_hat.abs().max(b_hat.abs()).max(c_hat.abs()).max(1e-300);
    let (r_lo, r_hi) = crate::vecops::stable_quadratic_roots(a_hat, b_hat, c_hat)
        .ok_or_else(|| {
            GtrsError::RoundingFailed(format!(
                "no real root along the rounding direction \
                 (a = {a_hat:.3e}, b = {b_hat:.3e}, c = {c_hat:.3e})"
            ))
        })?;
    let tol = 1e-12 * scale;
    let mut alpha = if r_lo >= -tol {
        r_lo.max(0.0)
    } else if r_hi >= -tol {
        r_hi.max(0.0)
    } else {
        return Err(GtrsError::RoundingFailed(format!(
            "no nonnegative root (roots {r_lo:.6e}, {r_hi:.6e})"
        )));
    };

    // Newton polish against the exact 1-D restriction
    for _ in 0..3 {
        let g = c_hat + 2.0 * b_hat * alpha + a_hat * alpha * alpha;
        let dg = 2.0 * (b_hat + a_hat * alpha);
        if dg.abs() <= 1e-300 {
            break;
        }
        let step = g / dg;
        alpha -= step;
        if step.abs() <= 1e-16 * (1.0 + alpha.abs()) {
            break;
        }
    }
    if alpha < 0.0 {
        alpha = 0.0;
    }

    let mut x_bar = x_tilde.to_vec();
    for (xi, di) in x_bar.iter_mut().zip(&d) {
        *xi += alpha * di;
    }
    let residual = pencil.q1.eval(&x_bar)?;
    if residual.abs() > 1e-8 {
        return Err(GtrsError::RoundingFailed(format!(
            "boundary residual {residual:.3e} exceeds 1e-8 after polish"
        )));
    }
    Ok(RoundingOutcome { x_bar, alpha, slope: e, residual, moved: true })
}

/// Output of the solution stage.
#[derive(Debug, Clone)]
pub struct GtrsOutcome {
    pub convex: ConvexOutcome,
    pub x_bar: Vec<f64>,
    /// q0(x_bar) in normalized units.
    pub objective: f64,
    /// q1(x_bar) in normalized units.
    pub residual: f64,
    pub eps_convex: f64,
    pub rounding_seconds: f64,
}

/// Approximate solution: run the convex stage at eps_c = eps_r/(28 kappa),
/// then move the solution to the constraint boundary along an approximate
/// null direction of the pencil at the endpoint matching the violation sign.
pub fn approx_gtrs(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    eps_r: f64,
    p_fail: f64,
    seed: SeedStream,
) -> Result<GtrsOutcome> {
    approx_gtrs_with(pencil, cert, eps_r, p_fail, seed, PipelineTuning::default(), false)
}

pub fn approx_gtrs_with(
    pencil: &Pencil,
    cert: &RegularityCertificate,
    eps_r: f64,
    p_fail: f64,
    seed: SeedStream,
    tuning: PipelineTuning,
    skip_round_if_feasible: bool,
) -> Result<GtrsOutcome> {
    if !(eps_r > 0.0) {
        return Err(GtrsError::invalid_param("eps_r", format!("must be positive, got {eps_r}")));
    }
    let kappa = cert.kappa();
    let eps_effective = eps_r.min(kappa.powi(3) * cert.xi);
    let eps_c = eps_effective / (28.0 * kappa);
    let mut convex = approx_convex_with(pencil, cert, eps_c, p_fail / 2.0, seed.child(1), tuning)?;
    convex.eps_requested = eps_r;

    let t0 = Instant::now();
    let x_tilde = convex.x_tilde.clone();
    let q1x = pencil.q1.eval(&x_tilde)?;
    let tau = 1e-12 * (1.0 + norm2(&x_tilde)).powi(2);

    let already_boundary = q1x.abs() <= tau;
    let feasible_enough = skip_round_if_feasible && q1x <= 0.0;
    let (x_bar, rounding_iters) = if already_boundary || feasible_enough {
        (x_tilde.clone(), 0)
    } else {
        let gamma_pivot = if q1x > 0.0 { convex.bracket.gamma_plus } else { convex.bracket.gamma_minus };
        let op = PencilAt { pencil, gamma: gamma_pivot };
        let eta = convex.delta / kappa;
        let est = lanczos::approx_min_eig_with(
            &op,
            2.0 * cert.zeta,
            eta,
            p_fail / 2.0,
            seed.child(2),
            tuning.eig,
        )?;
        let rounded = round_to_boundary(pencil, gamma_pivot, &x_tilde, &est.vector)?;
        (rounded.x_bar, est.iterations)
    };
    let rounding_seconds = t0.elapsed().as_secs_f64();

    let objective = pencil.q0.eval(&x_bar)?;
    let residual = pencil.q1.eval(&x_bar)?;
    convex.counts.rounding_lanczos_iterations = rounding_iters;
    Ok(GtrsOutcome {
        convex,
        x_bar,
        objective,
        residual,
        eps_convex: eps_c,
        rounding_seconds,
    })
}

/// One solved instance, reported in the problem's original units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub regime: RegimeKind,
    /// Certified value estimate max{q(gt-, xt), q(gt+, xt)}, original units.
    pub value: f64,
    /// q0 at the returned solution (solution modes only), original units.
    pub objective_at_solution: Option<f64>,
    /// q1 at the returned solution, original units.
    pub constraint_residual: Option<f64>,
    pub solution: Option<Vec<f64>>,
    /// Solution of the convex reformulation (the pre-rounding point).
    pub convex_solution: Vec<f64>,
    /// Endpoint bracket mapped to original units.
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    /// Bracket accuracy actually used (normalized units).
    pub delta: f64,
    pub eps_requested: f64,
    /// Effective accuracy after cap clamping, original units.
    pub eps_effective: f64,
    /// Convex-stage accuracy for solution modes (normalized units).
    pub eps_convex: Option<f64>,
    pub certificate: RegularityCertificate,
    pub scales: NormalizationScales,
    pub iterations: IterationCounts,
    pub timings: StageTimings,
}

/// Driver options.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub eps: f64,
    pub p_fail: f64,
    pub seed: u64,
    /// Opportunistic early exit in the minimax stage (off by default).
    pub minimax_early_exit: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Value,
            eps: 1e-2,
            p_fail: 0.01,
            seed: 0,
            minimax_early_exit: false,
        }
    }
}

/// Dimension above which the eigensolver's certified early stop is enabled
/// (full-budget Lanczos with complete reorthogonalization is quadratic in
/// the budget and only pays off at desk scale).
const LARGE_N_THRESHOLD: usize = 4096;

/// End-to-end driver: normalize, classify, certify, solve, un-map.
pub fn solve(p_raw: &Pencil, opts: &SolveOptions) -> Result<SolveReport> {
    let total_start = Instant::now();
    let seed = SeedStream::new(opts.seed);
    if !(opts.eps > 0.0) {
        return Err(GtrsError::invalid_param("eps", format!("must be positive, got {}", opts.eps)));
    }
    if !(opts.p_fail > 0.0 && opts.p_fail < 1.0) {
        return Err(GtrsError::invalid_param(
            "prob",
            format!("must lie in (0,1), got {}", opts.p_fail),
        ));
    }

    let mut timings = StageTimings::default();
    let tuning = PipelineTuning {
        eig: EigOptions { early_stop: p_raw.dim() > LARGE_N_THRESHOLD },
        minimax_early_exit: opts.minimax_early_exit,
        record_minimax_iterates: false,
    };

    let t = Instant::now();
    let (pencil, scales) = quad::normalize(p_raw)?;
    timings.normalize_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let regime = hull::classify_pencil_with(&pencil, opts.p_fail / 4.0, seed.child(10), tuning.eig)?;
    timings.classify_s = t.elapsed().as_secs_f64();
    match regime.kind {
        RegimeKind::GammaEmpty => return Err(GtrsError::UnboundedBelow),
        RegimeKind::ConvexConstraintUnboundedGamma => {
            return Err(GtrsError::ConvexConstraintRegime)
        }
        RegimeKind::BothNonconvexPsdOnly => {
            return Err(GtrsError::NotCertifiablyDefinite { floor: 0.0 })
        }
        RegimeKind::BothNonconvexDefinitePoint | RegimeKind::ConvexObjectiveGammaMinusZero => {}
    }

    let t = Instant::now();
    let cert = if pencil.both_diagonal() {
        regularity::diagonal_certificate(&pencil)?
    } else {
        let (xi, gamma_hat, zeta_bar) = regime
            .definite_point
            .ok_or(GtrsError::NotCertifiablyDefinite { floor: 0.0 })?;
        let zeta = regularity::approx_zeta_with(
            &pencil,
            xi,
            zeta_bar,
            gamma_hat,
            opts.p_fail / 4.0,
            seed.child(11),
            tuning.eig,
        )?;
        RegularityCertificate::new(
            xi,
            zeta,
            gamma_hat,
            regularity::CertificateProvenance::Estimated,
        )?
    };
    timings.certificate_s = t.elapsed().as_secs_f64();

    // accuracies live in normalized units inside the pipeline
    let eps_norm = opts.eps * scales.s0;
    let solve_budget = opts.p_fail / 2.0;

    let report = if opts.mode.wants_solution() {
        let outcome = approx_gtrs_with(
            &pencil,
            &cert,
            eps_norm,
            solve_budget,
            seed.child(12),
            tuning,
            matches!(opts.mode, SolveMode::Inequality),
        )?;
        timings.bracket_s = outcome.convex.bracket_seconds;
        timings.minimax_s = outcome.convex.minimax_seconds;
        timings.rounding_s = outcome.rounding_seconds;

        // report feasibility in the user's units: polish the boundary
        // residual against the original constraint along no particular
        // direction is unnecessary -- evaluate directly
        let objective_orig = p_raw.q0.eval(&outcome.x_bar)?;
        let residual_orig = p_raw.q1.eval(&outcome.x_bar)?;
        check_variant_feasibility(opts.mode, residual_orig, outcome.residual)?;
        SolveReport {
            mode: opts.mode,
            regime: regime.kind,
            value: scales.value_to_original(outcome.convex.value),
            objective_at_solution: Some(objective_orig),
            constraint_residual: Some(residual_orig),
            solution: Some(outcome.x_bar.clone()),
            convex_solution: outcome.convex.x_tilde.clone(),
            gamma_minus: scales.gamma_to_original(outcome.convex.bracket.gamma_minus),
            gamma_plus: scales.gamma_to_original(outcome.convex.bracket.gamma_plus),
            delta: outcome.convex.delta,
            eps_requested: opts.eps,
            eps_effective: outcome.convex.eps_requested / scales.s0,
            eps_convex: Some(outcome.eps_convex),
            certificate: cert,
            scales,
            iterations: outcome.convex.counts,
            timings,
        }
    } else {
        let outcome = approx_convex_with(
            &pencil,
            &cert,
            eps_norm,
            solve_budget,
            seed.child(12),
            tuning,
        )?;
        timings.bracket_s = outcome.bracket_seconds;
        timings.minimax_s = outcome.minimax_seconds;
        SolveReport {
            mode: opts.mode,
            regime: regime.kind,
            value: scales.value_to_original(outcome.value),
            objective_at_solution: None,
            constraint_residual: None,
            solution: None,
            convex_solution: outcome.x_tilde.clone(),
            gamma_minus: scales.gamma_to_original(outcome.bracket.gamma_minus),
            gamma_plus: scales.gamma_to_original(outcome.bracket.gamma_plus),
            delta: outcome.delta,
            eps_requested: opts.eps,
            eps_effective: outcome.eps_effective / scales.s0,
            eps_convex: None,
            certificate: cert,
            scales,
            iterations: outcome.counts,
            timings,
        }
    };

    let mut report = report;
    report.timings.total_s = total_start.elapsed().as_secs_f64();
    Ok(report)
}

fn check_variant_feasibility(mode: SolveMode, residual_orig: f64, residual_norm: f64) -> Result<()> {
    match mode {
        SolveMode::Boundary | SolveMode::Equality | SolveMode::Hollow => {
            if residual_norm.abs() > 1e-8 {
                return Err(GtrsError::RoundingFailed(format!(
                    "boundary residual {residual_norm:.3e} exceeds 1e-8"
                )));
            }
        }
        SolveMode::Interval => {
            if residual_norm.abs() > 1e-8 || residual_orig < -1.0 - 1e-8 {
                return Err(GtrsError::RoundingFailed(format!(
                    "interval feasibility violated (q1 = {residual_orig:.3e})"
                )));
            }
        }
        SolveMode::Inequality | SolveMode::Value => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;

    fn e1n_cert() -> RegularityCertificate {
        RegularityCertificate::user_supplied(1.0 / 3.0, 1.0, 2.0 / 3.0).unwrap()
    }

    #[test]
    fn approx_convex_e1n() {
        let p = fixtures::e1n();
        let out = approx_convex(&p, &e1n_cert(), 1e-3, 0.01, SeedStream::new(1)).unwrap();
        assert!(out.value >= -1e-12 && out.value <= 1e-3, "value = {}", out.value);
    }

    #[test]
    fn approx_convex_e2_sandwich() {
        let p = fixtures::e2();
        for s in 0..10u64 {
            let out = approx_convex(&p, &e1n_cert(), 1e-3, 0.01, SeedStream::new(s)).unwrap();
            assert!(
                out.value >= fixtures::E2_OPT - 1e-9 && out.value <= fixtures::E2_OPT + 1e-3,
                "seed {s}: value = {}",
                out.value
            );
        }
    }

    #[test]
    fn approx_convex_constant_shift_equivariance() {
        let p = fixtures::d_alpha(0.5).unwrap();
        let cert = RegularityCertificate::user_supplied(0.2, 1.5, 1.2).unwrap();
        let shift = 5.0;
        let mut shifted = p.clone();
        shifted.q0.c += shift;
        let seed = SeedStream::new(33);
        let base = approx_convex(&p, &cert, 1e-3, 0.01, seed).unwrap();
        let moved = approx_convex(&shifted, &cert, 1e-3, 0.01, seed).unwrap();
        assert!(
            ((moved.value - base.value) - shift).abs() <= 1e-9,
            "shift came out as {}",
            moved.value - base.value
        );
        for (a, b) in base.x_tilde.iter().zip(&moved.x_tilde) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn approx_convex_eps_clamped_to_cap() {
        let p = fixtures::e1n();
        let cert = e1n_cert();
        let cap = cert.kappa() * cert.kappa() * cert.xi; // = 3
        let out = approx_convex(&p, &cert, 10.0, 0.01, SeedStream::new(4)).unwrap();
        assert_eq!(out.eps_effective, cap);
        assert_eq!(out.eps_requested, 10.0);
    }

    #[test]
    fn rounding_hand_fixture_on_e1() {
        // exact bracket (1, 3) on raw E1 with exact null direction (1,1)/sqrt(2)
        let p = fixtures::e1();
        let s = 1.0 / 2f64.sqrt();
        let x_tilde = vec![1.0, -1.0];
        let out = round_to_boundary(&p, 3.0, &x_tilde, &[s, s]).unwrap();
        assert!((out.slope - 0.0).abs() < 1e-12, "e = {}", out.slope);
        assert!((out.alpha - 2f64.sqrt()).abs() < 1e-9, "alpha = {}", out.alpha);
        assert!((out.x_bar[0] - 2.0).abs() < 1e-9 && out.x_bar[1].abs() < 1e-9);
        assert!(out.residual.abs() <= 1e-10);
        assert!((p.q0.eval(&out.x_bar).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn approx_gtrs_e1n() {
        let p = fixtures::e1n();
        for s in 0..10u64 {
            let out = approx_gtrs(&p, &e1n_cert(), 1e-2, 0.01, SeedStream::new(s)).unwrap();
            assert!(out.residual.abs() <= 1e-8, "residual = {}", out.residual);
            assert!(out.objective <= 1e-2 + 1e-9, "q0(x_bar) = {}", out.objective);
        }
    }

    #[test]
    fn approx_gtrs_boundary_skip_when_already_tight() {
        // x_tilde lands numerically on the boundary for the homogeneous
        // instance; the report must return it unchanged
        let p = fixtures::e1n();
        let out = approx_gtrs(&p, &e1n_cert(), 1e-2, 0.01, SeedStream::new(3)).unwrap();
        let q1 = p.q1.eval(&out.convex.x_tilde).unwrap();
        let tau = 1e-12 * (1.0 + norm2(&out.convex.x_tilde)).powi(2);
        if q1.abs() <= tau {
            assert_eq!(out.x_bar, out.convex.x_tilde);
        }
    }

    #[test]
    fn approx_gtrs_never_exceeds_rounding_bound() {
        let p = fixtures::e2();
        let cert = e1n_cert();
        for s in 0..10u64 {
            let out = approx_gtrs(&p, &cert, 1e-2, 0.01, SeedStream::new(40 + s)).unwrap();
            let kappa = cert.kappa();
            let bound = out.convex.value + 27.0 * kappa * out.eps_convex + 1e-9;
            assert!(out.objective <= bound, "q0(x_bar) = {} > {}", out.objective, bound);
        }
    }

    #[test]
    fn solve_e1_value_mode_original_units() {
        let report = solve(
            &fixtures::e1(),
            &SolveOptions { mode: SolveMode::Value, eps: 1e-3, p_fail: 0.01, seed: 7, ..Default::default() },
        )
        .unwrap();
        assert!(report.value >= -1e-9 && report.value <= 1e-3, "value = {}", report.value);
        // endpoints mapped back to original units straddle (1, 3)
        assert!(report.gamma_minus >= 1.0 - 1e-2 && report.gamma_minus <= 1.0 + 1e-2);
        assert!(report.gamma_plus >= 3.0 - 1e-2 && report.gamma_plus <= 3.0 + 1e-9);
        assert!(report.solution.is_none());
    }

    #[test]
    fn solve_gamma_empty_classifies_unbounded() {
        let err = solve(&fixtures::gamma_empty(), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, GtrsError::UnboundedBelow));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn solve_convex_constraint_reported_not_solved() {
        let err = solve(&fixtures::convex_constraint(), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, GtrsError::ConvexConstraintRegime));
        assert_eq!(err.exit_code(), 5);
    }

    #[test]
    fn solve_equality_matches_boundary() {
        let opts = |mode| SolveOptions { mode, eps: 1e-2, p_fail: 0.01, seed: 11, ..Default::default() };
        let a = solve(&fixtures::e2(), &opts(SolveMode::Boundary)).unwrap();
        let b = solve(&fixtures::e2(), &opts(SolveMode::Equality)).unwrap();
        assert_eq!(a.solution.unwrap(), b.solution.unwrap());
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn solve_sandwich_against_oracle_multi_seed() {
        let p = fixtures::e2();
        let truth = oracle::brute_opt(&p).unwrap();
        let mut hits = 0;
        let trials = 20;
        for s in 0..trials {
            let report = solve(
                &p,
                &SolveOptions { mode: SolveMode::Value, eps: 1e-3, p_fail: 0.01, seed: s, ..Default::default() },
            )
            .unwrap();
            if report.value >= truth.value - 1e-9 && report.value <= truth.value + 1e-3 {
                hits += 1;
            }
        }
        assert!(hits >= trials - 1, "sandwich hit only {hits}/{trials}");
    }

    #[test]
    fn solve_scale_equivariance_power_of_two() {
        // raw units so the norm bounds (3 for A0, 1 for A1) scale exactly;
        // this is the linear-term variant of the 2x2 fixture pre-normalization
        let mut p = fixtures::e1();
        p.q0.b = vec![0.0, -0.5];
        let scaled = Pencil::new(p.q0.scaled(2.0), p.q1.scaled(4.0)).unwrap();
        let opts = SolveOptions { mode: SolveMode::Boundary, eps: 1e-2, p_fail: 0.01, seed: 21, ..Default::default() };
        let base = solve(&p, &opts).unwrap();
        // the accuracy target lives in value units, so it scales with q0
        let scaled_opts = SolveOptions { eps: 2.0 * opts.eps, ..opts };
        let scaled_report = solve(&scaled, &scaled_opts).unwrap();
        // value scales exactly by the q0 factor; the solution is unchanged
        assert_eq!(scaled_report.value, 2.0 * base.value);
        let xa = base.solution.unwrap();
        let xb = scaled_report.solution.unwrap();
        for (a, b) in xa.iter().zip(&xb) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn report_value_recomputes_from_own_fields() {
        let p = fixtures::e2();
        let report = solve(
            &p,
            &SolveOptions { mode: SolveMode::Boundary, eps: 1e-2, p_fail: 0.01, seed: 5, ..Default::default() },
        )
        .unwrap();
        // value = max over the reported bracket of q(gamma, x_tilde), in
        // original units, recomputed from the report's own fields
        let xt = &report.convex_solution;
        let recomputed = p
            .eval(report.gamma_minus, xt)
            .unwrap()
            .max(p.eval(report.gamma_plus, xt).unwrap());
        assert!(
            (recomputed - report.value).abs() <= 1e-10 * (1.0 + report.value.abs()),
            "recomputed {recomputed} vs reported {}",
            report.value
        );
    }
}
