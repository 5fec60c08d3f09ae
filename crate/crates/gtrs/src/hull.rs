//! Executable form of the structural results: regime classification of a
//! pencil, membership in the two-quadratic description of the epigraph's
//! convex hull, and the constructive two-point decomposition that expresses
//! a hull member as a combination of boundary points (q1 = 0).

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::quad::Pencil;
use crate::regularity;
use crate::seed::SeedStream;
use crate::vecops::{dot, norm2};

/// Which structural regime a (normalized) pencil falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    /// Both matrices nonconvex and a positive definite pencil value exists.
    BothNonconvexDefinitePoint,
    /// Both nonconvex, only a PSD (singular) pencil value exists
    /// (detectable exactly only on the diagonal fast path).
    BothNonconvexPsdOnly,
    /// The constraint matrix has no certifiable negative eigenvalue: the
    /// pencil interval is unbounded above and q1 is (possibly) convex.
    ConvexConstraintUnboundedGamma,
    /// No PSD pencil value at all: the problem value is -infinity.
    GammaEmpty,
    /// The objective matrix has no certifiable negative eigenvalue: the
    /// interval starts at gamma_minus = 0.
    ConvexObjectiveGammaMinusZero,
}

/// Classification outcome together with whatever side information the
/// probes produced (reused by the solve driver).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilRegime {
    pub kind: RegimeKind,
    /// Exact endpoints when the diagonal fast path ran.
    pub gamma_minus: Option<f64>,
    pub gamma_plus: Option<f64>,
    /// Rayleigh margins observed for (A0, A1) by the probes.
    pub a0_margin: f64,
    pub a1_margin: f64,
    /// Definite-point data found by the probe: (xi, gamma_hat, zeta_bar).
    pub definite_point: Option<(f64, f64, f64)>,
}

/// Probe depth for the definite-point search during classification:
/// guesses go down to xi = 2^-(CLASSIFY_PROBE_DEPTH) before the interval is
/// declared empty.
pub const CLASSIFY_PROBE_DEPTH: usize = 20;

/// Determine the regime of a normalized pencil. Diagonal pencils are
/// classified exactly via the closed-form envelope; otherwise probabilistic
/// eigenvalue probes are used and near-zero margins raise an
/// indefinite-classification error.
pub fn classify_pencil(p: &Pencil, p_fail: f64, seed: SeedStream) -> Result<PencilRegime> {
    classify_pencil_with(p, p_fail, seed, crate::lanczos::EigOptions::default())
}

pub fn classify_pencil_with(
    p: &Pencil,
    p_fail: f64,
    seed: SeedStream,
    options: crate::lanczos::EigOptions,
) -> Result<PencilRegime> {
    if p.both_diagonal() {
        return classify_diagonal(p);
    }

    let budget = p_fail / 3.0;
    let a1_probe = regularity::probe_min_eig_sign_with(&p.q1.a, budget, seed.child(1), options)?;
    let a1_margin = a1_probe.rayleigh;
    match a1_probe.sign {
        regularity::EigSign::Ambiguous => {
            return Err(GtrsError::IndefiniteClassification {
                margins: format!(
                    "lambda_min(A1) rayleigh {:.3e} within accuracy {:.3e}",
                    a1_probe.rayleigh, a1_probe.eta
                ),
            });
        }
        regularity::EigSign::LikelyNonnegative => {
            return Ok(PencilRegime {
                kind: RegimeKind::ConvexConstraintUnboundedGamma,
                gamma_minus: None,
                gamma_plus: None,
                a0_margin: f64::NAN,
                a1_margin,
                definite_point: None,
            });
        }
        regularity::EigSign::CertifiedNegative => {}
    }
    let zeta_bar = 1.0f64.max(1.0 / (-a1_probe.rayleigh - a1_probe.eta));

    let a0_probe = regularity::probe_min_eig_sign_with(&p.q0.a, budget, seed.child(2), options)?;
    let a0_margin = a0_probe.rayleigh;
    let objective_convex = match a0_probe.sign {
        regularity::EigSign::Ambiguous => {
            return Err(GtrsError::IndefiniteClassification {
                margins: format!(
                    "lambda_min(A0) rayleigh {:.3e} within accuracy {:.3e}",
                    a0_probe.rayleigh, a0_probe.eta
                ),
            });
        }
        regularity::EigSign::LikelyNonnegative => true,
        regularity::EigSign::CertifiedNegative => false,
    };

    let definite = regularity::approx_xi_capped_with(
        p,
        zeta_bar,
        budget,
        CLASSIFY_PROBE_DEPTH,
        seed.child(3),
        options,
    )?;
    match definite {
        Some((xi, gamma_hat)) => Ok(PencilRegime {
            kind: if objective_convex {
                RegimeKind::ConvexObjectiveGammaMinusZero
            } else {
                RegimeKind::BothNonconvexDefinitePoint
            },
            gamma_minus: if objective_convex { Some(0.0) } else { None },
            gamma_plus: None,
            a0_margin,
            a1_margin,
            definite_point: Some((xi, gamma_hat, zeta_bar)),
        }),
        None => Ok(PencilRegime {
            kind: RegimeKind::GammaEmpty,
            gamma_minus: None,
            gamma_plus: None,
            a0_margin,
            a1_margin,
            definite_point: None,
        }),
    }
}

fn classify_diagonal(p: &Pencil) -> Result<PencilRegime> {
    let a0 = p.q0.a.diagonal_vector();
    let a1 = p.q1.a.diagonal_vector();
    let a0_min = a0.iter().cloned().fold(f64::INFINITY, f64::min);
    let a1_min = a1.iter().cloned().fold(f64::INFINITY, f64::min);
    if a1_min >= 0.0 {
        return Ok(PencilRegime {
            kind: RegimeKind::ConvexConstraintUnboundedGamma,
            gamma_minus: None,
            gamma_plus: None,
            a0_margin: a0_min,
            a1_margin: a1_min,
            definite_point: None,
        });
    }
    match regularity::diag_regularity(&a0, &a1) {
        Ok(reg) => {
            let kind = if reg.gamma_minus == reg.gamma_plus {
                RegimeKind::BothNonconvexPsdOnly
            } else if a0_min >= 0.0 {
                RegimeKind::ConvexObjectiveGammaMinusZero
            } else {
                RegimeKind::BothNonconvexDefinitePoint
            };
            Ok(PencilRegime {
                kind,
                gamma_minus: Some(reg.gamma_minus),
                gamma_plus: Some(reg.gamma_plus),
                a0_margin: a0_min,
                a1_margin: a1_min,
                definite_point: Some((reg.xi_star, reg.gamma_star, 1.0f64.max(reg.gamma_plus))),
            })
        }
        Err(GtrsError::UnboundedBelow) => Ok(PencilRegime {
            kind: RegimeKind::GammaEmpty,
            gamma_minus: None,
            gamma_plus: None,
            a0_margin: a0_min,
            a1_margin: a1_min,
            definite_point: None,
        }),
        Err(e) => Err(e),
    }
}

/// Membership of (x, t) in the aggregated-epigraph description of the hull:
/// q(gamma_minus, x) <= t and, when the interval is bounded,
/// q(gamma_plus, x) <= t; otherwise q1(x) <= 0. Tolerance 1e-9 (1 + |t|).
pub fn hull_membership(
    p: &Pencil,
    gamma_minus: f64,
    gamma_plus: Option<f64>,
    x: &[f64],
    t: f64,
) -> Result<bool> {
    let tol = 1e-9 * (1.0 + t.abs());
    let lower = p.eval(gamma_minus, x)? <= t + tol;
    let upper = match gamma_plus {
        Some(gp) => p.eval(gp, x)? <= t + tol,
        None => p.q1.eval(x)? <= tol,
    };
    Ok(lower && upper)
}

/// Which decomposition case applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionCase {
    OnBoundary,
    Q1Positive,
    Q1Negative,
}

/// A two-point decomposition of a hull member: endpoints lie on the
/// constraint boundary (q1 = 0) inside the epigraph, and the convex
/// combination with weight theta reconstructs the input point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullDecomposition {
    pub endpoint1: (Vec<f64>, f64),
    pub endpoint2: (Vec<f64>, f64),
    pub theta: f64,
    pub case: DecompositionCase,
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    crate::vecops::stable_quadratic_roots(a, b, c).ok_or_else(|| {
        GtrsError::DecompositionFailed(format!(
            "no real roots along the null direction (a = {a:.3e}, b = {b:.3e}, c = {c:.3e})"
        ))
    })
}

/// Decompose a hull member (x_hat, t_hat) into two boundary points along a
/// null direction of the appropriate endpoint matrix: for q1(x_hat) > 0 a
/// direction with d' A(gamma_plus) d = 0, for q1(x_hat) < 0 one with
/// d' A(gamma_minus) d = 0. Directions are inputs so exact (oracle) and
/// approximate (Lanczos) vectors exercise the same path.
pub fn hull_decompose(
    p: &Pencil,
    gamma_minus: f64,
    gamma_plus: f64,
    zero_dir_minus: &[f64],
    zero_dir_plus: &[f64],
    x_hat: &[f64],
    t_hat: f64,
) -> Result<HullDecomposition> {
    let q1x = p.q1.eval(x_hat)?;
    let tau = 1e-12 * (1.0 + norm2(x_hat)).powi(2);
    if q1x.abs() <= tau {
        return Ok(HullDecomposition {
            endpoint1: (x_hat.to_vec(), t_hat),
            endpoint2: (x_hat.to_vec(), t_hat),
            theta: 1.0,
            case: DecompositionCase::OnBoundary,
        });
    }

    let (d, gamma_move, case) = if q1x > 0.0 {
        (zero_dir_plus, gamma_plus, DecompositionCase::Q1Positive)
    } else {
        (zero_dir_minus, gamma_minus, DecompositionCase::Q1Negative)
    };
    if d.len() != p.dim() {
        return Err(GtrsError::DimensionMismatch { expected: p.dim(), got: d.len() });
    }

    // e = 2 (x' A(gamma) d + b(gamma)' d) keeps q(gamma, x_alpha) - t_alpha constant
    let ad = p.matvec(gamma_move, d)?;
    let e = 2.0 * (dot(x_hat, &ad) + dot(&p.b_at(gamma_move), d));

    // q1(x_hat + alpha d) = c_hat + 2 b_hat alpha + a_hat alpha^2
    let a1d = p.q1.a.matvec(d)?;
    let a_hat = dot(d, &a1d);
    let mut b_vec = p.q1.a.matvec(x_hat)?;
    for (bi, b1i) in b_vec.iter_mut().zip(&p.q1.b) {
        *bi += b1i;
    }
    let b_hat = dot(d, &b_vec);
    let (alpha1, alpha2) = quadratic_roots(a_hat, b_hat, q1x)?;
    if !(alpha1 < 0.0 && alpha2 > 0.0) {
        return Err(GtrsError::DecompositionFailed(format!(
            "roots {alpha1:.3e}, {alpha2:.3e} do not straddle zero; \
             null-direction or membership quality breach"
        )));
    }

    // one Newton polish per root against the 1-D quadratic
    let polish = |alpha: f64| -> f64 {
        let g = q1x + 2.0 * b_hat * alpha + a_hat * alpha * alpha;
        let dg = 2.0 * (b_hat + a_hat * alpha);
        if dg.abs() > 1e-300 {
            alpha - g / dg
        } else {
            alpha
        }
    };
    let alpha1 = polish(alpha1);
    let alpha2 = polish(alpha2);

    let make_point = |alpha: f64| -> (Vec<f64>, f64) {
        let mut x = x_hat.to_vec();
        for (xi, di) in x.iter_mut().zip(d) {
            *xi += alpha * di;
        }
        (x, t_hat + alpha * e)
    };
    let theta = alpha2 / (alpha2 - alpha1);
    Ok(HullDecomposition {
        endpoint1: make_point(alpha1),
        endpoint2: make_point(alpha2),
        theta,
        case,
    })
}
