//! Problem and result file formats, and the instance generator.
//!
//! A problem file is a single JSON document:
//!
//! ```json
//! {
//!   "format": 1,
//!   "n": 2,
//!   "q0": { "a": [[0, 0, 1.0], [0, 1, 2.0], [1, 1, 1.0]], "b": [0.0, 0.0], "c": 0.0 },
//!   "q1": { "a": [[0, 1, -1.0]], "b": [0.0, 0.0], "c": 0.0 },
//!   "meta": { "name": "E1" }
//! }
//! ```
//!
//! Matrix entries are 0-based upper-triangle coordinate triplets `[i, j, v]`
//! with `i <= j`; entries with `i > j` are rejected, duplicate `(i, j)`
//! pairs are summed with a warning. Canonical form (sorted triplets) parses
//! and re-serializes losslessly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};
use crate::oracle;
use crate::pipeline::{SolveMode, SolveReport};
use crate::quad::{Pencil, Quadratic, SparseSymMatrix};
use crate::seed::SeedStream;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSection {
    /// Upper-triangle `[i, j, value]` triplets.
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl ProblemMeta {
    fn is_empty(&self) -> bool {
        self.name.is_none() && self.seed.is_none() && self.comment.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format: u32,
    pub n: usize,
    pub q0: QuadraticSection,
    pub q1: QuadraticSection,
    #[serde(default, skip_serializing_if = "ProblemMeta::is_empty")]
    pub meta: ProblemMeta,
}

impl ProblemFile {
    pub fn from_pencil(p: &Pencil, meta: ProblemMeta) -> Self {
        let section = |q: &Quadratic| QuadraticSection {
            a: q.a.entries().to_vec(),
            b: q.b.clone(),
            c: q.c,
        };
        ProblemFile {
            format: FORMAT_VERSION,
            n: p.dim(),
            q0: section(&p.q0),
            q1: section(&p.q1),
            meta,
        }
    }

    /// Validate and build the pencil. Returns load warnings (duplicate
    /// coordinate pairs that were summed).
    pub fn to_pencil(&self) -> Result<(Pencil, Vec<String>)> {
        if self.format != FORMAT_VERSION {
            return Err(GtrsError::InvalidInput(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                self.format
            )));
        }
        let mut warnings = Vec::new();
        let mut build = |section: &QuadraticSection, which: &str| -> Result<Quadratic> {
            for &(i, j, _) in &section.a {
                if i > j {
                    return Err(GtrsError::InvalidInput(format!(
                        "{which}: entry ({i}, {j}) is below the diagonal; only i <= j accepted"
                    )));
                }
                if i >= self.n || j >= self.n {
                    return Err(GtrsError::InvalidInput(format!(
                        "{which}: entry ({i}, {j}) out of range for n = {}",
                        self.n
                    )));
                }
            }
            let (a, merged) = SparseSymMatrix::from_triplets_summing(self.n, section.a.clone())?;
            if merged > 0 {
                warnings.push(format!("{which}: summed {merged} duplicate coordinate entries"));
            }
            Quadratic::new(a, section.b.clone(), section.c)
        };
        let q0 = build(&self.q0, "q0")?;
        let q1 = build(&self.q1, "q1")?;
        Ok((Pencil::new(q0, q1)?, warnings))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Oracle comparison block for `--oracle-check` runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    pub optimum: f64,
    pub gap: f64,
    pub within_eps: bool,
    pub method: String,
}

/// Machine-readable run record. Identical command lines (including the
/// seed) reproduce this byte-for-byte except for the timing fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub tool: String,
    pub version: String,
    pub status: String,
    pub mode: SolveMode,
    pub seed: u64,
    pub eps: f64,
    pub prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SolveReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ResultFile {
    pub fn success(
        mode: SolveMode,
        seed: u64,
        eps: f64,
        prob: f64,
        report: SolveReport,
        oracle: Option<OracleComparison>,
    ) -> Self {
        ResultFile {
            tool: "gtrs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: "ok".into(),
            mode,
            seed,
            eps,
            prob,
            report: Some(report),
            oracle,
            message: None,
        }
    }

    pub fn failure(mode: SolveMode, seed: u64, eps: f64, prob: f64, err: &GtrsError) -> Self {
        let status = match err {
            GtrsError::UnboundedBelow => "unbounded-below",
            GtrsError::ConvexConstraintRegime => "convex-constraint-regime",
            _ => "error",
        };
        ResultFile {
            tool: "gtrs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: status.into(),
            mode,
            seed,
            eps,
            prob,
            report: None,
            oracle: None,
            message: Some(err.to_string()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Instance families the generator can produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenKind {
    /// Random sparse instance satisfying the definite-point assumptions.
    Random { density: f64 },
    /// Banded random instance at fixed bandwidth.
    Banded { bandwidth: usize },
    /// The diagonal family (padded beyond n = 3 with non-binding coordinates).
    Diagonal { alpha: f64 },
    /// The exact 2x2 closed-form fixture.
    FixtureE1,
    /// The exact n = 3 diagonal fixture.
    FixtureD { alpha: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct GenSpec {
    pub n: usize,
    pub kind: GenKind,
    pub seed: u64,
}

const RESAMPLE_CAP: usize = 100;

/// Generate an instance. Random kinds construct pencils with a definite
/// point by design: an indefinite A1 with planted certified diagonal
/// entries, a diagonally dominant P > 0, and A0 = P - gamma* A1, resampled
/// until both matrices have a negative eigenvalue; the result is normalized
/// so the unit-norm bounds hold.
pub fn generate(spec: &GenSpec) -> Result<ProblemFile> {
    match spec.kind {
        GenKind::FixtureE1 => {
            let p = crate::fixtures::e1();
            Ok(ProblemFile::from_pencil(
                &p,
                ProblemMeta { name: Some("E1".into()), seed: None, comment: None },
            ))
        }
        GenKind::FixtureD { alpha } => {
            if spec.n != 3 {
                return Err(GtrsError::InvalidInput(
                    "fixture:D is the n = 3 diagonal family; use --n 3".into(),
                ));
            }
            let p = crate::fixtures::d_alpha(alpha)?;
            Ok(ProblemFile::from_pencil(
                &p,
                ProblemMeta { name: Some(format!("D({alpha})")), seed: None, comment: None },
            ))
        }
        GenKind::Diagonal { alpha } => {
            if spec.n < 3 {
                return Err(GtrsError::InvalidInput("diagonal kind needs n >= 3".into()));
            }
            let mut a0 = vec![1.0; spec.n];
            let mut a1 = vec![1.0; spec.n];
            a0[2] = -1.0;
            a1[1] = -1.0 / (1.0 + alpha);
            let p = Pencil::new(
                Quadratic::new(SparseSymMatrix::diagonal(&a0)?, vec![0.0; spec.n], 0.0)?,
                Quadratic::new(SparseSymMatrix::diagonal(&a1)?, vec![0.0; spec.n], 0.0)?,
            )?;
            Ok(ProblemFile::from_pencil(
                &p,
                ProblemMeta {
                    name: Some(format!("diagonal-n{}-alpha{alpha}", spec.n)),
                    seed: None,
                    comment: None,
                },
            ))
        }
        GenKind::Random { density } => {
            if !(density > 0.0 && density <= 1.0) {
                return Err(GtrsError::invalid_param(
                    "density",
                    format!("must lie in (0,1], got {density}"),
                ));
            }
            generate_structured(spec, Pattern::Random { density })
        }
        GenKind::Banded { bandwidth } => {
            if bandwidth == 0 {
                return Err(GtrsError::invalid_param("bandwidth", "must be >= 1"));
            }
            generate_structured(spec, Pattern::Banded { bandwidth })
        }
    }
}

enum Pattern {
    Random { density: f64 },
    Banded { bandwidth: usize },
}

fn draw_offdiag_pattern(n: usize, pattern: &Pattern, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    match pattern {
        Pattern::Random { density } => {
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(*density) {
                        pairs.push((i, j));
                    }
                }
            }
        }
        Pattern::Banded { bandwidth } => {
            for i in 0..n {
                for j in (i + 1)..(i + bandwidth + 1).min(n) {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs
}

fn generate_structured(spec: &GenSpec, pattern: Pattern) -> Result<ProblemFile> {
    if spec.n < 2 {
        return Err(GtrsError::invalid_param("n", "must be >= 2"));
    }
    let n = spec.n;
    let stream = SeedStream::new(spec.seed).child(0xface);
    for attempt in 0..RESAMPLE_CAP {
        let mut rng = stream.child(attempt as u64).rng();
        let gamma_star = rng.gen_range(0.2..2.0);

        // P: diagonally dominant with healthy slack
        let p_pairs = draw_offdiag_pattern(n, &pattern, &mut rng);
        let mut p_entries: Vec<(usize, usize, f64)> = Vec::with_capacity(p_pairs.len() + n);
        let mut p_rowsum = vec![0.0; n];
        for &(i, j) in &p_pairs {
            let v = rng.gen_range(-0.25..0.25);
            p_entries.push((i, j, v));
            p_rowsum[i] += v.abs();
            p_rowsum[j] += v.abs();
        }
        let mut p_diag = vec![0.0; n];
        for i in 0..n {
            p_diag[i] = p_rowsum[i] + rng.gen_range(0.6..1.2);
        }

        // A1: indefinite with certified diagonal entries on both sides
        let a1_pairs = draw_offdiag_pattern(n, &pattern, &mut rng);
        let mut a1_entries: Vec<(usize, usize, f64)> = Vec::with_capacity(a1_pairs.len() + n);
        let mut a1_rowsum = vec![0.0; n];
        for &(i, j) in &a1_pairs {
            let v = rng.gen_range(-0.25..0.25);
            a1_entries.push((i, j, v));
            a1_rowsum[i] += v.abs();
            a1_rowsum[j] += v.abs();
        }
        let mut a1_diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        // plant: a negative eigenvalue for A1 at coordinate 0, and a diagonal
        // large enough at coordinate 1 that A0 = P - gamma* A1 dips negative
        a1_diag[0] = -(a1_rowsum[0] + rng.gen_range(0.8..1.2));
        a1_diag[1] = (p_diag[1] + a1_rowsum[1] + rng.gen_range(0.4..0.8)) / gamma_star;
        for (i, &v) in a1_diag.iter().enumerate() {
            a1_entries.push((i, i, v));
        }
        let (a1, _) = SparseSymMatrix::from_triplets_summing(n, a1_entries)?;

        // A0 = P - gamma* A1 on the union pattern
        let mut a0_triplets: Vec<(usize, usize, f64)> = p_entries.clone();
        for i in 0..n {
            a0_triplets.push((i, i, p_diag[i]));
        }
        for &(i, j, v) in a1.entries() {
            a0_triplets.push((i, j, -gamma_star * v));
        }
        let (a0, _) = SparseSymMatrix::from_triplets_summing(n, a0_triplets)?;

        // verify nonconvexity of both sides: dense at desk scale, the
        // certified diagonal entries otherwise
        let ok = if n <= oracle::DENSE_CAP {
            let l0 = oracle::dense_eig_min(&a0.to_dense())?.0;
            let l1 = oracle::dense_eig_min(&a1.to_dense())?.0;
            l0 < -1e-6 && l1 < -1e-6
        } else {
            let d0 = a0.diagonal_vector();
            let d1 = a1.diagonal_vector();
            d0.iter().cloned().fold(f64::INFINITY, f64::min) < -1e-6
                && d1.iter().cloned().fold(f64::INFINITY, f64::min) < -1e-6
        };
        if !ok {
            continue;
        }

        let b0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let b1: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let c1 = rng.gen_range(-0.5..0.5);
        let raw = Pencil::new(
            Quadratic::new(a0, b0, 0.0)?,
            Quadratic::new(a1, b1, c1)?,
        )?;
        let (normalized, _) = crate::quad::normalize(&raw)?;

        let kind_name = match pattern {
            Pattern::Random { density } => format!("random-n{n}-d{density}"),
            Pattern::Banded { bandwidth } => format!("banded-n{n}-w{bandwidth}"),
        };
        return Ok(ProblemFile::from_pencil(
            &normalized,
            ProblemMeta {
                name: Some(kind_name),
                seed: Some(spec.seed),
                comment: Some(format!("gamma* = {gamma_star:.6} at generation (pre-normalization)")),
            },
        ));
    }
    Err(GtrsError::GenerationFailed { cap: RESAMPLE_CAP })
}
