//! Command-line front end: solve problem files, estimate regularity
//! certificates, generate instances, and check hull membership.
//!
//! Exit codes: 0 success, 2 unbounded below (empty pencil interval),
//! 3 input error, 4 probabilistic-subroutine failure, 5 convex-constraint
//! regime (reported, not solved).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gtrs::error::{GtrsError, Result};
use gtrs::oracle;
use gtrs::pipeline::{SolveMode, SolveOptions};
use gtrs::problem::{GenKind, GenSpec, OracleComparison, ProblemFile, ResultFile};
use gtrs::seed::SeedStream;

#[derive(Parser)]
#[command(name = "gtrs", version, about = "Sparse solver for the generalized trust region subproblem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file.
    Solve(SolveArgs),
    /// Estimate the regularity certificate (xi, zeta, gamma_hat) and the
    /// endpoint bracket of a problem file.
    Regularity(RegularityArgs),
    /// Generate a problem file.
    Gen(GenArgs),
    /// Check membership of a point in the hull description, optionally
    /// decomposing it into boundary points or sampling a labeled cloud.
    HullCheck(HullCheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Value,
    Boundary,
    Inequality,
    Equality,
    Interval,
    Hollow,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Value => SolveMode::Value,
            ModeArg::Boundary => SolveMode::Boundary,
            ModeArg::Inequality => SolveMode::Inequality,
            ModeArg::Equality => SolveMode::Equality,
            ModeArg::Interval => SolveMode::Interval,
            ModeArg::Hollow => SolveMode::Hollow,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Additive accuracy target, in the problem's original units.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Failure probability budget for the randomized subroutines.
    #[arg(long, default_value_t = 0.01)]
    prob: f64,
    #[arg(long, value_enum, default_value = "value")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the machine-readable result to stdout.
    #[arg(long)]
    json: bool,
    /// Write the machine-readable result to a file.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Cross-check the value against the dense reference oracle
    /// (small instances only).
    #[arg(long)]
    oracle_check: bool,
    /// Allow the minimax stage to stop early on stagnation.
    #[arg(long)]
    early_exit: bool,
}

#[derive(Args)]
struct RegularityArgs {
    file: PathBuf,
    /// Use the exact closed form when both matrices are diagonal.
    #[arg(long)]
    exact_if_diagonal: bool,
    #[arg(long, default_value_t = 0.01)]
    prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Endpoint bracket accuracy.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance kind: random | diagonal | banded | fixture:E1 | fixture:D.
    #[arg(long, default_value = "random")]
    kind: String,
    /// Diagonal-family parameter (diagonal and fixture:D kinds).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Band half-width (banded kind).
    #[arg(long, default_value_t = 3)]
    bandwidth: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct HullCheckArgs {
    file: PathBuf,
    /// Comma-separated point coordinates.
    #[arg(long)]
    point: Option<String>,
    /// Epigraph height t for the membership test.
    #[arg(long)]
    t: Option<f64>,
    /// Interval endpoints; computed by the dense oracle when omitted.
    #[arg(long)]
    gamma_minus: Option<f64>,
    #[arg(long)]
    gamma_plus: Option<f64>,
    /// Also decompose a member into two boundary points (dense oracle
    /// null directions).
    #[arg(long)]
    decompose: bool,
    /// Sample this many labeled random points.
    #[arg(long)]
    cloud: Option<usize>,
    /// CSV output path for the labeled cloud.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Regularity(args) => cmd_regularity(args),
        Command::Gen(args) => cmd_gen(args),
        Command::HullCheck(args) => cmd_hull_check(args),
    }
}

fn load(path: &PathBuf) -> Result<gtrs::Pencil> {
    let pf = ProblemFile::read(path)?;
    let (pencil, warnings) = pf.to_pencil()?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(pencil)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let pencil = load(&args.file)?;
    let mode: SolveMode = args.mode.into();
    let opts = SolveOptions {
        mode,
        eps: args.eps,
        p_fail: args.prob,
        seed: args.seed,
        minimax_early_exit: args.early_exit,
    };
    let solved = gtrs::solve(&pencil, &opts);

    let result = match solved {
        Ok(report) => {
            let oracle_block = if args.oracle_check {
                let truth = oracle::brute_opt(&pencil)?;
                let gap = report.value - truth.value;
                Some(OracleComparison {
                    optimum: truth.value,
                    gap,
                    within_eps: gap >= -1e-9 && gap <= report.eps_effective + 1e-12,
                    method: truth.result.method,
                })
            } else {
                None
            };
            ResultFile::success(mode, args.seed, args.eps, args.prob, report, oracle_block)
        }
        Err(err) => {
            let rf = ResultFile::failure(mode, args.seed, args.eps, args.prob, &err);
            emit_result(&rf, args.json, args.output.as_ref())?;
            return Err(err);
        }
    };

    emit_result(&result, args.json, args.output.as_ref())?;
    if !args.json {
        let report = result.report.as_ref().expect("successful result has a report");
        println!("status: ok");
        println!("value: {:.12e}  (eps requested {:.3e})", report.value, report.eps_requested);
        println!(
            "bracket: gamma in [{:.9}, {:.9}]  (delta {:.3e})",
            report.gamma_minus, report.gamma_plus, report.delta
        );
        if let Some(x) = &report.solution {
            println!("objective at solution: {:.12e}", report.objective_at_solution.unwrap());
            println!("constraint residual:  {:.3e}", report.constraint_residual.unwrap());
            if x.len() <= 16 {
                println!("solution: {x:?}");
            } else {
                println!("solution: [{} components]", x.len());
            }
        }
        if let Some(o) = &result.oracle {
            println!(
                "oracle: optimum {:.12e}, gap {:+.3e}, within eps: {}",
                o.optimum, o.gap, o.within_eps
            );
        }
    }
    Ok(())
}

fn emit_result(result: &ResultFile, json_stdout: bool, output: Option<&PathBuf>) -> Result<()> {
    let text = result.to_json()?;
    if json_stdout {
        println!("{text}");
    }
    if let Some(path) = output {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{text}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RegularityReport {
    xi: f64,
    zeta: f64,
    gamma_hat: f64,
    kappa: f64,
    provenance: gtrs::regularity::CertificateProvenance,
    gamma_minus: f64,
    gamma_plus: f64,
    delta: f64,
}

fn cmd_regularity(args: RegularityArgs) -> Result<()> {
    let raw = load(&args.file)?;
    let (pencil, scales) = gtrs::normalize(&raw)?;
    let seed = SeedStream::new(args.seed);

    let cert = if args.exact_if_diagonal && pencil.both_diagonal() {
        gtrs::regularity::diagonal_certificate(&pencil)?
    } else {
        gtrs::regularity::estimate_certificate(&pencil, args.prob / 2.0, seed.child(1))?
    };
    let (bracket, _, _) =
        gtrs::gamma::bracket(&pencil, &cert, args.delta, args.prob / 2.0, seed.child(2))?;

    let report = RegularityReport {
        xi: cert.xi,
        zeta: cert.zeta,
        gamma_hat: cert.gamma_hat,
        kappa: cert.kappa(),
        provenance: cert.provenance,
        gamma_minus: scales.gamma_to_original(bracket.gamma_minus),
        gamma_plus: scales.gamma_to_original(bracket.gamma_plus),
        delta: bracket.delta,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("xi: {:.9}", report.xi);
        println!("zeta: {:.9}", report.zeta);
        println!("gamma_hat: {:.9}", report.gamma_hat);
        println!("kappa: {:.9}", report.kappa);
        println!("provenance: {:?}", report.provenance);
        println!(
            "bracket (original units): [{:.9}, {:.9}] at delta {:.3e}",
            report.gamma_minus, report.gamma_plus, report.delta
        );
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let kind = match args.kind.as_str() {
        "random" => GenKind::Random { density: args.density },
        "banded" => GenKind::Banded { bandwidth: args.bandwidth },
        "diagonal" => GenKind::Diagonal { alpha: args.alpha },
        "fixture:E1" => GenKind::FixtureE1,
        "fixture:D" => GenKind::FixtureD { alpha: args.alpha },
        other => {
            return Err(GtrsError::InvalidInput(format!(
                "unknown kind '{other}' (expected random | diagonal | banded | fixture:E1 | fixture:D)"
            )))
        }
    };
    let pf = gtrs::problem::generate(&GenSpec { n: args.n, kind, seed: args.seed })?;
    pf.write(&args.output)?;
    println!(
        "wrote {} (n = {}, {} + {} stored entries)",
        args.output.display(),
        pf.n,
        pf.q0.a.len(),
        pf.q1.a.len()
    );
    Ok(())
}

fn parse_point(text: &str, n: usize) -> Result<Vec<f64>> {
    let coords: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|e| GtrsError::InvalidInput(format!("bad point: {e}")))?;
    if coords.len() != n {
        return Err(GtrsError::DimensionMismatch { expected: n, got: coords.len() });
    }
    Ok(coords)
}

fn cmd_hull_check(args: HullCheckArgs) -> Result<()> {
    let pencil = load(&args.file)?;
    let n = pencil.dim();

    let (gamma_minus, gamma_plus) = match (args.gamma_minus, args.gamma_plus) {
        (Some(gm), Some(gp)) => (gm, gp),
        _ => {
            let (gm, gp) = oracle::gamma_exact(&pencil)?;
            eprintln!("using oracle endpoints ({gm:.9}, {gp:.9})");
            (gm, gp)
        }
    };

    if let (Some(point), Some(t)) = (args.point.as_ref(), args.t) {
        let x = parse_point(point, n)?;
        let member = gtrs::hull::hull_membership(&pencil, gamma_minus, Some(gamma_plus), &x, t)?;
        println!("member: {member}");
        if member && args.decompose {
            let (_, dir_minus) =
                oracle::dense_eig_min(&oracle::dense_pencil(&pencil, gamma_minus))?;
            let (_, dir_plus) = oracle::dense_eig_min(&oracle::dense_pencil(&pencil, gamma_plus))?;
            let dec = gtrs::hull::hull_decompose(
                &pencil,
                gamma_minus,
                gamma_plus,
                &dir_minus,
                &dir_plus,
                &x,
                t,
            )?;
            println!("case: {:?}  theta: {:.9}", dec.case, dec.theta);
            println!("endpoint 1: x = {:?}, t = {:.9}", dec.endpoint1.0, dec.endpoint1.1);
            println!("endpoint 2: x = {:?}, t = {:.9}", dec.endpoint2.0, dec.endpoint2.1);
        }
    }

    if let Some(count) = args.cloud {
        use rand::Rng;
        let mut rng = SeedStream::new(args.seed).rng();
        let mut rows = String::new();
        rows.push_str(&(0..n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(","));
        rows.push_str(",t,member\n");
        let mut members = 0usize;
        for _ in 0..count {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let t: f64 = rng.gen_range(-2.0..10.0);
            let m = gtrs::hull::hull_membership(&pencil, gamma_minus, Some(gamma_plus), &x, t)?;
            members += m as usize;
            for xi in &x {
                rows.push_str(&format!("{xi},"));
            }
            rows.push_str(&format!("{t},{}\n", m as u8));
        }
        match &args.csv {
            Some(path) => {
                std::fs::write(path, rows)?;
                println!("wrote {count} labeled points to {} ({members} members)", path.display());
            }
            None => print!("{rows}"),
        }
    }
    Ok(())
}
