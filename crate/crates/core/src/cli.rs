//! Command-line front end: parse -> solve -> develop -> volume -> checks.
//!
//! Exit codes: 0 success, 2 input error, 3 no solution found, 4 relator
//! residual above the gate, 5 check failure. Reports embed the SHA-256 of
//! the input file, and a fixed seed makes the JSON output byte-identical
//! across runs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::equations::{
    build_equations_with, newton_solve, residual, solve_all, volume_of_shapes, NewtonOptions,
    ScanReport, ScanSolution, ShapeVector, SolveError,
};
use crate::holonomy::{
    develop, fixed_point_independence_check, rigidity_check, straighten_volume, HolonomyError,
    IndependenceOutcome, Representation, RigidityVerdict,
};
use crate::ideal;
use crate::moebius::{FixedPointPolicy, MoebiusTransform};
use crate::report::ShapesFile;
use crate::tol;
use crate::trig::Triangulation;

#[derive(Debug, Parser)]
#[command(
    name = "repvol",
    about = "Volumes of PSL(2,C) representations via straightened ideal triangulations",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Summarize a triangulation's derived combinatorics
    Info(InfoArgs),
    /// Solve the gluing equations (complete or Dehn-filled)
    Solve(SolveArgs),
    /// Volume of a shape vector or of a representation
    Volume(VolumeArgs),
    /// Consolidated invariant battery
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Attracting,
    Repelling,
}

impl PolicyArg {
    fn to_policy(self) -> FixedPointPolicy {
        match self {
            PolicyArg::Attracting => FixedPointPolicy::attracting(),
            PolicyArg::Repelling => FixedPointPolicy::repelling(),
        }
    }
}

#[derive(Debug, Args)]
struct InfoArgs {
    /// Triangulation file (TRIG JSON)
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct SolveArgs {
    input: PathBuf,
    /// Dehn filling override, repeatable: <cusp>:<p>,<q>
    #[arg(long = "fill", value_name = "CUSP:P,Q")]
    fill: Vec<String>,
    /// Multi-start scan instead of a single solve from the regular point
    #[arg(long)]
    scan: bool,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Newton convergence tolerance on the max row residual
    #[arg(long = "tol-newton", default_value_t = tol::NEWTON_RESIDUAL)]
    tol_newton: f64,
}

#[derive(Debug, Args)]
struct VolumeArgs {
    input: PathBuf,
    /// Shape vector JSON ({"shapes": [[re,im], ...]})
    #[arg(long, conflicts_with = "rep")]
    shapes: Option<PathBuf>,
    /// Representation JSON ({"generators": [{"a": [re,im], ...}, ...]})
    #[arg(long)]
    rep: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "attracting")]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Relator residual gate for representations
    #[arg(long = "tol-relator", default_value_t = tol::RELATOR_RESIDUAL)]
    tol_relator: f64,
}

#[derive(Debug, Args)]
struct CheckArgs {
    input: PathBuf,
    /// Representation JSON checked against the complete holonomy
    #[arg(long)]
    rep: Option<PathBuf>,
    /// Dehn filling exercised by the filled-solution checks
    #[arg(long = "fill", value_name = "CUSP:P,Q")]
    fill: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long = "tol-newton", default_value_t = tol::NEWTON_RESIDUAL)]
    tol_newton: f64,
    #[arg(long = "tol-relator", default_value_t = tol::RELATOR_RESIDUAL)]
    tol_relator: f64,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    NoSolution(String),
    ResidualGate(f64),
    CheckFailed,
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::NoSolution(_) => 3,
            CliError::ResidualGate(_) => 4,
            CliError::CheckFailed => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => format!("input error: {m}"),
            CliError::NoSolution(m) => format!("no solution: {m}"),
            CliError::ResidualGate(r) => {
                format!("RelatorResidualTooLarge: relator residual {r:e} above the gate")
            }
            CliError::CheckFailed => "check battery failed".to_string(),
        }
    }
}

impl From<HolonomyError> for CliError {
    fn from(e: HolonomyError) -> CliError {
        match e {
            HolonomyError::RelatorResidualTooLarge(r) => CliError::ResidualGate(r),
            HolonomyError::Solve(s) => CliError::from(s),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> CliError {
        match e {
            SolveError::NoConvergence(_)
            | SolveError::DegenerationGuard
            | SolveError::SingularJacobianUnrecoverable => CliError::NoSolution(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; usage problems are input errors
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 2 };
        }
    };
    let result = match cli.command {
        Command::Info(a) => cmd_info(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Volume(a) => cmd_volume(&a),
        Command::Check(a) => cmd_check(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.message());
            e.exit_code()
        }
    }
}

fn read_input(path: &Path) -> Result<(String, String), CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let hash = hex_digest(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((text, hash))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn require_positive(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

fn load_triangulation(path: &Path) -> Result<(Triangulation, String), CliError> {
    let (text, hash) = read_input(path)?;
    let t = Triangulation::parse(&text).map_err(|e| CliError::Input(e.to_string()))?;
    Ok((t, hash))
}

fn parse_fill_overrides(
    t: &Triangulation,
    specs: &[String],
) -> Result<Vec<Option<(i64, i64)>>, CliError> {
    let mut filling = t.filling.clone();
    for spec in specs {
        let bad = || CliError::Input(format!("bad --fill '{spec}', expected <cusp>:<p>,<q>"));
        let (cusp, pq) = spec.split_once(':').ok_or_else(bad)?;
        let (p, q) = pq.split_once(',').ok_or_else(bad)?;
        let cusp: usize = cusp.trim().parse().map_err(|_| bad())?;
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if cusp >= filling.len() {
            return Err(CliError::Input(format!(
                "--fill cusp {cusp} out of range (cusp count {})",
                filling.len()
            )));
        }
        filling[cusp] = Some((p, q));
    }
    Ok(filling)
}

// ---------------------------------------------------------------------------
// info
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct InfoReport {
    input_sha256: String,
    tets: usize,
    edges: usize,
    cusps: usize,
    generators: usize,
    relators: usize,
    edge_valences: Vec<usize>,
    filling: Vec<Option<(i64, i64)>>,
}

fn cmd_info(args: &InfoArgs) -> Result<(), CliError> {
    let (t, hash) = load_triangulation(&args.input)?;
    let report = InfoReport {
        input_sha256: hash,
        tets: t.tet_count,
        edges: t.edge_classes().len(),
        cusps: t.cusp_count,
        generators: t.generator_count(),
        relators: t.relators().len(),
        edge_valences: t.edge_classes().iter().map(|e| e.valence()).collect(),
        filling: t.filling.clone(),
    };
    match args.format {
        Format::Text => println!(
            "tets={} edges={} cusps={} generators={} relators={}",
            report.tets, report.edges, report.cusps, report.generators, report.relators
        ),
        Format::Json => println!("{}", serde_json::to_string(&report).unwrap()),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolveOutput {
    input_sha256: String,
    filling: Vec<Option<(i64, i64)>>,
    solutions: Vec<ScanSolution>,
    max_volume_index: Option<usize>,
    all_zero_volume: bool,
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    require_positive("--tol-newton", args.tol_newton)?;
    let (t, hash) = load_triangulation(&args.input)?;
    let filling = parse_fill_overrides(&t, &args.fill)?;
    let sys = build_equations_with(&t, &filling).map_err(|e| CliError::Input(e.to_string()))?;
    let opts = NewtonOptions {
        tolerance: args.tol_newton,
        ..NewtonOptions::default()
    };
    let report: ScanReport = if args.scan {
        solve_all(&sys, args.restarts.max(1), args.seed, &opts)
    } else {
        let result = newton_solve(&sys, &ShapeVector::regular(t.tet_count), &opts)?;
        let cert = residual(&sys, &result.shapes);
        let vol = volume_of_shapes(&result.shapes);
        ScanReport {
            solutions: vec![ScanSolution {
                shapes: result
                    .shapes
                    .entries()
                    .iter()
                    .map(|z| [z.re, z.im])
                    .collect(),
                residual: cert,
                volume: vol.total,
                flags: Vec::new(),
            }],
            max_volume_index: Some(0),
            all_zero_volume: vol.total.abs() <= tol::ZERO_VOLUME,
            shape_vectors: vec![result.shapes],
        }
    };
    if report.solutions.is_empty() {
        return Err(CliError::NoSolution(
            "no Newton start converged to a certified solution".into(),
        ));
    }
    let out = SolveOutput {
        input_sha256: hash,
        filling,
        solutions: report.solutions,
        max_volume_index: report.max_volume_index,
        all_zero_volume: report.all_zero_volume,
    };
    match args.format {
        Format::Text => {
            for (i, s) in out.solutions.iter().enumerate() {
                let shapes = s
                    .shapes
                    .iter()
                    .map(|[re, im]| format!("{re:.12}{im:+.12}i"))
                    .collect::<Vec<_>>()
                    .join(", ");
                println!(
                    "solution {i}: volume={:.10} residual={:.3e} shapes=[{shapes}]",
                    s.volume, s.residual
                );
            }
            if let Some(i) = out.max_volume_index {
                println!("max volume: solution {i} ({:.10})", out.solutions[i].volume);
            }
            if out.all_zero_volume {
                println!("advisory: all found solutions have zero volume");
            }
        }
        Format::Json => println!("{}", serde_json::to_string(&out).unwrap()),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// volume
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VolumeOutput {
    input_sha256: String,
    #[serde(flatten)]
    report: crate::report::VolumeReport,
}

fn cmd_volume(args: &VolumeArgs) -> Result<(), CliError> {
    require_positive("--tol-relator", args.tol_relator)?;
    let (t, hash) = load_triangulation(&args.input)?;
    let report = match (&args.shapes, &args.rep) {
        (Some(path), None) => {
            let (text, _) = read_input(path)?;
            let file: ShapesFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let zs = file.to_complex();
            if zs.len() != t.tet_count {
                return Err(CliError::Input(format!(
                    "expected {} shapes, got {}",
                    t.tet_count,
                    zs.len()
                )));
            }
            let shapes = ShapeVector::new(zs).map_err(|e| CliError::Input(e.to_string()))?;
            volume_of_shapes(&shapes)
        }
        (None, Some(path)) => {
            let (text, _) = read_input(path)?;
            let rep = Representation::parse(&t, &text)?;
            if rep.relator_residual > args.tol_relator {
                return Err(CliError::ResidualGate(rep.relator_residual));
            }
            straighten_volume(&t, &rep, args.policy.to_policy())?
        }
        _ => {
            return Err(CliError::Input(
                "volume needs exactly one of --shapes or --rep".into(),
            ))
        }
    };
    let out = VolumeOutput {
        input_sha256: hash,
        report,
    };
    match args.format {
        Format::Text => {
            println!("total {:.10}", out.report.total);
            for (i, p) in out.report.per_tet.iter().enumerate() {
                let m = match p.modulus.value() {
                    Some(z) => format!("{:.12}{:+.12}i", z.re, z.im),
                    None => "degenerate".to_string(),
                };
                let flags = if p.flags.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", p.flags.join(","))
                };
                println!("tet {i}: modulus={m} volume={:.10}{flags}", p.volume);
            }
            println!("bound |total| <= n*v3: {}", out.report.bound_v3n);
            if let Some(r) = out.report.relator_residual {
                println!("relator residual: {r:.3e}");
            }
            if let Some(p) = &out.report.policy {
                println!("policy: {p}");
            }
        }
        Format::Json => println!("{}", serde_json::to_string(&out).unwrap()),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckLine {
    name: &'static str,
    passed: bool,
    tolerance: f64,
    detail: String,
}

#[derive(Serialize)]
struct CheckOutput {
    input_sha256: String,
    checks: Vec<CheckLine>,
    passed: bool,
}

struct Battery {
    lines: Vec<CheckLine>,
}

impl Battery {
    fn record(&mut self, name: &'static str, passed: bool, tolerance: f64, detail: String) {
        self.lines.push(CheckLine {
            name,
            passed,
            tolerance,
            detail,
        });
    }
}

fn random_transform(rng: &mut ChaCha8Rng) -> MoebiusTransform {
    loop {
        let mut entry = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        if let Ok(m) = MoebiusTransform::new(entry(), entry(), entry(), entry()) {
            return m;
        }
    }
}

fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    require_positive("--tol-newton", args.tol_newton)?;
    require_positive("--tol-relator", args.tol_relator)?;
    let (t, hash) = load_triangulation(&args.input)?;
    let opts = NewtonOptions {
        tolerance: args.tol_newton,
        ..NewtonOptions::default()
    };
    let policy = FixedPointPolicy::attracting();
    let mut battery = Battery { lines: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    // combinatorics invariants
    {
        let edges = t.edge_classes().len();
        let mut totals = vec![[0i64; 3]; t.tet_count];
        for e in t.edge_classes() {
            for (tet, row) in e.slot_counts(t.tet_count).into_iter().enumerate() {
                for s in 0..3 {
                    totals[tet][s] += row[s];
                }
            }
        }
        let totals_ok = totals.iter().all(|r| *r == [2, 2, 2]);
        battery.record(
            "edge-combinatorics",
            edges == t.tet_count && totals_ok,
            0.0,
            format!(
                "edge classes {edges}, tets {}, slot totals (2,2,2): {totals_ok}",
                t.tet_count
            ),
        );
    }

    // complete solution with certificate
    let unfilled = vec![None; t.cusp_count];
    let sys = build_equations_with(&t, &unfilled).map_err(|e| CliError::Input(e.to_string()))?;
    let complete = match newton_solve(&sys, &ShapeVector::regular(t.tet_count), &opts) {
        Ok(r) => {
            let cert = residual(&sys, &r.shapes);
            battery.record(
                "complete-solution-certificate",
                cert <= args.tol_newton * 10.0,
                args.tol_newton,
                format!("residual {cert:.3e} in {} iterations", r.iterations),
            );
            Some(r.shapes)
        }
        Err(e) => {
            battery.record(
                "complete-solution-certificate",
                false,
                args.tol_newton,
                e.to_string(),
            );
            None
        }
    };

    let mut complete_rep = None;
    let mut vol_complete = 0.0;
    if let Some(z) = &complete {
        vol_complete = volume_of_shapes(z).total;
        // straightening round trip at the complete solution
        match develop(&t, z) {
            Ok((_, rep)) => {
                match straighten_volume(&t, &rep, policy) {
                    Ok(rp) => {
                        let diff = (rp.total - vol_complete).abs();
                        battery.record(
                            "straightening-round-trip",
                            diff <= 1e-8,
                            1e-8,
                            format!(
                                "straightened {:.10} vs shape sum {:.10} (diff {diff:.3e})",
                                rp.total, vol_complete
                            ),
                        );
                    }
                    Err(e) => {
                        battery.record("straightening-round-trip", false, 1e-8, e.to_string())
                    }
                }
                complete_rep = Some(rep);
            }
            Err(e) => battery.record("straightening-round-trip", false, 1e-8, e.to_string()),
        }
    }

    if let Some(rep) = &complete_rep {
        // conjugation invariance under seeded random transforms
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for _ in 0..5 {
            let g = random_transform(&mut rng);
            match straighten_volume(&t, &rep.conjugated(&g), policy) {
                Ok(rp) => worst = worst.max((rp.total - vol_complete).abs()),
                Err(_) => ok = false,
            }
        }
        battery.record(
            "conjugation-invariance",
            ok && worst <= 1e-9,
            1e-9,
            format!("max deviation {worst:.3e} over 5 conjugations"),
        );

        // mirror anti-symmetry
        match straighten_volume(&t, &rep.entrywise_conj(), policy) {
            Ok(rp) => {
                let diff = (rp.total + vol_complete).abs();
                battery.record(
                    "mirror-antisymmetry",
                    diff <= 1e-9,
                    1e-9,
                    format!("mirror total {:.10} (defect {diff:.3e})", rp.total),
                );
            }
            Err(e) => battery.record("mirror-antisymmetry", false, 1e-9, e.to_string()),
        }

        // volume bound
        let bound = t.tet_count as f64 * ideal::v3() + tol::VOLUME_BOUND_SLACK;
        battery.record(
            "volume-bound",
            vol_complete.abs() <= bound,
            tol::VOLUME_BOUND_SLACK,
            format!("|{vol_complete:.10}| <= {bound:.10}"),
        );

        // rigidity certificate on a conjugated copy
        let g = random_transform(&mut rng);
        let conj = rep.conjugated(&g);
        match rigidity_check(&t, &conj, rep, vol_complete, policy) {
            Ok(r) => {
                let passed = matches!(r.verdict, RigidityVerdict::ConjugateToComplete { .. })
                    && r.conjugator
                        .map(|phi| phi.dist_up_to_sign(&g) <= 1e-7)
                        .unwrap_or(false);
                battery.record(
                    "rigidity-certificate",
                    passed,
                    1e-7,
                    format!("verdict {:?}", r.verdict),
                );
            }
            Err(e) => battery.record("rigidity-certificate", false, 1e-7, e.to_string()),
        }
    }

    // filled checks (uses --fill overrides; file fillings as fallback)
    let filling = parse_fill_overrides(&t, &args.fill)?;
    if filling.iter().any(|f| f.is_some()) {
        let filled_solution = build_equations_with(&t, &filling)
            .map_err(|e| CliError::Input(e.to_string()))
            .and_then(|fsys| {
                newton_solve(&fsys, &ShapeVector::regular(t.tet_count), &opts)
                    .map_err(CliError::from)
            });
        match filled_solution {
            Ok(sol) => {
                let shape_vol = volume_of_shapes(&sol.shapes).total;
                match develop(&t, &sol.shapes) {
                    Ok((_, frep)) => {
                        match straighten_volume(&t, &frep, policy) {
                            Ok(rp) => {
                                let diff = (rp.total - shape_vol).abs();
                                battery.record(
                                    "filled-round-trip",
                                    diff <= 1e-8,
                                    1e-8,
                                    format!(
                                        "straightened {:.10} vs shape sum {:.10}",
                                        rp.total, shape_vol
                                    ),
                                );
                            }
                            Err(e) => {
                                battery.record("filled-round-trip", false, 1e-8, e.to_string())
                            }
                        }
                        match fixed_point_independence_check(&t, &frep) {
                            Ok(IndependenceOutcome::Checked {
                                runs,
                                max_discrepancy,
                                pass,
                                ..
                            }) => battery.record(
                                "fixed-point-independence",
                                pass,
                                tol::POLICY_INDEPENDENCE,
                                format!("{runs} runs, max discrepancy {max_discrepancy:.3e}"),
                            ),
                            Ok(IndependenceOutcome::NotApplicable) => battery.record(
                                "fixed-point-independence",
                                true,
                                tol::POLICY_INDEPENDENCE,
                                "not applicable: peripheral images parabolic".into(),
                            ),
                            Err(e) => battery.record(
                                "fixed-point-independence",
                                false,
                                tol::POLICY_INDEPENDENCE,
                                e.to_string(),
                            ),
                        }
                    }
                    Err(e) => battery.record("filled-round-trip", false, 1e-8, e.to_string()),
                }
            }
            Err(e) => battery.record("filled-round-trip", false, 1e-8, e.message()),
        }
    } else if let Some(rep) = &complete_rep {
        match fixed_point_independence_check(&t, rep) {
            Ok(IndependenceOutcome::NotApplicable) => battery.record(
                "fixed-point-independence",
                true,
                tol::POLICY_INDEPENDENCE,
                "not applicable: complete structure has parabolic peripherals".into(),
            ),
            Ok(IndependenceOutcome::Checked {
                runs,
                max_discrepancy,
                pass,
                ..
            }) => battery.record(
                "fixed-point-independence",
                pass,
                tol::POLICY_INDEPENDENCE,
                format!("{runs} runs, max discrepancy {max_discrepancy:.3e}"),
            ),
            Err(e) => battery.record(
                "fixed-point-independence",
                false,
                tol::POLICY_INDEPENDENCE,
                e.to_string(),
            ),
        }
    }

    // supplied representation against the complete holonomy
    if let Some(path) = &args.rep {
        let loaded = read_input(path)
            .and_then(|(text, _)| Representation::parse(&t, &text).map_err(CliError::from));
        match loaded {
            Ok(rep) => {
                let gate_ok = rep.relator_residual <= args.tol_relator;
                battery.record(
                    "rep-relator-gate",
                    gate_ok,
                    args.tol_relator,
                    format!("relator residual {:.3e}", rep.relator_residual),
                );
                let rigidity = complete_rep
                    .as_ref()
                    .ok_or_else(|| CliError::NoSolution("no complete holonomy".into()))
                    .and_then(|c| {
                        rigidity_check(&t, &rep, c, vol_complete, policy).map_err(CliError::from)
                    });
                match rigidity {
                    Ok(r) => {
                        let passed = matches!(
                            r.verdict,
                            RigidityVerdict::ConjugateToComplete { .. }
                                | RigidityVerdict::StrictlySmallerVolume
                        );
                        battery.record(
                            "rep-rigidity",
                            passed,
                            tol::RIGIDITY_VOLUME,
                            format!("volume {:.10}, verdict {:?}", r.volume, r.verdict),
                        );
                    }
                    Err(e) => {
                        battery.record("rep-rigidity", false, tol::RIGIDITY_VOLUME, e.message())
                    }
                }
            }
            Err(e) => {
                battery.record("rep-relator-gate", false, args.tol_relator, e.message());
                battery.record(
                    "rep-rigidity",
                    false,
                    tol::RIGIDITY_VOLUME,
                    "representation unusable".into(),
                );
            }
        }
    }

    let passed = battery.lines.iter().all(|l| l.passed);
    let out = CheckOutput {
        input_sha256: hash,
        checks: battery.lines,
        passed,
    };
    match args.format {
        Format::Text => {
            for l in &out.checks {
                println!(
                    "{} {} (tolerance {:.1e}): {}",
                    if l.passed { "PASS" } else { "FAIL" },
                    l.name,
                    l.tolerance,
                    l.detail
                );
            }
        }
        Format::Json => println!("{}", serde_json::to_string(&out).unwrap()),
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}
