//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical property
//! fails (the report names it), 2 for malformed input or I/O errors.

pub mod corpus;
pub mod report;
pub mod wire;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cbmap::{CBMap, InvarianceMode, DEFAULT_DENSITY_SAMPLES};
use crate::check::CheckResult;
use crate::cone::{cone_cp_check, pd_falsify, Verdict, DEFAULT_FALSIFY_SAMPLES};
use crate::dilation::{
    dilate, isometry_bound_check, largest_core, unitary_equivalence, verify_dilation_identity,
    verify_representation, DilationResult,
};
use crate::error::{Error, Result};
use crate::numerics::TolerancePolicy;
use report::Report;
use wire::{read_json, write_file, AlgebraJson, DilationJson, GeneratorsJson, MapJson, PolyMatrixJson};

/// Random vector tuples per polynomial matrix in `cone-check`.
const CONE_TRIALS: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "pstar", version, about = "Partial *-algebras, CP maps and their dilations")]
pub struct Cli {
    /// Relative eigenvalue cutoff for rank decisions (default: dim · eps).
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_psd: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_verify: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    /// Random samples for sampled checks (density check, falsifier).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Quasi,
    Full,
}

impl From<Mode> for InvarianceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Quasi => InvarianceMode::Quasi,
            Mode::Full => InvarianceMode::Full,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the partial *-algebra axioms and semi-associativity.
    Validate { algebra: PathBuf },
    /// Hermitian symmetry, complete positivity and positivity of a map.
    CpCheck { map: PathBuf },
    /// Core conditions for the core stored in the map.
    CoreCheck {
        map: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Quasi)]
        mode: Mode,
    },
    /// Build the dilation and write it as JSON.
    Dilate {
        map: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Quasi)]
        mode: Mode,
    },
    /// Dilation identity, representation checks and the isometry checks.
    Verify { map: PathBuf, dilation: PathBuf },
    /// Unitary equivalence of two dilations, optionally checked against a map.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        map: Option<PathBuf>,
    },
    /// The largest core producing the same representation.
    LargestCore { map: PathBuf, dilation: PathBuf },
    /// Falsifier and cone complete positivity for polynomial matrices.
    ConeCheck { generators: PathBuf, polymatrices: PathBuf },
    /// Write the files of a named fixture group.
    Demo {
        /// FIX-M2, FIX-Q2, FIX-D2 or CONE.
        name: String,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
}

impl Cli {
    pub fn policy(&self) -> TolerancePolicy {
        TolerancePolicy {
            rank_tol_factor: self.tol_rank,
            psd_tol: self.tol_psd,
            verify_tol: self.tol_verify,
            seed: self.seed,
        }
    }
}

/// Parses `args` (without the program name) and runs the command.
/// Returns the exit code and the rendered report.
pub fn run<S: AsRef<str>>(args: &[S]) -> (i32, String) {
    let argv = std::iter::once("pstar").chain(args.iter().map(|s| s.as_ref()));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.to_string());
        }
    };
    let echo: Vec<String> = args.iter().map(|s| s.as_ref().to_string()).collect();
    let report = execute(&cli, echo);
    let text = match cli.report {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text(),
    };
    (report.status.exit_code(), text)
}

/// Runs a parsed command and builds its report.
pub fn execute(cli: &Cli, echo: Vec<String>) -> Report {
    let pol = cli.policy();
    let mut report = Report::new(echo, &pol);
    let outcome = pol.validate().and_then(|_| dispatch(cli, &pol, &mut report));
    if let Err(e) = outcome {
        if is_input_error(&e) {
            report.fail_with_error(&e);
        } else {
            report.failure("precondition", &e);
        }
    }
    report.finish()
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::MalformedInput(_) | Error::Io(_) | Error::DimensionMismatch(_) | Error::ArityMismatch { .. }
    )
}

fn load_map(path: &Path) -> Result<CBMap> {
    read_json::<MapJson>(path)?.to_map()
}

fn load_dilation(path: &Path) -> Result<DilationResult> {
    read_json::<DilationJson>(path)?.to_dilation()
}

fn dispatch(cli: &Cli, pol: &TolerancePolicy, r: &mut Report) -> Result<()> {
    match &cli.command {
        Command::Validate { algebra } => {
            let a = read_json::<AlgebraJson>(algebra)?.to_algebra()?;
            r.value("dimension", a.dim());
            r.checks(&a.validate_axioms(pol).checks);
            let s = a.check_semi_associative(pol);
            let witness = s
                .witness
                .map(|(i, j, k)| format!("({}, {}, {})", a.label(i), a.label(j), a.label(k)));
            r.check(&CheckResult::within("semi_associativity", s.max_residual, pol.verify_tol, witness));
        }
        Command::CpCheck { map } => {
            let phi = load_map(map)?;
            let sym = phi.hermitian_symmetry_residual();
            let tol = pol.verify_tol * phi.max_entry().max(1.0);
            r.check(&CheckResult::within(
                "hermitian_symmetry",
                sym,
                tol,
                Some("Φ(x, y)(ξ, η) differs from conj Φ(y, x)(η, ξ)".into()),
            ));
            if sym > tol {
                return Ok(());
            }
            let cp = phi.check_completely_positive(pol)?;
            r.real("min_eig", cp.min_eig);
            let residual = (-cp.min_eig).max(0.0);
            r.check(&if cp.is_cp {
                CheckResult::pass("completely_positive", residual)
            } else {
                CheckResult::fail(
                    "completely_positive",
                    residual,
                    format!("flattened Gram has eigenvalue {:.6e}", cp.min_eig),
                )
            });
            let pos = phi.check_positive(pol)?;
            r.real("positive_min_eig", pos.min_eig);
            let mut c = CheckResult::pass("positive", (-pos.min_eig).max(0.0));
            if !pos.positive {
                c = CheckResult::fail("positive", (-pos.min_eig).max(0.0), pos.witness.unwrap_or_default());
            }
            r.check(&c);
        }
        Command::CoreCheck { map, mode } => {
            let phi = load_map(map)?;
            let samples = cli.samples.unwrap_or(DEFAULT_DENSITY_SAMPLES);
            let core = phi.check_core_with_samples(phi.core(), pol, (*mode).into(), samples)?;
            r.value("mode", core.mode.as_str());
            r.value("totally_invariant", core.totally_invariant);
            r.checks(&core.conditions);
        }
        Command::Dilate { map, output, mode } => {
            let phi = load_map(map)?;
            let dil = dilate(&phi, pol, (*mode).into())?;
            describe_dilation(r, &dil);
            r.check(&CheckResult::within("well_defined", dil.welldef_residual, pol.verify_tol, None));
            r.check(&CheckResult::within("star", dil.star_residual, pol.verify_tol, None));
            let text = wire::to_json(&DilationJson::from_dilation(&dil, phi.x_dim()));
            write_file(output, &text)?;
        }
        Command::Verify { map, dilation } => {
            let phi = load_map(map)?;
            let dil = load_dilation(dilation)?;
            describe_dilation(r, &dil);
            let residual = verify_dilation_identity(&phi, &dil, pol)?;
            r.check(&CheckResult::within(
                "dilation_identity",
                residual,
                pol.verify_tol,
                Some("Φ(ax, by) differs from <π(a)λ(x ⊗ ·), π(b)λ(y ⊗ ·)>".into()),
            ));
            let reps = verify_representation(&dil, phi.algebra(), pol, dil.mode)?;
            r.checks(&reps);
            if dil.v.is_some() {
                let iso = isometry_bound_check(&phi, &dil, pol)?;
                r.real("norm_v", iso.norm_v);
                r.value("is_isometry", iso.is_isometry);
                r.real("unit_form_residual", iso.unit_form_residual);
                r.check(&CheckResult::within(
                    "factorization",
                    iso.factorization_residual,
                    pol.verify_tol,
                    Some("Φ(a, 1) differs from V^H π(a) V".into()),
                ));
                let consistent = iso.is_isometry == (iso.unit_form_residual <= pol.verify_tol);
                r.check(&if consistent {
                    CheckResult::pass("isometry_dichotomy", 0.0)
                } else {
                    CheckResult::fail(
                        "isometry_dichotomy",
                        iso.unit_form_residual,
                        "V is an isometry iff Φ(1, 1) is the standard form, but the two disagree".into(),
                    )
                });
            }
        }
        Command::Equiv { first, second, map } => {
            let d1 = load_dilation(first)?;
            let d2 = load_dilation(second)?;
            if let Some(map) = map {
                let phi = load_map(map)?;
                for (name, d) in [("first_reproduces_map", &d1), ("second_reproduces_map", &d2)] {
                    let residual = verify_dilation_identity(&phi, d, pol)?;
                    r.check(&CheckResult::within(name, residual, pol.verify_tol, Some("dilation identity fails".into())));
                }
            }
            let eq = unitary_equivalence(&d1, &d2, pol)?;
            r.check(&CheckResult::within(
                "unitary_equivalence",
                eq.residual,
                pol.verify_tol,
                Some("the constructed U is not an intertwining unitary".into()),
            ));
        }
        Command::LargestCore { map, dilation } => {
            let phi = load_map(map)?;
            let dil = load_dilation(dilation)?;
            let bl = largest_core(&phi, &dil, pol)?;
            r.value("dimension", bl.len());
            r.value(
                "core",
                serde_json::to_value(bl.vectors().iter().map(wire::vec_to).collect::<Vec<_>>())
                    .expect("vectors serialize"),
            );
            let contains = bl.contains_subspace(&dil.core, pol)?;
            r.check(&if contains {
                CheckResult::pass("contains_input_core", 0.0)
            } else {
                CheckResult::fail("contains_input_core", 1.0, "input core is not contained".into())
            });
            let phi_l = phi.with_core(bl.clone())?;
            let dil_l = dilate(&phi_l, pol, dil.mode)?;
            let again = largest_core(&phi_l, &dil_l, pol)?;
            let fixed = again.same_span(&bl, pol)?;
            r.check(&if fixed {
                CheckResult::pass("fixed_point", 0.0)
            } else {
                CheckResult::fail("fixed_point", 1.0, format!("recomputation has dimension {}", again.len()))
            });
        }
        Command::ConeCheck { generators, polymatrices } => {
            let gens = read_json::<GeneratorsJson>(generators)?.to_tuple(pol)?;
            let ps = read_json::<Vec<PolyMatrixJson>>(polymatrices)?
                .iter()
                .map(|p| p.to_polymatrix())
                .collect::<Result<Vec<_>>>()?;
            r.real("joint_residual", gens.spectrum().residual);
            r.check(&CheckResult::within("joint_diagonalization", gens.spectrum().residual, pol.verify_tol, None));
            let samples = cli.samples.unwrap_or(DEFAULT_FALSIFY_SAMPLES);
            let mut all_plausible = true;
            for (k, p) in ps.iter().enumerate() {
                match pd_falsify(p, pol, samples)? {
                    Verdict::Plausible { min_eig, .. } => {
                        r.check(&CheckResult::pass(&format!("falsifier[{k}]"), (-min_eig).max(0.0)));
                    }
                    Verdict::Counterexample { point, min_eig } => {
                        all_plausible = false;
                        r.check(&CheckResult::fail(
                            &format!("falsifier[{k}]"),
                            -min_eig,
                            format!("eigenvalue {min_eig:.6e} at {point:?}"),
                        ));
                    }
                }
            }
            if all_plausible {
                let cone = cone_cp_check(&gens, &ps, CONE_TRIALS, pol)?;
                for (k, e) in cone.entries.iter().enumerate() {
                    r.check(&CheckResult::within(
                        &format!("sampled[{k}]"),
                        (-e.sampled_min).max(0.0),
                        pol.psd_tol,
                        Some(format!("normalized sum {:.6e}", e.sampled_min)),
                    ));
                    let mut c = CheckResult::pass(&format!("joint_spectrum[{k}]"), (-e.exact_min_eig).max(0.0));
                    if !e.exact_passed {
                        c = CheckResult::fail(&c.name, c.residual, format!("P(λ) has eigenvalue {:.6e}", e.exact_min_eig));
                    }
                    r.check(&c);
                }
            }
        }
        Command::Demo { name, output } => {
            let files = corpus::fixture_files(name)?;
            std::fs::create_dir_all(output).map_err(|e| Error::Io(format!("{}: {e}", output.display())))?;
            let mut written = Vec::new();
            for (file, text) in files {
                write_file(&output.join(&file), &text)?;
                written.push(file);
            }
            r.value("files", written);
        }
    }
    Ok(())
}

fn describe_dilation(r: &mut Report, dil: &DilationResult) {
    r.value("h_dim", dil.h_dim);
    r.value("has_v", dil.v.is_some());
    r.value("mode", dil.mode.as_str());
    r.value("gram_spectrum", dil.gram_spectrum.clone());
    r.real("welldef_residual", dil.welldef_residual);
}
