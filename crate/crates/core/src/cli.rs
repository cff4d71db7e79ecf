//! The `sepspace` command line.
//!
//! Every subcommand returns a [`RunReport`]; [`run`] prints it and maps it to
//! an exit code (0 pass, 1 verification failure, 2 input error). Reports are
//! printed as `key = value` lines followed by `verdict: PASS` or
//! `verdict: FAIL`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::basis::{basis_by_kind, verify_basis, BasisKind, OperatorBasis};
use crate::cross_norm::{decomposition_cross_bound, gamma2_pure, SchmidtVector};
use crate::decomposition::{
    diagnostics, diagnostics_for_target, maxent_decomposition, pure_state_decomposition, verify,
    SeparableDecomposition,
};
use crate::duality::{
    cone_membership, qubit_dual_region, unit_trace_extremality_probe, GeneratorSet, MeasurementFamily,
};
use crate::error::{Error, Result};
use crate::lhv::{lhv_from_decomposition, lhv_joint, lhv_sample, lhv_table, quantum_joint, LhvModel};
use crate::linalg::{bloch_operator, frobenius_distance, hs_inner, maxent_state, schmidt_form_state, DenseOperator};

/// Sampler cells may deviate from the model by at most this many standard deviations.
const SAMPLE_SIGMAS: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(name = "sepspace", version, about = "Generalized separable decompositions and their verification")]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Absolute tolerance for verification verdicts.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, env = "SEPSPACE_SEED", default_value_t = 0)]
    seed: u64,
    /// Output JSON file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or verify operator bases.
    Basis {
        #[command(subcommand)]
        action: BasisCmd,
    },
    /// Build a product decomposition.
    Decompose {
        #[command(subcommand)]
        action: DecomposeCmd,
    },
    /// Check a decomposition reconstructs a target state.
    Verify {
        #[arg(long)]
        decomposition: PathBuf,
        /// `maxent:d`, `schmidt:w1,w2,...` (squared coefficients) or a state JSON file.
        #[arg(long)]
        target: String,
    },
    /// Matching-condition and norm diagnostics of a decomposition.
    Diagnostics {
        #[arg(long)]
        decomposition: PathBuf,
        #[command(flatten)]
        basis: BasisSource,
        /// Target state; defaults to the maximally entangled state.
        #[arg(long)]
        target: Option<String>,
    },
    /// Pure-state cross norm and the product bound of a decomposition.
    Crossnorm {
        #[arg(long)]
        target: String,
        #[arg(long)]
        decomposition: Option<PathBuf>,
    },
    /// Dual cones of measurement families.
    Dual {
        #[command(subcommand)]
        action: DualCmd,
    },
    /// Conic hulls of a basis.
    Cone {
        #[command(subcommand)]
        action: ConeCmd,
    },
    /// Local hidden variable models.
    Lhv {
        #[command(subcommand)]
        action: LhvCmd,
    },
}

#[derive(Debug, Subcommand)]
enum BasisCmd {
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "gell-mann")]
        kind: BasisKind,
    },
    Verify {
        file: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum DecomposeCmd {
    /// Decomposition of the maximally entangled state over a basis.
    Maxent {
        #[command(flatten)]
        basis: BasisSource,
    },
    /// Equal-weight decomposition of a pure state in Schmidt form.
    Pure {
        /// `schmidt:w1,w2,...` or `maxent:d`.
        #[arg(long)]
        target: String,
    },
}

#[derive(Debug, Subcommand)]
enum DualCmd {
    /// Check an operator, or both sides of a decomposition, against measurement families.
    Check {
        /// Operator JSON file or `bloch:x,y,z`.
        #[arg(long, conflicts_with = "decomposition", required_unless_present = "decomposition")]
        operator: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, requires_all = ["family_a", "family_b"])]
        decomposition: Option<PathBuf>,
        #[command(flatten)]
        families: FamilyPair,
    },
    /// Scan the qubit Bloch ball for measurement elements compatible with a basis.
    Region {
        #[command(flatten)]
        basis: BasisSource,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 1.2)]
        extent: f64,
    },
}

#[derive(Debug, Subcommand)]
enum ConeCmd {
    /// Nonnegative-combination membership of an operator in the conic hull of a basis.
    Member {
        #[arg(long)]
        operator: String,
        #[command(flatten)]
        basis: BasisSource,
    },
    /// Sample unit-trace elements of conic(W ∪ Q) and compare their norm to √d.
    Probe {
        #[command(flatten)]
        basis: BasisSource,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Debug, Subcommand)]
enum LhvCmd {
    Build {
        #[arg(long)]
        decomposition: PathBuf,
        #[command(flatten)]
        families: FamilyPair,
    },
    Table {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        a_setting: usize,
        #[arg(long)]
        b_setting: usize,
    },
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        a_setting: usize,
        #[arg(long)]
        b_setting: usize,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
    },
}

/// `--basis FILE`, or a factory basis from `--dim`/`--kind`/`--seed`.
#[derive(Debug, Args)]
struct BasisSource {
    #[arg(long, conflicts_with_all = ["dim", "kind"])]
    basis: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    kind: Option<BasisKind>,
}

/// Measurement families: `pauli`, `trivial:d`, or a family JSON file.
#[derive(Debug, Args)]
struct FamilyPair {
    #[arg(long)]
    family_a: Option<String>,
    #[arg(long)]
    family_b: Option<String>,
    /// Transpose every B-side element before use.
    #[arg(long)]
    transpose_b: bool,
}

/// Outcome of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts_written: Vec<PathBuf>,
    /// Free-form lines printed before the metrics, such as tables.
    #[serde(skip)]
    pub text: Vec<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn flag(&mut self, name: &str, value: bool) {
        self.metric(name, if value { 1.0 } else { 0.0 });
    }

    fn write<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        self.artifacts_written.push(path.to_path_buf());
        Ok(())
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        for line in &self.text {
            writeln!(f, "{line}")?;
        }
        for (k, v) in &self.metrics {
            if v.fract() == 0.0 && v.abs() < 1e15 {
                writeln!(f, "{k} = {v}")?;
            } else {
                writeln!(f, "{k} = {v:e}")?;
            }
        }
        for p in &self.artifacts_written {
            writeln!(f, "wrote: {}", p.display())?;
        }
        write!(f, "verdict: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Parses `argv` (including the program name), runs the command, prints the
/// report and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            println!("{report}");
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e @ Error::DualViolation { .. }) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs a parsed command without printing.
pub fn execute(cli: &Cli) -> Result<RunReport> {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol <= 0.0 {
        return Err(Error::InvalidInput(format!("--tol must be positive, got {}", g.tol)));
    }
    match &cli.command {
        Command::Basis { action } => match action {
            BasisCmd::Gen { dim, kind } => basis_gen(g, *dim, *kind),
            BasisCmd::Verify { file } => basis_verify(g, file),
        },
        Command::Decompose { action } => match action {
            DecomposeCmd::Maxent { basis } => decompose_maxent(g, basis),
            DecomposeCmd::Pure { target } => decompose_pure(g, target),
        },
        Command::Verify { decomposition, target } => verify_cmd(g, decomposition, target),
        Command::Diagnostics {
            decomposition,
            basis,
            target,
        } => diagnostics_cmd(g, decomposition, basis, target.as_deref()),
        Command::Crossnorm { target, decomposition } => crossnorm_cmd(g, target, decomposition.as_deref()),
        Command::Dual { action } => match action {
            DualCmd::Check {
                operator,
                family,
                decomposition,
                families,
            } => match (operator, decomposition) {
                (Some(op), _) => dual_check_operator(op, family.as_deref(), families.transpose_b),
                (None, Some(dec)) => dual_check_decomposition(dec, families),
                (None, None) => Err(Error::InvalidInput("need --operator or --decomposition".into())),
            },
            DualCmd::Region { basis, grid, extent } => dual_region(g, basis, *grid, *extent),
        },
        Command::Cone { action } => match action {
            ConeCmd::Member { operator, basis } => cone_member(g, operator, basis),
            ConeCmd::Probe { basis, trials } => cone_probe(g, basis, *trials),
        },
        Command::Lhv { action } => match action {
            LhvCmd::Build { decomposition, families } => lhv_build(g, decomposition, families),
            LhvCmd::Table {
                model,
                a_setting,
                b_setting,
            } => lhv_table_cmd(g, model, *a_setting, *b_setting),
            LhvCmd::Sample {
                model,
                a_setting,
                b_setting,
                shots,
            } => lhv_sample_cmd(g, model, *a_setting, *b_setting, *shots),
        },
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn parse_reals(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("not a number: {x:?}")))
        })
        .collect()
}

fn parse_dim(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not a dimension: {s:?}")))
}

/// A target state, with its Schmidt coefficients when given by shorthand.
struct Target {
    state: DenseOperator,
    schmidt: Option<SchmidtVector>,
}

fn parse_target(spec: &str) -> Result<Target> {
    if let Some(d) = spec.strip_prefix("maxent:") {
        let d = parse_dim(d)?;
        return Ok(Target {
            state: maxent_state(d)?,
            schmidt: Some(SchmidtVector::uniform(d)?),
        });
    }
    if let Some(w) = spec.strip_prefix("schmidt:") {
        let lambda = SchmidtVector::from_squared(&parse_reals(w)?)?;
        // keep zero coefficients so the target has the requested local dimension
        return Ok(Target {
            state: schmidt_form_state(lambda.values())?,
            schmidt: Some(lambda),
        });
    }
    Ok(Target {
        state: read_json(Path::new(spec))?,
        schmidt: None,
    })
}

fn parse_operator(spec: &str) -> Result<DenseOperator> {
    if let Some(r) = spec.strip_prefix("bloch:") {
        let r = parse_reals(r)?;
        let r: [f64; 3] = r
            .try_into()
            .map_err(|_| Error::InvalidInput("bloch: needs three components".into()))?;
        return Ok(bloch_operator(r));
    }
    read_json(Path::new(spec))
}

fn parse_family(spec: &str) -> Result<MeasurementFamily> {
    if spec == "pauli" {
        return Ok(MeasurementFamily::pauli());
    }
    if let Some(d) = spec.strip_prefix("trivial:") {
        let d = parse_dim(d)?;
        if d == 0 {
            return Err(Error::InvalidInput("trivial family needs a positive dimension".into()));
        }
        return Ok(MeasurementFamily::trivial(d));
    }
    read_json(Path::new(spec))
}

fn family_pair(f: &FamilyPair) -> Result<(MeasurementFamily, MeasurementFamily)> {
    let need = |x: &Option<String>, side: &str| {
        x.as_deref()
            .ok_or_else(|| Error::InvalidInput(format!("--family-{side} is required")))
            .and_then(parse_family)
    };
    let fa = need(&f.family_a, "a")?;
    let mut fb = need(&f.family_b, "b")?;
    if f.transpose_b {
        fb = fb.transposed();
    }
    Ok((fa, fb))
}

fn load_basis(g: &GlobalArgs, src: &BasisSource, default: Option<(usize, BasisKind)>) -> Result<OperatorBasis> {
    if let Some(path) = &src.basis {
        return read_json(path);
    }
    match (src.dim, src.kind, default) {
        (Some(d), kind, _) => basis_by_kind(kind.unwrap_or(BasisKind::GellMann), d, g.seed),
        (None, kind, Some((d, default_kind))) => basis_by_kind(kind.unwrap_or(default_kind), d, g.seed),
        (None, _, None) => Err(Error::InvalidInput("need --basis FILE or --dim".into())),
    }
}

fn basis_metrics(r: &mut RunReport, b: &OperatorBasis, tol: f64) {
    let v = verify_basis(b);
    r.metric("dim", v.dim as f64);
    r.metric("operators", b.len() as f64);
    r.metric("gram_residual", v.gram_residual);
    r.metric("norm_residual", v.norm_residual);
    r.metric("tol", tol);
    if let Some(h) = v.hermiticity_residual {
        r.metric("hermiticity_residual", h);
    }
    if let Some(t) = v.unit_trace_residual {
        r.metric("unit_trace_residual", t);
    }
    if let Some(t) = v.min_real_trace {
        r.metric("min_real_trace", t);
    }
    r.text.push(format!("kind: {}", b.kind().name()));
    r.pass = v.gram_residual <= tol
        && v.norm_residual <= tol
        && v.hermiticity_residual.is_none_or(|h| h <= tol)
        && v.unit_trace_residual.is_none_or(|t| t <= tol)
        && v.min_real_trace.is_none_or(|t| t > 0.0);
}

fn basis_gen(g: &GlobalArgs, dim: usize, kind: BasisKind) -> Result<RunReport> {
    let b = basis_by_kind(kind, dim, g.seed)?;
    let mut r = RunReport::new("basis gen");
    basis_metrics(&mut r, &b, g.tol);
    if let Some(out) = &g.out {
        r.write(out, &b)?;
    }
    Ok(r)
}

fn basis_verify(g: &GlobalArgs, file: &Path) -> Result<RunReport> {
    let b: OperatorBasis = read_json(file)?;
    let mut r = RunReport::new("basis verify");
    basis_metrics(&mut r, &b, g.tol);
    Ok(r)
}

fn decomposition_metrics(r: &mut RunReport, dec: &SeparableDecomposition, target: &DenseOperator, tol: f64) -> Result<()> {
    let v = verify(dec, target, tol)?;
    let bound = decomposition_cross_bound(dec);
    r.metric("terms", dec.len() as f64);
    r.metric("reconstruction_error", v.distance);
    r.metric("weight_sum_residual", v.weight_sum_residual);
    r.metric("norm_product_sum", bound.sum);
    r.metric("norm_product_max", bound.max);
    r.metric("tol", tol);
    r.pass = v.passed;
    Ok(())
}

fn decompose_maxent(g: &GlobalArgs, src: &BasisSource) -> Result<RunReport> {
    let b = load_basis(g, src, None)?;
    let dec = maxent_decomposition(&b)?;
    let mut r = RunReport::new("decompose maxent");
    decomposition_metrics(&mut r, &dec, &maxent_state(b.dim())?, g.tol)?;
    r.metric("dim", b.dim() as f64);
    if let Some(out) = &g.out {
        r.write(out, &dec)?;
    }
    Ok(r)
}

fn decompose_pure(g: &GlobalArgs, target: &str) -> Result<RunReport> {
    let lambda = parse_target(target)?
        .schmidt
        .ok_or_else(|| Error::InvalidInput("decompose pure needs a maxent: or schmidt: target".into()))?;
    let dec = pure_state_decomposition(&lambda)?;
    let mut r = RunReport::new("decompose pure");
    decomposition_metrics(&mut r, &dec, &lambda.target_state(), g.tol)?;
    r.metric("schmidt_rank", lambda.rank() as f64);
    r.metric("gamma2", gamma2_pure(&lambda));
    if let Some(out) = &g.out {
        r.write(out, &dec)?;
    }
    Ok(r)
}

fn verify_cmd(g: &GlobalArgs, dec: &Path, target: &str) -> Result<RunReport> {
    let dec: SeparableDecomposition = read_json(dec)?;
    let target = parse_target(target)?.state;
    let mut r = RunReport::new("verify");
    decomposition_metrics(&mut r, &dec, &target, g.tol)?;
    Ok(r)
}

fn diagnostics_cmd(g: &GlobalArgs, dec: &Path, src: &BasisSource, target: Option<&str>) -> Result<RunReport> {
    let dec: SeparableDecomposition = read_json(dec)?;
    // matching conditions hold in every orthonormal basis; matrix units are the neutral default
    let b = load_basis(g, src, Some((dec.dim_a(), BasisKind::MatrixUnit)))?;
    let diag = match target {
        Some(t) => diagnostics_for_target(&dec, &b, &parse_target(t)?.state)?,
        None => diagnostics(&dec, &b)?,
    };
    let mut r = RunReport::new("diagnostics");
    let np = &diag.norm_products;
    r.metric("reconstruction_error", diag.reconstruction_error);
    r.metric("terms", diag.term_count as f64);
    r.metric("distinct_a_ops", diag.distinct_a_ops as f64);
    r.metric("distinct_b_ops", diag.distinct_b_ops as f64);
    r.metric("norm_product_min", np.iter().copied().fold(f64::INFINITY, f64::min));
    r.metric("norm_product_max", np.iter().copied().fold(0.0, f64::max));
    r.metric("extremal_norm_product", diag.extremal_norm_product);
    r.flag("all_terms_extremal", diag.all_terms_extremal);
    r.metric("match_residual", diag.match_residual);
    r.metric("overlap_sum", diag.overlap_sum);
    r.metric("overlap_expected", diag.overlap_expected);
    r.metric("proportionality_residual", diag.proportionality_residual);
    r.metric("tol", g.tol);
    r.pass = diag.reconstruction_error <= g.tol
        && diag.match_residual <= g.tol
        && (diag.overlap_sum - diag.overlap_expected).abs() <= g.tol;
    if let Some(out) = &g.out {
        r.write(out, &diag)?;
    }
    Ok(r)
}

fn crossnorm_cmd(g: &GlobalArgs, target: &str, dec: Option<&Path>) -> Result<RunReport> {
    let t = parse_target(target)?;
    let lambda = t
        .schmidt
        .ok_or_else(|| Error::InvalidInput("crossnorm needs a maxent: or schmidt: target".into()))?;
    let gamma = gamma2_pure(&lambda);
    let mut r = RunReport::new("crossnorm");
    r.metric("gamma2", gamma);
    r.metric("tol", g.tol);
    match dec {
        Some(path) => {
            let dec: SeparableDecomposition = read_json(path)?;
            let bound = decomposition_cross_bound(&dec);
            let err = frobenius_distance(&dec.reconstruct(), &t.state)?;
            r.metric("reconstruction_error", err);
            r.metric("norm_product_sum", bound.sum);
            r.metric("norm_product_max", bound.max);
            r.metric("gap", bound.sum - gamma);
            // a valid decomposition can only bound the cross norm from above
            r.pass = err <= g.tol && bound.sum >= gamma - g.tol;
        }
        None => {
            let bound = decomposition_cross_bound(&pure_state_decomposition(&lambda)?);
            r.metric("norm_product_sum", bound.sum);
            r.metric("gap", bound.sum - gamma);
            r.pass = (bound.sum - gamma).abs() <= g.tol;
        }
    }
    Ok(r)
}

/// Smallest `Re tr(X M)` over the family, and how many elements go below `−DUAL_TOL`.
fn pairing_summary(x: &DenseOperator, family: &MeasurementFamily) -> Result<(f64, usize)> {
    crate::error::check_dim(family.dim(), x.dim())?;
    let mut min = f64::INFINITY;
    let mut bad = 0;
    for m in family.povms().iter().flat_map(|p| p.elements()) {
        let v = hs_inner(x, &m.adjoint())?.re;
        min = min.min(v);
        if v < -crate::duality::DUAL_TOL {
            bad += 1;
        }
    }
    Ok((min, bad))
}

fn dual_check_operator(op: &str, family: Option<&str>, transpose: bool) -> Result<RunReport> {
    let x = parse_operator(op)?;
    let mut fam = parse_family(family.ok_or_else(|| Error::InvalidInput("--family is required".into()))?)?;
    if transpose {
        fam = fam.transposed();
    }
    let (min, bad) = pairing_summary(&x, &fam)?;
    let mut r = RunReport::new("dual check");
    r.metric("min_pairing", min);
    r.metric("violations", bad as f64);
    r.pass = bad == 0;
    Ok(r)
}

fn dual_check_decomposition(dec: &Path, families: &FamilyPair) -> Result<RunReport> {
    let dec: SeparableDecomposition = read_json(dec)?;
    let (fa, fb) = family_pair(families)?;
    let mut r = RunReport::new("dual check");
    let mut ok = true;
    for (side, ops, fam) in [("a", dec.a_ops(), &fa), ("b", dec.b_ops(), &fb)] {
        let mut min = f64::INFINITY;
        let mut bad = 0;
        for (k, x) in ops.iter().enumerate() {
            let (m, b) = pairing_summary(x, fam)?;
            if b > 0 {
                r.text.push(format!("term {k}: {side}-side operator has {b} negative pairing(s)"));
            }
            min = min.min(m);
            bad += b;
        }
        r.metric(&format!("min_pairing_{side}"), min);
        r.metric(&format!("violations_{side}"), bad as f64);
        ok &= bad == 0;
    }
    r.pass = ok;
    Ok(r)
}

fn dual_region(g: &GlobalArgs, src: &BasisSource, grid: usize, extent: f64) -> Result<RunReport> {
    let b = load_basis(g, src, Some((2, BasisKind::PhasePoint)))?;
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidInput(format!("--extent must be positive, got {extent}")));
    }
    let gens = GeneratorSet::new(b.operators().to_vec(), true)?;
    let scan = qubit_dual_region(&gens, grid, extent)?;
    let mut r = RunReport::new("dual region");
    r.metric("points", scan.points as f64);
    r.metric("compatible", scan.compatible as f64);
    r.metric("disagreements", scan.disagreements as f64);
    r.pass = scan.disagreements == 0;
    if let Some(out) = &g.out {
        r.write(out, &scan)?;
    }
    Ok(r)
}

fn cone_member(g: &GlobalArgs, op: &str, src: &BasisSource) -> Result<RunReport> {
    let x = parse_operator(op)?;
    let b = load_basis(g, src, Some((x.dim(), BasisKind::PhasePoint)))?;
    let gens = GeneratorSet::new(b.operators().to_vec(), false)?;
    let m = cone_membership(&x, &gens, g.tol)?;
    let mut r = RunReport::new("cone member");
    r.flag("member", m.member);
    r.metric("residual", m.residual);
    r.metric("coefficient_sum", m.coefficients.iter().sum());
    r.metric("tol", g.tol);
    r.text.push(format!("coefficients: {:?}", m.coefficients));
    r.pass = m.member;
    if let Some(out) = &g.out {
        r.write(out, &m)?;
    }
    Ok(r)
}

fn cone_probe(g: &GlobalArgs, src: &BasisSource, trials: usize) -> Result<RunReport> {
    let b = load_basis(g, src, Some((2, BasisKind::PhasePoint)))?;
    let gens = GeneratorSet::new(b.operators().to_vec(), true)?;
    let p = unit_trace_extremality_probe(&gens, trials, g.seed)?;
    let mut r = RunReport::new("cone probe");
    r.metric("dim", p.dim as f64);
    r.metric("trials", p.trials as f64);
    r.metric("accepted", p.accepted as f64);
    r.metric("skipped_near_vertex", p.skipped_near_vertex as f64);
    r.metric("max_norm_sq", p.max_norm_sq);
    r.metric("bound", p.bound);
    r.metric("vertex_norm_sq", p.dim as f64);
    r.flag("below_vertex_norm", p.below_vertex_norm);
    r.metric("max_norm_sq_generators_only", p.max_norm_sq_generators_only);
    r.metric("max_identity_residual", p.max_identity_residual);
    r.metric("max_triangle_excess", p.max_triangle_excess);
    r.metric("max_vertex_residual", p.max_vertex_residual);
    r.metric("max_density_norm", p.max_density_norm);
    r.pass = p.passed;
    if let Some(out) = &g.out {
        r.write(out, &p)?;
    }
    Ok(r)
}

fn lhv_build(g: &GlobalArgs, dec: &Path, families: &FamilyPair) -> Result<RunReport> {
    let dec: SeparableDecomposition = read_json(dec)?;
    let (fa, fb) = family_pair(families)?;
    let model = lhv_from_decomposition(&dec, &fa, &fb)?;
    let state = dec.reconstruct();
    let mut worst: f64 = 0.0;
    for (i, pa) in fa.povms().iter().enumerate() {
        for (j, pb) in fb.povms().iter().enumerate() {
            for (a, m) in pa.elements().iter().enumerate() {
                for (b, n) in pb.elements().iter().enumerate() {
                    let diff = lhv_joint(&model, i, a, j, b)? - quantum_joint(&state, m, n)?;
                    worst = worst.max(diff.abs());
                }
            }
        }
    }
    let mut r = RunReport::new("lhv build");
    r.metric("hidden_values", model.hidden_probs.len() as f64);
    r.metric("settings_a", model.settings_a() as f64);
    r.metric("settings_b", model.settings_b() as f64);
    r.metric("max_born_deviation", worst);
    r.metric("tol", g.tol);
    r.pass = worst <= g.tol;
    if let Some(out) = &g.out {
        r.write(out, &model)?;
    }
    Ok(r)
}

fn lhv_table_cmd(g: &GlobalArgs, model: &Path, a: usize, b: usize) -> Result<RunReport> {
    let model: LhvModel = read_json(model)?;
    let t = lhv_table(&model, a, b)?;
    let total: f64 = t.probs.iter().flatten().sum();
    let mut r = RunReport::new("lhv table");
    r.text.push(t.to_string().trim_end().to_string());
    r.metric("total_probability", total);
    if t.probs.len() == 2 && t.probs.iter().all(|row| row.len() == 2) {
        r.metric("correlation", t.correlation());
    }
    r.pass = (total - 1.0).abs() <= g.tol;
    if let Some(out) = &g.out {
        r.write(out, &t)?;
    }
    Ok(r)
}

fn lhv_sample_cmd(g: &GlobalArgs, model: &Path, a: usize, b: usize, shots: u64) -> Result<RunReport> {
    let model: LhvModel = read_json(model)?;
    let counts = lhv_sample(&model, a, b, shots, g.seed)?;
    let n = shots as f64;
    let mut worst: f64 = 0.0;
    let mut impossible = 0u64;
    for (x, row) in counts.counts.iter().enumerate() {
        for (y, c) in row.iter().enumerate() {
            let p = lhv_joint(&model, a, x, b, y)?.clamp(0.0, 1.0);
            let sigma = (n * p * (1.0 - p)).sqrt();
            let dev = (*c as f64 - n * p).abs();
            if sigma > 0.0 {
                worst = worst.max(dev / sigma);
            } else if dev > 0.5 {
                impossible += 1;
            }
        }
    }
    let mut r = RunReport::new("lhv sample");
    r.text.push(format!("counts: {:?}", counts.counts));
    r.metric("shots", n);
    r.metric("max_sigma_deviation", worst);
    r.metric("sigma_limit", SAMPLE_SIGMAS);
    r.metric("impossible_cells_hit", impossible as f64);
    r.pass = worst <= SAMPLE_SIGMAS && impossible == 0;
    if let Some(out) = &g.out {
        r.write(out, &counts)?;
    }
    Ok(r)
}
