//! Command-line front end: argument parsing, run manifests, JSON documents
//! and exit codes (0 pass, 1 violation, 2 usage or input error).

pub mod input;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use isoedge_core::arith::sym_dim;
use isoedge_core::enumeration::{self, CellCensus, CellRecord, Options, PrimitiveCensus};
use isoedge_core::equivalence::canonical_key;
use isoedge_core::isoedge::{self, IsoEdgeConfiguration};
use isoedge_core::lattice::{LatticeForm, ParityVector};
use isoedge_core::tropical::{self, ConwaySloaneReport, MatroidalReport};
use isoedge_core::{Error, ExactScalar};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "isoedge", version, about = "Iso-edge domains of positive definite quadratic forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dimension n of the forms (2 to 5).
    #[arg(long)]
    pub dim: usize,
    /// Output file; the document goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Journal file used to resume an interrupted run.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// First Selling perturbation for the starting domain.
    #[arg(long = "seed-perturbation", default_value_t = 0)]
    pub seed_perturbation: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Census document from `enumerate` or `cells`; computed in-process when omitted.
    pub census: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long = "seed-perturbation", default_value_t = 0)]
    pub seed_perturbation: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the primitive iso-edge domains up to GL_n(Z).
    Enumerate(RunArgs),
    /// Census of all cells containing positive definite forms.
    Cells {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "min-dim", default_value_t = 1)]
        min_dim: usize,
    },
    /// Evaluate the alternating stabilizer mass over a complete cell census.
    MassCheck(CheckArgs),
    /// Tropical theta constants of a form.
    Theta {
        form: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conorms of a form.
    Conorm {
        form: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise Conway–Sloane check of the primitive domains.
    CsCheck {
        #[command(flatten)]
        check: CheckArgs,
        /// Also compare under every class permutation from GL_n(F_2) (n ≤ 4).
        #[arg(long)]
        permutations: bool,
    },
    /// Matroidal-locus check of the primitive domains.
    MatroidalCheck(CheckArgs),
    /// Validate a configuration (JSON `{n, reps}`) or the configuration of a form (matrix file).
    Validate {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Everything that determines a run's output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub dimension: Option<usize>,
    pub seed_perturbation: u64,
    pub checkpoint: Option<String>,
    pub output: Option<String>,
    pub input: Option<String>,
    pub workers: usize,
    pub min_dim: Option<usize>,
    pub tool_version: String,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            command: command.into(),
            dimension: None,
            seed_perturbation: 0,
            checkpoint: None,
            output: None,
            input: None,
            workers: 1,
            min_dim: None,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// An output file: manifest, short summary and full result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document<S, R> {
    pub manifest: RunManifest,
    pub summary: S,
    pub result: R,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateSummary {
    pub domains: usize,
    pub adjacencies: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellsSummary {
    pub counts: BTreeMap<usize, usize>,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassSummary {
    pub sum: ExactScalar,
    pub cells: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorResult {
    pub n: usize,
    /// Class labels `v` as bit strings, in global class order.
    pub classes: Vec<String>,
    pub values: Vec<ExactScalar>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub checked: usize,
    pub passed: usize,
    pub pass: bool,
    pub maximal_systems: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateResult {
    pub ok: bool,
    pub diagnosis: String,
    pub key: Option<String>,
    pub configuration: Option<IsoEdgeConfiguration>,
}

pub type EnumerateDocument = Document<EnumerateSummary, PrimitiveCensus>;
pub type CellsDocument = Document<CellsSummary, CellCensus>;
pub type MassDocument = Document<MassSummary, ()>;
pub type VectorDocument = Document<(), VectorResult>;
pub type CsDocument = Document<CheckSummary, ConwaySloaneReport>;
pub type MatroidalDocument = Document<CheckSummary, MatroidalReport>;
pub type ValidateDocument = Document<(), ValidateResult>;

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Violation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Violation(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) => CliError::Violation(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Serialized document and whether the checks passed.
pub struct Outcome {
    pub json: String,
    pub summary: String,
    pub pass: bool,
}

fn outcome<S: Serialize, R: Serialize>(doc: &Document<S, R>, pass: bool) -> Outcome {
    Outcome {
        json: serde_json::to_string(doc).expect("documents serialize") + "\n",
        summary: serde_json::to_string(&doc.summary).expect("summaries serialize"),
        pass,
    }
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn check_dim(n: usize) -> Result<(), CliError> {
    if !(2..=5).contains(&n) {
        return Err(CliError::Usage(format!("--dim must lie in 2..=5, got {n}")));
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(fail)?;
    std::fs::rename(&tmp, path).map_err(fail)
}

fn parse_document<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("{} is not a valid document: {e}", path.display())))
}

fn options(checkpoint: &Option<PathBuf>, workers: usize, seed: u64) -> Result<Options, CliError> {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    Ok(Options {
        workers,
        checkpoint: checkpoint.clone(),
        seed,
        ..Options::default()
    })
}

// ---------------------------------------------------------------------------
// commands

pub fn cmd_enumerate(args: &RunArgs) -> Result<Outcome, CliError> {
    check_dim(args.dim)?;
    let opts = options(&args.checkpoint, args.workers, args.seed_perturbation)?;
    let census = enumeration::enumerate_primitive(args.dim, &opts)?;
    let count = census.domains.len();
    let doc = Document {
        manifest: RunManifest {
            dimension: Some(args.dim),
            seed_perturbation: args.seed_perturbation,
            checkpoint: path_string(&args.checkpoint),
            output: path_string(&args.out),
            workers: args.workers,
            ..RunManifest::new("enumerate")
        },
        summary: EnumerateSummary {
            domains: count,
            adjacencies: census.adjacency.len(),
            text: format!("{count} domain{}", if count == 1 { "" } else { "s" }),
        },
        result: census,
    };
    Ok(outcome(&doc, true))
}

pub fn cmd_cells(args: &RunArgs, min_dim: usize) -> Result<Outcome, CliError> {
    check_dim(args.dim)?;
    if !(1..=sym_dim(args.dim)).contains(&min_dim) {
        return Err(CliError::Usage(format!(
            "--min-dim must lie in 1..={}",
            sym_dim(args.dim)
        )));
    }
    let opts = options(&args.checkpoint, args.workers, args.seed_perturbation)?;
    let census = enumeration::enumerate_cells(args.dim, min_dim, &opts)?;
    let doc = Document {
        manifest: RunManifest {
            dimension: Some(args.dim),
            seed_perturbation: args.seed_perturbation,
            checkpoint: path_string(&args.checkpoint),
            output: path_string(&args.out),
            workers: args.workers,
            min_dim: Some(min_dim),
            ..RunManifest::new("cells")
        },
        summary: CellsSummary {
            counts: census.counts(),
            total: census.cells.len(),
        },
        result: census,
    };
    Ok(outcome(&doc, true))
}

/// Cells or domains from a census document.
enum Census {
    Primitive(PrimitiveCensus),
    Cells(CellCensus),
}

impl Census {
    fn n(&self) -> usize {
        match self {
            Census::Primitive(p) => p.n,
            Census::Cells(c) => c.n,
        }
    }

    fn domains(&self) -> Vec<CellRecord> {
        match self {
            Census::Primitive(p) => p.domains.clone(),
            Census::Cells(c) => {
                let top = sym_dim(c.n);
                c.cells.iter().filter(|r| r.dimension == top).cloned().collect()
            }
        }
    }
}

/// Streams a document from disk; census files reach hundreds of megabytes.
fn load_document<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{} is not a valid document: {e}", path.display())))
}

#[derive(Deserialize)]
struct ManifestOnly {
    manifest: RunManifest,
}

fn read_census(path: &Path) -> Result<Census, CliError> {
    let probe: ManifestOnly = load_document(path)?;
    match probe.manifest.command.as_str() {
        "enumerate" => Ok(Census::Primitive(load_document::<EnumerateDocument>(path)?.result)),
        "cells" => Ok(Census::Cells(load_document::<CellsDocument>(path)?.result)),
        _ => Err(CliError::Usage(format!(
            "{} is neither an `enumerate` nor a `cells` document",
            path.display()
        ))),
    }
}

fn resolve_dim(args: &CheckArgs, census: Option<&Census>) -> Result<usize, CliError> {
    match (args.dim, census) {
        (Some(d), Some(c)) if d != c.n() => Err(CliError::Usage(format!(
            "--dim {d} disagrees with the census dimension {}",
            c.n()
        ))),
        (_, Some(c)) => Ok(c.n()),
        (Some(d), None) => {
            check_dim(d)?;
            Ok(d)
        }
        (None, None) => Err(CliError::Usage("give a census file or --dim".into())),
    }
}

fn check_manifest(command: &str, args: &CheckArgs, n: usize) -> RunManifest {
    RunManifest {
        dimension: Some(n),
        seed_perturbation: args.seed_perturbation,
        checkpoint: path_string(&args.checkpoint),
        output: path_string(&args.out),
        input: path_string(&args.census),
        workers: args.workers,
        ..RunManifest::new(command)
    }
}

pub fn cmd_mass_check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let census = args.census.as_deref().map(read_census).transpose()?;
    let n = resolve_dim(args, census.as_ref())?;
    if n < 3 {
        return Err(CliError::Usage(format!("the mass formula needs n ≥ 3, got {n}")));
    }
    let cells = match census {
        Some(Census::Cells(c)) => {
            if c.min_dim > 1 {
                return Err(CliError::Usage(format!(
                    "incomplete census: dimensions 1..={} are missing (min_dim = {})",
                    c.min_dim - 1,
                    c.min_dim
                )));
            }
            c.cells
        }
        Some(Census::Primitive(_)) => {
            return Err(CliError::Usage(format!(
                "incomplete census: an `enumerate` document holds only dimension {}; dimensions 1..={} are missing",
                sym_dim(n),
                sym_dim(n) - 1
            )))
        }
        None => {
            let opts = options(&args.checkpoint, args.workers, args.seed_perturbation)?;
            enumeration::enumerate_cells(n, 1, &opts)?.cells
        }
    };
    let sum = enumeration::mass_formula(&cells);
    let pass = sum.is_zero();
    let doc = Document {
        manifest: check_manifest("mass-check", args, n),
        summary: MassSummary {
            sum,
            cells: cells.len(),
            pass,
        },
        result: (),
    };
    Ok(outcome(&doc, pass))
}

fn read_form(path: &Path) -> Result<LatticeForm, CliError> {
    let a = input::parse_matrix(&read_file(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    LatticeForm::new(&a).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn vector_document(command: &str, form_path: &Path, out: &Option<PathBuf>, n: usize, values: Vec<ExactScalar>) -> Outcome {
    let doc = Document {
        manifest: RunManifest {
            dimension: Some(n),
            input: Some(form_path.display().to_string()),
            output: path_string(out),
            ..RunManifest::new(command)
        },
        summary: (),
        result: VectorResult {
            n,
            classes: ParityVector::all(n).map(|v| v.to_string()).collect(),
            values,
        },
    };
    let mut o = outcome(&doc, true);
    o.summary = serde_json::to_string(&doc.result.values).expect("values serialize");
    o
}

pub fn cmd_theta(form: &Path, out: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let f = read_form(form)?;
    Ok(vector_document("theta", form, out, f.dim(), f.theta_vector()))
}

pub fn cmd_conorm(form: &Path, out: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let f = read_form(form)?;
    let c = tropical::conorm_from_theta(f.dim(), &f.theta_vector());
    Ok(vector_document("conorm", form, out, f.dim(), c.values))
}

fn domains_for(args: &CheckArgs) -> Result<(usize, Vec<CellRecord>), CliError> {
    let census = args.census.as_deref().map(read_census).transpose()?;
    let n = resolve_dim(args, census.as_ref())?;
    let domains = match census {
        Some(c) => c.domains(),
        None => {
            let opts = options(&args.checkpoint, args.workers, args.seed_perturbation)?;
            enumeration::enumerate_primitive(n, &opts)?.domains
        }
    };
    if domains.is_empty() {
        return Err(CliError::Usage("the census holds no top-dimensional domains".into()));
    }
    Ok((n, domains))
}

pub fn cmd_cs_check(args: &CheckArgs, permutations: bool) -> Result<Outcome, CliError> {
    if permutations && args.dim.is_some_and(|d| d > 4) {
        return Err(CliError::Usage("--permutations is limited to n ≤ 4".into()));
    }
    let (n, domains) = domains_for(args)?;
    if permutations && n > 4 {
        return Err(CliError::Usage("--permutations is limited to n ≤ 4".into()));
    }
    let report = tropical::conway_sloane_check(n, &domains, permutations, args.workers)?;
    let pass = report.all_pass();
    let doc = Document {
        manifest: check_manifest("cs-check", args, n),
        summary: CheckSummary {
            checked: report.pairs.len(),
            passed: report.passed,
            pass,
            maximal_systems: None,
        },
        result: report,
    };
    Ok(outcome(&doc, pass))
}

pub fn cmd_matroidal_check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let (n, domains) = domains_for(args)?;
    let report = tropical::check_matroidal_theorem(n, &domains, args.workers)?;
    let pass = report.all_pass();
    let doc = Document {
        manifest: check_manifest("matroidal-check", args, n),
        summary: CheckSummary {
            checked: report.cells.len(),
            passed: report.passed,
            pass,
            maximal_systems: Some(report.maximal_systems.len()),
        },
        result: report,
    };
    Ok(outcome(&doc, pass))
}

pub fn cmd_validate(path: &Path, out: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let text = read_file(path)?;
    let config = if text.trim_start().starts_with('{') {
        Ok(parse_document::<IsoEdgeConfiguration>(path, &text)?)
    } else {
        let a = input::parse_matrix(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        match isoedge::from_form(&a) {
            Ok(c) => Ok(c),
            Err(Error::NonPrimitive(classes)) => Err(format!(
                "form is not primitive: {}",
                classes
                    .iter()
                    .map(|d| format!("class {} has {} closest points", d.class, d.minimizers))
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
            Err(e) => return Err(CliError::Usage(format!("{}: {e}", path.display()))),
        }
    };
    let result = match config {
        Ok(c) => {
            let v = isoedge::validate(&c);
            ValidateResult {
                ok: v.ok,
                diagnosis: v.diagnosis,
                key: v.ok.then(|| canonical_key(&c).0),
                configuration: Some(c),
            }
        }
        Err(diagnosis) => ValidateResult {
            ok: false,
            diagnosis,
            key: None,
            configuration: None,
        },
    };
    let pass = result.ok;
    let doc = Document {
        manifest: RunManifest {
            dimension: result.configuration.as_ref().map(IsoEdgeConfiguration::n),
            input: Some(path.display().to_string()),
            output: path_string(out),
            ..RunManifest::new("validate")
        },
        summary: (),
        result,
    };
    let mut o = outcome(&doc, pass);
    o.summary = serde_json::to_string(&doc.result.diagnosis).expect("strings serialize");
    Ok(o)
}

fn dispatch(cmd: &Command) -> (Result<Outcome, CliError>, Option<&PathBuf>) {
    match cmd {
        Command::Enumerate(a) => (cmd_enumerate(a), a.out.as_ref()),
        Command::Cells { run, min_dim } => (cmd_cells(run, *min_dim), run.out.as_ref()),
        Command::MassCheck(a) => (cmd_mass_check(a), a.out.as_ref()),
        Command::Theta { form, out } => (cmd_theta(form, out), out.as_ref()),
        Command::Conorm { form, out } => (cmd_conorm(form, out), out.as_ref()),
        Command::CsCheck { check, permutations } => (cmd_cs_check(check, *permutations), check.out.as_ref()),
        Command::MatroidalCheck(a) => (cmd_matroidal_check(a), a.out.as_ref()),
        Command::Validate { input, out } => (cmd_validate(input, out), out.as_ref()),
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let (result, out) = dispatch(&cli.command);
    match result {
        Ok(o) => {
            let written = match out {
                Some(path) => write_atomic(path, &o.json).map(|_| writeln!(stdout, "{}", o.summary)),
                None => Ok(write!(stdout, "{}", o.json)),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return e.code();
            }
            if o.pass {
                EXIT_PASS
            } else {
                let _ = writeln!(stderr, "violation: {}", o.summary);
                EXIT_VIOLATION
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
