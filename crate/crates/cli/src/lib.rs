//! Argument parsing and dispatch for the `steklov` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use steklov_core::io::{self as table, fmt_sig, to_json};
use steklov_core::spectrum::default_collar;
use steklov_core::{
    annulus_sigma_d, annulus_sigma_n, bracket_mode, compare_profiles, fd_convergence_study, full_spectrum,
    increase_experiment, load_profile, multiplicity, sharpness_sweep, truncation_convergence, validate_profile,
    AnnulusSpec, GridSpec, Method, ModeProblem, Profile, ProfileError, ProfileSpec, SolveError, SolverConfig,
};

/// Environment variable naming the directory for outputs when `--output`
/// is not given.
pub const OUT_DIR_ENV: &str = "STEKLOV_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "steklov", version, about = "Steklov spectra of submanifolds of revolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with solver settings and defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file. Without it, output goes to $STEKLOV_OUT_DIR/<command>.<ext>
    /// when that is set, and to stdout otherwise.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Distance from the pole where integration starts (default 1e-6 L).
    #[arg(long, global = true)]
    pub pole_offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Shooting,
    Riccati,
    Fd,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Shooting => Method::Shooting,
            MethodArg::Riccati => Method::Riccati,
            MethodArg::Fd => Method::FdOracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    /// Neumann truncations approaching the pole.
    Truncation,
    /// Finite-element oracle under grid refinement.
    Fd,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a profile spec against the profile invariants.
    Validate {
        #[arg(long)]
        profile: String,
    },
    /// Mode eigenvalues k = 0..=kmax with multiplicities and flags.
    Spectrum {
        #[arg(long)]
        profile: String,
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Closed-form mixed eigenvalues of the annulus B_L minus B_1.
    Annulus {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<f64>,
    },
    /// Neumann and Dirichlet truncations around the full eigenvalue.
    Bracket {
        #[arg(long)]
        profile: String,
        #[arg(long = "n")]
        n: usize,
        /// Single mode; defaults to all modes up to --kmax.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        /// Collar radius; defaults to the end of the leading 1 + r stretch.
        #[arg(long)]
        r_end: Option<f64>,
    },
    /// Mode-k eigenvalue of tents of growing reach.
    Sharpness {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long = "R", value_delimiter = ',', required = true)]
        reach: Vec<f64>,
    },
    /// Neumann truncations of two pointwise-ordered profiles.
    Compare {
        /// The smaller profile.
        #[arg(long)]
        profile: String,
        /// The larger profile.
        #[arg(long)]
        other: String,
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        r_end: f64,
    },
    /// Spectrum before and after the increase construction.
    Increase {
        #[arg(long)]
        profile: String,
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        kmax: usize,
    },
    /// Convergence of truncations or of the finite-element oracle.
    Converge {
        #[arg(long)]
        profile: String,
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Study::Truncation)]
        study: Study,
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.01])]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [500usize, 1000, 2000, 4000])]
        nodes: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Spectrum { .. } => "spectrum",
            Command::Annulus { .. } => "annulus",
            Command::Bracket { .. } => "bracket",
            Command::Sharpness { .. } => "sharpness",
            Command::Compare { .. } => "compare",
            Command::Increase { .. } => "increase",
            Command::Converge { .. } => "converge",
        }
    }
}

/// Contents of `--config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub solver: SolverConfig,
    pub format: Option<Format>,
    pub method: Option<String>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Flagged(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Flagged(_) => EXIT_FLAGGED,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Flagged(m) => m,
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Consistency(m) => Failure::Flagged(m),
            SolveError::Profile(ProfileError::Invalid(r)) => Failure::Flagged(format!("invalid profile: {r}")),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ProfileError> for Failure {
    fn from(e: ProfileError) -> Self {
        SolveError::from(e).into()
    }
}

/// Resolved settings after merging flags, config file and defaults.
struct Settings {
    solver: SolverConfig,
    format: Format,
    method: Option<Method>,
    output: Option<PathBuf>,
}

fn settings(common: &Common, command: &Command) -> Result<Settings, Failure> {
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let mut solver = file.solver;
    if let Some(v) = common.rel_tol {
        solver.rel_tol = v;
    }
    if let Some(v) = common.abs_tol {
        solver.abs_tol = v;
    }
    if common.pole_offset.is_some() {
        solver.pole_offset = common.pole_offset;
    }
    let method = file
        .method
        .as_deref()
        .map(|m| m.parse::<Method>().map_err(|e| Failure::Usage(format!("config method: {e}"))))
        .transpose()?;
    let format = common.format.or(file.format).unwrap_or(Format::Csv);
    let output = common.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .or(file.output_dir)
            .map(|dir| dir.join(format!("{}.{}", command.name(), format.extension())))
    });
    Ok(Settings {
        solver,
        format,
        method,
        output,
    })
}

/// A profile argument is a path to a spec file, or inline JSON.
fn read_profile(arg: &str) -> Result<Profile, Failure> {
    let text = read_spec_text(arg)?;
    Ok(load_profile(&text)?)
}

fn read_spec_text(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::Io(format!("{arg}: {e}")))
    }
}

/// Write through a temporary file in the target directory and rename, so a
/// reader never sees a partial table.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

struct Artifact {
    csv: String,
    json: String,
    /// Invariant flags that should turn the exit code to 1.
    flagged: Option<String>,
}

fn emit(settings: &Settings, artifact: &Artifact, stdout: &mut dyn Write) -> Result<(), Failure> {
    let body = match settings.format {
        Format::Csv => &artifact.csv,
        Format::Json => &artifact.json,
    };
    match &settings.output {
        Some(path) => write_atomic(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn main_with(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "steklov {}: {}", cli.command.name(), f.message());
            f.exit_code()
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let settings = settings(&cli.common, &cli.command)?;
    let cfg = settings.solver;
    let artifact = match &cli.command {
        Command::Validate { profile } => validate(profile)?,
        Command::Spectrum { profile, n, kmax, method } => {
            let p = read_profile(profile)?;
            let method = method.map(Method::from).or(settings.method).unwrap_or(Method::Riccati);
            let s = full_spectrum(&p, *n, *kmax, method, &cfg)?;
            let flagged = s.has_violations().then(|| {
                let codes: Vec<String> = s
                    .flags
                    .iter()
                    .filter(|f| f.is_violation())
                    .map(|f| format!("{} (k={})", f.code(), f.mode()))
                    .collect();
                format!("invariant flags raised: {}", codes.join(", "))
            });
            Artifact {
                csv: table::spectrum_csv(&s),
                json: to_json(&s),
                flagged,
            }
        }
        Command::Annulus { n, k, l } => {
            let mut csv = String::from("L,k,sigma_D,sigma_N\n");
            let mut rows = Vec::new();
            for &radius in l {
                let spec = AnnulusSpec::new(*n, radius)?;
                let (d, nn) = (annulus_sigma_d(spec, *k), annulus_sigma_n(spec, *k));
                writeln!(stdout, "sigma_D={}, sigma_N={}", fmt_sig(d), fmt_sig(nn))
                    .map_err(|e| Failure::Io(format!("stdout: {e}")))?;
                csv.push_str(&format!("{},{k},{},{}\n", fmt_sig(radius), fmt_sig(d), fmt_sig(nn)));
                rows.push(serde_json::json!({ "L": radius, "k": k, "n": n, "sigma_D": d, "sigma_N": nn }));
            }
            // the printed lines are the primary output; a table only on request
            if settings.output.is_none() {
                return Ok(());
            }
            Artifact {
                csv,
                json: to_json(&rows),
                flagged: None,
            }
        }
        Command::Bracket { profile, n, k, kmax, r_end } => {
            let p = read_profile(profile)?;
            let r_end = r_end.unwrap_or_else(|| default_collar(&p));
            let modes: Vec<usize> = match k {
                Some(k) => vec![*k],
                None => (0..=*kmax).collect(),
            };
            let rows = modes
                .iter()
                .map(|&k| Ok((bracket_mode(&p, *n, k, r_end, &cfg)?, multiplicity(*n, k))))
                .collect::<Result<Vec<_>, SolveError>>()?;
            let json_rows: Vec<_> = rows.iter().map(|(b, _)| b).collect();
            Artifact {
                csv: table::bracket_csv(&rows),
                json: to_json(&json_rows),
                flagged: None,
            }
        }
        Command::Sharpness { n, k, reach } => {
            let s = sharpness_sweep(*n, *k, reach, &cfg)?;
            let flagged = (!s.flags.is_empty()).then(|| format!("sharpness flags: {:?}", s.flags));
            Artifact {
                csv: table::sharpness_csv(&s),
                json: to_json(&s),
                flagged,
            }
        }
        Command::Compare { profile, other, n, kmax, r_end } => {
            let (a, b) = (read_profile(profile)?, read_profile(other)?);
            let rows = (0..=*kmax)
                .map(|k| compare_profiles(&a, &b, *n, k, *r_end, &cfg).map(|(x, y)| (k, x, y)))
                .collect::<Result<Vec<_>, SolveError>>()?;
            let json_rows: Vec<_> = rows
                .iter()
                .map(|&(k, x, y)| serde_json::json!({ "k": k, "sigma_first": x, "sigma_second": y }))
                .collect();
            Artifact {
                csv: table::comparison_csv(&rows),
                json: to_json(&json_rows),
                flagged: None,
            }
        }
        Command::Increase { profile, n, kmax } => {
            let p = read_profile(profile)?;
            let e = increase_experiment(&p, *n, *kmax, &cfg)?;
            let flagged = (!e.flags.is_empty()).then(|| format!("increase flags: {:?}", e.flags));
            Artifact {
                csv: table::increase_csv(&e),
                json: to_json(&e),
                flagged,
            }
        }
        Command::Converge {
            profile,
            n,
            k,
            study,
            eps,
            nodes,
        } => {
            let p = read_profile(profile)?;
            match study {
                Study::Truncation => {
                    let t = truncation_convergence(&p, *n, *k, eps, &cfg)?;
                    Artifact {
                        csv: table::truncation_csv(&t),
                        json: to_json(&t),
                        flagged: None,
                    }
                }
                Study::Fd => {
                    let rows = fd_convergence_study(&p, &ModeProblem::pole(*n, *k), nodes, GridSpec::default().floor)?;
                    Artifact {
                        csv: table::convergence_csv(&rows),
                        json: to_json(&rows),
                        flagged: None,
                    }
                }
            }
        }
    };
    emit(&settings, &artifact, stdout)?;
    match artifact.flagged {
        Some(msg) => Err(Failure::Flagged(msg)),
        None => Ok(()),
    }
}

fn validate(arg: &str) -> Result<Artifact, Failure> {
    let text = read_spec_text(arg)?;
    let spec = ProfileSpec::from_json(&text)?;
    let (report, label) = match spec.build() {
        Ok(p) => (validate_profile(&p, steklov_core::profile::DEFAULT_TOL), p.label().to_string()),
        Err(ProfileError::Invalid(report)) => (report, "invalid".to_string()),
        Err(other) => return Err(other.into()),
    };
    let mut csv = String::from("invariant,r,magnitude\n");
    for v in &report.violations {
        csv.push_str(&format!("{},{},{}\n", v.invariant, fmt_sig(v.r), fmt_sig(v.magnitude)));
    }
    let flagged = (!report.is_valid()).then(|| format!("{label}: {report}"));
    Ok(Artifact {
        csv,
        json: to_json(&report),
        flagged,
    })
}
