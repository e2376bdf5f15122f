//! Command-line driver for `gkz-core`.
//!
//! [`run`] parses arguments, executes one command and writes either a text
//! rendering or a single JSON document. Exit codes: 0 when every verdict
//! passes, 1 when some verdict fails, 2 on bad flags or input files.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gkz_core::config::DEFAULT_NODE_CAP;
use gkz_core::report::overall;
use gkz_core::{Report, Verdict};
use serde::Serialize;

mod commands;

pub use commands::load_config;

pub const DEFAULT_PRIMES: &str = "2,3,5,7,11,13";

#[derive(Debug, Parser)]
#[command(name = "gkz", version, about = "Exact checks for logarithmic solutions of A-hypergeometric systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Add wall-clock time to the manifest (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Configuration file `{"name", "n", "vectors"}`.
    #[arg(long, value_name = "PATH", required_unless_present = "corpus", conflicts_with = "corpus")]
    pub config: Option<PathBuf>,
    /// Built-in configuration (E1..E5) instead of a file.
    #[arg(long, value_name = "NAME")]
    pub corpus: Option<String>,
    /// Cap on lattice search nodes.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    pub node_cap: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a configuration and solve for its unit form.
    Validate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Kernel basis and the orthant pieces L_k up to a level.
    Lattice {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 6)]
        max_level: u32,
        /// Also list every relation with |l_j| <= this bound.
        #[arg(long)]
        coord_bound: Option<u32>,
    },
    /// Print the truncated series G_k.
    Gk {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 6)]
        max_level: u32,
    },
    /// Integrality of exp G_k over Q.
    ExpCheck {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 30)]
        max_level: u32,
    },
    /// p G_k(λ) - G_k(λ^p) in p Z_p, plus the term-wise congruence route.
    DworkCheck {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = DEFAULT_PRIMES)]
        primes: String,
        #[arg(long, default_value_t = 20)]
        max_level: u32,
    },
    /// Euler and box operators on G_k, log λ_k + G_k and the kernel-basis log solutions.
    OperatorsCheck {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 12)]
        max_level: u32,
        #[arg(long, default_value_t = 3)]
        coord_bound: u32,
    },
    /// q / λ^l = exp(sum_k l_k G_k) and its integrality.
    Mirror {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Relation l as CSV; defaults to each kernel basis vector.
        #[arg(long, allow_hyphen_values = true)]
        relation: Option<String>,
        #[arg(long, default_value_t = 20)]
        max_level: u32,
    },
    /// Exhaustive scan of the multinomial divisibility statements.
    CongruenceScan {
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        #[arg(long, default_value_t = 12)]
        emax: u64,
        #[arg(long, default_value = "2,3,5,7")]
        primes: String,
    },
    /// Pointedness certificate for the cone on the orthant generators.
    ConeCheck {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, default_value_t = 6)]
        max_level: u32,
    },
    /// Every check, in a fixed order.
    ReportAll {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, default_value_t = 20)]
        max_level: u32,
        #[arg(long, default_value = DEFAULT_PRIMES)]
        primes: String,
        #[arg(long, default_value_t = 3)]
        coord_bound: u32,
    },
}

/// Parameters recorded verbatim in every output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    pub params: BTreeMap<String, String>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

/// A named result value with both renderings.
#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub name: String,
    #[serde(skip)]
    pub text: String,
    pub value: serde_json::Value,
}

impl Artifact {
    pub fn new(name: impl Into<String>, text: impl Into<String>, value: impl Serialize) -> Self {
        Artifact {
            name: name.into(),
            text: text.into(),
            value: serde_json::to_value(value).expect("artifact values serialize"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub artifacts: Vec<Artifact>,
    pub reports: Vec<Report>,
    pub verdict: Verdict,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// `position` is the `(line, column)` of a JSON syntax or schema error.
    BadConfigFile {
        path: String,
        position: Option<(usize, usize)>,
        message: String,
    },
    Io {
        path: String,
        message: String,
    },
    Core(gkz_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::BadConfigFile {
                path,
                position: Some((line, column)),
                message,
            } => write!(f, "{path}:{line}:{column}: bad configuration file: {message}"),
            CliError::BadConfigFile {
                path,
                position: None,
                message,
            } => write!(f, "{path}: bad configuration file: {message}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<gkz_core::Error> for CliError {
    fn from(e: gkz_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Runs the driver on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let started = Instant::now();
    let (opts, result) = commands::execute(cli.command);
    match result {
        Ok(mut output) => {
            if opts.timing {
                output.manifest.timing_ms = Some(started.elapsed().as_millis());
            }
            let code = if output.verdict.is_fail() { 1 } else { 0 };
            let written = match opts.format {
                Format::Json => serde_json::to_writer_pretty(&mut *out, &output)
                    .map_err(std::io::Error::from)
                    .and_then(|_| writeln!(out)),
                Format::Text => write_text(out, &output),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn finish(manifest: RunManifest, artifacts: Vec<Artifact>, reports: Vec<Report>) -> RunOutput {
    let verdict = overall(&reports);
    RunOutput {
        manifest,
        artifacts,
        reports,
        verdict,
    }
}

fn write_report(out: &mut dyn Write, r: &Report, depth: usize) -> std::io::Result<()> {
    writeln!(out, "{:indent$}{r}", "", indent = 2 * depth)?;
    for child in &r.details {
        write_report(out, child, depth + 1)?;
    }
    Ok(())
}

fn write_text(out: &mut dyn Write, o: &RunOutput) -> std::io::Result<()> {
    let m = &o.manifest;
    write!(out, "gkz {} {}", m.version, m.command)?;
    if let Some(c) = &m.config {
        write!(out, " config={c}")?;
    }
    for (k, v) in &m.params {
        write!(out, " {k}={v}")?;
    }
    if let Some(t) = m.timing_ms {
        write!(out, " time={t}ms")?;
    }
    writeln!(out)?;
    for a in &o.artifacts {
        writeln!(out, "{} = {}", a.name, a.text)?;
    }
    for r in &o.reports {
        write_report(out, r, 0)?;
    }
    writeln!(out, "verdict: {}", o.verdict)
}
