//! `symfun`: rearrangements, symmetric norms, majorization, averaging partitions,
//! trace estimates and the lemma suite from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Source, VerifyArgs};
use output::{Format, Output};
use symfun_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "symfun", version, about = "Symmetric functions, majorization and singular-trace diagnostics")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// An explicit input file, or a generated sequence such as `harmonic` or `pow:0.7`.
#[derive(Args, Debug)]
struct SourceArgs {
    #[arg(long, conflicts_with = "s")]
    input: Option<PathBuf>,
    /// Generated sequence: harmonic, pow:A, geom:R, psi:PSI or table:V1,V2,...
    #[arg(long)]
    s: Option<String>,
    /// Cut-off for a generated sequence.
    #[arg(long, default_value = "1e300")]
    horizon: String,
}

impl SourceArgs {
    fn source(&self) -> Result<Source<'_>> {
        match (&self.input, &self.s) {
            (Some(p), None) => Ok(Source::File(p)),
            (None, Some(g)) => Ok(Source::Generated { gen: g, horizon: &self.horizon }),
            _ => Err(Error::Invalid("give exactly one of --input and --s".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decreasing rearrangement μ(x) of a step function or sequence.
    Rearrange {
        #[arg(long)]
        input: PathBuf,
    },
    /// Symmetric norm, e.g. sup, lp:2, l1, marc:log1p, lorentz:pow:0.5, f:marc:log1p.
    Norm {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Submajorization y ≺≺ x or uniform submajorization y ⊲ x.
    Check {
        #[arg(long, default_value = "submajor")]
        relation: String,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        x: PathBuf,
        /// Largest shift tried as a uniform witness.
        #[arg(long, default_value_t = 64)]
        mmax: u64,
    },
    /// Level nodes a_n, the κ-partition and the cell averages of μ(x).
    Partitions {
        #[arg(long, default_value = "1")]
        theta: String,
        /// Comma-separated κ entries; `∞` or `inf` for infinite.
        #[arg(long)]
        kappa: String,
        /// Index of the first κ entry.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n_min: i64,
        #[arg(long)]
        input: PathBuf,
    },
    /// π series (1/m)‖σ_m μ(x)‖ along a dilation schedule.
    Pi {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, default_value = "marc:log1p")]
        norm: String,
        /// `2:14` means 2^1..2^14; `1e2:1e6` a geometric grid; or an explicit list.
        #[arg(long, default_value = "1:12")]
        schedule: String,
    },
    /// p series ‖(M_m x)₊‖ for x = μ(a) − μ(b).
    P {
        #[arg(long, conflicts_with = "s")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long, default_value = "1e300")]
        horizon: String,
        #[arg(long, default_value = "marc:log1p")]
        norm: String,
        #[arg(long, default_value = "1:10")]
        schedule: String,
    },
    /// Dixmier means ξ_n = (1/ψ(n)) Σ_{k≤n} s_k.
    Dixmier {
        #[arg(long, default_value = "harmonic")]
        s: String,
        #[arg(long, default_value = "log1p")]
        psi: String,
        #[arg(long, default_value = "1e2:1e6")]
        n: String,
    },
    /// Sampled lower limit of ψ(2t)/ψ(t), the trace-existence test for Marcinkiewicz spaces.
    Criterion {
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 1e6)]
        t_hi: f64,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
    },
    /// Norms of the Hardy average C(μ(a) − μ(b)) on growing windows.
    Fk {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "marc:log1p")]
        norm: String,
        #[arg(long, default_value = "1e0:1e4")]
        schedule: String,
        /// Also report whether the mean over (0, 1] vanishes.
        #[arg(long)]
        interval: bool,
    },
    /// Singular values of a square matrix (JSON nested arrays or CSV rows).
    Svd {
        #[arg(long)]
        input: PathBuf,
        /// Take the direct sum of this many copies first.
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Run the lemma suite; exits with 2 when any inequality fails.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        /// Comma-separated lemma ids to run.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 30)]
        min_hits: u32,
        /// Tolerance override `lemma-id=value`; repeatable.
        #[arg(long = "tol")]
        tolerances: Vec<String>,
        /// List the lemmas instead of running them.
        #[arg(long)]
        list: bool,
    },
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("SYMFUN_THREADS") else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(Error::Invalid(format!("SYMFUN_THREADS must be a positive integer, got `{v}`"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))
}

/// Runs a command; `Ok(false)` means the lemma suite found violations.
fn run(cli: &Cli) -> Result<bool> {
    init_threads()?;
    let emit = |o: Output| o.write(cli.format, cli.out.as_deref());
    match &cli.command {
        Command::Rearrange { input } => emit(commands::rearrange(input)?)?,
        Command::Norm { norm, input } => emit(commands::norm_cmd(input, norm)?)?,
        Command::Check { relation, y, x, mmax } => emit(commands::check(relation, y, x, *mmax)?)?,
        Command::Partitions { theta, kappa, n_min, input } => {
            emit(commands::partitions(input, theta, kappa, *n_min)?)?
        }
        Command::Pi { src, norm, schedule } => emit(commands::pi(src.source()?, norm, schedule)?)?,
        Command::P { a, b, s, horizon, norm, schedule } => {
            let src = match (a, s) {
                (Some(a), None) => Source::File(a),
                (None, Some(g)) => Source::Generated { gen: g, horizon },
                _ => return Err(Error::Invalid("give exactly one of --a and --s".into())),
            };
            emit(commands::p(src, b.as_deref(), norm, schedule)?)?
        }
        Command::Dixmier { s, psi, n } => emit(commands::dixmier(s, psi, n)?)?,
        Command::Criterion { psi, t_hi, tol } => emit(commands::criterion_cmd(psi, *t_hi, *tol)?)?,
        Command::Fk { a, b, norm, schedule, interval } => emit(commands::fk(a, b, norm, schedule, *interval)?)?,
        Command::Svd { input, m } => emit(commands::svd(input, *m)?)?,
        Command::Verify { list: true, .. } => emit(commands::lemma_list())?,
        Command::Verify { seed, trials, only, min_hits, tolerances, list: false } => {
            let args = VerifyArgs { seed: *seed, trials: *trials, only: only.as_deref(), min_hits: *min_hits, tolerances };
            let (out, report) = commands::verify(&args)?;
            emit(out)?;
            if !report.is_clean() {
                eprintln!("{} violation(s); replay blobs are in the report", report.total_violations);
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn one_line(msg: &str) -> String {
    msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(first));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("symfun: {}", one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}
