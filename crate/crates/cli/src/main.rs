use std::fmt;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod input;
mod run;

use input::ToleranceOverride;
use run::Format;

/// Relations, meets and joins of Hermitian matrices under the order A ⪯ B iff A² = BA.
#[derive(Debug, Parser)]
#[command(name = "orthoalg", version)]
struct Cli {
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Named tolerance preset: default, strict or loose.
    #[arg(long, global = true, env = "ORTHOALG_TOL_PROFILE", default_value = "default")]
    tol_profile: String,

    /// Relative eigenvalue clustering threshold.
    #[arg(long, global = true, value_name = "X")]
    tol_cluster: Option<f64>,

    /// Relative threshold below which an eigenvalue counts as zero.
    #[arg(long, global = true, value_name = "X")]
    tol_zero: Option<f64>,

    /// Tolerance on projection identities and principal-angle cosines.
    #[arg(long, global = true, value_name = "X")]
    tol_proj: Option<f64>,

    /// Largest accepted ‖M − M†‖ on input.
    #[arg(long, global = true, value_name = "X")]
    tol_hermitian: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Relation {
    /// A ⊥ B
    Orth,
    /// A ⪯ B
    Leq,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a relation between two observables.
    Check {
        #[arg(value_enum)]
        relation: Relation,
        a: String,
        b: String,
    },
    /// Meet of two or more observables, folded left to right.
    Meet(LatticeArgs),
    /// Join of two or more observables, folded left to right.
    Join(LatticeArgs),
    /// Seeded randomized sweep.
    Sweep(SweepArgs),
    /// Meet of truncated position and momentum.
    Demo {
        /// Truncation level.
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
    },
    /// Spectral decomposition, optionally with the projection onto a Borel set.
    Spectrum {
        file: String,
        /// Borel set such as `[0,2]`, `(-inf,0)`, `{1,3}` or `1 | [2,inf)`.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
    },
}

#[derive(Debug, Args)]
struct LatticeArgs {
    #[arg(required = true, num_args = 2..)]
    files: Vec<String>,
    /// Where to write the resulting observable.
    #[arg(long)]
    out: Option<String>,
    /// Name recorded in the output file.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value = "axioms", value_parser = commands::sweep_modes())]
    mode: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Generate clustered spectra (runs of values ten thresholds apart).
    #[arg(long)]
    clustered: bool,
    /// Directory for counterexample files, created only when something fails.
    #[arg(long, default_value = "counterexamples")]
    counterexample_dir: String,
}

/// An error with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl From<orthoalg_core::Error> for Failure {
    fn from(e: orthoalg_core::Error) -> Self {
        let code = match e {
            orthoalg_core::Error::EquivalenceViolation { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Flags shared by every command.
pub struct Global {
    pub profile: String,
    pub overrides: ToleranceOverride,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let global = Global {
        profile: cli.tol_profile.clone(),
        overrides: ToleranceOverride {
            cluster_rel: cli.tol_cluster,
            zero_abs: cli.tol_zero,
            proj_tol: cli.tol_proj,
            hermitian_tol: cli.tol_hermitian,
        },
    };
    let start = Instant::now();
    let result = match &cli.command {
        Command::Check { relation, a, b } => match relation {
            Relation::Orth => commands::check_orth(&global, a, b),
            Relation::Leq => commands::check_leq(&global, a, b),
        },
        Command::Meet(args) => commands::lattice(&global, commands::LatticeOp::Meet, &args.files, args.out.as_deref(), args.name.clone()),
        Command::Join(args) => commands::lattice(&global, commands::LatticeOp::Join, &args.files, args.out.as_deref(), args.name.clone()),
        Command::Sweep(args) => commands::sweep(
            &global,
            &commands::SweepRequest {
                mode: args.mode.clone(),
                trials: args.trials,
                dim: args.dim as usize,
                seed: args.seed,
                clustered: args.clustered,
                counterexample_dir: args.counterexample_dir.clone(),
            },
        ),
        Command::Demo { n, hbar } => commands::demo(&global, *n, *hbar),
        Command::Spectrum { file, delta } => commands::spectrum(&global, file, delta.as_deref()),
    };
    match result {
        Ok(mut out) => {
            out.report.wall_time_ms = start.elapsed().as_millis() as u64;
            let code = out.report.exit_code;
            if let Err(e) = run::emit(&out, cli.format) {
                eprintln!("error: writing report: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code as u8)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
