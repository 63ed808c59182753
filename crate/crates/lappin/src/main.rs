//! `lappin`: batch front end for the `laplacian-pinning` crate.
//!
//! Every subcommand is a reproducible batch run: it resolves its inputs
//! (flags override `--config`, which overrides defaults), executes, and
//! emits one machine-readable artifact that embeds the resolved config and
//! seed.  Running the same config and seed again produces byte-identical
//! output, at any `--threads` setting.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical
//! precondition failed, 3 internal consistency failure.

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use laplacian_pinning::{Error, Result};

use config::{FileCfg, Format};

#[derive(Debug, Parser)]
#[command(name = "lappin", version, about = "Polymer pinning numerics: curves, certificates, self tests")]
struct Cli {
    /// JSON config file (one flat object, keys = long flag names in
    /// snake_case); flags given on the command line override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker thread cap; default from LAPPIN_THREADS, then all cores
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Artifact encoding; each command has a natural default
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Artifact path; stdout when absent
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Randomized property suite over the determinant kit
    DetVerify(commands::DetVerifyArgs),
    /// Exact partition values by contact-set enumeration, one row per size
    Partition(commands::PartitionArgs),
    /// Clean-chain free-energy curve, critical reward, asymptote ratios
    Renewal(commands::RenewalArgs),
    /// Generic discrete pinning kernels: curves and critical exponents
    Pinning(commands::PinningArgs),
    /// Quenched and annealed free-energy estimates on the transfer grid
    FreeEnergy(commands::FreeEnergyArgs),
    /// Critical rewards and the annealed sandwich report per beta
    Phase(commands::PhaseArgs),
    /// Fractional-moment gap certificates over a (beta, c) sweep
    FmCertify(commands::FmCertifyArgs),
    /// Fast end-to-end oracle suite; exit 0 means a healthy build
    Selftest(selftest::SelftestArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            // a malformed invocation is an invalid configuration, not
            // clap's default exit 2 (reserved here for numerics)
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lappin: {e}");
            match e {
                Error::InvalidConfig(_) => 1,
                Error::Precondition(_) => 2,
                Error::Internal(_) => 3,
            }
        }
    });
}

fn run(cli: Cli) -> Result<()> {
    let file = FileCfg::load(cli.config.as_deref())?;
    init_threads(cli.threads.or(file.threads()?))?;
    let format = cli.format.or(file.format()?);
    let out = match &cli.out {
        Some(p) => Some(p.clone()),
        None => file.out()?,
    };
    let out = out.as_deref();
    match cli.command {
        Command::DetVerify(args) => commands::det_verify(args, &file, format, out),
        Command::Partition(args) => commands::partition(args, &file, format, out),
        Command::Renewal(args) => commands::renewal(args, &file, format, out),
        Command::Pinning(args) => commands::pinning(args, &file, format, out),
        Command::FreeEnergy(args) => commands::free_energy(args, &file, format, out),
        Command::Phase(args) => commands::phase(args, &file, format, out),
        Command::FmCertify(args) => commands::fm_certify(args, &file, format, out),
        Command::Selftest(args) => selftest::run(args, &file, out),
    }
}

/// Cap the global worker pool.  The numerics reduce in fixed order, so the
/// cap affects wall time only, never output bytes.
fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("LAPPIN_THREADS") {
            Ok(s) => Some(s.parse().map_err(|_| {
                Error::InvalidConfig(format!("LAPPIN_THREADS must be an integer, got `{s}`"))
            })?),
            Err(_) => None,
        },
    };
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(Error::InvalidConfig("threads must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}
