//! `nhsense`: spectra, dynamics, sweeps and figure datasets for
//! time-modulated non-Hermitian two-level sensors.

mod commands;
mod resolve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use nhsense_core::experiments::io::{manifest_files, sha256_hex};
use nhsense_core::experiments::{read_manifest, sweep::TOOL_VERSION, write_dataset};
use nhsense_core::{FigureDataset, Manifest};

use commands::*;
use resolve::{CliError, Resolver};

#[derive(Debug, Parser)]
#[command(name = "nhsense", version, about = "Non-Hermitian two-level sensor toolkit")]
struct Cli {
    /// Flat TOML file whose keys mirror the flag names; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $NHSENSE_OUT_DIR or .]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, splitting, susceptibility and polar form along the trajectory
    Spectrum(SpectrumArgs),
    /// Propagate one trajectory (Schrödinger or master equation)
    Evolve(EvolveArgs),
    /// Evaluate a kernel on a (lambda, t) grid
    Sweep(SweepArgs),
    /// Regenerate a figure dataset
    Figure(FigureArgs),
    /// Optimal sensing window of the eigenvalue sensor
    OptimalTime(OptimalTimeArgs),
    /// Population and parameter uncertainty under background noise
    Noise(NoiseArgs),
    /// Re-run a manifest and compare checksums
    Replay(ReplayArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::Evolve(_) => "evolve",
            Self::Sweep(_) => "sweep",
            Self::Figure(_) => "figure",
            Self::OptimalTime(_) => "optimal-time",
            Self::Noise(_) => "noise",
            Self::Replay(_) => "replay",
        }
    }

    /// The same subcommand with every flag unset, so values come from the config.
    fn bare(name: &str) -> Option<Self> {
        Some(match name {
            "spectrum" => Self::Spectrum(Default::default()),
            "evolve" => Self::Evolve(Default::default()),
            "sweep" => Self::Sweep(Default::default()),
            "figure" => Self::Figure(Default::default()),
            "optimal-time" => Self::OptimalTime(Default::default()),
            "noise" => Self::Noise(Default::default()),
            _ => return None,
        })
    }
}

fn compute(command: &Command, r: &mut Resolver) -> Result<FigureDataset, CliError> {
    match command {
        Command::Spectrum(a) => spectrum(a, r),
        Command::Evolve(a) => evolve(a, r),
        Command::Sweep(a) => sweep(a, r),
        Command::Figure(a) => figure(a, r),
        Command::OptimalTime(a) => optimal(a, r),
        Command::Noise(a) => noise(a, r),
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    }
}

fn write(command: &Command, mut r: Resolver, out: &Path, warn_unused: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut ds = compute(command, &mut r)?;
    ds.manifest.extend(&r.echo);
    ds.manifest.set("subcommand", command.name());
    ds.manifest.set("tool_version", TOOL_VERSION);
    if ds.manifest.get("seed").is_none() {
        ds.manifest.set("seed", 0i64);
    }
    let paths = write_dataset(&ds, out)?;
    for key in r.unused().into_iter().filter(|_| warn_unused) {
        log::warn!("config key `{key}` is not used by `{}`", command.name());
    }
    Ok(paths)
}

fn replay(a: &ReplayArgs, out: Option<PathBuf>) -> Result<(), CliError> {
    let recorded = read_manifest(&a.manifest).map_err(|e| match e {
        nhsense_core::ExperimentError::Io { .. } => CliError::Io(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let name = recorded
        .get_str("subcommand")
        .map_err(|_| CliError::Usage(format!("{} has no `subcommand` key", a.manifest.display())))?
        .to_string();
    let command = Command::bare(&name).ok_or_else(|| CliError::Usage(format!("cannot replay `{name}`")))?;
    let out = out.unwrap_or_else(|| a.manifest.parent().unwrap_or(Path::new(".")).join("replay"));
    let mut config = Manifest::new();
    config.extend(&recorded);
    // the recorded location must not redirect the replay
    config.remove("out");
    write(&command, Resolver::new(config), &out, false)?;

    let files = manifest_files(&recorded)?;
    let mut same = !files.is_empty();
    for (file, sum) in files {
        let fresh = std::fs::read(out.join(&file)).map(|b| sha256_hex(&b)).unwrap_or_default();
        let ok = fresh == sum;
        same &= ok;
        println!("{} {file}", if ok { "identical" } else { "DIFFERS" });
    }
    if same {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("replay of {} is not byte-identical", a.manifest.display())))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Replay(a) = &cli.command {
        return replay(a, cli.out.clone());
    }
    let mut r = Resolver::from_file(cli.config.as_deref())?;
    let out = r.out_dir(cli.out.as_deref())?;
    for p in write(&cli.command, r, &out, true)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.code() == 2 {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    eprintln!("\n{}", sub.render_usage());
                }
            }
            ExitCode::from(e.code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_replayable_subcommand_has_a_bare_form() {
        for name in ["spectrum", "evolve", "sweep", "figure", "optimal-time", "noise"] {
            assert_eq!(Command::bare(name).unwrap().name(), name);
        }
        assert!(Command::bare("replay").is_none());
    }
}
