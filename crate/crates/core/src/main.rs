//! Command-line harness for the Lennard-Jones ensemble experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ljmd::experiments::{self, manifest::ARTIFACT_VERSION, ExperimentKind, ExperimentManifest, RunOptions};
use ljmd::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "ljmd", version, about = "2-D Lennard-Jones molecular dynamics ensemble experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw canonical samples and check equipartition.
    Sample(Common),
    /// Tracer x-position versus time for several step sizes.
    Divergence(Common),
    /// Histogram of tracer x-displacements at the horizon.
    Histogram(Common),
    /// Mean squared tracer displacement versus time.
    Msd(Common),
    /// Energy drift versus step size.
    EnergyDrift(Common),
    /// Coarse-versus-reference mean squared displacement table.
    Conjecture(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Manifest file (TOML); missing keys take the experiment's defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root random seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads [default: available cores].
    #[arg(long, value_name = "COUNT")]
    workers: Option<usize>,
    /// Output directory [default: out/<experiment>].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated step sizes.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    dt: Option<Vec<f64>>,
    /// Ensemble size.
    #[arg(long, value_name = "N")]
    ensemble: Option<usize>,
    /// Integration horizon.
    #[arg(long, value_name = "T")]
    horizon: Option<f64>,
    /// Checkpoint directory [default: <out>/checkpoint].
    #[arg(long, value_name = "DIR", conflicts_with = "no_checkpoint")]
    checkpoint: Option<PathBuf>,
    /// Do not write or read checkpoints.
    #[arg(long)]
    no_checkpoint: bool,
    /// Print the resolved manifest and exit without running.
    #[arg(long)]
    print_config: bool,
    /// Suppress progress messages.
    #[arg(long, short)]
    quiet: bool,
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Common) {
        match self {
            Command::Sample(c) => (ExperimentKind::Sample, c),
            Command::Divergence(c) => (ExperimentKind::Divergence, c),
            Command::Histogram(c) => (ExperimentKind::Histogram, c),
            Command::Msd(c) => (ExperimentKind::Msd, c),
            Command::EnergyDrift(c) => (ExperimentKind::EnergyDrift, c),
            Command::Conjecture(c) => (ExperimentKind::Conjecture, c),
        }
    }
}

/// Overlays `overlay` onto `base`, table by table.
fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn load_manifest(kind: ExperimentKind, path: Option<&Path>) -> Result<ExperimentManifest> {
    let defaults = ExperimentManifest::default_for(kind);
    let Some(path) = path else {
        return Ok(defaults);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let overlay: toml::Value = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Some(k) = overlay.get("params").and_then(|p| p.get("kind")).and_then(|k| k.as_str()) {
        if k != kind.name() {
            return Err(Error::Config(format!("config file describes a {k} experiment, not {}", kind.name())));
        }
    }
    let mut value = toml::Value::try_from(&defaults).map_err(|e| Error::Config(e.to_string()))?;
    merge(&mut value, overlay);
    let mut manifest: ExperimentManifest =
        value.try_into().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    manifest.artifact_version = ARTIFACT_VERSION.to_string();
    Ok(manifest)
}

fn resolve(kind: ExperimentKind, args: &Common) -> Result<(ExperimentManifest, RunOptions)> {
    let mut manifest = load_manifest(kind, args.config.as_deref())?;
    if let Some(seed) = args.seed {
        manifest.root_seed = seed;
    }
    if let Some(dt) = &args.dt {
        manifest.dt = dt.clone();
    }
    if let Some(n) = args.ensemble {
        manifest.ensemble = n;
    }
    if let Some(t) = args.horizon {
        manifest.horizon = t;
    }
    manifest.validate()?;
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let workers = match args.workers {
        Some(0) => return Err(Error::Config("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let checkpoint_dir = if args.no_checkpoint {
        None
    } else {
        Some(args.checkpoint.clone().unwrap_or_else(|| out_dir.join("checkpoint")))
    };
    let options = RunOptions { workers, out_dir, checkpoint_dir, progress: !args.quiet };
    Ok((manifest, options))
}

fn execute(cli: &Cli) -> Result<usize> {
    let (kind, args) = cli.command.split();
    let (manifest, options) = resolve(kind, args)?;
    if args.print_config {
        print!("{}", manifest.to_toml()?);
        return Ok(0);
    }
    let result = experiments::run(&manifest, &options)?;
    let failures = result.failures();
    println!("{}: outputs written to {}", kind.name(), options.out_dir.display());
    if failures > 0 {
        println!("{}: {failures} run(s) failed numerically; see the failure columns", kind.name());
    }
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
