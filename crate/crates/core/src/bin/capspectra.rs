use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use capspectra::eigenbasis::EigenBasis;
use capspectra::error::{Error, Result};
use capspectra::export::{run_dir_name, write_run, write_sweep};
use capspectra::pipeline::{prepare, run_prepared, sweep_gamma};
use capspectra::scenario::ScenarioConfig;

/// Energy spectra of absorbed particles for 1D one- and two-particle systems.
#[derive(Parser)]
#[command(name = "capspectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound-state energies of the configured system.
    Groundstate(Source),
    /// A single run; writes `<out>/gamma0_<value>/`.
    Run(RunArgs),
    /// Every absorber strength of the ladder, plus summary tables.
    Sweep(RunArgs),
    /// Print a configuration as TOML.
    Config(Source),
}

#[derive(Args)]
struct Source {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: scattering, scattering-double, photo03, photo10.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated absorber strengths, replacing the configured ladder.
    #[arg(long, value_delimiter = ',')]
    gamma0: Option<Vec<f64>>,
    /// Directory for the cached eigenbasis.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn load(source: &Source) -> Result<ScenarioConfig> {
    match (&source.config, &source.preset) {
        (Some(path), _) => ScenarioConfig::load(path),
        (None, Some(name)) => ScenarioConfig::preset(name),
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    }
}

fn configured(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut cfg = load(&args.source)?;
    if let Some(g) = &args.gamma0 {
        cfg.cap.gamma0 = g.clone();
        cfg.validate()?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Groundstate(source) => {
            let cfg = load(&source)?;
            let grid = cfg.build_grid()?;
            let basis = EigenBasis::from_potential(&grid, &cfg.potential)?;
            println!("one-body ground energy: {:.6}", basis.energies()[0]);
            println!("bound states: {}", basis.bound_count());
            if !cfg.uses_packet() {
                let prepared = prepare(&cfg, None)?;
                println!("two-body ground energy: {:.6}", prepared.ground_energy.expect("relaxed ground state"));
            }
        }
        Command::Run(args) => {
            let cfg = configured(&args)?;
            if cfg.cap.gamma0.len() != 1 && args.gamma0.is_some() {
                return Err(Error::Config(vec!["run takes a single --gamma0 value; use sweep for several".into()]));
            }
            let gamma0 = cfg.cap.gamma0[0];
            let prepared = prepare(&cfg, args.cache.as_deref())?;
            let record = run_prepared(&cfg, &prepared, gamma0, &mut ())?;
            let (spectrum, _) = write_run(&record, &args.out.join(run_dir_name(gamma0)))?;
            let s = &record.scalars;
            println!(
                "gamma0={gamma0} P2={:.6e} P1={:.6e} p0={:.3e} |psi|^2={:.3e} residual={} -> {}",
                s.p2,
                s.p1,
                s.p0_final,
                s.norm2_final,
                s.max_abs_residual.map_or("-".into(), |r| format!("{r:.2e}")),
                spectrum.display()
            );
        }
        Command::Sweep(args) => {
            let cfg = configured(&args)?;
            let sweep = sweep_gamma(&cfg, args.cache.as_deref())?;
            write_sweep(&sweep, &args.out)?;
            for (g, r) in sweep.gamma0.iter().zip(&sweep.runs) {
                match r {
                    Ok(rec) => println!(
                        "gamma0={g} P2={:.6e} P1={:.6e} neg={:.3e} extent={} duration={}",
                        rec.scalars.p2,
                        rec.scalars.p1,
                        rec.scalars.neg_content,
                        rec.scalars.extent,
                        rec.scalars.duration
                    ),
                    Err(e) => println!("gamma0={g} failed: {e}"),
                }
            }
            println!("wrote {}", args.out.display());
        }
        Command::Config(source) => print!("{}", load(&source)?.to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
