//! `hetsic` command-line front end.

mod eval;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hetsic::error::{Error, Result};
use hetsic::experiments::validate::{run_suite, Suite};
use hetsic::experiments::{run_preset, write_result_dir, GridPoint, Preset, SweepSpec};
use hetsic::model::{
    association_prob_max_power, biased_association_prob, equivalent_density, rea_association_prob,
    tier_user_densities, NetworkConfig,
};
use serde::Deserialize;

use eval::{evaluate, registry_listing, EvalArgs};

#[derive(Debug, Parser)]
#[command(name = "hetsic", version, about = "SIC success probabilities in multi-tier Poisson networks")]
struct Cli {
    /// Worker threads for the simulations (default: available parallelism).
    /// Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one closed-form expression.
    Eval(EvalArgs),
    /// Run a preset or custom sweep and write result.csv, plot.gp and meta.json.
    Sweep(SweepArgs),
    /// Compare closed forms with simulation and report each check.
    Validate(ValidateArgs),
    /// List the sweep presets.
    Presets,
    /// Print a network configuration and its derived quantities.
    Inspect(InspectArgs),
}

#[derive(Debug, clap::Args)]
struct SweepArgs {
    /// fig2, fig3, fig4, fig5, fig6 or custom.
    #[arg(long)]
    preset: Option<Preset>,
    /// Simulation trials per batch; 0 writes the closed forms only.
    #[arg(long)]
    trials: Option<u64>,
    /// RNG seed; fixes every simulated value.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON with any of: preset, grid, trials, seed, threads, output_dir,
    /// network. Flags win over the file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root of the result tree.
    #[arg(long, env = "HETSIC_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ValidateArgs {
    /// numerics, can, sic, minload, maxsir, rea or all.
    suite: Suite,
    /// Simulation trials per batch.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, clap::Args)]
struct InspectArgs {
    /// Network JSON (densities in m^-2, powers and biases linear).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Show the default network of a preset instead.
    #[arg(long)]
    preset: Option<Preset>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    preset: Option<Preset>,
    grid: Option<Vec<GridPoint>>,
    trials: Option<u64>,
    seed: Option<u64>,
    threads: Option<usize>,
    output_dir: Option<PathBuf>,
    network: Option<NetworkConfig>,
}

fn read_sweep_file(path: &Path) -> Result<SweepFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

const DEFAULT_TRIALS: u64 = 10_000;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_OUTPUT_DIR: &str = "results";

fn sweep(args: &SweepArgs, threads: Option<usize>) -> Result<()> {
    let file = match &args.config {
        Some(p) => read_sweep_file(p)?,
        None => SweepFile::default(),
    };
    let preset = args
        .preset
        .or(file.preset)
        .ok_or_else(|| Error::Config("missing --preset".into()))?;
    let mut spec = SweepSpec::preset(
        preset,
        args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    )?;
    if let Some(g) = file.grid {
        spec.grid = g;
    }
    if let Some(n) = file.network {
        spec.network = n;
    }
    spec.threads = threads.or(file.threads);
    spec.output_dir = Some(
        args.output_dir
            .clone()
            .or(file.output_dir)
            .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into()),
    );
    let result = run_preset(&spec)?;
    let dir = write_result_dir(&result, spec.output_dir.as_deref().unwrap_or(Path::new(DEFAULT_OUTPUT_DIR)))?;
    println!("{}", dir.display());
    println!(
        "{} rows, preset {}, seed {}, trials {}, {:.0} ms",
        result.rows.len(),
        preset,
        spec.seed,
        spec.trials,
        result.meta.wall_clock_ms
    );
    Ok(())
}

fn validate(args: &ValidateArgs, threads: Option<usize>) -> Result<bool> {
    let checks = run_suite(args.suite, args.trials, args.seed, threads)?;
    for c in &checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    Ok(passed == checks.len())
}

fn presets() {
    for p in Preset::ALL {
        let spec = SweepSpec::preset(p, 0, 0).expect("preset defaults are valid");
        println!(
            "{:<7} {:>3} points, {} tier(s)  {}",
            p.name(),
            spec.grid.len(),
            spec.network.tiers.len(),
            p.description()
        );
    }
}

fn inspect(args: &InspectArgs) -> Result<()> {
    let cfg = match (&args.config, args.preset) {
        (Some(p), _) => NetworkConfig::from_json_file(p)?,
        (None, Some(p)) => hetsic::experiments::default_network(p)?,
        (None, None) => return Err(Error::Config("give --config or --preset".into())),
    };
    println!("{}", cfg.to_json_pretty());
    let eq = equivalent_density(&cfg);
    println!("lambda_eq = {} m^-2", eq.lambda_eq);
    let users = tier_user_densities(&cfg);
    for k in 0..cfg.tiers.len() {
        println!(
            "tier {}: association {:.6}, biased association {:.6}, range-expanded {:.6}, users {:.6e} m^-2, weighted users {:.6e} m^-2",
            k + 1,
            association_prob_max_power(&cfg, k)?,
            biased_association_prob(&cfg, k)?,
            rea_association_prob(&cfg, k)?,
            users[k],
            eq.mu_tilde[k]
        );
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Parse(_) => 2,
        Error::Numeric { .. } | Error::Io { .. } | Error::Csv { .. } => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be >= 1");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Eval(a) if a.formula == "list" => {
            println!("{}", registry_listing());
            Ok(true)
        }
        Command::Eval(a) => evaluate(a).map(|ev| {
            println!("{} {}", a.formula, ev.echo);
            for (label, v) in ev.values {
                if label.is_empty() {
                    println!("{v:.*}", a.precision);
                } else {
                    println!("{label} {v:.*}", a.precision);
                }
            }
            true
        }),
        Command::Sweep(a) => sweep(a, cli.threads).map(|_| true),
        Command::Validate(a) => validate(a, cli.threads),
        Command::Presets => {
            presets();
            Ok(true)
        }
        Command::Inspect(a) => inspect(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
