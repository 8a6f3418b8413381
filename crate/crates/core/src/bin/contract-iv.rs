use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use contract_iv::exec::Exec;
use contract_iv::harness::config::{parse_list, parse_seeds};
use contract_iv::harness::{run_preset, summarize, ExperimentConfig, Preset};
use contract_iv::model::{AgentType, DiagonalPowerCost};
use contract_iv::robust::{
    bitstring, find_self_owned, improve_to_linear, payoff_range, triangulation_coverage, upper_facets,
    validity_epsilon, TabularContract,
};
use contract_iv::Result;

#[derive(Parser)]
#[command(name = "contract-iv", version, about = "Learning linear contracts from instrumented outcomes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset over its seed × horizon lattice and write CSV.
    Run(RunArgs),
    /// Aggregate a results CSV into medians, slopes and ratios.
    Summarize { csv: PathBuf },
    /// Robust-contract tools.
    Robust {
        #[command(subcommand)]
        command: RobustCommand,
    },
    /// List preset names.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    preset: String,
    /// Comma list or half-open range `a..b`.
    #[arg(long)]
    seed_list: Option<String>,
    /// Comma list of horizons.
    #[arg(long)]
    horizons: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Worst-case grid step for the robustness suite.
    #[arg(long)]
    resolution: Option<f64>,
    /// File of `key = value` overrides, applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record per-cell wall time.
    #[arg(long)]
    timing: bool,
    /// Run cells on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum RobustCommand {
    /// Analyze a tabular contract against a power-cost agent.
    Check {
        contract: PathBuf,
        /// Comma list of cost weights, one per task.
        #[arg(long)]
        weights: String,
        #[arg(long, default_value_t = 2.0)]
        degree: f64,
        /// Comma list of principal benefits; defaults to all ones.
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
    },
}

fn run(args: RunArgs) -> Result<bool> {
    let preset: Preset = args.preset.parse()?;
    let mut cfg = ExperimentConfig::preset(preset);
    if let Some(path) = &args.config {
        cfg.apply_override_file(path)?;
    }
    if let Some(s) = &args.seed_list {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(h) = &args.horizons {
        cfg.horizons = parse_list(h)?;
    }
    if let Some(s) = args.sigma {
        cfg.sigma = s;
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(r) = args.resolution {
        cfg.resolution = r;
    }
    cfg.timing |= args.timing;
    if args.sequential {
        cfg.exec = Exec::Sequential;
    }
    let output = run_preset(&cfg)?;
    match &args.out {
        Some(path) => output.write_csv(BufWriter::new(File::create(path)?))?,
        None => output.write_csv(io::stdout().lock())?,
    }
    for row in output.rows.iter().filter(|r| !r.is_ok()) {
        eprintln!("seed {} T {:?} {}: {}", row.seed, row.horizon, row.method, row.status);
    }
    Ok(output.all_ok())
}

fn robust_check(contract: PathBuf, weights: &str, degree: f64, theta: Option<String>, resolution: f64) -> Result<()> {
    let w = TabularContract::load_csv(&contract)?;
    let agent = AgentType::new(DiagonalPowerCost::new(parse_list(weights)?, degree)?);
    let theta = match theta {
        Some(t) => parse_list(&t)?,
        None => vec![1.0; w.dim()],
    };
    let facets = upper_facets(&w);
    let mut out = io::stdout().lock();
    writeln!(out, "dimension: {}", w.dim())?;
    writeln!(out, "upper facets: {}", facets.len())?;
    for f in &facets {
        let contact: Vec<String> = f.contact_set.iter().map(|&m| bitstring(w.dim(), m)).collect();
        writeln!(out, "  slope {:?} intercept {} contact [{}]", f.slope, f.intercept, contact.join(" "))?;
    }
    writeln!(out, "validity epsilon: {:e}", validity_epsilon(&facets))?;
    writeln!(out, "coverage: {}", triangulation_coverage(&facets, 10_000))?;
    let owned = find_self_owned(&w, &agent)?;
    writeln!(
        out,
        "self-owned hyperplane: slope {:?} intercept {} action {:?} distance {:e} ({:?})",
        owned.hyperplane.slope, owned.hyperplane.intercept, owned.action, owned.distance, owned.source
    )?;
    let linear = improve_to_linear(&owned.hyperplane, &agent)?;
    writeln!(out, "linear contract: {:?}", linear.as_slice())?;
    let anchors = [owned.action.clone()];
    let original = payoff_range(&w, &agent, &theta, resolution, &anchors)?;
    let improved =
        payoff_range(&TabularContract::affine(linear.as_slice(), 0.0)?, &agent, &theta, resolution, &anchors)?;
    writeln!(out, "worst-case payoff, original: {} (best {})", original.worst, original.best)?;
    writeln!(out, "worst-case payoff, linear:   {} (best {})", improved.worst, improved.best)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { csv } => {
            print!("{}", summarize(&csv)?);
            Ok(true)
        }
        Command::Robust { command: RobustCommand::Check { contract, weights, degree, theta, resolution } } => {
            robust_check(contract, &weights, degree, theta, resolution)?;
            Ok(true)
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{p}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
