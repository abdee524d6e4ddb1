//! Command-line front end: sweeps, analytic delay tables, trace
//! generation and matrix dumps, all driven by one TOML config.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ancsat::{
    build_matrix, generate_trace, parse_config, save_trace, ChannelSpec, ChannelTrace,
    ExperimentConfig, Modulation, StateSpace,
};

#[derive(Parser)]
#[command(
    name = "ancsat",
    version,
    about = "Link-level simulator for energy-efficient adaptive network-coded satellite transmission"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over schemes and E_s/N0; writes sweep.csv and manifest.txt
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Override runs per grid point
        #[arg(long)]
        runs: Option<u32>,
    },
    /// Expected-delay tables from the chain recursion; writes delay_analytic.csv
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Generate a channel trace; writes trace.csv
    Trace {
        #[command(flatten)]
        common: Common,
        /// Trace length in slots
        #[arg(long)]
        slots: usize,
        /// Anchor E_s/N0 in dB (default: the config's channel mean)
        #[arg(long)]
        esn0: Option<f64>,
    },
    /// Dump the one-step transition matrix as row,col,prob CSV
    Matrix {
        #[command(flatten)]
        common: Common,
        /// E_s/N0 in dB of the constant trace behind the matrix
        #[arg(long)]
        esn0: f64,
        /// Modulation (bpsk, qpsk, 8psk, 16qam)
        #[arg(long, default_value = "bpsk")]
        modulation: String,
        /// Slot horizon J; dimension is dof_target * J + 1
        #[arg(long, default_value_t = 100)]
        horizon: usize,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("reading config {}", common.config.display()))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep { common, runs } => {
            let mut cfg = load_config(&common)?;
            if let Some(runs) = runs {
                cfg.n_runs = runs;
            }
            let arts = ancsat::run_experiment(&cfg)?;
            println!("wrote {}", arts.sweep_csv.display());
            println!("wrote {}", arts.manifest.display());
        }
        Command::Analyze { common } => {
            let cfg = load_config(&common)?;
            let path = ancsat::analyze_delay(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Trace {
            common,
            slots,
            esn0,
        } => {
            let cfg = load_config(&common)?;
            if slots < 1 {
                bail!("--slots must be >= 1");
            }
            let trace = match &cfg.channel {
                ChannelSpec::Lms(params) => {
                    let mut params = params.clone();
                    if let Some(esn0) = esn0 {
                        params.mean_esn0_db = esn0;
                    }
                    generate_trace(&params, slots, cfg.seed)?
                }
                ChannelSpec::Constant { slot_duration_s } => {
                    ChannelTrace::constant(esn0.unwrap_or(10.0), slots, *slot_duration_s)
                }
            };
            fs::create_dir_all(&cfg.output_dir)
                .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
            let path = cfg.output_dir.join("trace.csv");
            let mut buf = Vec::new();
            save_trace(&trace, &mut buf)?;
            fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        Command::Matrix {
            common,
            esn0,
            modulation,
            horizon,
        } => {
            let cfg = load_config(&common)?;
            let m = Modulation::from_name(&modulation)?;
            let space = StateSpace::new(cfg.dof_target, horizon)?;
            let trace = ChannelTrace::constant(esn0, horizon, cfg.channel.slot_duration());
            let matrix = build_matrix(&trace, &cfg.phy, m, &space)?;
            fs::create_dir_all(&cfg.output_dir)
                .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
            let path = cfg.output_dir.join("matrix.csv");
            let mut buf = Vec::new();
            matrix.write_csv(&mut buf)?;
            fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "wrote {} ({} states incl. absorbing)",
                path.display(),
                matrix.dim()
            );
        }
    }
    Ok(())
}
