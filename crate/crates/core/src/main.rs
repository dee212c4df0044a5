//! `disperse` CLI: simulate, steady, eigen, verify, sweep.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use disperse::commands::{
    cmd_eigen, cmd_simulate, cmd_steady, cmd_sweep, cmd_verify, CommandOpts, SweepAxis,
};

#[derive(Parser)]
#[command(
    name = "disperse",
    about = "Two-species competition under strategy-driven dispersal: simulation and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file
    scenario: PathBuf,
    /// Output directory for CSV files and the manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override [run] seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override [grid] n_cells
    #[arg(long)]
    n_cells: Option<usize>,
    /// Override [stepper] dt
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the competition system and classify the outcome
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Expected outcome variant: coexistence, exclusion_u, exclusion_v,
        /// extinction, undetermined (exit 2 if unmet)
        #[arg(long)]
        expect: Option<String>,
    },
    /// Solve both single-species stationary problems
    Steady {
        #[command(flatten)]
        common: Common,
    },
    /// Principal eigenvalues of the invasion linearizations
    Eigen {
        #[command(flatten)]
        common: Common,
    },
    /// Run every lemma/theorem check applicable to the scenario
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep d1, d2, r1 or r2 and classify the outcome per value
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to sweep: d1, d2, r1, r2
        #[arg(long)]
        axis: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        count: usize,
    },
}

fn opts(common: &Common, expect: Option<String>) -> CommandOpts {
    CommandOpts {
        out_dir: common.out.clone(),
        expect,
        seed: common.seed,
        n_cells: common.n_cells,
        dt: common.dt,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common, expect } => {
            cmd_simulate(&common.scenario, &opts(common, expect.clone()))
        }
        Command::Steady { common } => cmd_steady(&common.scenario, &opts(common, None)),
        Command::Eigen { common } => cmd_eigen(&common.scenario, &opts(common, None)),
        Command::Verify { common } => cmd_verify(&common.scenario, &opts(common, None)),
        Command::Sweep {
            common,
            axis,
            from,
            to,
            count,
        } => axis
            .parse::<SweepAxis>()
            .and_then(|axis| cmd_sweep(&common.scenario, axis, *from, *to, *count, &opts(common, None))),
    };
    match result {
        Ok(output) => {
            for line in &output.lines {
                println!("{}", line.line());
            }
            ExitCode::from(output.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
