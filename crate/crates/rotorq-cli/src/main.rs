//! `rotorq`: solve, synthesize, simulate, and sweep two-pulse single-qubit
//! gates on rotational molecular qubits.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use commands::CmdError;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "rotorq",
    version,
    about = "Two-pulse single-qubit gates on rotational molecular qubits"
)]
struct Cli {
    /// Config file (TOML, or a manifest.json from a previous run).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override: pulse bandwidth as a fraction of omega01.
    #[arg(long, global = true)]
    bandwidth_frac: Option<f64>,

    /// Override: inter-pulse delay in revival times.
    #[arg(long, global = true)]
    tau_revivals: Option<f64>,

    /// Override: propagation steps per carrier period.
    #[arg(long, global = true)]
    steps_per_period: Option<u32>,

    /// Override: certification steps per carrier period (simulate).
    #[arg(long, global = true)]
    certify_steps_per_period: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the two-pulse parameters for a gate and print the row.
    Solve {
        #[arg(long)]
        gate: Option<String>,
        /// Eight reals: row-major re,im pairs of the 2x2 matrix.
        #[arg(long)]
        matrix: Option<String>,
        /// Also write the solution as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Synthesize the waveform for a gate and export it.
    Pulse {
        #[arg(long)]
        gate: Option<String>,
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, default_value = "out/pulse")]
        out: PathBuf,
    },
    /// End-to-end solve -> synthesize -> propagate -> score, with
    /// convergence certification. Exit code 0 only when converged.
    Simulate {
        #[arg(long)]
        gate: Option<String>,
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, default_value = "out/simulate")]
        out: PathBuf,
    },
    /// Two-parameter robustness sweep for one gate.
    Scan {
        #[arg(long)]
        gate: Option<String>,
        #[arg(long)]
        matrix: Option<String>,
        /// fig2 (bandwidth x common phase) or fig3 (detuning x delay).
        #[arg(long)]
        preset: String,
        #[arg(long, default_value = "out/scan")]
        out: PathBuf,
    },
    /// Compile and run a gate sequence as one phase-locked pulse train.
    Circuit {
        /// Comma-separated gate names, e.g. H,T,S,Z.
        #[arg(long, default_value = "H,T,S,Z")]
        gates: String,
        #[arg(long, default_value = "out/circuit")]
        out: PathBuf,
    },
    /// Orientation readout: trace, cosine fit, angular distributions.
    Observe {
        /// Single gate applied to |0> before the field-free readout.
        #[arg(long)]
        after: Option<String>,
        /// Or a full gate sequence.
        #[arg(long)]
        gates: Option<String>,
        #[arg(long, default_value = "out/observe")]
        out: PathBuf,
    },
    /// Print molecular constants and derived scales.
    Constants,
    /// Regenerate the data behind one of the landscape/circuit/readout
    /// figures (fig2, fig3, fig4, fig5).
    Repro {
        #[arg(long)]
        figure: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CmdError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CmdError::validation)?,
        None => RunConfig::default(),
    };
    if let Some(b) = cli.bandwidth_frac {
        config.pulse.bandwidth_frac = b;
    }
    if let Some(t) = cli.tau_revivals {
        config.pulse.tau_revivals = t;
    }
    if let Some(s) = cli.steps_per_period {
        config.propagation.steps_per_period = s;
    }
    if let Some(s) = cli.certify_steps_per_period {
        config.propagation.certify_steps_per_period = s;
    }
    if config.pulse.bandwidth_frac <= 0.0
        || config.pulse.tau_revivals <= 0.0
        || config.pulse.carrier_frac <= 0.0
    {
        return Err(CmdError::validation("pulse fractions must be positive"));
    }
    if config.propagation.steps_per_period < 40 {
        return Err(CmdError::validation(
            "steps_per_period must be at least 40 (carrier sampling limit)",
        ));
    }
    config.molecule().validate().map_err(CmdError::from)?;
    Ok(config)
}

fn dispatch(cli: &Cli) -> commands::CmdResult {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Solve { gate, matrix, json } => {
            commands::cmd_solve(&config, gate.as_deref(), matrix.as_deref(), json.as_deref())
        }
        Command::Pulse { gate, matrix, out } => {
            commands::cmd_pulse(&config, gate.as_deref(), matrix.as_deref(), out)
        }
        Command::Simulate { gate, matrix, out } => {
            commands::cmd_simulate(&config, gate.as_deref(), matrix.as_deref(), out)
        }
        Command::Scan { gate, matrix, preset, out } => {
            commands::cmd_scan(&config, gate.as_deref(), matrix.as_deref(), preset, out)
        }
        Command::Circuit { gates, out } => commands::cmd_circuit(&config, gates, out),
        Command::Observe { after, gates, out } => {
            commands::cmd_observe(&config, after.as_deref(), gates.as_deref(), out)
        }
        Command::Constants => commands::cmd_constants(&config),
        Command::Repro { figure, out } => commands::cmd_repro(&config, figure, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with its own code; keep usage errors on 1
            // (except --help/--version, which are success paths)
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
