use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gyrohaptic::session::SessionError;
use gyrohaptic::trace::{self, TraceError};
use gyrohaptic_gateway::config::load_config;
use gyrohaptic_gateway::server::Server;
use gyrohaptic_gateway::verify::verify;

const EXIT_FAILURE: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_HASH_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "gyrohaptic", version, about = "Spinning-wheel haptics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Headless run that writes a CSV trace and its config sidecar.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Simulated seconds.
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precession, conservation, nutation and force-cap checks for a config.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run a trace from its sidecar and compare row by row.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Print the regenerated rows to stdout.
        #[arg(long)]
        emit: bool,
    },
    /// Serve sessions over WebSocket.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, duration, out } => run(config, duration, out),
        Command::Verify { config } => {
            let config = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return bad_input(e),
            };
            let report = verify(&config);
            for check in &report.checks {
                println!("{check}");
            }
            if report.passed() {
                println!("all checks passed");
                ExitCode::SUCCESS
            } else {
                println!("verification failed");
                ExitCode::from(EXIT_FAILURE)
            }
        }
        Command::Replay { trace, emit } => replay(trace, emit),
        Command::Serve { config, port, host } => serve(config, host, port),
    }
}

fn bad_input(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_BAD_INPUT)
}

fn run(config: PathBuf, duration: f64, out: PathBuf) -> ExitCode {
    let config = match load_config(&config) {
        Ok(c) => c,
        Err(e) => return bad_input(e),
    };
    if !(duration.is_finite() && duration >= 0.0) {
        return bad_input(format!("--duration must be a non-negative number of seconds (got {duration})"));
    }
    let ticks = (duration / config.dt).round() as u64;
    match trace::record_to_file(&config, ticks, &out) {
        Ok(summary) => {
            println!(
                "wrote {} rows ({} ticks) to {}; max |F| {:.4} N",
                summary.snapshots,
                summary.ticks,
                out.display(),
                summary.max_force_n
            );
            ExitCode::SUCCESS
        }
        Err(TraceError::Session(SessionError::Blowup { tick })) => {
            eprintln!("error: numerical blow-up at tick {tick}; partial trace kept at {}", out.display());
            ExitCode::from(EXIT_BLOWUP)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn replay(path: PathBuf, emit: bool) -> ExitCode {
    let mut on_row = |row: &[String]| {
        if emit {
            println!("{}", row.join(","));
        }
    };
    if emit {
        println!("{}", trace::TRACE_COLUMNS.join(","));
    }
    let report = match trace::replay_file_with(&path, &mut on_row) {
        Ok(r) => r,
        Err(e @ TraceError::HashMismatch { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_HASH_MISMATCH);
        }
        Err(e) => return bad_input(e),
    };
    let verdict = match &report.divergence {
        None => format!("identical ({} records{})", report.records, if report.truncated { ", truncated" } else { "" }),
        Some(d) => format!(
            "diverged at record {} (tick {}, line {}{})",
            d.record,
            d.tick,
            d.line,
            d.column.map(|c| format!(", column {c}")).unwrap_or_default()
        ),
    };
    if emit {
        eprintln!("{verdict}");
    } else {
        println!("{verdict}");
    }
    if report.identical() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn serve(config: PathBuf, host: String, port: u16) -> ExitCode {
    let config = match load_config(&config) {
        Ok(c) => c,
        Err(e) => return bad_input(e),
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    runtime.block_on(async move {
        let server = match Server::bind((host.as_str(), port), config).await {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: cannot listen on {host}:{port}: {e}");
                return ExitCode::from(EXIT_FAILURE);
            }
        };
        match server.local_addr() {
            Ok(addr) => println!("listening on ws://{addr}"),
            Err(e) => eprintln!("warning: {e}"),
        }
        match server.run().await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_FAILURE)
            }
        }
    })
}
