use std::io::{self, BufWriter};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use coins::host::{self, SessionHost};
use coins::{oracle, Scenario, Session};

#[derive(Parser)]
#[command(name = "coins", version, about = "Explanation-aware constraint engine")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Read requests from stdin, write one reply per line to stdout.
    Repl {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the relevance bound of the scenario.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Serve the session protocol over TCP.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Validate a scenario file.
    Check { file: PathBuf },
    /// Count solutions of a scenario by brute force.
    Oracle { file: PathBuf },
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Cmd::Repl { scenario, k } => {
            let mut session = Session::new(host::DEFAULT_SESSION, Scenario::load(scenario, k)?);
            let stdout = io::stdout();
            host::repl(&mut session, io::stdin().lock(), BufWriter::new(stdout.lock()))?;
        }
        Cmd::Serve { scenario, port, k } => {
            let host = Arc::new(SessionHost::new(Scenario::load(scenario, k)?));
            let listener = TcpListener::bind(("127.0.0.1", port))?;
            eprintln!("listening on {}", listener.local_addr()?);
            host::serve(listener, host)?;
        }
        Cmd::Check { file } => {
            let s = Scenario::load(file, None)?;
            println!(
                "ok: {} variables, {} constraints, {} hierarchy nodes, {} views, k = {}",
                s.problem.variables().len(),
                s.problem.constraints().count(),
                s.hierarchy.nodes().len(),
                s.views.len(),
                s.problem.k()
            );
        }
        Cmd::Oracle { file } => {
            let s = Scenario::load(file, None)?;
            let all: Vec<_> = s.problem.constraints().map(|c| c.id).collect();
            let space: u64 = s.problem.variables().iter().map(|d| d.initial().len() as u64).product();
            println!("assignments: {space}");
            println!("solutions: {}", oracle::count_solutions(&s.problem, &all));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
