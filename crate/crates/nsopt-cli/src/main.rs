//! Command-line workbench for the nsopt library: run descent methods on
//! benchmark instances, certify stationarity claims, audit determinism
//! against the resisting oracle, and cross-check exact 1D structure.

mod commands;
mod config;
mod descriptor;
mod io;

use clap::{Parser, Subcommand};

use commands::{arena, certify, claim1, client, run, scaling};

#[derive(Parser, Debug)]
#[command(
    name = "nsopt",
    version,
    about = "Nonsmooth optimization workbench: descent runs, stationarity \
             certificates, and adversarial audits",
    after_help = "Exit codes: 0 success or certified, 1 usage/configuration \
                  error, 2 oracle budget exhausted, 3 finished without a \
                  certificate (or an audit/cross-check found a breach)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a descent method on a benchmark instance.
    Run(Box<run::RunArgs>),
    /// Search for a small-norm subgradient combination at a point.
    Certify(certify::CertifyArgs),
    /// Audit a deterministic algorithm against the resisting oracle.
    Arena(arena::ArenaArgs),
    /// Sweep target norms and report oracle-call counts as CSV.
    Scaling(scaling::ScalingArgs),
    /// Exactly cross-check the two descriptions of near-stationarity in 1D.
    Claim1(claim1::Claim1Args),
    /// Arena subject side of the line protocol (spawned by `arena --subject cmd`).
    #[command(hide = true)]
    ArenaClient(client::ClientArgs),
}

fn main() {
    std::process::exit(dispatch());
}

fn dispatch() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors by convention; 2 means budget
            // exhaustion here, so print and remap.
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.cmd {
        Cmd::Run(args) => run::run(*args),
        Cmd::Certify(args) => certify::certify_cmd(args),
        Cmd::Arena(args) => arena::arena(args),
        Cmd::Scaling(args) => scaling::scaling(args),
        Cmd::Claim1(args) => claim1::claim1(args),
        Cmd::ArenaClient(args) => client::arena_client(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}
