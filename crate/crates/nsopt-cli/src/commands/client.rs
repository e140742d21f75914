//! The arena line protocol, subject side. Reads `ARENA <dim> <budget>` from
//! stdin, runs the descent method against an oracle that forwards every
//! evaluation as a `QUERY` line, and prints `DONE` when finished. Used to
//! exercise the arena's subprocess plumbing against this same binary.

use std::cell::RefCell;
use std::io::{BufRead, Lines, StdinLock, Write};

use anyhow::{bail, Context, Result};

use nsopt::{ingd, IngdParams, Oracle, OracleReply, ProbeStrategy, QueryLedger, RngStream, Vector};

use crate::config::Algo;
use crate::io::fmt_vector;

#[derive(clap::Args, Debug)]
pub struct ClientArgs {
    #[arg(long, value_enum, default_value_t = Algo::IngdDet)]
    algo: Algo,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Gradient Lipschitz bound assumed by bisection probes.
    #[arg(long, default_value_t = 4.0)]
    smoothness: f64,
    #[arg(long, env = "NSOPT_SEED", default_value_t = 0)]
    seed: u64,
}

struct RemoteOracle {
    dim: usize,
    io: RefCell<(Lines<StdinLock<'static>>, std::io::Stdout)>,
}

impl Oracle for RemoteOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        let mut io = self.io.borrow_mut();
        writeln!(io.1, "QUERY {}", fmt_vector(x)).expect("writing QUERY");
        io.1.flush().expect("flushing QUERY");
        let line = io
            .0
            .next()
            .expect("oracle hung up mid-run")
            .expect("reading oracle reply");
        parse_reply(&line, self.dim).expect("well-formed VALUE reply")
    }
}

fn parse_reply(line: &str, dim: usize) -> Result<OracleReply> {
    let body = line
        .trim()
        .strip_prefix("VALUE ")
        .with_context(|| format!("expected VALUE reply, got `{line}`"))?;
    let (value_str, grad_str) = body
        .split_once(" GRAD ")
        .with_context(|| format!("missing GRAD in `{line}`"))?;
    let value: f64 = value_str.trim().parse().context("bad VALUE number")?;
    let coords: Vec<f64> = grad_str
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .context("bad GRAD coordinates")?;
    anyhow::ensure!(coords.len() == dim, "GRAD has wrong dimension");
    Ok(OracleReply {
        value,
        subgrad: Vector(coords),
        active_set: None,
    })
}

pub fn arena_client(args: ClientArgs) -> Result<i32> {
    let mut strategy = match args.algo {
        Algo::IngdDet => ProbeStrategy::BinarySearch {
            smoothness: args.smoothness,
        },
        Algo::IngdRand => ProbeStrategy::RandomSegment {
            rng: RngStream::new(args.seed, 0),
        },
        Algo::GdIngdDet | Algo::GdIngdRand => {
            bail!("the arena client runs the descent method only")
        }
    };

    let mut lines = std::io::stdin().lock().lines();
    let handshake = lines
        .next()
        .context("expected ARENA handshake on stdin")?
        .context("reading handshake")?;
    let mut parts = handshake.split_whitespace();
    if parts.next() != Some("ARENA") {
        bail!("bad handshake `{handshake}`");
    }
    let dim: usize = parts
        .next()
        .context("handshake missing dimension")?
        .parse()
        .context("bad handshake dimension")?;
    let budget: usize = parts
        .next()
        .context("handshake missing budget")?
        .parse()
        .context("bad handshake budget")?;
    anyhow::ensure!(dim >= 1, "dimension must be at least 1");

    let oracle = RemoteOracle {
        dim,
        io: RefCell::new((lines, std::io::stdout())),
    };
    let params = IngdParams::new(args.delta, args.eps, 10_000, 10_000);
    let _ = ingd(
        &oracle,
        QueryLedger::with_budget(budget),
        &Vector::zeros(dim),
        &params,
        &mut strategy,
    );
    println!("DONE");
    Ok(0)
}
