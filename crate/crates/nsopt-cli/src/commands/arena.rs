use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};

use anyhow::{bail, Context, Result};

use nsopt::arena::{run_resisting, ArenaParams, ArenaSubject, IngdSubject, RepeatSubject, WalkerSubject};
use nsopt::{Oracle, QueryLedger, Vector};

use crate::io::{fmt_f64, fmt_vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SubjectKind {
    /// The bisection-probe descent method.
    Ingd,
    /// Steps away along a hidden coordinate until the budget dies.
    Walker,
    /// Burns the whole budget on one point.
    Repeat,
    /// A subprocess speaking the line protocol (see --cmd).
    Cmd,
}

#[derive(clap::Args, Debug)]
pub struct ArenaArgs {
    #[arg(long, value_enum)]
    subject: SubjectKind,
    /// Oracle-call budget granted to the subject.
    #[arg(long)]
    t: usize,
    /// Ambient dimension; defaults to t + 2.
    #[arg(long)]
    dim: Option<usize>,
    /// Stationarity radius audited at each query (default 1/7).
    #[arg(long)]
    delta: Option<f64>,
    /// Norm the audit must keep every combination above (default 1/252).
    #[arg(long)]
    eps: Option<f64>,
    /// Random probes per audited query.
    #[arg(long)]
    samples: Option<usize>,
    /// Random simplex combinations tried per audited query.
    #[arg(long)]
    combo_trials: Option<usize>,
    #[arg(long, env = "NSOPT_SEED", default_value_t = 0)]
    seed: u64,
    /// Subject command line for --subject cmd, split on whitespace;
    /// the child gets `ARENA <dim> <budget>` on stdin, answers
    /// `QUERY x1 x2 ...` lines, receives `VALUE f GRAD g1 g2 ...`,
    /// and finishes with `DONE`.
    #[arg(long, required_if_eq("subject", "cmd"))]
    cmd: Option<String>,
    /// Write the full audit report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Drives an external process through the arena line protocol.
pub struct SubprocessSubject {
    argv: Vec<String>,
    failure: Option<String>,
}

impl SubprocessSubject {
    pub fn new(cmdline: &str) -> Result<Self> {
        let argv: Vec<String> = cmdline.split_whitespace().map(String::from).collect();
        if argv.is_empty() {
            bail!("--cmd is empty");
        }
        Ok(SubprocessSubject {
            argv,
            failure: None,
        })
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.as_deref()
    }

    fn drive(&mut self, oracle: &dyn Oracle, ledger: &mut QueryLedger) -> Result<()> {
        let mut child = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .with_context(|| format!("spawning `{}`", self.argv[0]))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let budget = ledger.remaining().expect("arena ledgers are budgeted");
        writeln!(stdin, "ARENA {} {}", oracle.dim(), budget)?;
        stdin.flush()?;

        for line in stdout.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "DONE" {
                break;
            }
            let Some(body) = line.strip_prefix("QUERY ") else {
                bail!("protocol violation from subject: `{line}`");
            };
            let coords: Vec<f64> = body
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .context("bad QUERY coordinates")?;
            match ledger.query(oracle, &Vector(coords), "subprocess") {
                Ok(reply) => {
                    writeln!(
                        stdin,
                        "VALUE {} GRAD {}",
                        fmt_f64(reply.value),
                        fmt_vector(&reply.subgrad)
                    )?;
                    stdin.flush()?;
                }
                Err(_) => {
                    // Budget gone: tell the subject and stop serving.
                    let _ = writeln!(stdin, "DONE");
                    break;
                }
            }
        }
        drop(stdin);
        let status = child.wait()?;
        if !status.success() {
            bail!("subject exited with {status}");
        }
        Ok(())
    }
}

impl ArenaSubject for SubprocessSubject {
    fn name(&self) -> &'static str {
        "subprocess"
    }

    fn run(&mut self, oracle: &dyn Oracle, mut ledger: QueryLedger) -> QueryLedger {
        if let Err(e) = self.drive(oracle, &mut ledger) {
            self.failure = Some(format!("{e:#}"));
        }
        ledger
    }
}

pub fn arena(args: ArenaArgs) -> Result<i32> {
    let mut params = ArenaParams::new(args.t, args.seed);
    params.dim = args.dim;
    if let Some(d) = args.delta {
        anyhow::ensure!(d > 0.0 && d.is_finite(), "delta must be positive");
        params.delta = d;
    }
    if let Some(e) = args.eps {
        anyhow::ensure!(e > 0.0 && e.is_finite(), "eps must be positive");
        params.eps = e;
    }
    if let Some(s) = args.samples {
        params.samples = s;
    }
    if let Some(c) = args.combo_trials {
        params.combo_trials = c;
    }

    let report = match args.subject {
        SubjectKind::Ingd => run_resisting(&mut IngdSubject, &params)?,
        SubjectKind::Walker => run_resisting(&mut WalkerSubject, &params)?,
        SubjectKind::Repeat => run_resisting(&mut RepeatSubject, &params)?,
        SubjectKind::Cmd => {
            let mut sub =
                SubprocessSubject::new(args.cmd.as_deref().expect("required_if_eq"))?;
            let report = run_resisting(&mut sub, &params)?;
            if let Some(f) = sub.failure() {
                bail!("subject process failed: {f}");
            }
            report
        }
    };
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "arena: subject={} t={} dim={} queries={} centers={} verdict={}",
        report.subject,
        report.t,
        report.dim,
        report.queries,
        report.audits.len(),
        if report.verdict { "resisted" } else { "breached" },
    );
    Ok(if report.verdict { 0 } else { 3 })
}
