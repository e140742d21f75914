use std::path::PathBuf;

use anyhow::{Context, Result};

use nsopt::instances::Instance;
use nsopt::{certify, verify_certificate, CertifyRequest, QueryLedger, RngStream, Vector};

use crate::descriptor::{parse_f64_list, parse_instance};
use crate::io::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum HintMode {
    /// Probe the instance's own suggestions (kinks, witness directions).
    Witness,
    /// Random samples only.
    None,
}

#[derive(clap::Args, Debug)]
pub struct CertifyArgs {
    /// Instance descriptor.
    #[arg(long)]
    instance: String,
    /// Radius of the ball the combination may draw subgradients from.
    #[arg(long)]
    delta: f64,
    /// Target norm.
    #[arg(long)]
    eps: f64,
    /// Center point `x1;x2;...`; defaults to the instance's witness center
    /// when it has one, otherwise to the instance start.
    #[arg(long)]
    point: Option<String>,
    /// Random probes inside the ball. Defaults to 0 with witness hints,
    /// 64 without.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = HintMode::Witness)]
    hints: HintMode,
    #[arg(long, env = "NSOPT_SEED", default_value_t = 0)]
    seed: u64,
    /// Oracle-call budget; unbounded when omitted.
    #[arg(long)]
    budget: Option<usize>,
    /// Write the certificate JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the certificate JSON to stdout.
    #[arg(long)]
    json: bool,
    /// Skip the independent re-verification pass.
    #[arg(long)]
    no_verify: bool,
}

pub fn certify_cmd(args: CertifyArgs) -> Result<i32> {
    anyhow::ensure!(
        args.delta >= 0.0 && args.delta.is_finite(),
        "delta must be nonnegative and finite"
    );
    anyhow::ensure!(
        args.eps > 0.0 && args.eps.is_finite(),
        "eps must be positive and finite"
    );
    let instance = parse_instance(&args.instance, Some(args.eps))?;
    let point = match &args.point {
        Some(s) => {
            let x = Vector(parse_f64_list(s)?);
            anyhow::ensure!(
                x.dim() == instance.meta().dim && x.is_finite(),
                "point must be finite with dimension {}",
                instance.meta().dim
            );
            x
        }
        None => match &instance {
            Instance::Mahalanobis(f) => f.witness_center(args.delta),
            _ => instance.default_start(),
        },
    };
    let hints = match args.hints {
        HintMode::Witness => instance.hint_points(&point, args.delta),
        HintMode::None => Vec::new(),
    };
    let samples = args.samples.unwrap_or(match args.hints {
        HintMode::Witness => 0,
        HintMode::None => 64,
    });
    let req = CertifyRequest {
        delta: args.delta,
        eps: args.eps,
        samples,
        hints,
    };
    let mut ledger = match args.budget {
        Some(b) => QueryLedger::with_budget(b),
        None => QueryLedger::unbounded(),
    };
    let mut rng = RngStream::new(args.seed, 0);

    let outcome = match certify(&instance, &mut ledger, &point, &req, &mut rng) {
        Ok(o) => o,
        Err(e) => {
            println!("certify: budget-exhausted budget={}", e.budget);
            return Ok(2);
        }
    };
    let found = outcome.found();
    let cert = outcome.into_certificate();

    if !args.no_verify {
        let violations = verify_certificate(&instance, &cert);
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("certificate violation: {v}");
            }
            println!(
                "certify: invalid violations={} norm={}",
                violations.len(),
                fmt_f64(cert.norm)
            );
            return Ok(3);
        }
    }
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&cert)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&cert)?);
    }
    println!(
        "certify: instance={} found={} norm={} eps={} probes={} calls={}",
        args.instance,
        found,
        fmt_f64(cert.norm),
        args.eps,
        cert.probes.len(),
        ledger.count(),
    );
    Ok(if found { 0 } else { 3 })
}
