use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};

use nsopt::instances::InstanceMeta;
use nsopt::{gd_then_ingd, ingd, IngdParams, ProbeStrategy, QueryLedger, RngStream, RunResult, Vector};

use crate::config::ExperimentConfig;
use crate::descriptor::{parse_f64_list, parse_instance};
use crate::io::{append_csv, fmt_f64, write_trace_jsonl, CsvRow};

use super::status_exit_code;

#[derive(clap::Args, Debug)]
pub struct RunArgs {
    /// Instance descriptor, e.g. `nemirovski:t=16,alpha=0.007`.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, value_enum)]
    algo: Option<crate::config::Algo>,
    /// Stationarity radius.
    #[arg(long)]
    delta: Option<f64>,
    /// Target norm for the subgradient combination.
    #[arg(long)]
    eps: Option<f64>,
    /// Seed for randomized probes (ignored with --config).
    #[arg(long, env = "NSOPT_SEED")]
    seed: Option<u64>,
    /// Oracle-call budget; unbounded when omitted.
    #[arg(long)]
    budget: Option<usize>,
    /// Gradient Lipschitz bound for bisection probes; falls back to
    /// instance metadata.
    #[arg(long)]
    smoothness: Option<f64>,
    /// Inner-loop iteration cap override.
    #[arg(long)]
    max_inner: Option<usize>,
    /// Outer-step cap override.
    #[arg(long)]
    max_outer: Option<usize>,
    /// Start point `x1;x2;...`; defaults to the instance start.
    #[arg(long)]
    start: Option<String>,
    /// Load every run parameter from a JSON config instead of flags.
    #[arg(
        long,
        conflicts_with_all = [
            "instance", "algo", "delta", "eps", "budget", "smoothness",
            "max_inner", "max_outer", "start",
        ]
    )]
    config: Option<PathBuf>,
    /// Print the effective config as JSON and exit without running.
    #[arg(long)]
    emit_config: bool,
    /// Write the query transcript as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Append a measurement row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the final certificate as JSON.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Print a JSON result summary instead of the one-line report.
    #[arg(long)]
    json: bool,
    /// Report wall time as 0 ms, for byte-identical reruns.
    #[arg(long)]
    zero_time: bool,
}

fn effective_config(args: &RunArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        return ExperimentConfig::load(path);
    }
    let cfg = ExperimentConfig {
        instance: args
            .instance
            .clone()
            .context("--instance is required (or use --config)")?,
        algo: args.algo.context("--algo is required (or use --config)")?,
        delta: args.delta.context("--delta is required (or use --config)")?,
        eps: args.eps.context("--eps is required (or use --config)")?,
        seed: args.seed.unwrap_or(0),
        budget: args.budget,
        smoothness: args.smoothness,
        max_inner: args.max_inner,
        max_outer: args.max_outer,
        start: args.start.as_deref().map(parse_f64_list).transpose()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub struct RunOutput {
    pub result: RunResult,
    pub wall_ms: u128,
}

impl RunOutput {
    /// The norm the run actually vouches for: the certificate aggregate
    /// when one exists, the last combination norm otherwise.
    pub fn final_norm(&self) -> f64 {
        self.result
            .certificate
            .as_ref()
            .map(|c| c.norm)
            .unwrap_or_else(|| self.result.g_final.norm())
    }
}

pub fn build_strategy(
    algo: crate::config::Algo,
    smoothness: Option<f64>,
    meta: &InstanceMeta,
    seed: u64,
) -> Result<ProbeStrategy> {
    if algo.deterministic() {
        let h = smoothness.or(meta.smoothness).context(
            "bisection probes need a gradient Lipschitz bound: \
             pass --smoothness or pick a smooth instance",
        )?;
        Ok(ProbeStrategy::BinarySearch { smoothness: h })
    } else {
        Ok(ProbeStrategy::RandomSegment {
            rng: RngStream::new(seed, 0),
        })
    }
}

/// Runs one configured experiment. Configuration problems surface as
/// errors; algorithmic outcomes (budget death, loop caps) come back in the
/// result status.
pub fn execute(cfg: &ExperimentConfig, zero_time: bool) -> Result<RunOutput> {
    let instance = parse_instance(&cfg.instance, Some(cfg.eps))?;
    let meta = instance.meta();
    let start = match &cfg.start {
        Some(v) => {
            let x = Vector(v.clone());
            if x.dim() != meta.dim {
                bail!(
                    "start has dimension {}, instance needs {}",
                    x.dim(),
                    meta.dim
                );
            }
            if !x.is_finite() {
                bail!("start point must be finite");
            }
            x
        }
        None => instance.default_start(),
    };
    let ledger = match cfg.budget {
        Some(b) => QueryLedger::with_budget(b),
        None => QueryLedger::unbounded(),
    };
    let mut strategy = build_strategy(cfg.algo, cfg.smoothness, &meta, cfg.seed)?;

    let clock = Instant::now();
    let result = if cfg.algo.uses_gd_phase() {
        if cfg.max_inner.is_some() || cfg.max_outer.is_some() {
            bail!("--max-inner/--max-outer apply only to ingd-det and ingd-rand");
        }
        let radius = meta.radius.with_context(|| {
            format!(
                "{} declares no radius bound; the averaged-descent pipeline needs one",
                instance.kind_name()
            )
        })?;
        gd_then_ingd(
            &instance,
            ledger,
            &start,
            radius,
            meta.lipschitz,
            cfg.delta,
            cfg.eps,
            &mut strategy,
        )
    } else {
        let mut params = IngdParams::from_meta(&meta, cfg.delta, cfg.eps);
        if let Some(k) = cfg.max_inner {
            params.max_inner = k.max(1);
        }
        if let Some(t) = cfg.max_outer {
            params.max_outer = t.max(1);
        }
        ingd(&instance, ledger, &start, &params, &mut strategy)
    };
    let wall_ms = if zero_time {
        0
    } else {
        clock.elapsed().as_millis()
    };
    Ok(RunOutput { result, wall_ms })
}

pub fn csv_row(cfg: &ExperimentConfig, out: &RunOutput) -> CsvRow {
    CsvRow {
        instance: cfg.instance.clone(),
        algo: cfg.algo.as_str().to_string(),
        delta: cfg.delta,
        eps: cfg.eps,
        seed: cfg.seed,
        oracle_calls: out.result.trace.ledger.count(),
        success: out.result.status.is_certified(),
        final_norm: out.final_norm(),
        wall_time_ms: out.wall_ms,
    }
}

pub fn run(args: RunArgs) -> Result<i32> {
    let cfg = effective_config(&args)?;
    if args.emit_config {
        println!("{}", cfg.to_json());
        return Ok(0);
    }
    let out = execute(&cfg, args.zero_time)?;
    let result = &out.result;

    if let Some(path) = &args.trace {
        write_trace_jsonl(path, &result.trace.ledger)?;
    }
    if let Some(path) = &args.cert {
        let cert = result
            .certificate
            .as_ref()
            .context("no certificate to write: the run made no probes")?;
        std::fs::write(path, serde_json::to_string_pretty(cert)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        append_csv(path, &csv_row(&cfg, &out))?;
    }

    if args.json {
        let summary = serde_json::json!({
            "instance": cfg.instance,
            "algo": cfg.algo.as_str(),
            "delta": cfg.delta,
            "eps": cfg.eps,
            "seed": cfg.seed,
            "status": result.status.as_str(),
            "certified": result.status.is_certified(),
            "value": result.value,
            "point": result.point.0,
            "final_norm": out.final_norm(),
            "oracle_calls": result.trace.ledger.count(),
            "wall_time_ms": out.wall_ms,
            "certificate": result.certificate,
        });
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!(
            "run: instance={} algo={} status={} calls={} f={} norm={}",
            cfg.instance,
            cfg.algo.as_str(),
            result.status.as_str(),
            result.trace.ledger.count(),
            fmt_f64(result.value),
            fmt_f64(out.final_norm()),
        );
    }
    Ok(status_exit_code(result.status))
}
