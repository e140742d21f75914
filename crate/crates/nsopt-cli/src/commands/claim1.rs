use std::path::PathBuf;

use anyhow::{Context, Result};

use nsopt::certifier::check_claim1_equiv;

use crate::descriptor::parse_instance;

#[derive(clap::Args, Debug)]
pub struct Claim1Args {
    /// A one-dimensional piecewise-linear instance: `abs` or `tree:...`.
    #[arg(long)]
    instance: String,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    eps: f64,
    /// Uniform grid resolution over the padded breakpoint span; knife-edge
    /// candidates (breakpoints shifted by exactly delta) are always added.
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    /// Write the full comparison report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Exactly cross-checks, point by point, the two descriptions of
/// near-stationarity: a small-norm slope combination within delta versus
/// proximity to the eps-stationary set. Exits 0 on agreement everywhere,
/// 3 if any grid point separates them.
pub fn claim1(args: Claim1Args) -> Result<i32> {
    anyhow::ensure!(
        args.delta > 0.0 && args.delta.is_finite(),
        "delta must be positive and finite"
    );
    anyhow::ensure!(
        args.eps > 0.0 && args.eps.is_finite(),
        "eps must be positive and finite"
    );
    anyhow::ensure!(args.grid >= 2, "--grid must be at least 2");
    let instance = parse_instance(&args.instance, Some(args.eps))?;
    let pwl = instance.piecewise().with_context(|| {
        format!(
            "{} has no exact piecewise-linear form; use abs or tree",
            instance.kind_name()
        )
    })?;
    let report = check_claim1_equiv(&pwl, args.delta, args.eps, args.grid)
        .context("nothing to compare")?;
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "claim1: instance={} delta={} eps={} checked={} boundary={} disagreements={}",
        args.instance,
        args.delta,
        args.eps,
        report.checked,
        report.boundary_cases,
        report.disagreements.len(),
    );
    Ok(if report.disagreements.is_empty() { 0 } else { 3 })
}
