use std::path::PathBuf;

use anyhow::Result;

use nsopt::RunStatus;

use crate::config::{Algo, ExperimentConfig};
use crate::descriptor::parse_f64_list;
use crate::io::{append_csv, CSV_HEADER};

use super::run::{csv_row, execute};

#[derive(clap::Args, Debug)]
pub struct ScalingArgs {
    /// Instance descriptor.
    #[arg(long)]
    instance: String,
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    delta: f64,
    /// Target norms to sweep, e.g. `0.5;0.25;0.125`.
    #[arg(long)]
    eps_list: String,
    #[arg(long, env = "NSOPT_SEED", default_value_t = 0)]
    seed: u64,
    /// Oracle-call budget per run; unbounded when omitted.
    #[arg(long)]
    budget: Option<usize>,
    /// Gradient Lipschitz bound for bisection probes.
    #[arg(long)]
    smoothness: Option<f64>,
    /// Also append the rows to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Report wall times as 0 ms.
    #[arg(long)]
    zero_time: bool,
}

/// One run per target norm, printed as CSV. Exits 0 when every run
/// certified, 2 when any ran out of budget, 3 otherwise.
pub fn scaling(args: ScalingArgs) -> Result<i32> {
    let eps_values = parse_f64_list(&args.eps_list)?;
    anyhow::ensure!(!eps_values.is_empty(), "--eps-list is empty");
    println!("{CSV_HEADER}");
    let mut worst = 0;
    for eps in eps_values {
        let cfg = ExperimentConfig {
            instance: args.instance.clone(),
            algo: args.algo,
            delta: args.delta,
            eps,
            seed: args.seed,
            budget: args.budget,
            smoothness: args.smoothness,
            max_inner: None,
            max_outer: None,
            start: None,
        };
        cfg.validate()?;
        let out = execute(&cfg, args.zero_time)?;
        let row = csv_row(&cfg, &out);
        println!("{}", row.to_line());
        if let Some(path) = &args.csv {
            append_csv(path, &row)?;
        }
        worst = worst.max(match out.result.status {
            RunStatus::CertifiedStationary => 0,
            RunStatus::InnerLoopCap | RunStatus::OuterLoopCap => 1,
            RunStatus::BudgetExhausted => 2,
        });
    }
    Ok(match worst {
        0 => 0,
        2 => 2,
        _ => 3,
    })
}
