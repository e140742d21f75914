//! Instance descriptors: `name:key=value,key=value` with `;`-separated
//! vector values, e.g. `nemirovski:t=16,alpha=0.007` or `linear:v=0.6;-0.8`.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};

use nsopt::instances::{
    default_tau, Abs, Instance, Linear, LogSumExpNemirovski, Mahalanobis, Nemirovski,
    NemirovskiExtended, Quadratic, Tree1d,
};
use nsopt::Vector;

/// Splits a descriptor into its lowercase name and key-value arguments.
fn split(desc: &str) -> Result<(String, BTreeMap<String, String>)> {
    let desc = desc.trim();
    if desc.is_empty() {
        bail!("empty instance descriptor");
    }
    let (name, rest) = match desc.split_once(':') {
        Some((n, r)) => (n, r),
        None => (desc, ""),
    };
    let mut args = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got `{part}`"))?;
        if args
            .insert(k.trim().to_lowercase(), v.trim().to_string())
            .is_some()
        {
            bail!("duplicate key `{}`", k.trim());
        }
    }
    Ok((name.trim().to_lowercase(), args))
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(';')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{}`", c.trim()))
        })
        .collect()
}

struct Args {
    name: String,
    map: BTreeMap<String, String>,
}

impl Args {
    fn get<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        self.opt(key)?
            .ok_or_else(|| anyhow!("{}: missing required key `{key}`", self.name))
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        match self.map.remove(key) {
            Some(v) => Ok(Some(v.parse::<T>().with_context(|| {
                format!("{}: bad value for `{key}`: `{v}`", self.name)
            })?)),
            None => Ok(None),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().next() {
            bail!("{}: unknown key `{k}`", self.name);
        }
        Ok(())
    }
}

/// Builds an instance from its descriptor. `default_eps` seeds defaults
/// that depend on the run's target accuracy (the smoothing temperature).
pub fn parse_instance(desc: &str, default_eps: Option<f64>) -> Result<Instance> {
    let (name, map) = split(desc)?;
    let mut args = Args {
        name: name.clone(),
        map,
    };
    let instance = match name.as_str() {
        "quadratic" => Instance::Quadratic(Quadratic::new(args.get("dim")?)),
        "linear" => {
            let v: String = args.get("v")?;
            Instance::Linear(Linear::new(Vector(parse_f64_list(&v)?)))
        }
        "abs" => Instance::Abs(Abs),
        "nemirovski" => Instance::Nemirovski(Nemirovski::new(args.get("t")?, args.get("alpha")?)),
        "nemirovski-ext" => Instance::NemirovskiExtended(NemirovskiExtended::new(
            args.get("t")?,
            args.get("alpha")?,
            args.get("dim")?,
            args.opt("seed")?.unwrap_or(0),
        )),
        "logsumexp" => {
            let t: usize = args.get("t")?;
            let alpha: f64 = args.get("alpha")?;
            let tau = match args.opt("tau")? {
                Some(tau) => tau,
                None => default_tau(
                    t,
                    default_eps
                        .ok_or_else(|| anyhow!("logsumexp: set tau=... or provide --eps"))?,
                ),
            };
            Instance::LogSumExp(LogSumExpNemirovski::new(t, alpha, tau))
        }
        "tree" => {
            let sigma: String = args.get("sigma")?;
            let word = sigma
                .parse()
                .map_err(|e| anyhow!("tree: bad sigma `{sigma}`: {e}"))?;
            Instance::Tree(Tree1d::new(word, args.opt("rescaled")?.unwrap_or(false)))
        }
        "mahalanobis" => {
            let eps: f64 = args.get("eps")?;
            let dim = match args.opt("dim")? {
                Some(d) => d,
                None => Mahalanobis::default_dim(eps),
            };
            Instance::Mahalanobis(Mahalanobis::new(eps, dim))
        }
        other => bail!(
            "unknown instance `{other}` (expected quadratic, linear, abs, nemirovski, \
             nemirovski-ext, logsumexp, tree, or mahalanobis)"
        ),
    };
    args.finish()?;
    Ok(instance)
}
