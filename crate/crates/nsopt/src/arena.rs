//! Adversarial arena for deterministic first-order methods.
//!
//! A subject plays a fixed number of oracle calls against the resisting
//! oracle, which answers every query with value zero and gradient `e_1`.
//! The transcript is then materialized into a concrete Lipschitz function
//! that honors every recorded reply, and each queried point is audited:
//! the Goldstein subdifferential around it is sampled and its min-norm
//! element must stay above the stationarity threshold. A subject that
//! cannot beat the construction certifies the lower bound mechanism; a
//! small combination anywhere is a genuine break and fails the verdict.

use serde::{Deserialize, Serialize};

use crate::algorithms::{ingd, IngdParams, ProbeStrategy};
use crate::certifier::gather_generators;
use crate::instances::{ResistingError, ResistingInstance, ResistingOracle};
use crate::minnorm::{min_norm_point, MinNormError};
use crate::oracle::{Oracle, QueryLedger};
use crate::rng::RngStream;
use crate::vector::Vector;

/// A deterministic algorithm under audit. It receives the oracle and a
/// budgeted ledger, spends queries as it likes, and hands the ledger back.
pub trait ArenaSubject {
    fn name(&self) -> &'static str;
    fn run(&mut self, oracle: &dyn Oracle, ledger: QueryLedger) -> QueryLedger;
}

/// The descent method itself, with bisection probes: the canonical victim.
pub struct IngdSubject;

impl ArenaSubject for IngdSubject {
    fn name(&self) -> &'static str {
        "ingd-bisection"
    }

    fn run(&mut self, oracle: &dyn Oracle, ledger: QueryLedger) -> QueryLedger {
        let params = IngdParams::new(0.5, 0.01, 10_000, 10_000);
        let mut strategy = ProbeStrategy::BinarySearch { smoothness: 4.0 };
        let start = Vector::zeros(oracle.dim());
        ingd(oracle, ledger, &start, &params, &mut strategy)
            .trace
            .ledger
    }
}

/// Steps away along `e_2` one unit at a time until the budget dies.
pub struct WalkerSubject;

impl ArenaSubject for WalkerSubject {
    fn name(&self) -> &'static str {
        "walker"
    }

    fn run(&mut self, oracle: &dyn Oracle, mut ledger: QueryLedger) -> QueryLedger {
        let dim = oracle.dim();
        let mut t = 1.0;
        while ledger
            .query(oracle, &Vector::basis(dim, 1).scale(t), "walk")
            .is_ok()
        {
            t += 1.0;
        }
        ledger
    }
}

/// Burns the whole budget on one repeated point; the materialized instance
/// must still resist around it.
pub struct RepeatSubject;

impl ArenaSubject for RepeatSubject {
    fn name(&self) -> &'static str {
        "repeat"
    }

    fn run(&mut self, oracle: &dyn Oracle, mut ledger: QueryLedger) -> QueryLedger {
        let x = Vector::basis(oracle.dim(), 1).scale(0.5);
        while ledger.query(oracle, &x, "repeat").is_ok() {}
        ledger
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArenaParams {
    /// Query budget granted to the subject.
    pub t: usize,
    /// Ambient dimension; defaults to `t + 2`, the least that guarantees a
    /// direction orthogonal to every query and to `e_1`.
    pub dim: Option<usize>,
    /// Goldstein radius audited around each queried point.
    pub delta: f64,
    /// Stationarity threshold the construction must stay above.
    pub eps: f64,
    /// Random ball samples per audit.
    pub samples: usize,
    /// Random convex combinations fuzzed per audit.
    pub combo_trials: usize,
    pub seed: u64,
}

impl ArenaParams {
    pub fn new(t: usize, seed: u64) -> Self {
        ArenaParams {
            t,
            dim: None,
            delta: 1.0 / 7.0,
            eps: 1.0 / 252.0,
            samples: 256,
            combo_trials: 1000,
            seed,
        }
    }

    pub fn dim_or_default(&self) -> usize {
        self.dim.unwrap_or(self.t + 2)
    }
}

/// Audit of a single queried point against the materialized instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryAudit {
    pub center: Vector,
    /// Interpolant value at the center; the transcript promised zero.
    pub h_value: f64,
    /// Distance from the interpolant gradient at the center to `e_1`.
    pub h_grad_dev: f64,
    /// Whether the materialized instance reproduces the recorded replies.
    pub consistent: bool,
    /// Generators gathered in the audited ball.
    pub generators: usize,
    /// Min-norm element of the sampled Goldstein hull.
    pub min_norm: f64,
    /// Smallest norm seen over random convex combinations.
    pub combo_min: f64,
    /// Consistent and both norms above the threshold.
    pub resisted: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArenaReport {
    pub subject: String,
    pub t: usize,
    pub dim: usize,
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    /// Queries actually spent by the subject.
    pub queries: usize,
    /// Interpolation radius of the materialized instance.
    pub r: f64,
    /// The hidden descent direction the subject never saw.
    pub v: Vector,
    /// Gap between the subject's first query value and the infimum.
    pub separation: Option<f64>,
    pub audits: Vec<QueryAudit>,
    /// True when every audit resisted.
    pub verdict: bool,
}

/// Runs a subject against the resisting oracle and audits the transcript.
///
/// Construction fails only if the subject emitted malformed queries or the
/// dimension cannot hide a direction from it.
pub fn run_resisting(
    subject: &mut dyn ArenaSubject,
    params: &ArenaParams,
) -> Result<ArenaReport, ResistingError> {
    let dim = params.dim_or_default();
    let oracle = ResistingOracle::new(dim);
    let ledger = subject.run(&oracle, QueryLedger::with_budget(params.t));

    let queries: Vec<Vector> = ledger.records().iter().map(|rec| rec.x.clone()).collect();
    let inst = ResistingInstance::from_queries(&queries, dim)?;

    let mut audits = Vec::with_capacity(inst.centers().len());
    for (i, center) in inst.centers().iter().enumerate() {
        let mut rng_cert = RngStream::new(params.seed, 2 * i as u64);
        let mut rng_combo = RngStream::new(params.seed, 2 * i as u64 + 1);

        let (h_value, h_grad) = inst.h_reply(center);
        let h_grad_dev = h_grad.sub(&Vector::basis(dim, 0)).norm();
        let consistent = h_value.abs() < 1e-9 && h_grad_dev < 1e-9;

        // Hints: the other centers, plus shell points straddling each ball
        // boundary along the hidden direction and the served gradient.
        let mut hints: Vec<Vector> = inst
            .centers()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| c.clone())
            .collect();
        let e1 = Vector::basis(dim, 0);
        for s in [0.5 * inst.r(), inst.r(), 2.0 * inst.r()] {
            for dir in [inst.v().clone(), inst.v().scale(-1.0), e1.clone(), e1.scale(-1.0)] {
                let mut p = center.clone();
                p.axpy(s, &dir);
                hints.push(p);
            }
        }

        let mut audit_ledger = QueryLedger::unbounded();
        let gens = gather_generators(
            &inst,
            &mut audit_ledger,
            center,
            params.delta,
            params.samples,
            &hints,
            &mut rng_cert,
        )
        .expect("audit ledger is unbounded");

        let subgrads: Vec<Vector> = gens.iter().map(|(_, s)| s.clone()).collect();
        let min_norm = match min_norm_point(&subgrads) {
            Ok(mnp) => mnp.norm,
            Err(MinNormError::NoConvergence { best, .. }) => best.norm,
            Err(e) => panic!("audit hull is nonempty and consistent: {e}"),
        };

        let mut combo_min = f64::INFINITY;
        for _ in 0..params.combo_trials {
            let w = rng_combo.simplex_weights(subgrads.len());
            let mut combo = Vector::zeros(dim);
            for (wi, s) in w.iter().zip(&subgrads) {
                combo.axpy(*wi, s);
            }
            combo_min = combo_min.min(combo.norm());
        }

        let resisted = consistent && min_norm > params.eps && combo_min > params.eps;
        audits.push(QueryAudit {
            center: center.clone(),
            h_value,
            h_grad_dev,
            consistent,
            generators: gens.len(),
            min_norm,
            combo_min,
            resisted,
        });
    }

    let separation = queries
        .first()
        .map(|x1| inst.eval(x1).value - inst.infimum());
    let verdict = audits.iter().all(|a| a.resisted);

    Ok(ArenaReport {
        subject: subject.name().to_string(),
        t: params.t,
        dim,
        delta: params.delta,
        eps: params.eps,
        seed: params.seed,
        queries: queries.len(),
        r: inst.r(),
        v: inst.v().clone(),
        separation,
        audits,
        verdict,
    })
}
