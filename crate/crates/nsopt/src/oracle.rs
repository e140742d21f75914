//! First-order oracle protocol and query accounting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vector::Vector;

/// Description of the full subdifferential at a query point, for instances
/// that can afford one.
///
/// Any convex combination of `vertices` is a valid subgradient at the point.
/// For max-type functions `active_indices` lists the pieces attaining the
/// max and `kink_indices` the subset sitting exactly on a nondifferentiable
/// tie inside their piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub vertices: Vec<Vector>,
    pub active_indices: Vec<usize>,
    pub kink_indices: Vec<usize>,
}

impl ActiveSet {
    pub fn from_vertices(vertices: Vec<Vector>) -> Self {
        ActiveSet {
            vertices,
            active_indices: Vec::new(),
            kink_indices: Vec::new(),
        }
    }
}

/// What one oracle call returns: the value, one subgradient, and optionally
/// the whole subdifferential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReply {
    pub value: f64,
    pub subgrad: Vector,
    pub active_set: Option<ActiveSet>,
}

/// A deterministic first-order oracle.
pub trait Oracle {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Vector) -> OracleReply;
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Vector) -> OracleReply {
        (**self).eval(x)
    }
}

/// One recorded oracle call.
#[derive(Clone, Debug)]
pub struct QueryRecord {
    pub x: Vector,
    pub reply: OracleReply,
    /// Which part of an algorithm issued the call, e.g. `"outer-guard"`.
    pub tag: &'static str,
}

/// Raised when a call would exceed the ledger's budget. The call is not
/// made and nothing is recorded.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("oracle budget of {budget} calls exhausted")]
pub struct BudgetExhausted {
    pub budget: usize,
}

/// Counts oracle calls against an optional budget and keeps the transcript.
#[derive(Clone, Debug, Default)]
pub struct QueryLedger {
    budget: Option<usize>,
    records: Vec<QueryRecord>,
}

impl QueryLedger {
    pub fn unbounded() -> Self {
        QueryLedger::default()
    }

    pub fn with_budget(budget: usize) -> Self {
        assert!(budget > 0, "budget must be positive");
        QueryLedger {
            budget: Some(budget),
            records: Vec::new(),
        }
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    pub fn count(&self) -> usize {
        self.records.len()
    }

    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b.saturating_sub(self.records.len()))
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }

    /// Evaluates the oracle at `x`, recording the call. Exceeding the budget
    /// returns an error without calling or recording.
    pub fn query(
        &mut self,
        oracle: &dyn Oracle,
        x: &Vector,
        tag: &'static str,
    ) -> Result<OracleReply, BudgetExhausted> {
        if let Some(budget) = self.budget {
            if self.records.len() >= budget {
                return Err(BudgetExhausted { budget });
            }
        }
        let reply = oracle.eval(x);
        self.records.push(QueryRecord {
            x: x.clone(),
            reply: reply.clone(),
            tag,
        });
        Ok(reply)
    }
}
