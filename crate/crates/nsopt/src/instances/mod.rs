//! The instance zoo: benchmark functions with first-order oracles, shared
//! metadata, and (where available) exact structure for independent
//! verification.
//!
//! Every instance reports an [`InstanceMeta`] whose constants are honest over
//! the region the solvers visit: `lipschitz` bounds subgradient norms on the
//! ball of radius `radius` around the default start (globally when `radius`
//! is `None`), `value_gap` bounds `f(start) - inf f`, and `smoothness` is a
//! gradient Lipschitz constant when one exists.

pub mod mahalanobis;
pub mod nemirovski;
pub mod resisting;
pub mod simple;
pub mod tree1d;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::certifier::Certificate;
use crate::oracle::{Oracle, OracleReply};
use crate::vector::Vector;

pub use mahalanobis::{Mahalanobis, WitnessError};
pub use nemirovski::{
    default_tau, prog_alpha, LogSumExpNemirovski, Nemirovski, NemirovskiExtended,
};
pub use resisting::{ResistingError, ResistingInstance, ResistingOracle, FLOOR_F, FLOOR_H};
pub use simple::{Abs, Linear, Quadratic};
pub use tree1d::{
    ratio_to_f64, PiecewiseLinear, PiecewiseLinearError, SigmaWord, Tree1d, Tree1dError,
};

/// Solver-facing constants of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub dim: usize,
    /// Bound on subgradient norms (see module docs for the region).
    pub lipschitz: f64,
    /// Gradient Lipschitz constant, when the function is smooth.
    pub smoothness: Option<f64>,
    /// Upper bound on `f(start) - inf f`, used to size iteration budgets.
    /// For unbounded-below instances this is only a step-scale heuristic.
    pub value_gap: f64,
    /// Radius of a start-centered ball containing the relevant geometry.
    pub radius: Option<f64>,
    pub convex: bool,
}

impl InstanceMeta {
    /// Internal consistency: positive constants and, when `radius` is
    /// finite, a value gap reachable at the promised slope (`gap <= L R`).
    pub fn consistent(&self) -> bool {
        let basic = self.dim >= 1
            && self.lipschitz > 0.0
            && self.lipschitz.is_finite()
            && self.value_gap >= 0.0
            && self.value_gap.is_finite()
            && self.smoothness.map_or(true, |h| h >= 0.0 && h.is_finite())
            && self.radius.map_or(true, |r| r > 0.0 && r.is_finite());
        let reachable = match self.radius {
            Some(r) => self.value_gap <= self.lipschitz * r * (1.0 + 1e-9),
            None => true,
        };
        basic && reachable
    }
}

/// A closed enumeration of the zoo, so the CLI and tests can move instances
/// around by value. The resisting construction is excluded: it is born from
/// a transcript, not a descriptor.
#[derive(Clone, Debug)]
pub enum Instance {
    Quadratic(Quadratic),
    Linear(Linear),
    Abs(Abs),
    Nemirovski(Nemirovski),
    NemirovskiExtended(NemirovskiExtended),
    LogSumExp(LogSumExpNemirovski),
    Tree(Tree1d),
    Mahalanobis(Mahalanobis),
}

impl Instance {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Instance::Quadratic(_) => "quadratic",
            Instance::Linear(_) => "linear",
            Instance::Abs(_) => "abs",
            Instance::Nemirovski(_) => "nemirovski",
            Instance::NemirovskiExtended(_) => "nemirovski-ext",
            Instance::LogSumExp(_) => "logsumexp",
            Instance::Tree(_) => "tree",
            Instance::Mahalanobis(_) => "mahalanobis",
        }
    }

    pub fn meta(&self) -> InstanceMeta {
        match self {
            Instance::Quadratic(f) => f.meta(),
            Instance::Linear(f) => f.meta(),
            Instance::Abs(f) => f.meta(),
            Instance::Nemirovski(f) => f.meta(),
            Instance::NemirovskiExtended(f) => f.meta(),
            Instance::LogSumExp(f) => f.meta(),
            Instance::Tree(f) => f.meta(),
            Instance::Mahalanobis(f) => f.meta(),
        }
    }

    pub fn default_start(&self) -> Vector {
        match self {
            Instance::Quadratic(f) => f.default_start(),
            Instance::Linear(f) => f.default_start(),
            Instance::Abs(f) => f.default_start(),
            Instance::Nemirovski(f) => f.default_start(),
            Instance::NemirovskiExtended(f) => f.default_start(),
            Instance::LogSumExp(f) => f.default_start(),
            Instance::Tree(f) => f.default_start(),
            Instance::Mahalanobis(f) => f.default_start(),
        }
    }

    /// Exact infimum when known in closed form.
    pub fn infimum(&self) -> Option<f64> {
        match self {
            Instance::Quadratic(_) => Some(0.0),
            Instance::Linear(_) => None,
            Instance::Abs(_) => Some(0.0),
            Instance::Nemirovski(f) => Some(f.infimum()),
            Instance::NemirovskiExtended(f) => Some(f.infimum()),
            Instance::LogSumExp(_) => None,
            Instance::Tree(f) => Some(f.infimum()),
            Instance::Mahalanobis(f) => Some(f.infimum()),
        }
    }

    /// Exact piecewise-linear structure for the one-dimensional instances.
    pub fn piecewise(&self) -> Option<PiecewiseLinear> {
        match self {
            Instance::Abs(_) => Some(abs_piecewise()),
            Instance::Tree(f) => Some(f.pwl().clone()),
            _ => None,
        }
    }

    /// An analytic stationarity certificate at the instance's witness point,
    /// for instances that have one.
    pub fn witness(&self, delta: f64) -> Result<Option<Certificate>, WitnessError> {
        match self {
            Instance::Mahalanobis(f) => f.witness(delta).map(Some),
            _ => Ok(None),
        }
    }

    /// Instance-aware probe suggestions inside the radius-`delta` ball
    /// around `x`: points whose subgradients span the local geometry.
    pub fn hint_points(&self, x: &Vector, delta: f64) -> Vec<Vector> {
        match self {
            Instance::Nemirovski(f) => f.hint_points(x, delta),
            Instance::NemirovskiExtended(f) => f.hint_points(x, delta),
            Instance::Mahalanobis(f) => f.hint_points(x, delta),
            Instance::Abs(_) => piecewise_hints(&abs_piecewise(), x[0], delta),
            Instance::Tree(f) => piecewise_hints(f.pwl(), x[0], delta),
            _ => vec![],
        }
    }
}

impl Oracle for Instance {
    fn dim(&self) -> usize {
        match self {
            Instance::Quadratic(f) => f.dim(),
            Instance::Linear(f) => f.dim(),
            Instance::Abs(f) => f.dim(),
            Instance::Nemirovski(f) => f.dim(),
            Instance::NemirovskiExtended(f) => f.dim(),
            Instance::LogSumExp(f) => f.dim(),
            Instance::Tree(f) => f.dim(),
            Instance::Mahalanobis(f) => f.dim(),
        }
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        match self {
            Instance::Quadratic(f) => f.eval(x),
            Instance::Linear(f) => f.eval(x),
            Instance::Abs(f) => f.eval(x),
            Instance::Nemirovski(f) => f.eval(x),
            Instance::NemirovskiExtended(f) => f.eval(x),
            Instance::LogSumExp(f) => f.eval(x),
            Instance::Tree(f) => f.eval(x),
            Instance::Mahalanobis(f) => f.eval(x),
        }
    }
}

/// `|x|` as exact piecewise-linear data.
fn abs_piecewise() -> PiecewiseLinear {
    let zero = BigRational::zero();
    let one = BigRational::from_float(1.0).expect("one is rational");
    PiecewiseLinear::new(
        vec![zero.clone()],
        vec![zero],
        vec![-one.clone(), one],
    )
    .expect("|x| is continuous")
}

/// Breakpoints strictly inside the window plus two near-boundary probes.
fn piecewise_hints(pwl: &PiecewiseLinear, x: f64, delta: f64) -> Vec<Vector> {
    let xr = BigRational::from_float(x).expect("finite probe");
    let dr = BigRational::from_float(delta).expect("finite radius");
    let lo = &xr - &dr;
    let hi = &xr + &dr;
    let mut out: Vec<Vector> = pwl
        .breakpoints()
        .iter()
        .filter(|b| **b > lo && **b < hi)
        .map(|b| Vector(vec![ratio_to_f64(b)]))
        .collect();
    let inset = delta * (1.0 - 1e-12);
    out.push(Vector(vec![x - inset]));
    out.push(Vector(vec![x + inset]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn zoo() -> Vec<Instance> {
        vec![
            Instance::Quadratic(Quadratic::new(10)),
            Instance::Linear(Linear::new(Vector(vec![0.1, -0.2, 0.05]))),
            Instance::Abs(Abs),
            Instance::Nemirovski(Nemirovski::new(8, 0.02)),
            Instance::NemirovskiExtended(NemirovskiExtended::new(5, 0.05, 12, 3)),
            Instance::LogSumExp(LogSumExpNemirovski::new(8, 0.02, 0.01)),
            Instance::Tree(Tree1d::new(SigmaWord::from_str("0110").unwrap(), false)),
            Instance::Mahalanobis(Mahalanobis::new(0.25, 48)),
        ]
    }

    #[test]
    fn meta_is_consistent_across_the_zoo() {
        for inst in zoo() {
            let meta = inst.meta();
            assert!(meta.consistent(), "{} meta inconsistent", inst.kind_name());
            assert_eq!(meta.dim, inst.dim(), "{}", inst.kind_name());
            let start = inst.default_start();
            assert_eq!(start.dim(), meta.dim);
            let reply = inst.eval(&start);
            assert!(reply.value.is_finite() && reply.subgrad.is_finite());
        }
    }

    #[test]
    fn start_value_respects_the_gap() {
        for inst in zoo() {
            if let Some(inf) = inst.infimum() {
                let gap = inst.eval(&inst.default_start()).value - inf;
                assert!(
                    gap <= inst.meta().value_gap + 1e-12,
                    "{}: gap {gap} above declared {}",
                    inst.kind_name(),
                    inst.meta().value_gap
                );
                assert!(gap >= 0.0);
            }
        }
    }

    #[test]
    fn hints_stay_in_the_closed_ball() {
        let delta = 0.3;
        for inst in zoo() {
            let x = inst.default_start();
            for h in inst.hint_points(&x, delta) {
                assert!(h.dist(&x) <= delta * (1.0 + 1e-9), "{}", inst.kind_name());
            }
        }
    }

    #[test]
    fn piecewise_hints_pick_up_kinks() {
        let abs = Instance::Abs(Abs);
        let hints = abs.hint_points(&Vector(vec![0.2]), 0.3);
        assert!(hints.iter().any(|h| h[0] == 0.0), "kink at the origin found");
        let far = abs.hint_points(&Vector(vec![5.0]), 0.3);
        assert_eq!(far.len(), 2, "only boundary probes far from the kink");
    }

    #[test]
    fn witnesses_only_where_promised() {
        for inst in zoo() {
            let w = inst.witness(0.5);
            match inst {
                Instance::Mahalanobis(_) => assert!(w.unwrap().is_some()),
                _ => assert!(w.unwrap().is_none()),
            }
        }
    }
}
