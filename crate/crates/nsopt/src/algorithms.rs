//! Descent to approximate stationarity for Lipschitz functions.
//!
//! The core routine ([`ingd`]) runs an outer loop of normalized descent
//! steps of length `delta`. Whenever the step fails to cut the value by
//! `(delta/4) |g|`, an inner loop probes the segment toward the trial point,
//! mixes the observed subgradient into a running convex combination by a
//! two-point min-norm step, and repeats until either the combination norm
//! falls to `eps` (the iterate is certified approximately stationary, with
//! the combination as the certificate) or the mixture exposes a direction
//! that does descend.
//!
//! Two probing strategies are available: a deterministic bisection that
//! needs a smoothness constant and inherits its guarantees only on smooth
//! functions, and a randomized single draw on the segment that works
//! unconditionally in expectation.
//!
//! For convex problems, [`gd_then_ingd`] prepends plain subgradient descent
//! with iterate averaging, which lands in a region where the descent loop
//! finishes the job cheaply.

use crate::certifier::{CertProbe, Certificate};
use crate::instances::InstanceMeta;
use crate::minnorm::min_norm_combination;
use crate::oracle::{BudgetExhausted, Oracle, OracleReply, QueryLedger};
use crate::rng::RngStream;
use crate::vector::Vector;

/// How the inner loop picks its probe point on the descent segment.
#[derive(Clone, Debug)]
pub enum ProbeStrategy {
    /// Deterministic bisection on the segment; sound for `smoothness`-smooth
    /// functions, where each probe provably shrinks the combination.
    BinarySearch { smoothness: f64 },
    /// A single uniform draw on the segment per probe.
    RandomSegment { rng: RngStream },
}

impl ProbeStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeStrategy::BinarySearch { .. } => "bisection",
            ProbeStrategy::RandomSegment { .. } => "random-segment",
        }
    }
}

/// A probe: the point evaluated, the oracle's reply there, and how many
/// oracle calls the probe spent.
#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub y: Vector,
    pub reply: OracleReply,
    pub oracle_calls: usize,
}

/// Iteration budgets and targets for [`ingd`].
#[derive(Clone, Debug, PartialEq)]
pub struct IngdParams {
    pub delta: f64,
    pub eps: f64,
    pub max_inner: usize,
    pub max_outer: usize,
}

impl IngdParams {
    pub fn new(delta: f64, eps: f64, max_inner: usize, max_outer: usize) -> Self {
        assert!(delta > 0.0 && delta.is_finite());
        assert!(eps > 0.0 && eps.is_finite());
        assert!(max_inner >= 1 && max_outer >= 1);
        IngdParams {
            delta,
            eps,
            max_inner,
            max_outer,
        }
    }

    /// Budgets from instance constants: `ceil(64 L^2 / eps^2)` inner
    /// iterations (double the worst-case combination count) and
    /// `ceil(4 gap / (delta eps)) + 1` outer steps.
    pub fn from_meta(meta: &InstanceMeta, delta: f64, eps: f64) -> Self {
        let l = meta.lipschitz;
        let max_inner = ceil_to_usize(64.0 * l * l / (eps * eps)).max(1);
        let max_outer = ceil_to_usize(4.0 * meta.value_gap / (delta * eps)) + 1;
        IngdParams::new(delta, eps, max_inner, max_outer)
    }
}

fn ceil_to_usize(x: f64) -> usize {
    assert!(x.is_finite() && x >= 0.0, "budget computation overflowed");
    x.ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// The returned certificate norm is at most `eps`.
    CertifiedStationary,
    BudgetExhausted,
    InnerLoopCap,
    OuterLoopCap,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::CertifiedStationary => "certified-stationary",
            RunStatus::BudgetExhausted => "budget-exhausted",
            RunStatus::InnerLoopCap => "inner-loop-cap",
            RunStatus::OuterLoopCap => "outer-loop-cap",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, RunStatus::CertifiedStationary)
    }
}

/// Landmarks of a run, interleaved with the query ledger for diagnostics.
#[derive(Clone, Debug)]
pub enum TraceEvent {
    OuterStep {
        t: usize,
        f_before: f64,
        f_after: f64,
        g_norm: f64,
    },
    InnerIter {
        outer_t: usize,
        k: usize,
        g_norm_before: f64,
        g_norm_after: f64,
        /// For bisection probes, whether the smooth-case progress condition
        /// `<grad f(y), g> <= |g|^2 / 2` held; `None` for random probes.
        postcondition_ok: Option<bool>,
        probe_calls: usize,
    },
    PostconditionViolated {
        outer_t: usize,
        k: usize,
        inner_product: f64,
        bound: f64,
    },
    InnerCapHit {
        outer_t: usize,
    },
    GdStep {
        j: usize,
        f: f64,
    },
    GdAverage {
        t1: usize,
    },
    Certified {
        outer_t: usize,
    },
    BudgetExhaustedAt {
        count: usize,
    },
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub ledger: QueryLedger,
    pub events: Vec<TraceEvent>,
}

/// Result of a full run. `certificate` is the best convex combination found
/// at the final point; its norm is at most `eps` exactly when the status is
/// [`RunStatus::CertifiedStationary`]. `value` is `NaN` only if the budget
/// died before the first evaluation.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub point: Vector,
    pub value: f64,
    pub status: RunStatus,
    pub g_final: Vector,
    pub certificate: Option<Certificate>,
    pub trace: RunTrace,
}

/// Why the inner loop stopped.
#[derive(Clone, Debug)]
pub enum InnerExit {
    /// Combination norm reached `eps`; the provenance is a certificate.
    SmallNorm,
    /// The trial point achieved the descent quota; move there.
    DescentStep { point: Vector, reply: OracleReply },
    /// Iteration cap reached without progress.
    CapHit,
    /// The oracle budget ran out mid-loop.
    Budget,
}

#[derive(Clone, Debug)]
pub struct InnerOutcome {
    /// The final convex combination of observed subgradients.
    pub g: Vector,
    pub exit: InnerExit,
    pub iterations: usize,
    /// The combination expanded into weighted probes (weights sum to 1).
    pub probes: Vec<CertProbe>,
}

/// Running convex combination with full provenance.
struct Provenance {
    points: Vec<Vector>,
    subgrads: Vec<Vector>,
    weights: Vec<f64>,
}

impl Provenance {
    fn new(point: Vector, subgrad: Vector) -> Self {
        Provenance {
            points: vec![point],
            subgrads: vec![subgrad],
            weights: vec![1.0],
        }
    }

    /// Rescales existing mass by `lambda` and gives the newcomer `1 -
    /// lambda`; weights stay normalized. Entries hitting exactly zero are
    /// dropped.
    fn update(&mut self, lambda: f64, point: Vector, subgrad: Vector) {
        for w in &mut self.weights {
            *w *= lambda;
        }
        self.points.push(point);
        self.subgrads.push(subgrad);
        self.weights.push(1.0 - lambda);
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] == 0.0 {
                self.weights.remove(i);
                self.points.remove(i);
                self.subgrads.remove(i);
            } else {
                i += 1;
            }
        }
    }

    /// The combination recomputed from scratch, absorbing drift.
    fn rebuild(&self) -> Vector {
        let sum: f64 = self.weights.iter().sum();
        let mut g = Vector::zeros(self.subgrads[0].dim());
        for (w, s) in self.weights.iter().zip(&self.subgrads) {
            g.axpy(w / sum, s);
        }
        g
    }

    fn into_probes(self) -> Vec<CertProbe> {
        self.points
            .into_iter()
            .zip(self.subgrads)
            .zip(self.weights)
            .map(|((point, subgrad), weight)| CertProbe {
                point,
                weight,
                subgrad,
            })
            .collect()
    }
}

/// Bisection on the segment from `x` to `z = x - delta g/|g|`, reusing the
/// already-known endpoint replies. Maintains the invariant that the bracket
/// average decays, so the exit point has seen enough decrease for the
/// smooth-case analysis; returns the left bracket end and its reply.
/// `oracle_calls` counts midpoint queries only.
fn bisect_core(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    reply_x: &OracleReply,
    g: &Vector,
    delta: f64,
    smoothness: f64,
    reply_z: &OracleReply,
) -> Result<ProbeOutcome, BudgetExhausted> {
    let gnorm = g.norm();
    debug_assert!(gnorm > 0.0);
    let gbar = g.scale(delta / gnorm);
    // With smoothness 0 the threshold is infinite and no midpoint is probed.
    let threshold = gnorm / (8.0 * delta * smoothness);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut fa = reply_x.value;
    let mut fb = reply_z.value;
    let mut reply_a: Option<OracleReply> = None;
    let mut calls = 0usize;
    while b - a > threshold {
        let m = 0.5 * (a + b);
        let ym = x.sub(&gbar.scale(m));
        let rm = ledger.query(oracle, &ym, "probe")?;
        if rm.value > 0.5 * (fa + fb) {
            b = m;
            fb = rm.value;
        } else {
            a = m;
            fa = rm.value;
            reply_a = Some(rm);
        }
        calls += 1;
    }
    let y = x.sub(&gbar.scale(a));
    let reply = reply_a.unwrap_or_else(|| reply_x.clone());
    Ok(ProbeOutcome {
        y,
        reply,
        oracle_calls: calls,
    })
}

/// Standalone bisection probe: evaluates both endpoints itself (two calls)
/// before narrowing. See [`ProbeStrategy::BinarySearch`].
pub fn binary_search(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    g: &Vector,
    delta: f64,
    smoothness: f64,
) -> Result<ProbeOutcome, BudgetExhausted> {
    assert!(delta > 0.0 && g.norm() > 0.0 && smoothness >= 0.0);
    let reply_x = ledger.query(oracle, x, "bisect-endpoint")?;
    let z = x.sub(&g.scale(delta / g.norm()));
    let reply_z = ledger.query(oracle, &z, "bisect-endpoint")?;
    let mut out = bisect_core(
        oracle, ledger, x, &reply_x, g, delta, smoothness, &reply_z,
    )?;
    out.oracle_calls += 2;
    Ok(out)
}

/// Randomized probe: `y = x - t g/|g|` with `t` uniform on `(0, delta]`.
pub fn random_segment_probe(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    g: &Vector,
    delta: f64,
    rng: &mut RngStream,
) -> Result<ProbeOutcome, BudgetExhausted> {
    let gnorm = g.norm();
    assert!(delta > 0.0 && gnorm > 0.0);
    let t = delta * (1.0 - rng.uniform());
    let y = x.sub(&g.scale(t / gnorm));
    let reply = ledger.query(oracle, &y, "probe")?;
    Ok(ProbeOutcome {
        y,
        reply,
        oracle_calls: 1,
    })
}

fn inner_loop_from(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    reply_x: &OracleReply,
    delta: f64,
    eps: f64,
    k_max: usize,
    strategy: &mut ProbeStrategy,
    events: &mut Vec<TraceEvent>,
    outer_t: usize,
) -> InnerOutcome {
    let mut prov = Provenance::new(x.clone(), reply_x.subgrad.clone());
    let mut g = reply_x.subgrad.clone();
    let mut iterations = 0usize;

    if g.norm() <= eps {
        return InnerOutcome {
            g,
            exit: InnerExit::SmallNorm,
            iterations,
            probes: prov.into_probes(),
        };
    }

    loop {
        if iterations >= k_max {
            return InnerOutcome {
                g,
                exit: InnerExit::CapHit,
                iterations,
                probes: prov.into_probes(),
            };
        }

        let gnorm = g.norm();
        let z = x.sub(&g.scale(delta / gnorm));
        let reply_z = match ledger.query(oracle, &z, "inner-guard") {
            Ok(r) => r,
            Err(_) => {
                return InnerOutcome {
                    g,
                    exit: InnerExit::Budget,
                    iterations,
                    probes: prov.into_probes(),
                }
            }
        };
        if reply_x.value - reply_z.value > 0.25 * delta * gnorm {
            return InnerOutcome {
                g,
                exit: InnerExit::DescentStep {
                    point: z,
                    reply: reply_z,
                },
                iterations,
                probes: prov.into_probes(),
            };
        }

        let probe = match strategy {
            ProbeStrategy::BinarySearch { smoothness } => bisect_core(
                oracle, ledger, x, reply_x, &g, delta, *smoothness, &reply_z,
            ),
            ProbeStrategy::RandomSegment { rng } => {
                random_segment_probe(oracle, ledger, x, &g, delta, rng)
            }
        };
        let probe = match probe {
            Ok(p) => p,
            Err(_) => {
                return InnerOutcome {
                    g,
                    exit: InnerExit::Budget,
                    iterations,
                    probes: prov.into_probes(),
                }
            }
        };

        let q = probe.reply.subgrad.clone();
        let postcondition_ok = match strategy {
            ProbeStrategy::BinarySearch { .. } => {
                let inner_product = q.dot(&g);
                let bound = 0.5 * gnorm * gnorm;
                let ok = inner_product <= bound;
                if !ok {
                    events.push(TraceEvent::PostconditionViolated {
                        outer_t,
                        k: iterations,
                        inner_product,
                        bound,
                    });
                }
                Some(ok)
            }
            ProbeStrategy::RandomSegment { .. } => None,
        };

        let (lambda, v) = min_norm_combination(&g, &q);
        prov.update(lambda, probe.y, q);
        g = v;
        iterations += 1;

        let mut g_after = g.norm();
        let mut certified = false;
        if g_after <= eps {
            // Replace the incrementally tracked combination by the exact
            // weighted sum before certifying, so the certificate's own norm
            // meets the target.
            g = prov.rebuild();
            g_after = g.norm();
            certified = g_after <= eps;
        }
        events.push(TraceEvent::InnerIter {
            outer_t,
            k: iterations,
            g_norm_before: gnorm,
            g_norm_after: g_after,
            postcondition_ok,
            probe_calls: probe.oracle_calls,
        });
        if certified {
            return InnerOutcome {
                g,
                exit: InnerExit::SmallNorm,
                iterations,
                probes: prov.into_probes(),
            };
        }
    }
}

/// One inner-loop run at a fixed center: drives the convex combination of
/// observed subgradients toward small norm, stopping early on a descent
/// step. Fails only if the very first evaluation exceeds the budget.
pub fn min_norm_loop(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    delta: f64,
    eps: f64,
    strategy: &mut ProbeStrategy,
    k_max: usize,
) -> Result<InnerOutcome, BudgetExhausted> {
    let reply_x = ledger.query(oracle, x, "inner-init")?;
    let mut events = Vec::new();
    Ok(inner_loop_from(
        oracle,
        ledger,
        x,
        &reply_x,
        delta,
        eps,
        k_max,
        strategy,
        &mut events,
        0,
    ))
}

fn ingd_impl(
    oracle: &dyn Oracle,
    mut ledger: QueryLedger,
    start: &Vector,
    params: &IngdParams,
    strategy: &mut ProbeStrategy,
    mut events: Vec<TraceEvent>,
) -> RunResult {
    let mut x = start.clone();
    let mut reply = match ledger.query(oracle, &x, "outer-init") {
        Ok(r) => r,
        Err(_) => {
            events.push(TraceEvent::BudgetExhaustedAt {
                count: ledger.count(),
            });
            return RunResult {
                point: x,
                value: f64::NAN,
                status: RunStatus::BudgetExhausted,
                g_final: Vector::zeros(oracle.dim()),
                certificate: None,
                trace: RunTrace { ledger, events },
            };
        }
    };

    for t in 1..=params.max_outer {
        let inner = inner_loop_from(
            oracle,
            &mut ledger,
            &x,
            &reply,
            params.delta,
            params.eps,
            params.max_inner,
            strategy,
            &mut events,
            t,
        );
        let certificate =
            Some(Certificate::from_weighted_probes(x.clone(), params.delta, inner.probes.clone()));
        match inner.exit {
            InnerExit::SmallNorm => {
                events.push(TraceEvent::Certified { outer_t: t });
                return RunResult {
                    point: x,
                    value: reply.value,
                    status: RunStatus::CertifiedStationary,
                    g_final: inner.g,
                    certificate,
                    trace: RunTrace { ledger, events },
                };
            }
            InnerExit::DescentStep { point, reply: reply_z } => {
                events.push(TraceEvent::OuterStep {
                    t,
                    f_before: reply.value,
                    f_after: reply_z.value,
                    g_norm: inner.g.norm(),
                });
                x = point;
                reply = reply_z;
            }
            InnerExit::CapHit => {
                events.push(TraceEvent::InnerCapHit { outer_t: t });
                return RunResult {
                    point: x,
                    value: reply.value,
                    status: RunStatus::InnerLoopCap,
                    g_final: inner.g,
                    certificate,
                    trace: RunTrace { ledger, events },
                };
            }
            InnerExit::Budget => {
                events.push(TraceEvent::BudgetExhaustedAt {
                    count: ledger.count(),
                });
                return RunResult {
                    point: x,
                    value: reply.value,
                    status: RunStatus::BudgetExhausted,
                    g_final: inner.g,
                    certificate,
                    trace: RunTrace { ledger, events },
                };
            }
        }
    }

    let certificate = Some(Certificate::from_weighted_probes(
        x.clone(),
        params.delta,
        vec![CertProbe {
            point: x.clone(),
            weight: 1.0,
            subgrad: reply.subgrad.clone(),
        }],
    ));
    RunResult {
        point: x,
        value: reply.value,
        status: RunStatus::OuterLoopCap,
        g_final: reply.subgrad.clone(),
        certificate,
        trace: RunTrace { ledger, events },
    }
}

/// Interpolated normalized gradient descent: `delta`-length normalized
/// steps with an inner min-norm loop certifying stationarity when descent
/// stalls. The ledger is consumed and returned inside the trace.
pub fn ingd(
    oracle: &dyn Oracle,
    ledger: QueryLedger,
    start: &Vector,
    params: &IngdParams,
    strategy: &mut ProbeStrategy,
) -> RunResult {
    ingd_impl(oracle, ledger, start, params, strategy, Vec::new())
}

/// Where plain subgradient descent ended up.
#[derive(Clone, Debug)]
pub enum GdOutcome {
    Completed { average: Vector },
    /// Budget died mid-descent; carries the last evaluated point, if any.
    Budget { last: Option<(Vector, OracleReply)> },
}

/// Projected subgradient descent with iterate averaging: `t1` iterates,
/// `t1 - 1` oracle calls, step `radius / (lipschitz sqrt(t1))`, iterates
/// projected onto the closed `radius`-ball around the start. Returns the
/// average of all `t1` iterates. Hitting an exactly-zero subgradient locks
/// the remaining iterates in place, so they are averaged without queries.
pub fn subgradient_descent_avg(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    start: &Vector,
    radius: f64,
    lipschitz: f64,
    t1: usize,
    events: &mut Vec<TraceEvent>,
) -> GdOutcome {
    assert!(radius > 0.0 && lipschitz > 0.0 && t1 >= 1);
    let eta = radius / (lipschitz * (t1 as f64).sqrt());
    let mut x = start.clone();
    let mut sum = start.clone();
    let mut last: Option<(Vector, OracleReply)> = None;
    for j in 1..t1 {
        let reply = match ledger.query(oracle, &x, "gd-step") {
            Ok(r) => r,
            Err(_) => return GdOutcome::Budget { last },
        };
        events.push(TraceEvent::GdStep {
            j,
            f: reply.value,
        });
        last = Some((x.clone(), reply.clone()));
        if reply.subgrad.norm() == 0.0 {
            sum.axpy((t1 - j) as f64, &x);
            events.push(TraceEvent::GdAverage { t1 });
            return GdOutcome::Completed {
                average: sum.scale(1.0 / t1 as f64),
            };
        }
        x.axpy(-eta, &reply.subgrad);
        x = x.clip_to_ball(start, radius);
        sum = sum.add(&x);
    }
    events.push(TraceEvent::GdAverage { t1 });
    GdOutcome::Completed {
        average: sum.scale(1.0 / t1 as f64),
    }
}

/// Convex pipeline: `t1 = ceil(L^2 R^(2/3) / (eps^2 delta^(2/3)))` steps of
/// averaged subgradient descent, then [`ingd`] from the average with outer
/// budget `ceil(4 (R/delta)^(2/3)) + 1`.
pub fn gd_then_ingd(
    oracle: &dyn Oracle,
    mut ledger: QueryLedger,
    start: &Vector,
    radius: f64,
    lipschitz: f64,
    delta: f64,
    eps: f64,
    strategy: &mut ProbeStrategy,
) -> RunResult {
    assert!(radius > 0.0 && lipschitz > 0.0 && delta > 0.0 && eps > 0.0);
    let t1 = ceil_to_usize(
        lipschitz * lipschitz * radius.powf(2.0 / 3.0) / (eps * eps * delta.powf(2.0 / 3.0)),
    )
    .max(1);
    let mut events = Vec::new();
    match subgradient_descent_avg(oracle, &mut ledger, start, radius, lipschitz, t1, &mut events)
    {
        GdOutcome::Budget { last } => {
            events.push(TraceEvent::BudgetExhaustedAt {
                count: ledger.count(),
            });
            match last {
                Some((point, reply)) => RunResult {
                    certificate: Some(Certificate::from_weighted_probes(
                        point.clone(),
                        delta,
                        vec![CertProbe {
                            point: point.clone(),
                            weight: 1.0,
                            subgrad: reply.subgrad.clone(),
                        }],
                    )),
                    value: reply.value,
                    g_final: reply.subgrad,
                    point,
                    status: RunStatus::BudgetExhausted,
                    trace: RunTrace { ledger, events },
                },
                None => RunResult {
                    point: start.clone(),
                    value: f64::NAN,
                    status: RunStatus::BudgetExhausted,
                    g_final: Vector::zeros(oracle.dim()),
                    certificate: None,
                    trace: RunTrace { ledger, events },
                },
            }
        }
        GdOutcome::Completed { average } => {
            let max_inner =
                ceil_to_usize(64.0 * lipschitz * lipschitz / (eps * eps)).max(1);
            let max_outer = ceil_to_usize(4.0 * (radius / delta).powf(2.0 / 3.0)) + 1;
            let params = IngdParams::new(delta, eps, max_inner, max_outer);
            ingd_impl(oracle, ledger, &average, &params, strategy, events)
        }
    }
}
