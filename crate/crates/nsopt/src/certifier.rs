//! Construction and independent verification of approximate-stationarity
//! certificates.
//!
//! A [`Certificate`] exhibits a convex combination of subgradients taken at
//! probe points within `delta` of a center, together with the aggregate
//! vector and its norm. Verification re-queries the oracle at every probe
//! and re-does the arithmetic, so a certificate stands on its own: nothing
//! about how it was found needs to be trusted.
//!
//! The second half of the module handles exact one-dimensional analysis for
//! piecewise-linear functions: the set of `eps`-stationary points as closed
//! rational intervals, and a grid check that "small aggregate within
//! `delta`" and "within `delta` of a stationary point" pick out the same
//! points.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::tree1d::{ratio_to_f64, PiecewiseLinear};
use crate::minnorm::{min_norm_point, MinNormError, MinNormPoint};
use crate::oracle::{BudgetExhausted, Oracle, QueryLedger};
use crate::rng::RngStream;
use crate::vector::Vector;

/// Probe weights must sum to 1 within this.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Relative slack on the probe-to-center distance.
pub const BALL_TOL: f64 = 1e-12;
/// Slack on recomputing the aggregate and its norm.
pub const AGGREGATE_TOL: f64 = 1e-10;
/// How closely a recorded subgradient must match what the oracle offers.
pub const SUBGRAD_MATCH_TOL: f64 = 1e-9;

/// One probe of a certificate: where the oracle was asked, the subgradient
/// recorded, and its weight in the aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertProbe {
    pub point: Vector,
    pub weight: f64,
    pub subgrad: Vector,
}

/// A self-contained claim that the convex hull of subgradients within
/// `delta` of `center` reaches down to norm `norm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub center: Vector,
    pub delta: f64,
    pub probes: Vec<CertProbe>,
    pub aggregate: Vector,
    pub norm: f64,
}

impl Certificate {
    /// Assembles a certificate from weighted probes: drops zero weights,
    /// renormalizes the rest to sum to one, and fills in the aggregate.
    pub fn from_weighted_probes(
        center: Vector,
        delta: f64,
        probes: Vec<CertProbe>,
    ) -> Certificate {
        let mut kept: Vec<CertProbe> = probes.into_iter().filter(|p| p.weight != 0.0).collect();
        let sum: f64 = kept.iter().map(|p| p.weight).sum();
        assert!(sum > 0.0, "certificate needs positive total weight");
        for p in &mut kept {
            p.weight /= sum;
        }
        let mut aggregate = Vector::zeros(center.dim());
        for p in &kept {
            aggregate.axpy(p.weight, &p.subgrad);
        }
        let norm = aggregate.norm();
        Certificate {
            center,
            delta,
            probes: kept,
            aggregate,
            norm,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CertificateViolation {
    #[error("probe weights sum to {sum}, not 1")]
    WeightSum { sum: f64 },
    #[error("probe {index} has negative weight {weight}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("probe {index} lies {dist} from the center, outside radius {delta}")]
    ProbeOutsideBall { index: usize, dist: f64, delta: f64 },
    #[error("probe {index}: recorded subgradient is off by {error} from anything the oracle offers there")]
    SubgradMismatch { index: usize, error: f64 },
    #[error("aggregate differs from the weighted probe sum by {error}")]
    AggregateMismatch { error: f64 },
    #[error("recorded norm {recorded} differs from the aggregate norm {actual}")]
    NormMismatch { recorded: f64, actual: f64 },
}

/// Checks a certificate against the oracle it claims to describe. Returns
/// every violation found (empty means valid). Queries the oracle directly:
/// verification is an audit, not part of any algorithm's budget.
pub fn verify_certificate(oracle: &dyn Oracle, cert: &Certificate) -> Vec<CertificateViolation> {
    let mut violations = Vec::new();

    let sum: f64 = cert.probes.iter().map(|p| p.weight).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        violations.push(CertificateViolation::WeightSum { sum });
    }

    for (index, p) in cert.probes.iter().enumerate() {
        if p.weight < 0.0 {
            violations.push(CertificateViolation::NegativeWeight {
                index,
                weight: p.weight,
            });
        }

        let dist = p.point.dist(&cert.center);
        if dist > cert.delta * (1.0 + BALL_TOL) {
            violations.push(CertificateViolation::ProbeOutsideBall {
                index,
                dist,
                delta: cert.delta,
            });
        }

        let reply = oracle.eval(&p.point);
        let direct = p.subgrad.sub(&reply.subgrad).norm();
        let mut error = direct;
        if error > SUBGRAD_MATCH_TOL {
            // The probe may cite any vertex of the active set, or a convex
            // combination of them; measure the distance to that hull.
            if let Some(active) = &reply.active_set {
                let translated: Vec<Vector> = active
                    .vertices
                    .iter()
                    .map(|v| v.sub(&p.subgrad))
                    .collect();
                if !translated.is_empty() {
                    let hull_dist = match min_norm_point(&translated) {
                        Ok(m) => m.norm,
                        Err(MinNormError::NoConvergence { best, .. }) => best.norm,
                        Err(_) => f64::INFINITY,
                    };
                    error = error.min(hull_dist);
                }
            }
        }
        if error > SUBGRAD_MATCH_TOL {
            violations.push(CertificateViolation::SubgradMismatch { index, error });
        }
    }

    let mut aggregate = Vector::zeros(cert.center.dim());
    for p in &cert.probes {
        aggregate.axpy(p.weight, &p.subgrad);
    }
    let agg_error = aggregate.sub(&cert.aggregate).norm();
    if agg_error > AGGREGATE_TOL {
        violations.push(CertificateViolation::AggregateMismatch { error: agg_error });
    }
    let actual = cert.aggregate.norm();
    if (actual - cert.norm).abs() > AGGREGATE_TOL {
        violations.push(CertificateViolation::NormMismatch {
            recorded: cert.norm,
            actual,
        });
    }

    violations
}

/// Collects `(point, subgradient)` generators for the subdifferential hull
/// around `x`: the center itself, the provided hint points (clipped to the
/// closed ball), and `samples` uniform draws from the open ball. Active-set
/// vertices reported by the oracle are expanded into additional generators
/// at the same point.
pub fn gather_generators(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    delta: f64,
    samples: usize,
    hints: &[Vector],
    rng: &mut RngStream,
) -> Result<Vec<(Vector, Vector)>, BudgetExhausted> {
    let mut gens: Vec<(Vector, Vector)> = Vec::new();
    let probe = |ledger: &mut QueryLedger,
                     point: Vector,
                     gens: &mut Vec<(Vector, Vector)>|
     -> Result<(), BudgetExhausted> {
        let reply = ledger.query(oracle, &point, "certify-probe")?;
        if let Some(active) = &reply.active_set {
            for v in &active.vertices {
                if *v != reply.subgrad {
                    gens.push((point.clone(), v.clone()));
                }
            }
        }
        gens.push((point, reply.subgrad));
        Ok(())
    };

    probe(ledger, x.clone(), &mut gens)?;
    for h in hints {
        probe(ledger, h.clip_to_ball(x, delta), &mut gens)?;
    }
    for _ in 0..samples {
        probe(ledger, rng.ball_point(x, delta), &mut gens)?;
    }
    Ok(gens)
}

/// What to probe when certifying.
#[derive(Clone, Debug)]
pub struct CertifyRequest {
    pub delta: f64,
    pub eps: f64,
    /// Uniform draws from the open `delta`-ball.
    pub samples: usize,
    /// Extra probe points (clipped to the closed ball).
    pub hints: Vec<Vector>,
}

/// Outcome of a certification attempt. Both sides carry the best
/// certificate found; `Found` means its norm is at or below `eps`.
#[derive(Clone, Debug)]
pub enum CertifyOutcome {
    Found(Certificate),
    NotFound(Certificate),
}

impl CertifyOutcome {
    pub fn found(&self) -> bool {
        matches!(self, CertifyOutcome::Found(_))
    }

    pub fn certificate(&self) -> &Certificate {
        match self {
            CertifyOutcome::Found(c) | CertifyOutcome::NotFound(c) => c,
        }
    }

    pub fn into_certificate(self) -> Certificate {
        match self {
            CertifyOutcome::Found(c) | CertifyOutcome::NotFound(c) => c,
        }
    }
}

/// Searches for a small-norm convex combination of subgradients within
/// `delta` of `x` by solving a min-norm-point problem over sampled and
/// hinted generators. With `delta = 0` this degenerates to examining the
/// subdifferential at `x` alone.
pub fn certify(
    oracle: &dyn Oracle,
    ledger: &mut QueryLedger,
    x: &Vector,
    req: &CertifyRequest,
    rng: &mut RngStream,
) -> Result<CertifyOutcome, BudgetExhausted> {
    assert!(req.delta >= 0.0 && req.eps > 0.0);
    let gens = gather_generators(
        oracle, ledger, x, req.delta, req.samples, &req.hints, rng,
    )?;
    let subgrads: Vec<Vector> = gens.iter().map(|(_, g)| g.clone()).collect();
    let mnp: MinNormPoint = match min_norm_point(&subgrads) {
        Ok(m) => m,
        Err(MinNormError::NoConvergence { best, .. }) => best,
        Err(e) => unreachable!("center generator always present: {e}"),
    };
    let probes: Vec<CertProbe> = gens
        .into_iter()
        .zip(mnp.weights.iter())
        .map(|((point, subgrad), &weight)| CertProbe {
            point,
            weight,
            subgrad,
        })
        .collect();
    let cert = Certificate::from_weighted_probes(x.clone(), req.delta, probes);
    if cert.norm <= req.eps {
        Ok(CertifyOutcome::Found(cert))
    } else {
        Ok(CertifyOutcome::NotFound(cert))
    }
}

/// The set of `eps`-stationary points of a one-dimensional piecewise-linear
/// function: closed, disjoint, sorted rational intervals (possibly single
/// points).
#[derive(Clone, Debug, PartialEq)]
pub struct StationarySet1D {
    pub intervals: Vec<(BigRational, BigRational)>,
}

impl StationarySet1D {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.intervals.iter().any(|(a, b)| a <= x && x <= b)
    }

    /// Exact distance from `x` to the set; `None` when the set is empty.
    pub fn distance(&self, x: &BigRational) -> Option<BigRational> {
        self.intervals
            .iter()
            .map(|(a, b)| {
                if x < a {
                    a - x
                } else if x > b {
                    x - b
                } else {
                    BigRational::zero()
                }
            })
            .min()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StationarySetError {
    #[error("an unbounded outer piece is already eps-flat; the stationary set is unbounded")]
    Unbounded,
}

/// Distance from zero to the closed slope interval `[lo, hi]`.
fn interval_gap(lo: &BigRational, hi: &BigRational) -> BigRational {
    if lo.is_positive() {
        lo.clone()
    } else if hi.is_negative() {
        -hi.clone()
    } else {
        BigRational::zero()
    }
}

/// Computes the `eps`-stationary set exactly. A point qualifies when the
/// distance from zero to its Clarke slope interval is at most `eps`.
pub fn eps_stationary_set_1d(
    pwl: &PiecewiseLinear,
    eps: &BigRational,
) -> Result<StationarySet1D, StationarySetError> {
    assert!(!eps.is_negative());
    let slopes = pwl.slopes();
    let bps = pwl.breakpoints();
    let n = bps.len();
    if slopes[0].abs() <= *eps || slopes[n].abs() <= *eps {
        return Err(StationarySetError::Unbounded);
    }

    let mut raw: Vec<(BigRational, BigRational)> = Vec::new();
    for i in 0..n {
        let (lo, hi) = if slopes[i] <= slopes[i + 1] {
            (&slopes[i], &slopes[i + 1])
        } else {
            (&slopes[i + 1], &slopes[i])
        };
        if interval_gap(lo, hi) <= *eps {
            raw.push((bps[i].clone(), bps[i].clone()));
        }
        if i + 1 < n && slopes[i + 1].abs() <= *eps {
            raw.push((bps[i].clone(), bps[i + 1].clone()));
        }
    }

    let mut intervals: Vec<(BigRational, BigRational)> = Vec::new();
    for (a, b) in raw {
        match intervals.last_mut() {
            Some((_, end)) if *end >= a => {
                if b > *end {
                    *end = b;
                }
            }
            _ => intervals.push((a, b)),
        }
    }
    Ok(StationarySet1D { intervals })
}

/// One grid point where the two characterizations disagreed.
#[derive(Clone, Debug, Serialize)]
pub struct Claim1Disagreement {
    pub x: f64,
    /// Whether the min-norm of the subgradient hull over the open
    /// `delta`-window is at most `eps`.
    pub hull_norm_small: bool,
    /// Whether the point lies strictly within `delta` of the stationary set.
    pub within_delta: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim1Report {
    pub checked: usize,
    pub disagreements: Vec<Claim1Disagreement>,
    /// Points within 1e-9 of either threshold, where the two routes sit on
    /// a knife edge; counted for information, still compared exactly.
    pub boundary_cases: usize,
}

/// Exactly compares, over a grid, the two descriptions of near-stationarity
/// for a one-dimensional piecewise-linear function:
///
/// (a) the convex hull of slopes attained on the open interval
///     `(x - delta, x + delta)` reaches within `eps` of zero;
/// (b) `x` lies strictly within `delta` of the `eps`-stationary set.
///
/// Both routes are evaluated in rational arithmetic. The grid is uniform
/// over the breakpoint span padded by `1 + delta`, plus every breakpoint
/// shifted by exactly `delta` either way (the knife-edge candidates).
pub fn check_claim1_equiv(
    pwl: &PiecewiseLinear,
    delta: f64,
    eps: f64,
    grid: usize,
) -> Result<Claim1Report, StationarySetError> {
    assert!(delta > 0.0 && eps > 0.0 && grid >= 2);
    let dr = BigRational::from_float(delta).expect("finite delta");
    let er = BigRational::from_float(eps).expect("finite eps");
    let sset = eps_stationary_set_1d(pwl, &er)?;

    let bps = pwl.breakpoints();
    let slopes = pwl.slopes();
    let lo_f = ratio_to_f64(&bps[0]) - 1.0 - delta;
    let hi_f = ratio_to_f64(&bps[bps.len() - 1]) + 1.0 + delta;
    let mut points: Vec<BigRational> = (0..grid)
        .map(|i| {
            let x = lo_f + (hi_f - lo_f) * i as f64 / (grid - 1) as f64;
            BigRational::from_float(x).expect("finite grid point")
        })
        .collect();
    for b in bps {
        points.push(b - &dr);
        points.push(b + &dr);
    }

    let knife = BigRational::new(1.into(), 1_000_000_000.into());
    let mut disagreements = Vec::new();
    let mut boundary_cases = 0usize;

    for x in &points {
        let win_lo = x - &dr;
        let win_hi = x + &dr;
        // Pieces whose open overlap with the window is nonempty.
        let first = bps.partition_point(|b| b <= &win_lo);
        let last = bps.partition_point(|b| b < &win_hi);
        let piece_slopes = &slopes[first..=last];
        let min_s = piece_slopes.iter().min().expect("nonempty window");
        let max_s = piece_slopes.iter().max().expect("nonempty window");
        let hull_gap = interval_gap(min_s, max_s);
        let a_holds = hull_gap <= er;

        let dist = sset.distance(x);
        let b_holds = dist.as_ref().map_or(false, |d| *d < dr);

        if (&hull_gap - &er).abs() <= knife {
            boundary_cases += 1;
        } else if let Some(d) = &dist {
            if (d - &dr).abs() <= knife {
                boundary_cases += 1;
            }
        }

        if a_holds != b_holds {
            disagreements.push(Claim1Disagreement {
                x: ratio_to_f64(x),
                hull_norm_small: a_holds,
                within_delta: b_holds,
            });
        }
    }

    Ok(Claim1Report {
        checked: points.len(),
        disagreements,
        boundary_cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{Abs, Instance, Mahalanobis, Quadratic, SigmaWord, Tree1d};
    use std::str::FromStr;

    fn rat(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    #[test]
    fn assembly_prunes_and_renormalizes() {
        let center = Vector::zeros(2);
        let probes = vec![
            CertProbe {
                point: Vector(vec![0.1, 0.0]),
                weight: 2.0,
                subgrad: Vector(vec![1.0, 0.0]),
            },
            CertProbe {
                point: Vector(vec![0.0, 0.1]),
                weight: 0.0,
                subgrad: Vector(vec![0.0, 1.0]),
            },
            CertProbe {
                point: Vector(vec![0.0, -0.1]),
                weight: 2.0,
                subgrad: Vector(vec![-1.0, 0.0]),
            },
        ];
        let cert = Certificate::from_weighted_probes(center, 0.2, probes);
        assert_eq!(cert.probes.len(), 2);
        assert!((cert.probes[0].weight - 0.5).abs() < 1e-15);
        assert!(cert.norm < 1e-15);
    }

    #[test]
    fn witness_certificate_verifies_clean() {
        let f = Mahalanobis::new(0.25, 48);
        let cert = f.witness(0.5).unwrap();
        assert!(verify_certificate(&f, &cert).is_empty());
    }

    #[test]
    fn each_tampering_is_caught() {
        let f = Mahalanobis::new(0.25, 48);
        let cert = f.witness(0.5).unwrap();

        let mut bad = cert.clone();
        for p in &mut bad.probes {
            p.weight *= 1.5;
        }
        // Scaling weights also scales the recomputed aggregate away from the
        // recorded one; the weight-sum violation must be among the findings.
        assert!(verify_certificate(&f, &bad)
            .iter()
            .any(|v| matches!(v, CertificateViolation::WeightSum { .. })));

        let mut bad = cert.clone();
        bad.probes[0].point = bad.center.add(&Vector::basis(48, 1).scale(0.6));
        assert!(verify_certificate(&f, &bad)
            .iter()
            .any(|v| matches!(v, CertificateViolation::ProbeOutsideBall { index: 0, .. })));

        let mut bad = cert.clone();
        bad.probes[3].subgrad = bad.probes[3].subgrad.add(&Vector::basis(48, 0).scale(2.5));
        assert!(verify_certificate(&f, &bad)
            .iter()
            .any(|v| matches!(v, CertificateViolation::SubgradMismatch { index: 3, .. })));

        let mut bad = cert.clone();
        bad.aggregate = bad.aggregate.add(&Vector::basis(48, 2).scale(1e-3));
        assert!(verify_certificate(&f, &bad)
            .iter()
            .any(|v| matches!(v, CertificateViolation::AggregateMismatch { .. })));

        let mut bad = cert;
        bad.norm += 0.05;
        assert!(verify_certificate(&f, &bad)
            .iter()
            .any(|v| matches!(v, CertificateViolation::NormMismatch { .. })));
    }

    #[test]
    fn certify_near_a_smooth_minimum() {
        let f = Quadratic::new(4);
        let mut ledger = QueryLedger::unbounded();
        let mut rng = RngStream::new(1, 0);
        let req = CertifyRequest {
            delta: 0.1,
            eps: 0.15,
            samples: 16,
            hints: vec![],
        };
        let out = certify(&f, &mut ledger, &Vector::zeros(4), &req, &mut rng).unwrap();
        assert!(out.found());
        let cert = out.certificate();
        assert!(cert.norm <= 0.15);
        assert!(verify_certificate(&f, cert).is_empty());
        assert_eq!(ledger.count(), 17, "center plus sixteen samples");
    }

    #[test]
    fn certify_uses_kink_vertices_from_hints() {
        let f = Instance::Abs(Abs);
        let x = Vector(vec![0.2]);
        let delta = 0.3;
        let mut ledger = QueryLedger::unbounded();
        let mut rng = RngStream::new(2, 0);
        let req = CertifyRequest {
            delta,
            eps: 1e-6,
            samples: 0,
            hints: f.hint_points(&x, delta),
        };
        let out = certify(&f, &mut ledger, &x, &req, &mut rng).unwrap();
        assert!(out.found(), "kink vertices allow an exactly-zero hull point");
        assert!(out.certificate().norm < 1e-9);
        assert!(verify_certificate(&f, out.certificate()).is_empty());
    }

    #[test]
    fn certify_reports_failure_far_from_stationarity() {
        let f = Quadratic::new(3);
        let mut ledger = QueryLedger::unbounded();
        let mut rng = RngStream::new(3, 0);
        let x = Vector(vec![2.0, 0.0, 0.0]);
        let req = CertifyRequest {
            delta: 0.05,
            eps: 0.5,
            samples: 8,
            hints: vec![],
        };
        let out = certify(&f, &mut ledger, &x, &req, &mut rng).unwrap();
        assert!(!out.found());
        assert!(out.certificate().norm > 1.9);
        assert!(verify_certificate(&f, out.certificate()).is_empty());
    }

    #[test]
    fn certify_respects_the_budget() {
        let f = Quadratic::new(3);
        let mut ledger = QueryLedger::with_budget(3);
        let mut rng = RngStream::new(4, 0);
        let req = CertifyRequest {
            delta: 0.1,
            eps: 0.1,
            samples: 10,
            hints: vec![],
        };
        let err = certify(&f, &mut ledger, &Vector::zeros(3), &req, &mut rng).unwrap_err();
        assert_eq!(err, BudgetExhausted { budget: 3 });
        assert_eq!(ledger.count(), 3);
    }

    #[test]
    fn stationary_set_of_the_absolute_value() {
        let pwl = Instance::Abs(Abs).piecewise().unwrap();
        let s = eps_stationary_set_1d(&pwl, &rat("1/2")).unwrap();
        assert_eq!(s.intervals, vec![(rat("0"), rat("0"))]);
        assert_eq!(s.distance(&rat("7/10")), Some(rat("7/10")));
        assert!(s.contains(&rat("0")));
        assert!(matches!(
            eps_stationary_set_1d(&pwl, &rat("1")),
            Err(StationarySetError::Unbounded)
        ));
    }

    #[test]
    fn stationary_set_of_the_tree() {
        let t = Tree1d::new(SigmaWord::from_str("00").unwrap(), false);
        let narrow = eps_stationary_set_1d(t.pwl(), &rat("1/5")).unwrap();
        let (lo, hi) = t.min_interval();
        assert_eq!(narrow.intervals, vec![(lo.clone(), hi.clone())]);

        // At eps = 19/20 every slope right of lo_1 qualifies (including the
        // 10/11 climb back to 1); only the unit-slope descent on the left is
        // excluded.
        let wide = eps_stationary_set_1d(t.pwl(), &rat("19/20")).unwrap();
        let (lo1, _) = t.level_interval(1);
        assert_eq!(wide.intervals, vec![(lo1, rat("1"))]);
    }

    #[test]
    fn claim_routes_agree_on_abs_and_tree() {
        let abs = Instance::Abs(Abs).piecewise().unwrap();
        let report = check_claim1_equiv(&abs, 0.5, 0.5, 301).unwrap();
        assert!(report.disagreements.is_empty());
        assert!(report.checked >= 301);

        let t = Tree1d::new(SigmaWord::from_str("010").unwrap(), false);
        let report = check_claim1_equiv(t.pwl(), 0.1, 0.15, 401).unwrap();
        assert!(
            report.disagreements.is_empty(),
            "first disagreement: {:?}",
            report.disagreements.first()
        );
    }
}
