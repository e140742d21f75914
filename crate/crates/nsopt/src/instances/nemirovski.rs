//! Max-of-terms chain functions whose minimization forces coordinate-by-
//! coordinate progress, plus a rotated embedding and a softmax surrogate.
//!
//! The base function on `R^T` is
//!
//! ```text
//! f(x) = max_i { |x_i - 1| + 3a(T - i) },   i = 1..T
//! ```
//!
//! with gap parameter `a > 0`. Started at the origin, any first-order method
//! only learns about coordinate `i` after moving coordinate `i-1` close to 1,
//! which is what makes the family a useful stress test for query lower
//! bounds. The minimizer is the all-ones vector with value `3a(T-1)`.

use crate::oracle::{ActiveSet, Oracle, OracleReply};
use crate::rng::RngStream;
use crate::vector::{random_orthogonal, ColMatrix, Vector};

use super::InstanceMeta;

/// The chain function on `R^T`. Ties between terms resolve to the lowest
/// index, and the kink convention at `x_i = 1` is the `+e_i` subgradient.
#[derive(Clone, Debug)]
pub struct Nemirovski {
    t: usize,
    alpha: f64,
}

impl Nemirovski {
    pub fn new(t: usize, alpha: f64) -> Self {
        assert!(t >= 1, "need at least one coordinate");
        assert!(alpha > 0.0 && alpha.is_finite());
        Nemirovski { t, alpha }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn default_start(&self) -> Vector {
        Vector::zeros(self.t)
    }

    /// Minimum value, attained at the all-ones vector.
    pub fn infimum(&self) -> f64 {
        3.0 * self.alpha * (self.t as f64 - 1.0)
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: self.t,
            lipschitz: 1.0,
            smoothness: None,
            value_gap: 1.0,
            radius: Some((self.t as f64).sqrt()),
            convex: true,
        }
    }

    /// All 2T affine terms `s(x_i - 1) + 3a(T - i)`, the building blocks
    /// shared with the softmax surrogate.
    fn term(&self, x: &Vector, i: usize) -> f64 {
        (x[i] - 1.0).abs() + 3.0 * self.alpha * (self.t - 1 - i) as f64
    }

    /// Probe offsets that reveal one coordinate direction each: moving
    /// coordinate `i` by `a_i = 3a(i-1) + delta/4` makes term `i` the unique
    /// maximizer. Offsets that would leave the radius-`delta` ball are
    /// dropped.
    pub fn probe_offsets(&self, delta: f64) -> Vec<(usize, f64)> {
        (0..self.t)
            .map(|i| (i, 3.0 * self.alpha * i as f64 + delta / 4.0))
            .filter(|&(_, a)| a < delta)
            .collect()
    }

    /// Two-sided stencil around `x` built from [`Self::probe_offsets`].
    pub fn hint_points(&self, x: &Vector, delta: f64) -> Vec<Vector> {
        let mut out = Vec::new();
        for (i, a) in self.probe_offsets(delta) {
            for s in [1.0, -1.0] {
                let mut p = x.clone();
                p[i] += s * a;
                out.push(p);
            }
        }
        out
    }
}

impl Oracle for Nemirovski {
    fn dim(&self) -> usize {
        self.t
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), self.t);
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.t {
            let v = self.term(x, i);
            if v > best {
                best = v;
            }
        }
        let active: Vec<usize> = (0..self.t).filter(|&i| self.term(x, i) == best).collect();
        let lead = active[0];
        let sign_at = |i: usize| if x[i] >= 1.0 { 1.0 } else { -1.0 };
        let subgrad = Vector::basis(self.t, lead).scale(sign_at(lead));

        let any_kink = active.iter().any(|&i| x[i] == 1.0);
        let active_set = if active.len() > 1 || any_kink {
            let mut vertices = Vec::new();
            let mut kinks = Vec::new();
            for &i in &active {
                if x[i] == 1.0 {
                    vertices.push(Vector::basis(self.t, i));
                    vertices.push(Vector::basis(self.t, i).scale(-1.0));
                    kinks.push(i);
                } else {
                    vertices.push(Vector::basis(self.t, i).scale(sign_at(i)));
                }
            }
            Some(ActiveSet {
                vertices,
                active_indices: active.clone(),
                kink_indices: kinks,
            })
        } else {
            None
        };

        OracleReply {
            value: best,
            subgrad,
            active_set,
        }
    }
}

/// Largest 1-based index whose coordinate has moved more than `alpha` from
/// zero; 0 when none has. Measures how far along the chain an iterate
/// starting at the origin has progressed.
pub fn prog_alpha(x: &Vector, alpha: f64) -> usize {
    (0..x.dim())
        .rev()
        .find(|&i| x[i].abs() > alpha)
        .map_or(0, |i| i + 1)
}

/// The chain function pushed into `R^dim` (`dim >= T`) through a random
/// column-orthogonal map `U`, guarded by a radial growth branch:
///
/// ```text
/// g(x) = max { f(U'x), 2(|x| - 2 sqrt(T)) }.
/// ```
///
/// The guard keeps the relevant geometry inside a fixed ball without moving
/// the minimizer `U 1`. Ties resolve to the chain branch.
#[derive(Clone, Debug)]
pub struct NemirovskiExtended {
    inner: Nemirovski,
    u: ColMatrix,
}

impl NemirovskiExtended {
    pub fn new(t: usize, alpha: f64, dim: usize, seed: u64) -> Self {
        assert!(dim >= t, "embedding dimension must be at least T");
        let u = random_orthogonal(dim, t, &mut RngStream::new(seed, 0));
        NemirovskiExtended {
            inner: Nemirovski::new(t, alpha),
            u,
        }
    }

    pub fn inner(&self) -> &Nemirovski {
        &self.inner
    }

    pub fn map(&self) -> &ColMatrix {
        &self.u
    }

    pub fn default_start(&self) -> Vector {
        Vector::zeros(self.u.rows())
    }

    pub fn infimum(&self) -> f64 {
        self.inner.infimum()
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: self.u.rows(),
            lipschitz: 2.0,
            smoothness: None,
            value_gap: 1.0,
            radius: Some((self.inner.t as f64).sqrt()),
            convex: true,
        }
    }

    fn radial(&self, x: &Vector) -> f64 {
        2.0 * (x.norm() - 2.0 * (self.inner.t as f64).sqrt())
    }

    /// The chain stencil pushed forward along the columns of `U`.
    pub fn hint_points(&self, x: &Vector, delta: f64) -> Vec<Vector> {
        let mut out = Vec::new();
        for (i, a) in self.inner.probe_offsets(delta) {
            let col = self.u.column(i);
            for s in [a, -a] {
                let mut p = x.clone();
                p.axpy(s, col);
                out.push(p);
            }
        }
        out
    }
}

impl Oracle for NemirovskiExtended {
    fn dim(&self) -> usize {
        self.u.rows()
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), self.u.rows());
        let y = self.u.apply_transpose(x);
        let chain = self.inner.eval(&y);
        let radial = self.radial(x);
        if chain.value >= radial {
            let active_set = chain.active_set.map(|a| ActiveSet {
                vertices: a.vertices.iter().map(|v| self.u.apply(v)).collect(),
                active_indices: a.active_indices,
                kink_indices: a.kink_indices,
            });
            OracleReply {
                value: chain.value,
                subgrad: self.u.apply(&chain.subgrad),
                active_set,
            }
        } else {
            let n = x.norm();
            assert!(n > 0.0, "radial branch cannot be active at the origin");
            OracleReply {
                value: radial,
                subgrad: x.scale(2.0 / n),
                active_set: None,
            }
        }
    }
}

/// Softmax smoothing of the chain function at temperature `tau`:
///
/// ```text
/// f_tau(x) = tau * ln( sum_{i,s} exp( (s(x_i - 1) + 3a(T-i)) / tau ) )
/// ```
///
/// over all 2T signed terms. Uniformly within `tau * ln(2T)` of the max and
/// `(1/tau)`-smooth, so it exercises the smooth-descent paths on chain-like
/// geometry.
#[derive(Clone, Debug)]
pub struct LogSumExpNemirovski {
    t: usize,
    alpha: f64,
    tau: f64,
}

/// Temperature making the smoothing error about a tenth of `eps`.
pub fn default_tau(t: usize, eps: f64) -> f64 {
    assert!(t >= 1 && eps > 0.0);
    eps / (10.0 * (2.0 * t as f64).ln())
}

impl LogSumExpNemirovski {
    pub fn new(t: usize, alpha: f64, tau: f64) -> Self {
        assert!(t >= 1);
        assert!(alpha > 0.0 && alpha.is_finite());
        assert!(tau > 0.0 && tau.is_finite());
        LogSumExpNemirovski { t, alpha, tau }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn default_start(&self) -> Vector {
        Vector::zeros(self.t)
    }

    /// The smoothing error bound `tau * ln(2T)`.
    pub fn smoothing_gap(&self) -> f64 {
        self.tau * (2.0 * self.t as f64).ln()
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: self.t,
            lipschitz: 1.0,
            smoothness: Some(1.0 / self.tau),
            value_gap: 1.0 + self.smoothing_gap(),
            radius: Some(2.0 * (self.t as f64).sqrt()),
            convex: true,
        }
    }

    /// Exponents of all 2T terms: `(x_i - 1)` with both signs plus the gap
    /// offsets.
    fn exponents(&self, x: &Vector) -> Vec<f64> {
        let mut l = Vec::with_capacity(2 * self.t);
        for i in 0..self.t {
            let off = 3.0 * self.alpha * (self.t - 1 - i) as f64;
            l.push(x[i] - 1.0 + off);
            l.push(-(x[i] - 1.0) + off);
        }
        l
    }
}

impl Oracle for LogSumExpNemirovski {
    fn dim(&self) -> usize {
        self.t
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), self.t);
        let l = self.exponents(x);
        let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = l.iter().map(|&v| ((v - m) / self.tau).exp()).collect();
        let z: f64 = weights.iter().sum();
        let value = m + self.tau * z.ln();
        let mut grad = Vector::zeros(self.t);
        for i in 0..self.t {
            grad[i] = (weights[2 * i] - weights[2 * i + 1]) / z;
        }
        OracleReply {
            value,
            subgrad: grad,
            active_set: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_values_at_origin_and_ones() {
        let f = Nemirovski::new(4, 0.01);
        let at0 = f.eval(&Vector::zeros(4));
        assert!((at0.value - 1.09).abs() < 1e-12);
        assert_eq!(at0.subgrad, Vector::basis(4, 0).scale(-1.0));
        assert!(at0.active_set.is_none());

        let ones = Vector(vec![1.0; 4]);
        let at1 = f.eval(&ones);
        assert!((at1.value - f.infimum()).abs() < 1e-15);
        assert_eq!(at1.subgrad, Vector::basis(4, 0));
        let active = at1.active_set.expect("kink at the minimizer");
        assert_eq!(active.kink_indices, vec![0]);
        assert_eq!(active.vertices.len(), 2);
    }

    #[test]
    fn chain_tie_exposes_both_terms() {
        let f = Nemirovski::new(2, 0.1);
        // term 1 = |1.2 - 1| + 0.3 = 0.5, term 2 = |0.5 - 1| = 0.5.
        let r = f.eval(&Vector(vec![1.2, 0.5]));
        assert!((r.value - 0.5).abs() < 1e-15);
        assert_eq!(r.subgrad, Vector::basis(2, 0));
        let active = r.active_set.expect("two-way tie");
        assert_eq!(active.active_indices, vec![0, 1]);
        assert_eq!(
            active.vertices,
            vec![Vector::basis(2, 0), Vector::basis(2, 1).scale(-1.0)]
        );
        assert!(active.kink_indices.is_empty());
    }

    #[test]
    fn progress_index() {
        let x = Vector(vec![0.5, 0.2, 0.05]);
        assert_eq!(prog_alpha(&x, 0.1), 2);
        assert_eq!(prog_alpha(&x, 0.01), 3);
        assert_eq!(prog_alpha(&x, 0.6), 0);
        assert_eq!(prog_alpha(&Vector::zeros(3), 0.1), 0);
    }

    #[test]
    fn probe_offsets_reveal_each_coordinate() {
        let t = 16;
        let alpha = 1.0 / 144.0;
        let delta = 0.5;
        let f = Nemirovski::new(t, alpha);
        let offs = f.probe_offsets(delta);
        assert_eq!(offs.len(), t);
        assert!((offs[15].1 - 0.4375).abs() < 1e-15);
        let x = Vector::zeros(t);
        for &(i, a) in &offs {
            let mut p = x.clone();
            p[i] -= a;
            let r = f.eval(&p);
            assert_eq!(r.subgrad, Vector::basis(t, i).scale(-1.0));
            assert!(r.active_set.is_none(), "offset must single out term {i}");
        }
    }

    #[test]
    fn extended_matches_inner_through_the_map() {
        let g = NemirovskiExtended::new(4, 0.05, 9, 7);
        let y = Vector(vec![0.3, -0.2, 1.1, 0.9]);
        let x = g.map().apply(&y);
        let outer = g.eval(&x);
        let inner = g.inner().eval(&y);
        assert!((outer.value - inner.value).abs() < 1e-12);
        let pushed = g.map().apply(&inner.subgrad);
        assert!(outer.subgrad.sub(&pushed).norm() < 1e-12);
    }

    #[test]
    fn extended_radial_branch() {
        let g = NemirovskiExtended::new(4, 0.05, 9, 7);
        let y = Vector(vec![20.0, 0.0, 0.0, 0.0]);
        let x = g.map().apply(&y);
        let r = g.eval(&x);
        assert!((r.value - 2.0 * (20.0 - 4.0)).abs() < 1e-9);
        assert!((r.subgrad.norm() - 2.0).abs() < 1e-12);
        assert!(r.active_set.is_none());
    }

    #[test]
    fn logsumexp_sandwich_and_temperature() {
        let t = 8;
        let alpha = 0.02;
        let max_f = Nemirovski::new(t, alpha);
        let tau = default_tau(t, 0.1);
        let smooth = LogSumExpNemirovski::new(t, alpha, tau);
        let gap = smooth.smoothing_gap();
        assert!((gap - 0.01).abs() < 1e-15, "gap tuned to eps/10");
        let mut rng = RngStream::new(5, 0);
        for _ in 0..50 {
            let x = Vector((0..t).map(|_| 2.0 * rng.uniform() - 0.5).collect());
            let exact = max_f.eval(&x).value;
            let soft = smooth.eval(&x).value;
            assert!(soft >= exact - 1e-12);
            assert!(soft <= exact + gap + 1e-12);
        }
    }

    #[test]
    fn logsumexp_gradient_is_a_weight_difference() {
        let smooth = LogSumExpNemirovski::new(3, 0.1, 0.05);
        let x = Vector(vec![0.4, 1.0, 1.6]);
        let g = smooth.eval(&x).subgrad;
        assert!(g.norm() <= 1.0 + 1e-12);
        // At a symmetric coordinate the two signed terms cancel.
        assert!(g[1].abs() < 1e-12);
        assert!(g[0] < 0.0 && g[2] > 0.0);
    }
}
