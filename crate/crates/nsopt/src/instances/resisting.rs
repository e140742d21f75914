//! A resisting oracle for deterministic first-order methods, and the
//! function it retroactively commits to.
//!
//! During the game the oracle answers every query with value 0 and gradient
//! `e_1`. Once the algorithm has spent its budget, [`ResistingInstance`]
//! materializes a concrete 1-Lipschitz function `h` that agrees with every
//! answer given:
//!
//! - around each distinct query `z` (within radius `r`, a quarter of the
//!   minimum query separation) `h` interpolates between the served affine
//!   answer `e_1'(x - z)` and a background linear function `v'x`, where `v`
//!   is a unit vector orthogonal to `e_1` and to every query;
//! - away from all queries `h(x) = v'x`.
//!
//! By construction `h(z) = 0` and `grad h(z) = e_1` exactly at every query,
//! so the transcript is consistent, yet no point the algorithm can name has
//! a small Goldstein subgradient: every subgradient of `h` has norm above
//! [`FLOOR_H`]. The bounded view `f = max{h, -1} / 7` keeps the same floor
//! scaled to [`FLOOR_F`] wherever the clip is inactive.

use thiserror::Error;

use crate::oracle::{ActiveSet, Oracle, OracleReply};
use crate::vector::{orthonormal_complement_vector, Vector};

/// Lower bound on `|grad h|` (the true floor is `1/(sqrt(2)+4)^2`, slightly
/// larger).
pub const FLOOR_H: f64 = 1.0 / 36.0;

/// The same floor through the clipped, `1/7`-scaled view.
pub const FLOOR_F: f64 = 1.0 / 252.0;

/// The in-game oracle: value 0 and gradient `e_1`, whatever the query.
#[derive(Clone, Debug)]
pub struct ResistingOracle {
    dim: usize,
}

impl ResistingOracle {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        ResistingOracle { dim }
    }
}

impl Oracle for ResistingOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), self.dim);
        OracleReply {
            value: 0.0,
            subgrad: Vector::basis(self.dim, 0),
            active_set: None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ResistingError {
    #[error("query {index} is not a finite vector of the right dimension")]
    BadQuery { index: usize },
    #[error(
        "cannot hide a direction from {centers} distinct queries in dimension {dim}; \
         need span room for the queries, e_1, and one free vector"
    )]
    NotEnoughDimensions { dim: usize, centers: usize },
}

/// The function committed to after the game. See the module docs.
#[derive(Clone, Debug)]
pub struct ResistingInstance {
    dim: usize,
    centers: Vec<Vector>,
    r: f64,
    v: Vector,
}

impl ResistingInstance {
    /// Builds the instance from the query transcript. Duplicate queries
    /// (bitwise) collapse to their first occurrence.
    pub fn from_queries(queries: &[Vector], dim: usize) -> Result<Self, ResistingError> {
        let mut centers: Vec<Vector> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (index, q) in queries.iter().enumerate() {
            if q.dim() != dim || !q.is_finite() {
                return Err(ResistingError::BadQuery { index });
            }
            let key: Vec<u64> = q.iter().map(|c| c.to_bits()).collect();
            if seen.insert(key) {
                centers.push(q.clone());
            }
        }

        let mut min_pair: Option<f64> = None;
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let d = centers[i].dist(&centers[j]);
                min_pair = Some(min_pair.map_or(d, |m| m.min(d)));
            }
        }
        let r = min_pair.map_or(1.0, |m| m / 4.0);
        assert!(r > 0.0, "distinct centers cannot coincide");

        let mut spanned: Vec<Vector> = vec![Vector::basis(dim, 0)];
        spanned.extend(centers.iter().cloned());
        let v = orthonormal_complement_vector(&spanned, dim).ok_or(
            ResistingError::NotEnoughDimensions {
                dim,
                centers: centers.len(),
            },
        )?;

        Ok(ResistingInstance {
            dim,
            centers,
            r,
            v,
        })
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }

    /// Interpolation radius around each center.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// The hidden descent direction.
    pub fn v(&self) -> &Vector {
        &self.v
    }

    /// Evaluates the unclipped function `h`: `(value, gradient, boundary)`.
    /// `boundary` carries the outside gradient `v` when `x` sits exactly on
    /// an interpolation sphere, where both gradients are Clarke-active.
    fn h_eval(&self, x: &Vector) -> (f64, Vector, Option<Vector>) {
        debug_assert_eq!(x.dim(), self.dim);
        // Balls are disjoint (radius is a quarter of the minimum pairwise
        // distance), so the first hit is the only one.
        let hit = self.centers.iter().find(|z| x.dist(z) <= self.r);
        let z = match hit {
            None => return (self.v.dot(x), self.v.clone(), None),
            Some(z) => z,
        };
        let d = x.sub(z);
        let s2 = d.norm_sq();
        let r2 = self.r * self.r;
        let phi = s2 / r2;
        let a = self.v.dot(x);
        let b = d[0];
        let value = phi * a + (1.0 - phi) * b;
        let mut grad = d.scale(2.0 * (a - b) / r2);
        grad.axpy(phi, &self.v);
        grad.axpy(1.0 - phi, &Vector::basis(self.dim, 0));
        let boundary = if s2 == r2 {
            Some(self.v.clone())
        } else {
            None
        };
        (value, grad, boundary)
    }

    /// The raw interpolant `h`: what the in-game answers describe.
    pub fn h_reply(&self, x: &Vector) -> (f64, Vector) {
        let (value, grad, _) = self.h_eval(x);
        (value, grad)
    }

    pub fn infimum(&self) -> f64 {
        -1.0 / 7.0
    }
}

impl Oracle for ResistingInstance {
    fn dim(&self) -> usize {
        self.dim
    }

    /// The bounded view `f = max{h, -1} / 7`.
    fn eval(&self, x: &Vector) -> OracleReply {
        let (h, dh, boundary) = self.h_eval(x);
        let scaled = dh.scale(1.0 / 7.0);
        if h < -1.0 {
            return OracleReply {
                value: -1.0 / 7.0,
                subgrad: Vector::zeros(self.dim),
                active_set: None,
            };
        }
        let mut vertices = vec![scaled.clone()];
        if let Some(v) = &boundary {
            vertices.push(v.scale(1.0 / 7.0));
        }
        if h == -1.0 {
            vertices.push(Vector::zeros(self.dim));
        }
        let active_set = if vertices.len() > 1 {
            Some(ActiveSet {
                vertices,
                active_indices: vec![],
                kink_indices: vec![],
            })
        } else {
            None
        };
        OracleReply {
            value: h.max(-1.0) / 7.0,
            subgrad: scaled,
            active_set,
        }
    }
}
