//! The scaled Euclidean norm `f(x) = sqrt(x' A x)` with
//! `A = diag(2 eps^2, 1, ..., 1)`.
//!
//! In high enough dimension this function separates the two notions of
//! approximate stationarity: near the first axis the gradient norm along
//! `e_1` is tiny (order `eps`), yet the point sits a fixed distance from the
//! true minimizer at the origin. The [`Mahalanobis::witness`] method builds
//! the separating certificate in closed form.

use thiserror::Error;

use crate::certifier::{CertProbe, Certificate};
use crate::oracle::{Oracle, OracleReply};
use crate::vector::Vector;

use super::InstanceMeta;

/// A witness construction failed to land below its target norm.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum WitnessError {
    #[error("witness aggregate norm {norm} is not below eps = {eps}")]
    NotSeparated { norm: f64, eps: f64 },
}

#[derive(Clone, Debug)]
pub struct Mahalanobis {
    eps: f64,
    dim: usize,
}

impl Mahalanobis {
    pub fn new(eps: f64, dim: usize) -> Self {
        assert!(eps > 0.0 && 2.0 * eps * eps <= 1.0, "need eps <= 1/sqrt(2)");
        assert!(dim >= 2, "the witness needs at least one isotropic axis");
        Mahalanobis { eps, dim }
    }

    /// Dimension `ceil(3 / eps^2)`, large enough that the witness aggregate
    /// norm falls below `eps`.
    pub fn default_dim(eps: f64) -> usize {
        assert!(eps > 0.0);
        (3.0 / (eps * eps)).ceil() as usize
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn default_start(&self) -> Vector {
        Vector::basis(self.dim, 0)
    }

    pub fn infimum(&self) -> f64 {
        0.0
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: self.dim,
            lipschitz: 1.0,
            smoothness: None,
            value_gap: (2.0f64).sqrt() * self.eps,
            radius: Some(1.0),
            convex: true,
        }
    }

    /// The point `(delta / 8 eps) e_1` at which the near-flat direction is
    /// witnessed.
    pub fn witness_center(&self, delta: f64) -> Vector {
        Vector::basis(self.dim, 0).scale(delta / (8.0 * self.eps))
    }

    /// Probe stencil: steps of `delta / 2` along each isotropic axis.
    pub fn hint_points(&self, x: &Vector, delta: f64) -> Vec<Vector> {
        (1..self.dim)
            .map(|j| {
                let mut p = x.clone();
                p[j] += delta / 2.0;
                p
            })
            .collect()
    }

    /// Closed-form certificate at the witness center: the uniform mixture of
    /// the gradients half a `delta`-step along each isotropic axis has norm
    ///
    /// ```text
    /// sqrt( 2 eps^2 / 9 + 8 / (9 (d-1)) ),
    /// ```
    ///
    /// which drops below `eps` once `d` is large enough (the default
    /// dimension always qualifies).
    pub fn witness(&self, delta: f64) -> Result<Certificate, WitnessError> {
        assert!(delta > 0.0);
        let center = self.witness_center(delta);
        let weight = 1.0 / (self.dim - 1) as f64;
        let probes: Vec<CertProbe> = self
            .hint_points(&center, delta)
            .into_iter()
            .map(|point| {
                let subgrad = self.eval(&point).subgrad;
                CertProbe {
                    point,
                    weight,
                    subgrad,
                }
            })
            .collect();
        let cert = Certificate::from_weighted_probes(center, delta, probes);
        if cert.norm < self.eps {
            Ok(cert)
        } else {
            Err(WitnessError::NotSeparated {
                norm: cert.norm,
                eps: self.eps,
            })
        }
    }
}

impl Oracle for Mahalanobis {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), self.dim);
        let aniso = 2.0 * self.eps * self.eps;
        let mut s = aniso * x[0] * x[0];
        for i in 1..self.dim {
            s += x[i] * x[i];
        }
        let value = s.sqrt();
        if value == 0.0 {
            // The origin is the minimizer; zero is a valid subgradient.
            return OracleReply {
                value: 0.0,
                subgrad: Vector::zeros(self.dim),
                active_set: None,
            };
        }
        let mut grad = Vector::zeros(self.dim);
        grad[0] = aniso * x[0] / value;
        for i in 1..self.dim {
            grad[i] = x[i] / value;
        }
        OracleReply {
            value,
            subgrad: grad,
            active_set: None,
        }
    }
}
