//! Elementary instances: a smooth quadratic bowl, a linear slope, and the
//! absolute value.

use crate::oracle::{ActiveSet, Oracle, OracleReply};
use crate::vector::Vector;

use super::InstanceMeta;

/// `f(x) = ½‖x‖²`: the smooth convex baseline. Gradient `x`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    dim: usize,
}

impl Quadratic {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        Quadratic { dim }
    }

    /// Start at distance 2 from the minimizer: `(2/√d)·(1,…,1)`.
    pub fn default_start(&self) -> Vector {
        let c = 2.0 / (self.dim as f64).sqrt();
        Vector(vec![c; self.dim])
    }

    /// Constants valid on the radius-2 ball around the default start, which
    /// contains the whole descent trajectory and the minimizer.
    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: self.dim,
            lipschitz: 4.0,
            smoothness: Some(1.0),
            value_gap: 2.0,
            radius: Some(2.0),
            convex: true,
        }
    }
}

impl Oracle for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), self.dim);
        OracleReply {
            value: 0.5 * x.norm_sq(),
            subgrad: x.clone(),
            active_set: None,
        }
    }
}

/// `f(x) = vᵀx`: constant gradient, unbounded below, no stationary points.
#[derive(Clone, Debug)]
pub struct Linear {
    v: Vector,
}

impl Linear {
    pub fn new(v: Vector) -> Self {
        assert!(v.dim() >= 1 && v.is_finite());
        Linear { v }
    }

    pub fn slope(&self) -> &Vector {
        &self.v
    }

    pub fn default_start(&self) -> Vector {
        Vector::zeros(self.v.dim())
    }

    /// `value_gap` is a budget heuristic only: the function is unbounded
    /// below, so no finite gap exists.
    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: self.v.dim(),
            lipschitz: self.v.norm(),
            smoothness: Some(0.0),
            value_gap: self.v.norm(),
            radius: None,
            convex: true,
        }
    }
}

impl Oracle for Linear {
    fn dim(&self) -> usize {
        self.v.dim()
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        OracleReply {
            value: self.v.dot(x),
            subgrad: self.v.clone(),
            active_set: None,
        }
    }
}

/// `f(x) = |x|` on the line. The subgradient convention at the kink is `+1`;
/// the active set there exposes both slopes.
#[derive(Clone, Debug)]
pub struct Abs;

impl Abs {
    pub fn default_start(&self) -> Vector {
        Vector(vec![1.0])
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            dim: 1,
            lipschitz: 1.0,
            smoothness: None,
            value_gap: 1.0,
            radius: Some(1.0),
            convex: true,
        }
    }
}

impl Oracle for Abs {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        let t = x[0];
        if t == 0.0 {
            OracleReply {
                value: 0.0,
                subgrad: Vector(vec![1.0]),
                active_set: Some(ActiveSet {
                    vertices: vec![Vector(vec![-1.0]), Vector(vec![1.0])],
                    active_indices: vec![0],
                    kink_indices: vec![0],
                }),
            }
        } else {
            OracleReply {
                value: t.abs(),
                subgrad: Vector(vec![t.signum()]),
                active_set: None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_value_and_gradient() {
        let q = Quadratic::new(3);
        let r = q.eval(&Vector(vec![1.0, 2.0, -2.0]));
        assert_eq!(r.value, 4.5);
        assert_eq!(r.subgrad, Vector(vec![1.0, 2.0, -2.0]));
        assert!((q.default_start().norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_constant_gradient() {
        let l = Linear::new(Vector(vec![0.3, -0.4]));
        let a = l.eval(&Vector(vec![1.0, 1.0]));
        let b = l.eval(&Vector(vec![-5.0, 2.0]));
        assert_eq!(a.subgrad, b.subgrad);
        assert!((a.value - -0.1).abs() < 1e-15);
        assert!((l.meta().lipschitz - 0.5).abs() < 1e-15);
    }

    #[test]
    fn abs_kink_and_sign_convention() {
        let f = Abs;
        assert_eq!(f.eval(&Vector(vec![-2.0])).subgrad, Vector(vec![-1.0]));
        assert_eq!(f.eval(&Vector(vec![3.0])).subgrad, Vector(vec![1.0]));
        let at_kink = f.eval(&Vector(vec![0.0]));
        assert_eq!(at_kink.value, 0.0);
        assert_eq!(at_kink.subgrad, Vector(vec![1.0]));
        let active = at_kink.active_set.unwrap();
        assert_eq!(active.vertices.len(), 2);
        assert_eq!(active.kink_indices, vec![0]);
    }
}
