//! Dense Euclidean vectors and column-orthonormal matrices.
//!
//! Deliberately minimal: inner products, norms, affine updates, ball
//! clipping, and Gram-Schmidt. Nothing resembling general linear algebra.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

/// Residual norm below which a vector counts as lying in a span.
pub const SPAN_TOL: f64 = 1e-9;

/// A point or direction in Euclidean space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// Standard basis vector `e_i`, zero-indexed.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index {i} out of range for dim {dim}");
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Vector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.sub(other).norm()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|c| a * c).collect())
    }

    /// In-place `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Vector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, c) in self.0.iter_mut().zip(&x.0) {
            *s += a * c;
        }
    }

    /// Unit vector in the direction of `self`; `None` when the norm vanishes.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }

    /// Nearest point of the closed ball of radius `radius` around `center`.
    pub fn clip_to_ball(&self, center: &Vector, radius: f64) -> Vector {
        let offset = self.sub(center);
        let n = offset.norm();
        if n <= radius {
            self.clone()
        } else {
            center.add(&offset.scale(radius / n))
        }
    }
}

impl From<Vec<f64>> for Vector {
    fn from(coords: Vec<f64>) -> Self {
        Vector(coords)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Matrix with orthonormal columns, stored column-wise.
///
/// Acts as a partial isometry: `apply` embeds coefficient space into the
/// ambient space, `apply_transpose` projects back.
#[derive(Clone, Debug)]
pub struct ColMatrix {
    rows: usize,
    cols: Vec<Vector>,
}

impl ColMatrix {
    /// Builds from explicit columns. Columns must share one dimension; the
    /// caller is responsible for orthonormality.
    pub fn from_columns(cols: Vec<Vector>) -> Self {
        assert!(!cols.is_empty(), "ColMatrix needs at least one column");
        let rows = cols[0].dim();
        assert!(cols.iter().all(|c| c.dim() == rows));
        ColMatrix { rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &Vector {
        &self.cols[j]
    }

    /// `U y`: coefficient space into ambient space.
    pub fn apply(&self, y: &Vector) -> Vector {
        debug_assert_eq!(y.dim(), self.cols());
        let mut out = Vector::zeros(self.rows);
        for (c, col) in y.iter().zip(&self.cols) {
            out.axpy(*c, col);
        }
        out
    }

    /// `Uᵀ x`: ambient space onto coefficient space.
    pub fn apply_transpose(&self, x: &Vector) -> Vector {
        debug_assert_eq!(x.dim(), self.rows);
        Vector(self.cols.iter().map(|col| col.dot(x)).collect())
    }
}

/// Orthonormalizes `w` against `basis` in place (two passes for stability).
fn orthogonalize(w: &mut Vector, basis: &[Vector]) {
    for _ in 0..2 {
        for b in basis {
            let c = w.dot(b);
            w.axpy(-c, b);
        }
    }
}

/// Column-orthonormal matrix obtained by orthonormalizing Gaussian draws.
///
/// A draw that degenerates inside the accumulated span is discarded and
/// redrawn, so the result always has exactly `cols` columns.
pub fn random_orthogonal(rows: usize, cols: usize, rng: &mut RngStream) -> ColMatrix {
    assert!(rows >= cols, "need rows >= cols for orthonormal columns");
    assert!(cols > 0);
    let mut basis: Vec<Vector> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut w = rng.standard_normal_vector(rows);
        orthogonalize(&mut w, &basis);
        let n = w.norm();
        if n > 1e-6 {
            basis.push(w.scale(1.0 / n));
        }
    }
    ColMatrix {
        rows,
        cols: basis,
    }
}

/// Unit vector orthogonal to every input, or `None` when the inputs span the
/// whole space.
///
/// Deterministic: the inputs are orthonormalized in order, then the first
/// standard basis vector with residual above [`SPAN_TOL`] is orthogonalized
/// and returned.
pub fn orthonormal_complement_vector(vs: &[Vector], dim: usize) -> Option<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vs {
        debug_assert_eq!(v.dim(), dim);
        let mut w = v.clone();
        orthogonalize(&mut w, &basis);
        let n = w.norm();
        if n > SPAN_TOL {
            basis.push(w.scale(1.0 / n));
        }
    }
    for i in 0..dim {
        let mut w = Vector::basis(dim, i);
        orthogonalize(&mut w, &basis);
        let n = w.norm();
        if n > SPAN_TOL {
            return Some(w.scale(1.0 / n));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_products() {
        let a = Vector(vec![1.0, 0.0]);
        let b = Vector(vec![0.0, 1.0]);
        assert_eq!(a.dot(&b), 0.0);
        let c = Vector(vec![1.0, 2.0]);
        let d = Vector(vec![3.0, 4.0]);
        assert_eq!(c.dot(&d), 11.0);
        let e = Vector(vec![3.0, 4.0]);
        assert_eq!(e.dot(&e), 25.0);
    }

    #[test]
    fn norms() {
        assert_eq!(Vector::zeros(3).norm(), 0.0);
        assert_eq!(Vector(vec![3.0, 4.0]).norm(), 5.0);
        for i in 0..4 {
            assert_eq!(Vector::basis(4, i).norm(), 1.0);
        }
    }

    #[test]
    fn arithmetic() {
        let a = Vector(vec![1.0, 2.0]);
        let b = Vector(vec![3.0, -1.0]);
        assert_eq!(a.add(&b), Vector(vec![4.0, 1.0]));
        assert_eq!(a.sub(&b), Vector(vec![-2.0, 3.0]));
        assert_eq!(a.scale(2.0), Vector(vec![2.0, 4.0]));
        let mut c = a.clone();
        c.axpy(2.0, &b);
        assert_eq!(c, Vector(vec![7.0, 0.0]));
        assert_eq!(a.dist(&b), (4.0f64 + 9.0).sqrt());
    }

    #[test]
    fn ball_clipping() {
        let center = Vector(vec![1.0, 0.0]);
        let inside = Vector(vec![1.5, 0.0]);
        assert_eq!(inside.clip_to_ball(&center, 1.0), inside);
        let outside = Vector(vec![4.0, 0.0]);
        let clipped = outside.clip_to_ball(&center, 1.0);
        assert!((clipped.dist(&center) - 1.0).abs() < 1e-15);
        assert_eq!(clipped, Vector(vec![2.0, 0.0]));
    }

    #[test]
    fn complement_of_single_basis_vector() {
        let vs = vec![Vector::basis(3, 0)];
        let v = orthonormal_complement_vector(&vs, 3).unwrap();
        assert_eq!(v, Vector::basis(3, 1));
    }

    #[test]
    fn complement_after_gram_schmidt() {
        let vs = vec![Vector::basis(4, 0), Vector(vec![1.0, 1.0, 0.0, 0.0])];
        let v = orthonormal_complement_vector(&vs, 4).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        for u in &vs {
            assert!(v.dot(u).abs() < 1e-10);
        }
        assert_eq!(v, Vector::basis(4, 2));
    }

    #[test]
    fn complement_missing_when_inputs_span() {
        let vs = vec![
            Vector(vec![1.0, 1.0]),
            Vector(vec![1.0, -1.0]),
        ];
        assert!(orthonormal_complement_vector(&vs, 2).is_none());
    }

    #[test]
    fn random_orthogonal_columns() {
        let mut rng = RngStream::new(11, 0);
        let u = random_orthogonal(7, 3, &mut rng);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                let got = u.column(i).dot(u.column(j));
                assert!((got - expect).abs() < 1e-10, "gram[{i}][{j}] = {got}");
            }
        }
        // round trip through the isometry preserves coefficients
        let y = Vector(vec![0.3, -1.2, 2.5]);
        let back = u.apply_transpose(&u.apply(&y));
        assert!(back.dist(&y) < 1e-10);
    }

    #[test]
    fn random_orthogonal_reproducible() {
        let a = random_orthogonal(5, 2, &mut RngStream::new(9, 4));
        let b = random_orthogonal(5, 2, &mut RngStream::new(9, 4));
        for j in 0..2 {
            assert_eq!(a.column(j), b.column(j));
        }
    }
}
