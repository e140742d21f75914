//! Shortest vectors in convex hulls.
//!
//! Two primitives: a closed-form combination of two vectors, used by the
//! inner descent loop, and Wolfe's min-norm-point method over arbitrary
//! finite sets, used to aggregate sampled subgradients into certificates.

use std::collections::HashMap;

use thiserror::Error;

use crate::vector::Vector;

/// Absolute duality-gap tolerance for Wolfe termination: stop once
/// `min_j x·p_j >= ‖x‖² - MNP_GAP_TOL`.
pub const MNP_GAP_TOL: f64 = 1e-9;

/// Corral weights at or below this are treated as zero: the minor cycle
/// line-searches against them and drops them from the corral.
const WEIGHT_EPS: f64 = 1e-12;

/// `λ ∈ [0,1]` and `v = λg + (1-λ)q` minimizing `‖v‖`.
///
/// Closed form: `λ* = clamp(⟨q, q-g⟩ / ‖g-q‖², 0, 1)`; for `g = q` the
/// convention is `(1, g)`.
pub fn min_norm_combination(g: &Vector, q: &Vector) -> (f64, Vector) {
    let d = q.sub(g);
    let den = d.norm_sq();
    if den == 0.0 {
        return (1.0, g.clone());
    }
    let lambda = (q.dot(&d) / den).clamp(0.0, 1.0);
    // v = q - λ(q - g)
    let mut v = q.clone();
    v.axpy(-lambda, &d);
    (lambda, v)
}

/// Result of [`min_norm_point`]: simplex weights aligned with the input
/// order, their combination, and its norm.
#[derive(Clone, Debug)]
pub struct MinNormPoint {
    pub weights: Vec<f64>,
    pub point: Vector,
    pub norm: f64,
}

#[derive(Debug, Error)]
pub enum MinNormError {
    #[error("min_norm_point needs at least one vector")]
    Empty,
    #[error("min_norm_point inputs must share one dimension")]
    DimensionMismatch,
    #[error("min-norm-point stopped after {iterations} major cycles without meeting the gap tolerance (best norm {})", best.norm)]
    NoConvergence {
        iterations: usize,
        best: MinNormPoint,
    },
}

/// Shortest vector in the convex hull of `gs`, by Wolfe's min-norm-point
/// method.
///
/// Duplicated inputs are folded onto their first occurrence, ties in vertex
/// selection break to the lowest index, and the returned weight vector sums
/// to one. Nonconvergence within `10 * gs.len() * dim` major cycles (a
/// numerical stall, not a mathematical possibility) reports the best point
/// found so far, which is still a valid hull member.
pub fn min_norm_point(gs: &[Vector]) -> Result<MinNormPoint, MinNormError> {
    if gs.is_empty() {
        return Err(MinNormError::Empty);
    }
    let dim = gs[0].dim();
    if gs.iter().any(|g| g.dim() != dim) {
        return Err(MinNormError::DimensionMismatch);
    }

    // exact dedup: bit pattern as key, weights folded onto the first copy
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unique: Vec<&Vector> = Vec::new();
    let mut unique_to_orig: Vec<usize> = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        let key: Vec<u64> = g.iter().map(|c| c.to_bits()).collect();
        if !seen.contains_key(&key) {
            seen.insert(key, unique.len());
            unique.push(g);
            unique_to_orig.push(i);
        }
    }

    let start = (0..unique.len())
        .min_by(|&a, &b| {
            unique[a]
                .norm_sq()
                .partial_cmp(&unique[b].norm_sq())
                .unwrap()
        })
        .unwrap();

    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let max_major = (10 * gs.len() * dim).max(16);

    let combine = |corral: &[usize], weights: &[f64]| -> Vector {
        let mut x = Vector::zeros(dim);
        for (&j, &w) in corral.iter().zip(weights) {
            x.axpy(w, unique[j]);
        }
        x
    };

    let finish = |corral: &[usize], weights: &[f64]| -> MinNormPoint {
        let mut full = vec![0.0; gs.len()];
        for (&j, &w) in corral.iter().zip(weights) {
            full[unique_to_orig[j]] += w;
        }
        let sum: f64 = full.iter().sum();
        for w in &mut full {
            *w /= sum;
        }
        let mut point = Vector::zeros(dim);
        for (w, g) in full.iter().zip(gs) {
            if *w != 0.0 {
                point.axpy(*w, g);
            }
        }
        let norm = point.norm();
        MinNormPoint {
            weights: full,
            point,
            norm,
        }
    };

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;

    for major in 0..max_major {
        let x = combine(&corral, &weights);
        let norm_sq = x.norm_sq();
        if best.as_ref().map_or(true, |(b, _, _)| norm_sq < *b) {
            best = Some((norm_sq, corral.clone(), weights.clone()));
        }

        // most violated vertex: smallest x·p_j, lowest index on ties
        let mut j_star = 0;
        let mut min_ip = f64::INFINITY;
        for (j, g) in unique.iter().enumerate() {
            let ip = x.dot(g);
            if ip < min_ip {
                min_ip = ip;
                j_star = j;
            }
        }
        if min_ip >= norm_sq - MNP_GAP_TOL {
            return Ok(finish(&corral, &weights));
        }
        if corral.contains(&j_star) {
            // numerical stall: the optimality gap persists but no new vertex exists
            let (_, c, w) = best.unwrap();
            return Err(MinNormError::NoConvergence {
                iterations: major,
                best: finish(&c, &w),
            });
        }
        corral.push(j_star);
        weights.push(0.0);

        // minor cycles: move toward the affine minimizer of the corral,
        // dropping vertices whose weight hits zero
        loop {
            let lambda = match solve_affine_minimizer(&corral, &unique) {
                Some(l) => l,
                None => {
                    let (_, c, w) = best.unwrap();
                    return Err(MinNormError::NoConvergence {
                        iterations: major,
                        best: finish(&c, &w),
                    });
                }
            };
            if lambda.iter().all(|&l| l > WEIGHT_EPS) {
                weights = lambda;
                break;
            }
            // largest step toward lambda keeping all weights nonnegative
            let mut theta = 1.0;
            let mut hit = None;
            for (i, (&w, &l)) in weights.iter().zip(&lambda).enumerate() {
                if l <= WEIGHT_EPS {
                    let t = w / (w - l);
                    if t < theta {
                        theta = t;
                        hit = Some(i);
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (w, &l) in weights.iter_mut().zip(&lambda) {
                *w += theta * (l - *w);
            }
            if let Some(i) = hit {
                weights[i] = 0.0;
            }
            let mut idx = 0;
            let before = corral.len();
            while idx < corral.len() {
                if weights[idx] <= WEIGHT_EPS {
                    corral.remove(idx);
                    weights.remove(idx);
                } else {
                    idx += 1;
                }
            }
            if corral.is_empty() || corral.len() == before {
                // theta rounding failed to shrink the corral; stall
                let (_, c, w) = best.unwrap();
                return Err(MinNormError::NoConvergence {
                    iterations: major,
                    best: finish(&c, &w),
                });
            }
            let sum: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= sum;
            }
        }
    }

    let (_, c, w) = best.unwrap();
    Err(MinNormError::NoConvergence {
        iterations: max_major,
        best: finish(&c, &w),
    })
}

/// Affine minimizer weights over the corral: solve
/// `[[Gram, 1], [1ᵀ, 0]] · [λ; μ] = [0; 1]` by Gaussian elimination with
/// partial pivoting. `None` when the system is numerically singular.
fn solve_affine_minimizer(corral: &[usize], unique: &[&Vector]) -> Option<Vec<f64>> {
    let m = corral.len();
    let n = m + 1;
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for r in 0..m {
        for c in 0..m {
            a[r][c] = unique[corral[r]].dot(unique[corral[c]]);
        }
        a[r][m] = 1.0;
        a[r][n] = 0.0;
    }
    for c in 0..m {
        a[m][c] = 1.0;
    }
    a[m][n] = 1.0;

    let scale = a
        .iter()
        .flat_map(|row| row.iter().take(n))
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][n] / a[r][r]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(coords: &[f64]) -> Vector {
        Vector(coords.to_vec())
    }

    #[test]
    fn combination_symmetry() {
        let (lambda, out) = min_norm_combination(&v(&[1.0, 0.0]), &v(&[0.0, 1.0]));
        assert!((lambda - 0.5).abs() < 1e-15);
        assert!(out.dist(&v(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn combination_interior_zero() {
        let (lambda, out) = min_norm_combination(&v(&[2.0, 0.0]), &v(&[-1.0, 0.0]));
        assert!((lambda - 1.0 / 3.0).abs() < 1e-15);
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn combination_degenerate_equal_inputs() {
        let g = v(&[1.0, 1.0]);
        let (lambda, out) = min_norm_combination(&g, &g);
        assert_eq!(lambda, 1.0);
        assert_eq!(out, g);
    }

    #[test]
    fn combination_never_beats_either_endpoint() {
        let g = v(&[3.0, -1.0, 0.5]);
        let q = v(&[0.25, 2.0, -4.0]);
        let (_, out) = min_norm_combination(&g, &q);
        assert!(out.norm() <= g.norm() + 1e-15);
        assert!(out.norm() <= q.norm() + 1e-15);
    }

    #[test]
    fn point_simplex_symmetry() {
        let gs = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        let got = min_norm_point(&gs).unwrap();
        for w in &got.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!((got.norm - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn point_two_active_vertices() {
        let gs = [v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
        let got = min_norm_point(&gs).unwrap();
        assert!(got.point.dist(&v(&[0.5, 0.5])) < 1e-9);
        assert!((got.norm - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(got.weights[2].abs() < 1e-9);
    }

    #[test]
    fn point_singleton() {
        let got = min_norm_point(&[v(&[5.0, 5.0])]).unwrap();
        assert_eq!(got.point, v(&[5.0, 5.0]));
        assert_eq!(got.weights, vec![1.0]);
    }

    #[test]
    fn point_folds_duplicates_onto_first_copy() {
        let gs = [v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[1.0, 0.0])];
        let got = min_norm_point(&gs).unwrap();
        assert!(got.norm < 1e-9);
        assert_eq!(got.weights[2], 0.0);
        assert!((got.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_zero_in_hull_of_opposites() {
        let gs = [v(&[2.0, 0.0]), v(&[-1.0, 0.0])];
        let got = min_norm_point(&gs).unwrap();
        assert!(got.norm < 1e-9);
        assert!((got.weights[0] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn point_empty_and_mismatched_inputs() {
        assert!(matches!(min_norm_point(&[]), Err(MinNormError::Empty)));
        let gs = [v(&[1.0]), v(&[1.0, 2.0])];
        assert!(matches!(
            min_norm_point(&gs),
            Err(MinNormError::DimensionMismatch)
        ));
    }

    #[test]
    fn point_beats_every_input_and_random_combos() {
        let mut rng = crate::rng::RngStream::new(77, 0);
        for trial in 0..50 {
            let n = 2 + rng.index(5);
            let dim = 1 + rng.index(4);
            let gs: Vec<Vector> = (0..n)
                .map(|_| rng.standard_normal_vector(dim))
                .collect();
            let got = match min_norm_point(&gs) {
                Ok(r) => r,
                Err(MinNormError::NoConvergence { best, .. }) => best,
                Err(e) => panic!("trial {trial}: {e}"),
            };
            for g in &gs {
                assert!(got.norm <= g.norm() + 1e-8);
            }
            for _ in 0..20 {
                let w = rng.simplex_weights(n);
                let mut combo = Vector::zeros(dim);
                for (wi, g) in w.iter().zip(&gs) {
                    combo.axpy(*wi, g);
                }
                assert!(got.norm <= combo.norm() + 1e-8);
            }
            // the reported weights reproduce the reported point
            let mut recomb = Vector::zeros(dim);
            for (wi, g) in got.weights.iter().zip(&gs) {
                recomb.axpy(*wi, g);
            }
            assert!(recomb.dist(&got.point) < 1e-10);
        }
    }

    /// Exhaustive face enumeration: the projection of the origin onto the
    /// hull lies in some face's relative interior, so checking the affine
    /// minimizer of every subset (keeping the feasible ones) is exact.
    fn exact_min_norm_by_faces(gs: &[Vector]) -> f64 {
        let n = gs.len();
        let dim = gs[0].dim();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let m = subset.len();
            // solve [[Gram,1],[1ᵀ,0]] [λ;μ] = [0;1] by elimination
            let k = m + 1;
            let mut a = vec![vec![0.0f64; k + 1]; k];
            for r in 0..m {
                for c in 0..m {
                    a[r][c] = gs[subset[r]].dot(&gs[subset[c]]);
                }
                a[r][m] = 1.0;
            }
            for c in 0..m {
                a[m][c] = 1.0;
            }
            a[m][k] = 1.0;
            let mut singular = false;
            for col in 0..k {
                let piv = (col..k)
                    .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
                    .unwrap();
                if a[piv][col].abs() < 1e-12 {
                    singular = true;
                    break;
                }
                a.swap(col, piv);
                for r in 0..k {
                    if r != col {
                        let f = a[r][col] / a[col][col];
                        for c in col..=k {
                            a[r][c] -= f * a[col][c];
                        }
                    }
                }
            }
            if singular {
                continue;
            }
            let lambda: Vec<f64> = (0..m).map(|r| a[r][k] / a[r][r]).collect();
            if lambda.iter().any(|&l| l < -1e-12) {
                continue;
            }
            let mut p = Vector::zeros(dim);
            for (&l, &j) in lambda.iter().zip(&subset) {
                p.axpy(l, &gs[j]);
            }
            best = best.min(p.norm());
        }
        best
    }

    #[test]
    fn point_matches_exact_face_enumeration() {
        let mut rng = crate::rng::RngStream::new(2024, 1);
        for _ in 0..60 {
            let n = 2 + rng.index(3); // up to 4 vectors
            let dim = 1 + rng.index(3); // up to 3 dims
            let gs: Vec<Vector> = (0..n)
                .map(|_| rng.standard_normal_vector(dim))
                .collect();
            let exact = exact_min_norm_by_faces(&gs);
            let got = match min_norm_point(&gs) {
                Ok(r) => r,
                Err(MinNormError::NoConvergence { best, .. }) => best,
                Err(e) => panic!("{e}"),
            };
            assert!(
                (got.norm - exact).abs() < 1e-8,
                "wolfe {} vs exact {}",
                got.norm,
                exact
            );
        }
    }

    #[test]
    fn point_also_dominates_a_coarse_simplex_grid() {
        let gs = [v(&[0.9, 0.4]), v(&[-0.3, 1.1]), v(&[0.2, -0.8])];
        let got = min_norm_point(&gs).unwrap();
        let steps = 60;
        let mut grid_best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let k = steps - i - j;
                let w = [
                    i as f64 / steps as f64,
                    j as f64 / steps as f64,
                    k as f64 / steps as f64,
                ];
                let mut p = Vector::zeros(2);
                for (wi, g) in w.iter().zip(&gs) {
                    p.axpy(*wi, g);
                }
                grid_best = grid_best.min(p.norm());
            }
        }
        assert!(got.norm <= grid_best + 1e-12);
    }
}
