//! Collapsed-coordinate Gauss rules on edges, triangles and tetrahedra.
//!
//! The square/cube is mapped onto the simplex by the Duffy transform; the
//! Jacobian factors `(1-u)^a` are absorbed into Gauss-Jacobi weights, so an
//! `n`-point rule per direction is exact to degree `2n-1` on the simplex.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::barypoly::{BaryPoly, Entity};
use crate::error::{Error, Result};
use crate::geometry::SimplexGeometry;

pub const MAX_DEGREE: usize = 30;

#[derive(Clone, Debug)]
pub struct QuadRule {
    pub dim: usize,
    /// Barycentric coordinates of each point on the reference entity;
    /// only the first `dim + 1` entries are meaningful.
    pub points: Vec<[f64; 4]>,
    /// Weights summing to the reference measure (1, 1/2, 1/6).
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Gauss-Jacobi nodes and weights on `[0, 1]` for the weight `(1-u)^alpha`.
fn gauss_jacobi01(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let beta = 0.0;
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            let off = (4.0 * m * (m + alpha) * (m + beta) * (m + ab)
                / (s * s * (s + 1.0) * (s - 1.0)))
                .sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 2f64.powf(ab + 1.0) / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    for (x, w) in pairs.iter_mut() {
        polish(n, alpha, x, w);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = 2f64.powf(alpha + 1.0);
    pairs
        .into_iter()
        .map(|(x, w)| ((1.0 + x) / 2.0, w / scale))
        .unzip()
}

/// Jacobi polynomial `P_n^{(alpha,0)}(x)` and its derivative.
fn jacobi(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let beta = 0.0;
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + alpha + beta;
        let a1 = 2.0 * k * (k + alpha + beta) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let c = 2.0 * nf + alpha + beta;
    let dp = (nf * (alpha - beta - c * x) * p1 + 2.0 * (nf + alpha) * (nf + beta) * p0)
        / (c * (1.0 - x * x));
    (p1, dp)
}

/// Newton refinement of a node; the weight is recomputed from the
/// derivative formula when it is well defined.
fn polish(n: usize, alpha: f64, x: &mut f64, w: &mut f64) {
    for _ in 0..3 {
        let (p, dp) = jacobi(n, alpha, *x);
        if dp == 0.0 || !dp.is_finite() {
            return;
        }
        *x -= p / dp;
    }
    let (_, dp) = jacobi(n, alpha, *x);
    // with beta = 0 the Gamma-function prefactor of the classical formula is 1
    let cand = 2f64.powf(alpha + 1.0) / ((1.0 - *x * *x) * dp * dp);
    if cand.is_finite() && (cand - *w).abs() < 1e-6 * w.abs() {
        *w = cand;
    }
}

fn build(dim: usize, degree: usize) -> QuadRule {
    let n = (degree + 2) / 2;
    let (mut points, mut weights) = (Vec::new(), Vec::new());
    match dim {
        1 => {
            let (x, w) = gauss_jacobi01(n, 0.0);
            for (u, wu) in x.iter().zip(&w) {
                points.push([1.0 - u, *u, 0.0, 0.0]);
                weights.push(*wu);
            }
        }
        2 => {
            let (xu, wu) = gauss_jacobi01(n, 1.0);
            let (xv, wv) = gauss_jacobi01(n, 0.0);
            for (u, a) in xu.iter().zip(&wu) {
                for (v, b) in xv.iter().zip(&wv) {
                    let x1 = *u;
                    let x2 = v * (1.0 - u);
                    points.push([1.0 - x1 - x2, x1, x2, 0.0]);
                    weights.push(a * b);
                }
            }
        }
        _ => {
            let (xu, wu) = gauss_jacobi01(n, 2.0);
            let (xv, wv) = gauss_jacobi01(n, 1.0);
            let (xw, ww) = gauss_jacobi01(n, 0.0);
            for (u, a) in xu.iter().zip(&wu) {
                for (v, b) in xv.iter().zip(&wv) {
                    for (w, c) in xw.iter().zip(&ww) {
                        let x1 = *u;
                        let x2 = v * (1.0 - u);
                        let x3 = w * (1.0 - u) * (1.0 - v);
                        points.push([1.0 - x1 - x2 - x3, x1, x2, x3]);
                        weights.push(a * b * c);
                    }
                }
            }
        }
    }
    QuadRule {
        dim,
        points,
        weights,
        exactness: 2 * n - 1,
    }
}

/// A rule on the reference `dim`-simplex exact to at least `degree`.
/// Rules are cached and shared.
pub fn rule_for_degree(dim: usize, degree: usize) -> Result<Arc<QuadRule>> {
    if degree > MAX_DEGREE {
        return Err(Error::QuadratureDegree {
            degree,
            max: MAX_DEGREE,
        });
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::RuleDimension { rule: dim, entity: 3 });
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<QuadRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().expect("quadrature cache poisoned");
    Ok(map
        .entry((dim, degree))
        .or_insert_with(|| Arc::new(build(dim, degree)))
        .clone())
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Points expressed as barycentric coordinates of the whole tet,
    /// placed on the given sub-entity.
    pub fn points_on(&self, entity: &Entity) -> Result<Vec<[f64; 4]>> {
        if entity.dim() != self.dim {
            return Err(Error::RuleDimension {
                rule: self.dim,
                entity: entity.dim(),
            });
        }
        let verts = entity.vertices();
        Ok(self
            .points
            .iter()
            .map(|p| {
                let mut w = [0.0; 4];
                for (k, &v) in verts.iter().enumerate() {
                    w[v] = p[k];
                }
                w
            })
            .collect())
    }

    /// Weights rescaled to the physical entity (sum = its measure).
    pub fn physical_weights(&self, entity: &Entity, g: &SimplexGeometry<f64>) -> Result<Vec<f64>> {
        let measure = entity.measure(g)?;
        let reference = match self.dim {
            1 => 1.0,
            2 => 0.5,
            _ => 1.0 / 6.0,
        };
        let ratio = measure / reference;
        Ok(self.weights.iter().map(|w| w * ratio).collect())
    }

    /// Integral of a function of the physical point over the entity.
    pub fn integrate(
        &self,
        f: impl Fn([f64; 3]) -> f64,
        g: &SimplexGeometry<f64>,
        entity: &Entity,
    ) -> Result<f64> {
        let pts = self.points_on(entity)?;
        let w = self.physical_weights(entity, g)?;
        Ok(pts.iter().zip(&w).map(|(p, wi)| wi * f(g.point(p))).sum())
    }

    /// Integral of a barycentric polynomial over the entity.
    pub fn integrate_poly(
        &self,
        p: &BaryPoly<f64>,
        g: &SimplexGeometry<f64>,
        entity: &Entity,
    ) -> Result<f64> {
        let pts = self.points_on(entity)?;
        let w = self.physical_weights(entity, g)?;
        Ok(pts
            .iter()
            .zip(&w)
            .map(|(p_i, wi)| wi * p.eval_unchecked(p_i))
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barypoly::{exact_moment, monomials_of_degree, MultiIndex4};

    fn reference() -> SimplexGeometry<f64> {
        SimplexGeometry::reference()
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for (dim, m) in [(1, 1.0), (2, 0.5), (3, 1.0 / 6.0)] {
            for d in [0, 1, 5, 12, 30] {
                let r = rule_for_degree(dim, d).unwrap();
                let s: f64 = r.weights.iter().sum();
                assert!((s - m).abs() < 1e-14, "dim {dim} degree {d}: {s}");
                assert!(r.weights.iter().all(|w| *w > 0.0));
                assert!(r.exactness >= d);
            }
        }
    }

    #[test]
    fn exact_on_monomials_up_to_twenty() {
        let g = reference();
        let entities = [Entity::Edge([0, 1]), Entity::face(3), Entity::Cell];
        for entity in &entities {
            for d in 0..=20u32 {
                let rule = rule_for_degree(entity.dim(), d as usize).unwrap();
                for mi in monomials_of_degree(d) {
                    if !entity.supports(&mi) {
                        continue;
                    }
                    let exact = exact_moment(&mi, entity, &g).unwrap();
                    let p = BaryPoly::monomial(mi, 1.0);
                    let num = rule.integrate_poly(&p, &g, entity).unwrap();
                    assert!(
                        (num - exact).abs() <= 1e-13 * exact.abs(),
                        "{entity} {mi:?}: {num} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn spec_examples() {
        let g = reference();
        let r = rule_for_degree(3, 7).unwrap();
        let b = BaryPoly::monomial(MultiIndex4([1, 1, 1, 1]), 1.0);
        assert!((r.integrate_poly(&b, &g, &Entity::Cell).unwrap() - 1.0 / 5040.0).abs() < 1e-14);

        let r = rule_for_degree(2, 10).unwrap();
        let p = BaryPoly::monomial(MultiIndex4([5, 5, 0, 0]), 1.0);
        let expect = 2.0 * 120.0 * 120.0 / 479001600.0 * g.face_area(3).unwrap();
        let got = r.integrate_poly(&p, &g, &Entity::face(3)).unwrap();
        assert!((got - expect).abs() < 1e-13 * expect);

        let r = rule_for_degree(3, 6).unwrap();
        let b2 = BaryPoly::<f64>::face_bubble(3).pow(2);
        let expect = 8.0 / 362880.0;
        assert!((r.integrate_poly(&b2, &g, &Entity::Cell).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn degree_out_of_range() {
        assert!(matches!(
            rule_for_degree(3, 31),
            Err(Error::QuadratureDegree { .. })
        ));
        let r = rule_for_degree(2, 3).unwrap();
        assert!(matches!(
            r.points_on(&Entity::Cell),
            Err(Error::RuleDimension { .. })
        ));
    }

    #[test]
    fn physical_constant() {
        let g = SimplexGeometry::<f64>::from_f64([
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 3.0, 0.0],
            [0.0, 0.0, 1.5],
        ])
        .unwrap();
        let r = rule_for_degree(3, 0).unwrap();
        let v = r.integrate(|_| 1.0, &g, &Entity::Cell).unwrap();
        assert!((v - 1.5).abs() < 1e-14);
    }
}
