//! Element definitions and the per-tetrahedron nodal basis.
//!
//! Normal-derivative functionals are not affine invariant, so the nodal
//! basis is recomputed on each physical tetrahedron by a dense solve.

pub mod closed_form;
pub mod dofs;
pub mod family;

use std::collections::BTreeSet;

pub use dofs::{
    dof_apply, dof_apply_fn, dof_list, DofEvaluator, DofKind, DofSpec, NormalScaling,
    Orientation, SmoothFunction,
};
pub use family::{closed_form_ndofs, enrichment_span, shape_span, ElementFamily};

use crate::barypoly::{normalized_moment, BaryPoly, Entity, MultiIndex4};
use crate::error::{Error, Result};
use crate::geometry::SimplexGeometry;
use crate::linalg::{invert, invert_equilibrated, matmul, Matrix};
use crate::scalar::Scalar;

/// Largest accepted 1-norm condition estimate of the DOF matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct ReferenceElement<S: Scalar> {
    pub family: ElementFamily,
    pub geometry: SimplexGeometry<S>,
    pub dofs: Vec<DofSpec>,
    pub span: Vec<BaryPoly<S>>,
    pub scaling: NormalScaling,
    /// Monomials occurring in the span; the nodal basis is stored over them.
    pub monomials: Vec<MultiIndex4>,
    /// `dof_matrix[i][j] = dofs[i](span[j])`.
    pub dof_matrix: Matrix<S>,
    /// `nodal[j][k]`: coefficient of `monomials[k]` in the j-th nodal function.
    pub nodal: Matrix<S>,
    /// Condition estimate of the row-equilibrated DOF matrix.
    pub condition: f64,
}

/// Builds the nodal basis of `family` on the tetrahedron `g`.
pub fn build_reference_element<S: Scalar>(
    family: ElementFamily,
    g: &SimplexGeometry<S>,
    orient: &Orientation,
    normal_signs: [i8; 4],
    scaling: NormalScaling,
) -> Result<ReferenceElement<S>> {
    let span = shape_span(family, g)?;
    let dofs = dof_list(family, orient, normal_signs);
    if span.len() != dofs.len() {
        return Err(Error::DimensionMismatch {
            expected: dofs.len(),
            found: span.len(),
        });
    }
    let monomials: Vec<MultiIndex4> = span
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| *m))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // span coefficients, monomial x span
    let coeffs: Matrix<S> = monomials
        .iter()
        .map(|m| span.iter().map(|p| p.coeff(m)).collect())
        .collect();
    let eval = DofEvaluator::new(g, scaling)?;
    let functionals: Matrix<S> = dofs
        .iter()
        .map(|d| monomials.iter().map(|m| eval.on_monomial(d, m)).collect())
        .collect();
    let dof_matrix = matmul(&functionals, &coeffs);

    let float: Matrix<f64> = dof_matrix
        .iter()
        .map(|r| r.iter().map(|x| x.to_f64()).collect())
        .collect();
    let (inverse, condition) = if S::EXACT {
        let inv = invert(&dof_matrix)?;
        let cond = invert_equilibrated(&float).map(|(_, c)| c).unwrap_or(f64::INFINITY);
        (inv, cond)
    } else {
        let (inv, cond) = invert_equilibrated(&float)?;
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditioned(cond));
        }
        let inv = inv
            .into_iter()
            .map(|r| r.into_iter().map(S::from_f64).collect())
            .collect();
        (inv, cond)
    };
    // nodal function j = sum_s span_s inverse[s][j]
    let nodal_by_monomial = matmul(&coeffs, &inverse);
    let nodal = crate::linalg::transpose(&nodal_by_monomial);
    Ok(ReferenceElement {
        family,
        geometry: g.clone(),
        dofs,
        span,
        scaling,
        monomials,
        dof_matrix,
        nodal,
        condition,
    })
}

/// Values and Cartesian derivatives of all nodal functions at a point set.
#[derive(Clone, Debug, Default)]
pub struct Tabulation {
    pub npts: usize,
    pub ndofs: usize,
    /// `values[q * ndofs + j]`
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 3]>,
    /// Hessian entries in the order xx, yy, zz, xy, xz, yz.
    pub hessians: Vec<[f64; 6]>,
}

const HESS_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Frobenius product of two symmetric Hessians stored as `[f64; 6]`.
pub fn hessian_dot(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
}

impl<S: Scalar> ReferenceElement<S> {
    pub fn ndofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn nodal_basis(&self) -> Vec<BaryPoly<S>> {
        self.nodal
            .iter()
            .map(|row| {
                BaryPoly::from_terms(self.monomials.iter().cloned().zip(row.iter().cloned()))
            })
            .collect()
    }

    /// `[dofs[i](phi_j)]`, the identity up to rounding.
    pub fn duality_matrix(&self) -> Result<Matrix<S>> {
        let eval = DofEvaluator::new(&self.geometry, self.scaling)?;
        let functionals: Matrix<S> = self
            .dofs
            .iter()
            .map(|d| self.monomials.iter().map(|m| eval.on_monomial(d, m)).collect())
            .collect();
        Ok(matmul(&functionals, &crate::linalg::transpose(&self.nodal)))
    }

    /// Max `|dofs[i](phi_j) - delta_ij|`.
    pub fn duality_error(&self) -> Result<f64> {
        let m = self.duality_matrix()?;
        let mut worst = 0.0f64;
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((x.to_f64() - target).abs());
            }
        }
        Ok(worst)
    }

    /// Exact local stiffness `int_T D^2 phi_i : D^2 phi_j`.
    pub fn local_stiffness(&self) -> Matrix<S> {
        let km = monomial_stiffness(&self.monomials, &self.geometry);
        let left = matmul(&self.nodal, &km);
        matmul(&left, &crate::linalg::transpose(&self.nodal))
    }
}

/// Second-derivative terms of `lambda^mu`: `(a, b, coefficient, exponent)`.
fn hessian_terms(mu: &MultiIndex4) -> Vec<(usize, usize, i64, MultiIndex4)> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            let ea = mu.0[a] as i64;
            if ea == 0 {
                continue;
            }
            let mut e = *mu;
            e.0[a] -= 1;
            let eb = e.0[b] as i64;
            if eb == 0 {
                continue;
            }
            e.0[b] -= 1;
            out.push((a, b, ea * eb, e));
        }
    }
    out
}

/// `int_T D^2 lambda^mu : D^2 lambda^nu` for all pairs of monomials.
pub fn monomial_stiffness<S: Scalar>(monos: &[MultiIndex4], g: &SimplexGeometry<S>) -> Matrix<S> {
    let gram: [[S; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| g.gram(i, j)));
    let terms: Vec<_> = monos.iter().map(hessian_terms).collect();
    let n = monos.len();
    let mut out = crate::linalg::zeros::<S>(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = S::zero();
            for (a, b, c1, e1) in &terms[i] {
                for (c, d, c2, e2) in &terms[j] {
                    let w = gram[*a][*c].clone() * gram[*b][*d].clone();
                    if w.is_zero() {
                        continue;
                    }
                    let mean: S = normalized_moment(&e1.plus(e2), &Entity::Cell)
                        .expect("cell supports every monomial");
                    acc = acc + w * S::from_i64(c1 * c2) * mean;
                }
            }
            let v = acc * g.volume().clone();
            out[i][j] = v.clone();
            out[j][i] = v;
        }
    }
    out
}

impl ReferenceElement<f64> {
    /// Nodal function values, gradients and Hessians at barycentric points.
    pub fn tabulate(&self, points: &[[f64; 4]]) -> Tabulation {
        let nm = self.monomials.len();
        let nd = self.ndofs();
        let maxdeg = self.monomials.iter().map(|m| m.degree()).max().unwrap_or(0) as usize;
        let grad: [[f64; 3]; 4] = std::array::from_fn(|i| *self.geometry.grad_lambda(i));
        let mut tab = Tabulation {
            npts: points.len(),
            ndofs: nd,
            values: vec![0.0; points.len() * nd],
            grads: vec![[0.0; 3]; points.len() * nd],
            hessians: vec![[0.0; 6]; points.len() * nd],
        };
        let mut mono_val = vec![0.0; nm];
        let mut mono_grad = vec![[0.0; 3]; nm];
        let mut mono_hess = vec![[0.0; 6]; nm];
        for (q, w) in points.iter().enumerate() {
            let mut pw = vec![[1.0f64; 4]; maxdeg + 1];
            for k in 1..=maxdeg {
                for i in 0..4 {
                    pw[k][i] = pw[k - 1][i] * w[i];
                }
            }
            let power = |e: &[u32; 4]| -> f64 { (0..4).map(|i| pw[e[i] as usize][i]).product() };
            for (k, mu) in self.monomials.iter().enumerate() {
                let e = mu.0;
                mono_val[k] = power(&e);
                let mut dl = [0.0; 4];
                let mut d2 = [[0.0; 4]; 4];
                for a in 0..4 {
                    if e[a] == 0 {
                        continue;
                    }
                    let mut ea = e;
                    ea[a] -= 1;
                    dl[a] = e[a] as f64 * power(&ea);
                    for b in 0..4 {
                        if ea[b] == 0 {
                            continue;
                        }
                        let mut eab = ea;
                        eab[b] -= 1;
                        d2[a][b] = e[a] as f64 * ea[b] as f64 * power(&eab);
                    }
                }
                let mut gcart = [0.0; 3];
                for a in 0..4 {
                    for x in 0..3 {
                        gcart[x] += dl[a] * grad[a][x];
                    }
                }
                let mut h = [0.0; 6];
                for (slot, (x, y)) in HESS_PAIRS.iter().enumerate() {
                    let mut s = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            if d2[a][b] != 0.0 {
                                s += d2[a][b] * grad[a][*x] * grad[b][*y];
                            }
                        }
                    }
                    h[slot] = s;
                }
                mono_grad[k] = gcart;
                mono_hess[k] = h;
            }
            for (j, row) in self.nodal.iter().enumerate() {
                let mut v = 0.0;
                let mut gsum = [0.0; 3];
                let mut hsum = [0.0; 6];
                for k in 0..nm {
                    let c = row[k];
                    if c == 0.0 {
                        continue;
                    }
                    v += c * mono_val[k];
                    for x in 0..3 {
                        gsum[x] += c * mono_grad[k][x];
                    }
                    for s in 0..6 {
                        hsum[s] += c * mono_hess[k][s];
                    }
                }
                tab.values[q * nd + j] = v;
                tab.grads[q * nd + j] = gsum;
                tab.hessians[q * nd + j] = hsum;
            }
        }
        tab
    }

    /// Value of `sum_j coeffs[j] phi_j` at barycentric weights `w`.
    pub fn eval_combination(&self, coeffs: &[f64], w: &[f64; 4]) -> f64 {
        let tab = self.tabulate(&[*w]);
        tab.values.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }
}

/// DOF values of a smooth function (unit normals), using quadrature of
/// the given degree.
pub fn interpolate(
    f: &dyn SmoothFunction,
    elem: &ReferenceElement<f64>,
    degree: usize,
) -> Result<Vec<f64>> {
    if elem.scaling != NormalScaling::Unit {
        return Err(Error::Unsupported(
            "interpolation needs unit-normal functionals".into(),
        ));
    }
    elem.dofs
        .iter()
        .map(|d| dof_apply_fn(d, f, &elem.geometry, degree))
        .collect()
}

#[cfg(test)]
mod tests;
