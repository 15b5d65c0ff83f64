//! Moment degrees of freedom and their evaluation.

use crate::barypoly::{compositions, BaryPoly, Entity, MultiIndex4};
use crate::error::Result;
use crate::geometry::{face_vertices, SimplexGeometry, EDGES};
use crate::quadrature::rule_for_degree;
use crate::scalar::Scalar;

use super::family::ElementFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DofKind {
    /// `(1/|e|) int_e v q`
    Edge,
    /// `(1/|F|) int_F v q`
    Face,
    /// `(1/|T|) int_T v q`
    Cell,
    /// `(1/|F|) int_F d_n v q`
    Normal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DofSpec {
    pub kind: DofKind,
    /// Local edge id (0..6), face id (0..4, face opposite that vertex), or 0.
    pub entity: usize,
    /// Ordered vertex tuple in which the weight monomial is expressed.
    pub vertices: Vec<usize>,
    pub monomial: MultiIndex4,
    /// +1 for the outward normal, -1 for the inward one.
    pub normal_sign: i8,
}

impl DofSpec {
    pub fn support(&self) -> Entity {
        match self.kind {
            DofKind::Edge => Entity::Edge(EDGES[self.entity]),
            DofKind::Face | DofKind::Normal => Entity::face(self.entity),
            DofKind::Cell => Entity::Cell,
        }
    }

    pub fn weight<S: Scalar>(&self) -> BaryPoly<S> {
        BaryPoly::monomial(self.monomial, S::one())
    }
}

/// How normal-derivative moments are normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum NormalScaling {
    /// The moment of the true unit-normal derivative.
    #[default]
    Unit,
    /// The moment multiplied by the height `r_m`; rational on any rational
    /// tet, which the exact checks rely on.
    Height,
}

/// Vertex order used to express entity monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Edges ascending, face `m` as `(m+1, m+2, m+3) mod 4`.
    Cyclic,
    /// Every entity in ascending local order.
    Ascending,
    /// Every entity ascending by the given global vertex ids.
    Global([usize; 4]),
}

impl Orientation {
    pub fn edge(&self, e: usize) -> [usize; 2] {
        let [a, b] = EDGES[e];
        match self {
            Orientation::Global(ids) if ids[b] < ids[a] => [b, a],
            _ => [a, b],
        }
    }

    pub fn face(&self, m: usize) -> [usize; 3] {
        match self {
            Orientation::Cyclic => [(m + 1) % 4, (m + 2) % 4, (m + 3) % 4],
            Orientation::Ascending => face_vertices(m),
            Orientation::Global(ids) => {
                let mut f = face_vertices(m);
                f.sort_by_key(|&v| ids[v]);
                f
            }
        }
    }
}

/// Weight exponents on an edge for moments of degree `d`.
pub fn edge_indices(d: usize) -> Vec<[u32; 2]> {
    match d {
        1 => vec![[1, 0], [0, 1]],
        2 => vec![[2, 0], [1, 1], [0, 2]],
        3 => vec![[3, 0], [0, 3], [2, 1], [1, 2]],
        _ => compositions(d as u32, 2)
            .into_iter()
            .map(|c| [c[0], c[1]])
            .collect(),
    }
}

/// Weight exponents on a face for moments of degree `d`.
pub fn face_indices(d: usize) -> Vec<[u32; 3]> {
    match d {
        1 => vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        2 => vec![
            [2, 0, 0],
            [0, 2, 0],
            [0, 0, 2],
            [0, 1, 1],
            [1, 0, 1],
            [1, 1, 0],
        ],
        3 => vec![
            [3, 0, 0],
            [0, 3, 0],
            [0, 0, 3],
            [2, 1, 0],
            [2, 0, 1],
            [0, 2, 1],
            [1, 2, 0],
            [1, 0, 2],
            [0, 1, 2],
            [1, 1, 1],
        ],
        _ => compositions(d as u32, 3)
            .into_iter()
            .map(|c| [c[0], c[1], c[2]])
            .collect(),
    }
}

/// Weight exponents in the cell for moments of degree `d`.
pub fn cell_indices(d: usize) -> Vec<[u32; 4]> {
    compositions(d as u32, 4)
        .into_iter()
        .map(|c| [c[0], c[1], c[2], c[3]])
        .collect()
}

/// The ordered DOF list: edge, face, cell, then normal moments.
pub fn dof_list(family: ElementFamily, orient: &Orientation, normal_signs: [i8; 4]) -> Vec<DofSpec> {
    let l = family.ell();
    let mut out = Vec::with_capacity(family.ndofs());
    for e in 0..6 {
        let verts = orient.edge(e);
        for idx in edge_indices(l - 2) {
            out.push(DofSpec {
                kind: DofKind::Edge,
                entity: e,
                vertices: verts.to_vec(),
                monomial: MultiIndex4::on_vertices(&verts, &idx),
                normal_sign: 1,
            });
        }
    }
    for m in 0..4 {
        let verts = orient.face(m);
        for idx in face_indices(l - 3) {
            out.push(DofSpec {
                kind: DofKind::Face,
                entity: m,
                vertices: verts.to_vec(),
                monomial: MultiIndex4::on_vertices(&verts, &idx),
                normal_sign: 1,
            });
        }
    }
    if l >= 4 {
        for idx in cell_indices(l - 4) {
            out.push(DofSpec {
                kind: DofKind::Cell,
                entity: 0,
                vertices: vec![0, 1, 2, 3],
                monomial: MultiIndex4(idx),
                normal_sign: 1,
            });
        }
    }
    for m in 0..4 {
        let verts = orient.face(m);
        for idx in face_indices(l - 2) {
            out.push(DofSpec {
                kind: DofKind::Normal,
                entity: m,
                vertices: verts.to_vec(),
                monomial: MultiIndex4::on_vertices(&verts, &idx),
                normal_sign: normal_signs[m],
            });
        }
    }
    out
}

/// Evaluates DOF functionals on polynomials for one geometry.
#[derive(Clone, Debug)]
pub struct DofEvaluator<S> {
    /// `normal[m][i]`: coefficient of `d/d lambda_i` in the (scaled)
    /// outward normal derivative on face `m`.
    normal: [[S; 4]; 4],
}

impl<S: Scalar> DofEvaluator<S> {
    pub fn new(g: &SimplexGeometry<S>, scaling: NormalScaling) -> Result<Self> {
        let mut normal: [[S; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
        for (m, row) in normal.iter_mut().enumerate() {
            let denom = match scaling {
                NormalScaling::Unit => g
                    .gram(m, m)
                    .sqrt_exact()
                    .ok_or(crate::Error::Irrational("face normal"))?,
                NormalScaling::Height => g.gram(m, m),
            };
            for (i, c) in row.iter_mut().enumerate() {
                *c = -g.gram(m, i) / denom.clone();
            }
        }
        Ok(Self { normal })
    }

    /// The functional applied to the monomial `lambda^mu`.
    pub fn on_monomial(&self, d: &DofSpec, mu: &MultiIndex4) -> S {
        let support = d.support();
        let ratio = |e: &MultiIndex4| -> S {
            if support.supports(e) {
                crate::barypoly::normalized_moment(e, &support).unwrap_or_else(|_| S::zero())
            } else {
                S::zero()
            }
        };
        match d.kind {
            DofKind::Edge | DofKind::Face | DofKind::Cell => ratio(&mu.plus(&d.monomial)),
            DofKind::Normal => {
                let mut acc = S::zero();
                for i in 0..4 {
                    let e = mu.0[i];
                    if e == 0 {
                        continue;
                    }
                    let mut reduced = *mu;
                    reduced.0[i] -= 1;
                    let m = ratio(&reduced.plus(&d.monomial));
                    if m.is_zero() {
                        continue;
                    }
                    acc = acc + self.normal[d.entity][i].clone() * S::from_i64(e as i64) * m;
                }
                if d.normal_sign < 0 {
                    -acc
                } else {
                    acc
                }
            }
        }
    }

    pub fn apply(&self, d: &DofSpec, p: &BaryPoly<S>) -> S {
        p.terms().fold(S::zero(), |acc, (mu, c)| {
            acc + c.clone() * self.on_monomial(d, mu)
        })
    }
}

/// One DOF applied to a polynomial.
pub fn dof_apply<S: Scalar>(
    d: &DofSpec,
    v: &BaryPoly<S>,
    g: &SimplexGeometry<S>,
    scaling: NormalScaling,
) -> Result<S> {
    Ok(DofEvaluator::new(g, scaling)?.apply(d, v))
}

/// A smooth function of the physical point, with its gradient.
pub trait SmoothFunction: Sync {
    fn value(&self, x: [f64; 3]) -> f64;
    fn gradient(&self, x: [f64; 3]) -> [f64; 3];
}

/// One DOF (unit normals) applied to a smooth function by quadrature of
/// the given degree.
pub fn dof_apply_fn(
    d: &DofSpec,
    f: &dyn SmoothFunction,
    g: &SimplexGeometry<f64>,
    degree: usize,
) -> Result<f64> {
    let support = d.support();
    let rule = rule_for_degree(support.dim(), degree)?;
    let points = rule.points_on(&support)?;
    let reference = match support.dim() {
        1 => 1.0,
        2 => 0.5,
        _ => 1.0 / 6.0,
    };
    let q = d.weight::<f64>();
    let normal = match d.kind {
        DofKind::Normal => {
            let n = g.outward_normal(d.entity)?;
            let s = d.normal_sign as f64;
            Some([n[0] * s, n[1] * s, n[2] * s])
        }
        _ => None,
    };
    let mut acc = 0.0;
    for (w, p) in rule.weights.iter().zip(&points) {
        let x = g.point(p);
        let val = match normal {
            Some(n) => {
                let gr = f.gradient(x);
                n[0] * gr[0] + n[1] * gr[1] + n[2] * gr[2]
            }
            None => f.value(x),
        };
        acc += w * val * q.eval_unchecked(p);
    }
    Ok(acc / reference)
}
