//! Global DOF numbering, element cache, assembly and weak-continuity checks.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::barypoly::{compositions, Entity};
use crate::element::{
    build_reference_element, hessian_dot, DofKind, ElementFamily, NormalScaling, Orientation,
    ReferenceElement, Tabulation,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mesh::{EntityMaps, Mesh};
use crate::quadrature::{rule_for_degree, QuadRule};

/// Tets per parallel work item; results are merged in batch order.
pub const BATCH: usize = 32;

#[derive(Clone, Debug)]
pub struct GlobalDofMap {
    pub family: ElementFamily,
    pub ndofs: usize,
    /// Local-to-global indices in local DOF order.
    pub tet_dofs: Vec<Vec<usize>>,
    /// -1 on normal-moment locals whose outward normal opposes the global one.
    pub tet_signs: Vec<Vec<f64>>,
    pub tet_orientation: Vec<Orientation>,
    pub boundary: Vec<bool>,
    pub free_index: Vec<Option<usize>>,
    pub free_dofs: Vec<usize>,
}

impl GlobalDofMap {
    pub fn nfree(&self) -> usize {
        self.free_dofs.len()
    }

    /// Full-length vector from free values (boundary entries zero).
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ndofs];
        for (k, &g) in self.free_dofs.iter().enumerate() {
            x[g] = free[k];
        }
        x
    }

    /// Signed local coefficients of tet `t` from a full-length vector.
    pub fn local(&self, t: usize, x: &[f64]) -> Vec<f64> {
        self.tet_dofs[t]
            .iter()
            .zip(&self.tet_signs[t])
            .map(|(g, s)| s * x[*g])
            .collect()
    }
}

fn ranks(ids: [usize; 4]) -> [usize; 4] {
    std::array::from_fn(|i| ids.iter().filter(|&&o| o < ids[i]).count())
}

pub fn build_dof_map(mesh: &Mesh, ents: &EntityMaps, family: ElementFamily) -> GlobalDofMap {
    let (eb, fb, cb, nb) = (
        family.edge_block(),
        family.face_block(),
        family.cell_block(),
        family.normal_block(),
    );
    let ne = ents.edges.len();
    let nf = ents.faces.len();
    let nt = mesh.tets.len();
    let face_off = ne * eb;
    let cell_off = face_off + nf * fb;
    let normal_off = cell_off + nt * cb;
    let ndofs = normal_off + nf * nb;

    let mut boundary = vec![false; ndofs];
    for (e, b) in ents.boundary_edges.iter().enumerate() {
        if *b {
            boundary[e * eb..(e + 1) * eb].iter_mut().for_each(|x| *x = true);
        }
    }
    for (f, b) in ents.boundary_faces.iter().enumerate() {
        if *b {
            boundary[face_off + f * fb..face_off + (f + 1) * fb]
                .iter_mut()
                .for_each(|x| *x = true);
            boundary[normal_off + f * nb..normal_off + (f + 1) * nb]
                .iter_mut()
                .for_each(|x| *x = true);
        }
    }

    let mut tet_dofs = Vec::with_capacity(nt);
    let mut tet_signs = Vec::with_capacity(nt);
    let mut tet_orientation = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut dofs = Vec::with_capacity(family.ndofs());
        let mut signs = Vec::with_capacity(family.ndofs());
        for e in 0..6 {
            let g = ents.tet_edges[t][e];
            dofs.extend(g * eb..(g + 1) * eb);
        }
        for m in 0..4 {
            let g = ents.tet_faces[t][m];
            dofs.extend(face_off + g * fb..face_off + (g + 1) * fb);
        }
        dofs.extend(cell_off + t * cb..cell_off + (t + 1) * cb);
        signs.resize(dofs.len(), 1.0);
        for m in 0..4 {
            let g = ents.tet_faces[t][m];
            dofs.extend(normal_off + g * nb..normal_off + (g + 1) * nb);
            let s = ents.normal_sign(t, m) as f64;
            signs.extend(std::iter::repeat(s).take(nb));
        }
        tet_dofs.push(dofs);
        tet_signs.push(signs);
        tet_orientation.push(Orientation::Global(ranks(mesh.tets[t])));
    }

    let mut free_index = vec![None; ndofs];
    let mut free_dofs = Vec::new();
    for (g, b) in boundary.iter().enumerate() {
        if !b {
            free_index[g] = Some(free_dofs.len());
            free_dofs.push(g);
        }
    }
    GlobalDofMap {
        family,
        ndofs,
        tet_dofs,
        tet_signs,
        tet_orientation,
        boundary,
        free_index,
        free_dofs,
    }
}

/// One congruence class of tets: translated copies with the same vertex
/// rank pattern share the nodal basis and local stiffness.
#[derive(Debug)]
pub struct ElementClass {
    pub element: ReferenceElement<f64>,
    pub stiffness: Matrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ElementCache {
    pub classes: Vec<Arc<ElementClass>>,
    pub tet_class: Vec<usize>,
}

type ClassKey = ([i64; 9], Orientation);

fn class_key(mesh: &Mesh, t: usize, orient: Orientation) -> ClassKey {
    let v = mesh.tet_vertices(t);
    let mut key = [0i64; 9];
    for i in 1..4 {
        for k in 0..3 {
            key[3 * (i - 1) + k] = ((v[i][k] - v[0][k]) * 1e9).round() as i64;
        }
    }
    (key, orient)
}

impl ElementCache {
    pub fn build(mesh: &Mesh, map: &GlobalDofMap) -> Result<Self> {
        let mut index: HashMap<ClassKey, usize> = HashMap::new();
        let mut reps = Vec::new();
        let mut tet_class = Vec::with_capacity(mesh.tets.len());
        for t in 0..mesh.tets.len() {
            let key = class_key(mesh, t, map.tet_orientation[t]);
            let next = reps.len();
            let c = *index.entry(key).or_insert_with(|| {
                reps.push(t);
                next
            });
            tet_class.push(c);
        }
        let classes = reps
            .par_iter()
            .map(|&t| {
                let wrap = |e: Error| Error::ElementBuild {
                    tet: t,
                    source: Box::new(e),
                };
                let g = mesh.geometry(t).map_err(wrap)?;
                let element = build_reference_element(
                    map.family,
                    &g,
                    &map.tet_orientation[t],
                    [1; 4],
                    NormalScaling::Unit,
                )
                .map_err(wrap)?;
                let stiffness = element.local_stiffness();
                Ok(Arc::new(ElementClass { element, stiffness }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { classes, tet_class })
    }

    pub fn class_of(&self, t: usize) -> &ElementClass {
        &self.classes[self.tet_class[t]]
    }

    /// Tabulates every class at the cell points of `rule`.
    pub fn tabulate_cells(&self, rule: &QuadRule) -> Vec<Tabulation> {
        self.classes
            .par_iter()
            .map(|c| c.element.tabulate(&rule.points))
            .collect()
    }
}

/// Symmetric system over the free DOFs in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Sums duplicate entries; order of summation follows triplet order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>, rhs: Vec<f64>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
            rhs,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.values[k] * x[self.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.col_idx[k] == r)
                    .map_or(0.0, |k| self.values[k])
            })
            .collect()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        cols.binary_search(&c)
            .map_or(0.0, |k| self.values[self.row_ptr[r] + k])
    }

    /// `max |K - K^T| / max |K|`.
    pub fn asymmetry(&self) -> f64 {
        let mut kmax = 0.0f64;
        let mut dmax = 0.0f64;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                kmax = kmax.max(self.values[k].abs());
                dmax = dmax.max((self.values[k] - self.get(c, r)).abs());
            }
        }
        if kmax == 0.0 {
            0.0
        } else {
            dmax / kmax
        }
    }

    /// Coordinate text export, 1-based "i j value".
    pub fn write_coordinate(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(out, "{} {} {:.17e}", r + 1, self.col_idx[k] + 1, self.values[k])?;
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Matrix<f64> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[r][self.col_idx[k]] = self.values[k];
            }
        }
        m
    }
}

/// Load quadrature degree `p + 8`.
pub fn load_degree(family: ElementFamily) -> usize {
    family.max_degree() + 8
}

/// Assembles `(D^2 u, D^2 v)_h = (f, v)` with clamped boundary DOFs removed.
pub fn assemble(
    mesh: &Mesh,
    map: &GlobalDofMap,
    cache: &ElementCache,
    f: &(dyn Fn([f64; 3]) -> f64 + Sync),
) -> Result<SparseSystem> {
    let rule = rule_for_degree(3, load_degree(map.family))?;
    let tabs = cache.tabulate_cells(&rule);
    let tets: Vec<usize> = (0..mesh.tets.len()).collect();
    let batches: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> = tets
        .par_chunks(BATCH)
        .map(|chunk| -> Result<_> {
            let mut trip = Vec::new();
            let mut load = Vec::new();
            for &t in chunk {
                let class = cache.class_of(t);
                let tab = &tabs[cache.tet_class[t]];
                let g = mesh.geometry(t)?;
                let w = rule.physical_weights(&Entity::Cell, &g)?;
                let nd = tab.ndofs;
                let mut fl = vec![0.0; nd];
                for (q, p) in rule.points.iter().enumerate() {
                    let fx = f(g.point(p)) * w[q];
                    for j in 0..nd {
                        fl[j] += fx * tab.values[q * nd + j];
                    }
                }
                let dofs = &map.tet_dofs[t];
                let signs = &map.tet_signs[t];
                for i in 0..nd {
                    let Some(fi) = map.free_index[dofs[i]] else {
                        continue;
                    };
                    load.push((fi, signs[i] * fl[i]));
                    for j in 0..nd {
                        if let Some(fj) = map.free_index[dofs[j]] {
                            trip.push((fi, fj, signs[i] * signs[j] * class.stiffness[i][j]));
                        }
                    }
                }
            }
            Ok((trip, load))
        })
        .collect::<Result<_>>()?;
    let n = map.nfree();
    let mut rhs = vec![0.0; n];
    let mut triplets = Vec::new();
    for (trip, load) in batches {
        triplets.extend(trip);
        for (i, v) in load {
            rhs[i] += v;
        }
    }
    Ok(SparseSystem::from_triplets(n, triplets, rhs))
}

/// Worst relative face-moment residuals over all trials.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HypothesisReport {
    /// Interior faces, `int_F [grad v] q`, q of degree l-2.
    pub interior_gradient: f64,
    /// Interior faces, `int_F [v] q`, q of degree l-3.
    pub interior_value: f64,
    /// Boundary faces, one-sided gradient moments.
    pub boundary_gradient: f64,
    /// Boundary faces, one-sided value moments.
    pub boundary_value: f64,
}

impl HypothesisReport {
    pub fn max(&self) -> f64 {
        self.interior_gradient
            .max(self.interior_value)
            .max(self.boundary_gradient)
            .max(self.boundary_value)
    }
}

/// Per (face, side) tabulation of the nodal basis at face points.
struct FaceSide {
    tet: usize,
    tab: Tabulation,
}

/// Moments `int_F v q` (value weights) and `int_F grad v q` (gradient
/// weights) of the element function with local coefficients `c`.
fn face_moments(
    side: &FaceSide,
    c: &[f64],
    weights: &[f64],
    qv: &[Vec<f64>],
    qg: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    let nd = side.tab.ndofs;
    let mut val = vec![0.0; qv.len()];
    let mut grad = vec![0.0; 3 * qg.len()];
    for (p, w) in weights.iter().enumerate() {
        let mut v = 0.0;
        let mut gr = [0.0; 3];
        for j in 0..nd {
            v += c[j] * side.tab.values[p * nd + j];
            let gj = side.tab.grads[p * nd + j];
            for k in 0..3 {
                gr[k] += c[j] * gj[k];
            }
        }
        for (a, q) in qv.iter().enumerate() {
            val[a] += w * v * q[p];
        }
        for (a, q) in qg.iter().enumerate() {
            for k in 0..3 {
                grad[3 * a + k] += w * gr[k] * q[p];
            }
        }
    }
    (val, grad)
}

/// Checks the weak continuity hypotheses on random discrete functions
/// (boundary DOFs zero).
pub fn check_hypotheses(
    mesh: &Mesh,
    ents: &EntityMaps,
    map: &GlobalDofMap,
    cache: &ElementCache,
    trials: usize,
    seed: u64,
) -> Result<HypothesisReport> {
    let family = map.family;
    let l = family.ell();
    let rule = rule_for_degree(2, family.max_degree() + l)?;
    // weights q on the reference face, in sorted global vertex order
    let monos = |d: usize| -> Vec<Vec<f64>> {
        compositions(d as u32, 3)
            .into_iter()
            .map(|e| {
                rule.points
                    .iter()
                    .map(|p| (0..3).map(|k| p[k].powi(e[k] as i32)).product())
                    .collect()
            })
            .collect()
    };
    let qg = monos(l - 2);
    let qv = monos(l - 3);

    let faces: Vec<(f64, Vec<FaceSide>)> = (0..ents.faces.len())
        .into_par_iter()
        .map(|f| -> Result<_> {
            let verts = ents.faces[f];
            let (t0, t1) = ents.face_tets[f];
            let mut sides = Vec::new();
            let mut area = 0.0;
            for t in std::iter::once(t0).chain(t1) {
                let tv = mesh.tets[t];
                let pos: Vec<usize> = verts
                    .iter()
                    .map(|v| tv.iter().position(|x| x == v).expect("face vertex in tet"))
                    .collect();
                let pts: Vec<[f64; 4]> = rule
                    .points
                    .iter()
                    .map(|p| {
                        let mut w = [0.0; 4];
                        for k in 0..3 {
                            w[pos[k]] = p[k];
                        }
                        w
                    })
                    .collect();
                let m = (0..4).find(|i| !pos.contains(i)).expect("opposite vertex");
                area = mesh.geometry(t)?.face_area(m)?;
                let tab = cache.class_of(t).element.tabulate(&pts);
                sides.push(FaceSide { tet: t, tab });
            }
            Ok((area, sides))
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HypothesisReport::default();
    for _ in 0..trials {
        let free: Vec<f64> = (0..map.nfree()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = map.expand(&free);
        let results: Vec<(Vec<(Vec<f64>, Vec<f64>)>, bool)> = faces
            .par_iter()
            .enumerate()
            .map(|(f, (area, sides))| {
                let w: Vec<f64> = rule.weights.iter().map(|w| w * area / 0.5).collect();
                let moments = sides
                    .iter()
                    .map(|s| face_moments(s, &map.local(s.tet, &x), &w, &qv, &qg))
                    .collect();
                (moments, ents.boundary_faces[f])
            })
            .collect();
        let mut scale_v = 0.0f64;
        let mut scale_g = 0.0f64;
        for (m, _) in &results {
            for (v, g) in m {
                scale_v = scale_v.max(v.iter().fold(0.0, |a, x| a.max(x.abs())));
                scale_g = scale_g.max(g.iter().fold(0.0, |a, x| a.max(x.abs())));
            }
        }
        let rel = |x: f64, s: f64| if s > 0.0 { x / s } else { x };
        for (m, boundary) in &results {
            let maxdiff = |a: &[f64], b: &[f64]| {
                a.iter()
                    .zip(b)
                    .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
            };
            let maxabs = |a: &[f64]| a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if *boundary {
                report.boundary_value = report.boundary_value.max(rel(maxabs(&m[0].0), scale_v));
                report.boundary_gradient =
                    report.boundary_gradient.max(rel(maxabs(&m[0].1), scale_g));
            } else {
                report.interior_value = report
                    .interior_value
                    .max(rel(maxdiff(&m[0].0, &m[1].0), scale_v));
                report.interior_gradient = report
                    .interior_gradient
                    .max(rel(maxdiff(&m[0].1, &m[1].1), scale_g));
            }
        }
    }
    Ok(report)
}

/// Local index of the first normal-moment DOF of tet `t` on local face `m`.
pub fn first_normal_local(map: &GlobalDofMap, m: usize) -> usize {
    let fam = map.family;
    6 * fam.edge_block() + 4 * fam.face_block() + fam.cell_block() + m * fam.normal_block()
}

/// Which DOF kind a local index of `family` belongs to.
pub fn local_kind(family: ElementFamily, i: usize) -> DofKind {
    let e = 6 * family.edge_block();
    let f = e + 4 * family.face_block();
    let c = f + family.cell_block();
    if i < e {
        DofKind::Edge
    } else if i < f {
        DofKind::Face
    } else if i < c {
        DofKind::Cell
    } else {
        DofKind::Normal
    }
}

/// `int_T D^2 u : D^2 v` by quadrature of tabulated Hessians.
pub fn quadrature_energy(tab: &Tabulation, weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let nd = tab.ndofs;
    let mut acc = 0.0;
    for (q, w) in weights.iter().enumerate() {
        let mut ha = [0.0; 6];
        let mut hb = [0.0; 6];
        for j in 0..nd {
            let h = tab.hessians[q * nd + j];
            for s in 0..6 {
                ha[s] += a[j] * h[s];
                hb[s] += b[j] * h[s];
            }
        }
        acc += w * hessian_dot(&ha, &hb);
    }
    acc
}
