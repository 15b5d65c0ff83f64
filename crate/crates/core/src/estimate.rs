//! Manufactured solution, broken norms and convergence studies.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::{assemble, build_dof_map, ElementCache, GlobalDofMap, SparseSystem, BATCH};
use crate::barypoly::Entity;
use crate::element::{dof_apply_fn, ElementFamily, SmoothFunction};
use crate::error::{Error, Result};
use crate::mesh::{extract_entities, uniform_cube_mesh, Mesh};
use crate::quadrature::rule_for_degree;
use crate::solve::{residual, solve, SolveStats, SolverKind};

/// A smooth function with second derivatives (xx, yy, zz, xy, xz, yz).
pub trait TwiceDifferentiable: SmoothFunction {
    fn hessian(&self, x: [f64; 3]) -> [f64; 6];
}

/// `u = 2^10 g(x) g(y) g(z)`, `g(t) = (t - t^2)^2`, clamped on the unit cube.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSolution;

const SCALE: f64 = 1024.0;

fn g0(t: f64) -> f64 {
    let s = t - t * t;
    s * s
}
fn g1(t: f64) -> f64 {
    2.0 * t - 6.0 * t * t + 4.0 * t * t * t
}
fn g2(t: f64) -> f64 {
    2.0 - 12.0 * t + 12.0 * t * t
}
const G4: f64 = 24.0;

impl ExactSolution {
    /// `f = Δ²u`.
    pub fn rhs(&self, x: [f64; 3]) -> f64 {
        let [a, b, c] = x.map(g0);
        let [a2, b2, c2] = x.map(g2);
        SCALE * (G4 * (b * c + a * c + a * b) + 2.0 * (a2 * b2 * c + a2 * b * c2 + a * b2 * c2))
    }
}

impl SmoothFunction for ExactSolution {
    fn value(&self, x: [f64; 3]) -> f64 {
        SCALE * g0(x[0]) * g0(x[1]) * g0(x[2])
    }
    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let v = x.map(g0);
        let d = x.map(g1);
        [
            SCALE * d[0] * v[1] * v[2],
            SCALE * v[0] * d[1] * v[2],
            SCALE * v[0] * v[1] * d[2],
        ]
    }
}

impl TwiceDifferentiable for ExactSolution {
    fn hessian(&self, x: [f64; 3]) -> [f64; 6] {
        let v = x.map(g0);
        let d = x.map(g1);
        let h = x.map(g2);
        [
            SCALE * h[0] * v[1] * v[2],
            SCALE * v[0] * h[1] * v[2],
            SCALE * v[0] * v[1] * h[2],
            SCALE * d[0] * d[1] * v[2],
            SCALE * d[0] * v[1] * d[2],
            SCALE * v[0] * d[1] * d[2],
        ]
    }
}

/// Norm quadrature degree `p + 12`.
pub fn norm_degree(family: ElementFamily) -> usize {
    family.max_degree() + 12
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BrokenNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Elementwise `||u - u_h||_0`, `|u - u_h|_1`, `|u - u_h|_2` for a
/// full-length coefficient vector.
pub fn broken_norms(
    mesh: &Mesh,
    map: &GlobalDofMap,
    cache: &ElementCache,
    x: &[f64],
    exact: &dyn TwiceDifferentiable,
) -> Result<BrokenNorms> {
    if x.len() != map.ndofs {
        return Err(Error::DimensionMismatch {
            expected: map.ndofs,
            found: x.len(),
        });
    }
    let rule = rule_for_degree(3, norm_degree(map.family))?;
    let tabs = cache.tabulate_cells(&rule);
    let tets: Vec<usize> = (0..mesh.tets.len()).collect();
    let parts: Vec<[f64; 3]> = tets
        .par_chunks(BATCH)
        .map(|chunk| -> Result<[f64; 3]> {
            let mut acc = [0.0; 3];
            for &t in chunk {
                let tab = &tabs[cache.tet_class[t]];
                let g = mesh.geometry(t)?;
                let w = rule.physical_weights(&Entity::Cell, &g)?;
                let c = map.local(t, x);
                let nd = tab.ndofs;
                for (q, p) in rule.points.iter().enumerate() {
                    let pt = g.point(p);
                    let mut v = exact.value(pt);
                    let mut gr = exact.gradient(pt);
                    let mut h = exact.hessian(pt);
                    for j in 0..nd {
                        let k = q * nd + j;
                        v -= c[j] * tab.values[k];
                        for s in 0..3 {
                            gr[s] -= c[j] * tab.grads[k][s];
                        }
                        for s in 0..6 {
                            h[s] -= c[j] * tab.hessians[k][s];
                        }
                    }
                    acc[0] += w[q] * v * v;
                    acc[1] += w[q] * (gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2]);
                    acc[2] += w[q] * crate::element::hessian_dot(&h, &h);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut tot = [0.0; 3];
    for p in parts {
        for k in 0..3 {
            tot[k] += p[k];
        }
    }
    Ok(BrokenNorms {
        l2: tot[0].sqrt(),
        h1: tot[1].sqrt(),
        h2: tot[2].sqrt(),
    })
}

/// Canonical interpolant: every global DOF applied to `f` (boundary DOFs
/// included), taken from the first tet that owns it.
pub fn global_interpolant(
    mesh: &Mesh,
    map: &GlobalDofMap,
    cache: &ElementCache,
    f: &dyn SmoothFunction,
    degree: usize,
) -> Result<Vec<f64>> {
    let mut owner = vec![None; map.ndofs];
    for t in 0..mesh.tets.len() {
        for (i, g) in map.tet_dofs[t].iter().enumerate() {
            if owner[*g].is_none() {
                owner[*g] = Some((t, i));
            }
        }
    }
    owner
        .par_iter()
        .map(|o| -> Result<f64> {
            let (t, i) = o.expect("every DOF belongs to a tet");
            let g = mesh.geometry(t)?;
            let d = &cache.class_of(t).element.dofs[i];
            Ok(map.tet_signs[t][i] * dof_apply_fn(d, f, &g, degree)?)
        })
        .collect()
}

/// Worst `|v^T (K u - F)| / (|v| |F|)` over random `v`.
pub fn galerkin_residual(sys: &SparseSystem, u: &[f64], trials: usize, seed: u64) -> f64 {
    let r = residual(sys, u);
    let fnorm = sys.rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v: Vec<f64> = (0..sys.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vr: f64 = v.iter().zip(&r).map(|(x, y)| x * y).sum();
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm > 0.0 && fnorm > 0.0 {
            worst = worst.max(vr.abs() / (vnorm * fnorm));
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct LevelResult {
    pub level: usize,
    pub tets: usize,
    pub ndofs: usize,
    pub errors: BrokenNorms,
    /// `log2(e_{k-1}/e_k)`; zero on the first row.
    pub orders: BrokenNorms,
    pub stats: SolveStats,
    pub galerkin: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub family: ElementFamily,
    pub solver: SolverKind,
    pub rows: Vec<LevelResult>,
}

impl ConvergenceReport {
    pub fn last_orders(&self) -> Option<BrokenNorms> {
        (self.rows.len() >= 2).then(|| self.rows.last().expect("nonempty").orders)
    }
}

fn order(prev: f64, cur: f64) -> f64 {
    if prev > 0.0 && cur > 0.0 {
        (prev / cur).log2()
    } else {
        0.0
    }
}

/// One level of the pipeline: mesh, DOFs, assembly, solve, norms.
pub fn solve_level(
    family: ElementFamily,
    level: usize,
    solver: SolverKind,
    seed: u64,
) -> Result<LevelResult> {
    let start = Instant::now();
    let mesh = uniform_cube_mesh(level)?;
    let ents = extract_entities(&mesh)?;
    let map = build_dof_map(&mesh, &ents, family);
    let cache = ElementCache::build(&mesh, &map)?;
    let exact = ExactSolution;
    let sys = assemble(&mesh, &map, &cache, &|x| exact.rhs(x))?;
    let (u, stats) = solve(&sys, solver)?;
    let galerkin = galerkin_residual(&sys, &u, 10, seed);
    let errors = broken_norms(&mesh, &map, &cache, &map.expand(&u), &exact)?;
    Ok(LevelResult {
        level,
        tets: mesh.tets.len(),
        ndofs: map.nfree(),
        errors,
        orders: BrokenNorms::default(),
        stats,
        galerkin,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn convergence_study(
    family: ElementFamily,
    levels: &[usize],
    solver: SolverKind,
    seed: u64,
) -> Result<ConvergenceReport> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Unsupported("levels must be strictly increasing".into()));
    }
    let mut rows: Vec<LevelResult> = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut r = solve_level(family, level, solver, seed)?;
        if let Some(prev) = rows.last() {
            r.orders = BrokenNorms {
                l2: order(prev.errors.l2, r.errors.l2),
                h1: order(prev.errors.h1, r.errors.h1),
                h2: order(prev.errors.h2, r.errors.h2),
            };
        }
        rows.push(r);
    }
    Ok(ConvergenceReport {
        family,
        solver,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solution_values() {
        let u = ExactSolution;
        assert!((u.value([0.5; 3]) - 0.25).abs() < 1e-15);
        assert_eq!(u.value([0.0, 0.3, 0.7]), 0.0);
        assert_eq!(u.gradient([1.0, 0.3, 0.7]), [0.0; 3]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let u = ExactSolution;
        let x = [0.31, 0.47, 0.83];
        let e = 1e-5;
        let shift = |k: usize, s: f64| {
            let mut y = x;
            y[k] += s;
            y
        };
        let g = u.gradient(x);
        let h = u.hessian(x);
        for k in 0..3 {
            let fd = (u.value(shift(k, e)) - u.value(shift(k, -e))) / (2.0 * e);
            assert!((fd - g[k]).abs() < 1e-7);
            let fd2 = (u.gradient(shift(k, e))[k] - u.gradient(shift(k, -e))[k]) / (2.0 * e);
            assert!((fd2 - h[k]).abs() < 1e-6);
        }
        let fd = (u.gradient(shift(1, e))[0] - u.gradient(shift(1, -e))[0]) / (2.0 * e);
        assert!((fd - h[3]).abs() < 1e-6);
        // bilaplacian via fourth differences of the separable factors
        let lap = |y: [f64; 3]| {
            let hh = u.hessian(y);
            hh[0] + hh[1] + hh[2]
        };
        let e2 = 1e-3;
        let mut bil = 0.0;
        for k in 0..3 {
            bil += (lap(shift(k, e2)) - 2.0 * lap(x) + lap(shift(k, -e2))) / (e2 * e2);
        }
        assert!((bil - u.rhs(x)).abs() < 1e-3 * u.rhs(x).abs().max(1.0));
    }
}
