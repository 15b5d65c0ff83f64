//! Direct (sparse Cholesky) and Jacobi-preconditioned CG solvers.

use std::fmt;
use std::str::FromStr;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};

/// Accepted relative residual of a direct solve.
pub const DIRECT_TOLERANCE: f64 = 1e-11;
/// Relative residual target of CG.
pub const CG_TOLERANCE: f64 = 1e-12;
const REFINEMENT_STEPS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Direct,
    Cg,
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(SolverKind::Direct),
            "cg" => Ok(SolverKind::Cg),
            other => Err(Error::Unsupported(format!("unknown solver `{other}`"))),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Direct => "direct",
            SolverKind::Cg => "cg",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub method: SolverKind,
    /// CG iterations or refinement steps.
    pub iterations: usize,
    pub residual: f64,
    /// `eps * || |K| |x| || / ||F||`, the smallest residual a vector stored
    /// in double precision can be expected to reach.
    pub floor: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `b - K x`, accumulated in double-double so that the residual is not
/// dominated by rounding in the product.
pub fn residual(sys: &SparseSystem, x: &[f64]) -> Vec<f64> {
    (0..sys.n)
        .map(|r| {
            let (mut hi, mut lo) = (sys.rhs[r], 0.0f64);
            for k in sys.row_ptr[r]..sys.row_ptr[r + 1] {
                let a = -sys.values[k];
                let b = x[sys.col_idx[k]];
                let p = a * b;
                let perr = a.mul_add(b, -p);
                let s = hi + p;
                let bb = s - hi;
                let serr = (hi - (s - bb)) + (p - bb);
                hi = s;
                lo += serr + perr;
            }
            hi + lo
        })
        .collect()
}

/// Rounding floor of the residual of `x`; see [`SolveStats::floor`].
pub fn representation_floor(sys: &SparseSystem, x: &[f64]) -> f64 {
    let v: Vec<f64> = (0..sys.n)
        .map(|r| {
            (sys.row_ptr[r]..sys.row_ptr[r + 1])
                .map(|k| (sys.values[k] * x[sys.col_idx[k]]).abs())
                .sum::<f64>()
        })
        .collect();
    f64::EPSILON * norm(&v) / norm(&sys.rhs)
}

pub fn relative_residual(sys: &SparseSystem, x: &[f64]) -> f64 {
    let b = norm(&sys.rhs);
    let r = norm(&residual(sys, x));
    if b == 0.0 {
        r
    } else {
        r / b
    }
}

pub fn solve(sys: &SparseSystem, method: SolverKind) -> Result<(Vec<f64>, SolveStats)> {
    if sys.n == 0 {
        return Ok((
            Vec::new(),
            SolveStats {
                method,
                iterations: 0,
                residual: 0.0,
                floor: 0.0,
            },
        ));
    }
    match method {
        SolverKind::Direct => solve_direct(sys),
        SolverKind::Cg => solve_cg(sys),
    }
}

fn solve_direct(sys: &SparseSystem) -> Result<(Vec<f64>, SolveStats)> {
    let n = sys.n;
    let mut trip = Vec::with_capacity(sys.nnz());
    for r in 0..n {
        for k in sys.row_ptr[r]..sys.row_ptr[r + 1] {
            trip.push(Triplet::new(r, sys.col_idx[k], sys.values[k]));
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let llt = a
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let apply = |v: &[f64]| -> Vec<f64> {
        let b = Mat::<f64>::from_fn(n, 1, |i, _| v[i]);
        let x = llt.solve(&b);
        (0..n).map(|i| x[(i, 0)]).collect()
    };
    let mut x = apply(&sys.rhs);
    let bnorm = norm(&sys.rhs).max(f64::MIN_POSITIVE);
    let mut res = norm(&residual(sys, &x)) / bnorm;
    let mut steps = 0;
    while res >= DIRECT_TOLERANCE * 1e-2 && steps < REFINEMENT_STEPS {
        let r = residual(sys, &x);
        let d = apply(&r);
        let cand: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let cres = norm(&residual(sys, &cand)) / bnorm;
        steps += 1;
        if cres >= res {
            break;
        }
        x = cand;
        res = cres;
    }
    let floor = representation_floor(sys, &x);
    if !(res < DIRECT_TOLERANCE.max(floor)) {
        return Err(Error::Residual(res));
    }
    Ok((
        x,
        SolveStats {
            method: SolverKind::Direct,
            iterations: steps,
            residual: res,
            floor,
        },
    ))
}

fn solve_cg(sys: &SparseSystem) -> Result<(Vec<f64>, SolveStats)> {
    let n = sys.n;
    let diag = sys.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Factorization("non-positive diagonal entry".into()));
    }
    let bnorm = norm(&sys.rhs).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; n];
    let mut r = sys.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let cap = 50 * n;
    let mut it = 0;
    let mut rel = norm(&r) / bnorm;
    let mut target = CG_TOLERANCE;
    while rel > target && it < cap {
        let ap = sys.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        rel = norm(&r) / bnorm;
        if it % 50 == 0 {
            // guard against drift of the recursive residual
            r = residual(sys, &x);
            rel = norm(&r) / bnorm;
            target = CG_TOLERANCE.max(representation_floor(sys, &x));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let true_rel = relative_residual(sys, &x);
    let floor = representation_floor(sys, &x);
    if !(true_rel <= (CG_TOLERANCE * 10.0).max(floor)) {
        return Err(Error::CgNotConverged {
            iterations: it,
            residual: true_rel,
        });
    }
    Ok((
        x,
        SolveStats {
            method: SolverKind::Cg,
            iterations: it,
            residual: true_rel,
            floor,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseSystem {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSystem::from_triplets(n, t, (0..n).map(|i| (i as f64).sin() + 1.0).collect())
    }

    #[test]
    fn trivial_system() {
        let sys = SparseSystem::from_triplets(1, vec![(0, 0, 4.0)], vec![2.0]);
        for m in [SolverKind::Direct, SolverKind::Cg] {
            let (x, _) = solve(&sys, m).unwrap();
            assert!((x[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn direct_and_cg_agree() {
        let sys = laplace_1d(60);
        let (a, sa) = solve(&sys, SolverKind::Direct).unwrap();
        let (b, sb) = solve(&sys, SolverKind::Cg).unwrap();
        assert!(sa.residual < 1e-11 && sb.residual < 1e-11);
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let s = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(d < 1e-9 * s);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let sys = SparseSystem::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)], vec![1.0, 1.0]);
        assert!(solve(&sys, SolverKind::Direct).is_err());
        assert!(solve(&sys, SolverKind::Cg).is_err());
    }
}
