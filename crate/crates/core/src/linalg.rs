//! Small dense linear algebra, generic over the scalar field.
//!
//! Matrices are row-major `Vec<Vec<S>>`. Float paths pivot on the largest
//! entry; exact paths pivot on the first nonzero.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

pub type Matrix<S> = Vec<Vec<S>>;

pub fn zeros<S: Scalar>(rows: usize, cols: usize) -> Matrix<S> {
    vec![vec![S::zero(); cols]; rows]
}

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn matmul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            let mut out = vec![S::zero(); cols];
            for k in 0..inner {
                if row[k].is_zero() {
                    continue;
                }
                for (o, bkj) in out.iter_mut().zip(&b[k]) {
                    *o = o.clone() + row[k].clone() * bkj.clone();
                }
            }
            out
        })
        .collect()
}

pub fn transpose<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

fn pick_pivot<S: Scalar>(a: &Matrix<S>, col: usize, from: usize, tol: f64) -> Option<usize> {
    if S::EXACT {
        (from..a.len()).find(|&r| !a[r][col].is_zero())
    } else {
        let (best, val) = (from..a.len())
            .map(|r| (r, a[r][col].to_f64().abs()))
            .fold((from, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        (val > tol).then_some(best)
    }
}

fn max_abs<S: Scalar>(a: &Matrix<S>) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|x| x.to_f64().abs())
        .fold(0.0, f64::max)
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<S: Scalar>(a: &mut Matrix<S>) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let tol = 1e-11 * max_abs(a).max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pick_pivot(a, c, r, tol) else {
            if !S::EXACT {
                for row in a.iter_mut().skip(r) {
                    row[c] = S::zero();
                }
            }
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel of `a` (`cols` columns), one vector per free
/// column, in increasing free-column order.
pub fn nullspace<S: Scalar>(a: &Matrix<S>, cols: usize) -> Vec<Vec<S>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn rank<S: Scalar>(a: &Matrix<S>) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

/// Inverse by Gauss-Jordan elimination.
pub fn invert<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>> {
    let n = a.len();
    let mut aug: Matrix<S> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let tol = 1e-14 * max_abs(a).max(f64::MIN_POSITIVE);
    for c in 0..n {
        let p = pick_pivot(&aug, c, c, tol).ok_or(Error::SingularDofMatrix)?;
        aug.swap(c, p);
        let piv = aug[c][c].clone();
        for x in aug[c].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let pivot_row = aug[c].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn norm1(a: &Matrix<f64>) -> f64 {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| a.iter().map(|r| r[j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a float matrix after row equilibration, together with the
/// 1-norm condition number of the equilibrated matrix.
pub fn invert_equilibrated(a: &Matrix<f64>) -> Result<(Matrix<f64>, f64)> {
    let scales: Vec<f64> = a
        .iter()
        .map(|r| {
            let m = r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let scaled: Matrix<f64> = a
        .iter()
        .zip(&scales)
        .map(|(r, s)| r.iter().map(|x| x * s).collect())
        .collect();
    let inv_scaled = invert(&scaled)?;
    let cond = norm1(&scaled) * norm1(&inv_scaled);
    // A^{-1} = (D A)^{-1} D
    let inv = inv_scaled
        .iter()
        .map(|r| r.iter().zip(&scales).map(|(x, s)| x * s).collect())
        .collect();
    Ok((inv, cond))
}

/// Exact determinant by fraction-free (Bareiss) elimination after clearing
/// denominators row by row.
pub fn determinant_exact(a: &Matrix<Rational>) -> Rational {
    let n = a.len();
    let mut scale = Rational::one();
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            scale = scale.clone() * Rational::from_integer(l.clone());
            row.iter()
                .map(|x| x.numer() * (&l / x.denom()))
                .collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return Rational::one();
    }
    Rational::new(sign * m[n - 1][n - 1].clone(), BigInt::one()) / scale
}

/// Max `|a_ij - b_ij|` for float matrices.
pub fn max_abs_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Whether `x` is exactly zero (rational) or tiny relative to `scale` (float).
pub fn negligible<S: Scalar>(x: &S, scale: f64, tol: f64) -> bool {
    if S::EXACT {
        x.is_zero()
    } else {
        x.abs().to_f64() <= tol * scale.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn exact_inverse_and_determinant() {
        let a = vec![
            vec![q(2, 1), q(1, 3), q(0, 1)],
            vec![q(1, 1), q(1, 1), q(1, 2)],
            vec![q(0, 1), q(3, 1), q(1, 1)],
        ];
        let inv = invert(&a).unwrap();
        assert_eq!(matmul(&a, &inv), identity(3));
        // 2(1 - 3/2) - 1/3 (1 - 0) = -1 - 1/3
        assert_eq!(determinant_exact(&a), q(-4, 3));
        let singular = vec![vec![q(1, 1), q(2, 1)], vec![q(1, 2), q(1, 1)]];
        assert_eq!(determinant_exact(&singular), q(0, 1));
        assert!(matches!(invert(&singular), Err(Error::SingularDofMatrix)));
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = vec![
            vec![q(1, 1), q(2, 1), q(3, 1), q(4, 1)],
            vec![q(2, 1), q(4, 1), q(7, 1), q(9, 1)],
        ];
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                let s = row
                    .iter()
                    .zip(v)
                    .fold(q(0, 1), |acc, (x, y)| acc + x * y);
                assert_eq!(s, q(0, 1));
            }
        }
    }

    #[test]
    fn float_inverse_condition() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let (inv, cond) = invert_equilibrated(&a).unwrap();
        let p = matmul(&a, &inv);
        assert!(max_abs_diff(&p, &identity(2)) < 1e-15);
        assert!(cond > 1.0 && cond < 10.0);
    }
}
