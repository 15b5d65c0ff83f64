//! Closed-form bases printed for the P4+20P6 and P5+36P7 elements.
//!
//! Formulas are transcribed with 1-based vertex labels converted to 0-based
//! ones. Functions containing `r_m` or `n_a . n_b` are only rational on tets
//! whose face heights are rational, so evaluation needs such a geometry.
//! Where the printed text is ambiguous both readings are built and named.

use super::dofs::{dof_list, DofEvaluator, DofKind, DofSpec, NormalScaling, Orientation};
use super::family::{phi_tilde_n4, phi_tilde_n5, ElementFamily};
use crate::barypoly::{BaryPoly, MultiIndex4};
use crate::error::Result;
use crate::geometry::{SimplexGeometry, EDGES};
use crate::scalar::{Rational, Scalar};

type Q = Rational;
type P = BaryPoly<Q>;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn lam(i: usize) -> P {
    BaryPoly::lambda(i)
}

fn cst(n: i64) -> P {
    BaryPoly::constant(q(n, 1))
}

/// `sum c_k p_k` with rational weights.
fn lc(terms: Vec<(Q, &P)>) -> P {
    terms
        .into_iter()
        .fold(BaryPoly::zero(), |acc, (c, p)| acc + p.scale(&c))
}

/// Cyclic vertex triple of face `m`: `(m+1, m+2, m+3) mod 4`.
pub fn face_ijk(m: usize) -> [usize; 3] {
    [(m + 1) % 4, (m + 2) % 4, (m + 3) % 4]
}

/// 1-based position of vertex `v` on face `m`.
pub fn tau(m: usize, v: usize) -> usize {
    face_ijk(m)
        .iter()
        .position(|&x| x == v)
        .expect("vertex lies on the face")
        + 1
}

const INDEX5: [[u32; 3]; 10] = [
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
];

/// 1-based index of `lambda_t^2 lambda_l` in the cubic face list of face `m`.
pub fn sigma(m: usize, t: usize, l: usize) -> Option<usize> {
    if t == m || l == m || t == l {
        return None;
    }
    let mut e = [0u32; 3];
    e[tau(m, t) - 1] = 2;
    e[tau(m, l) - 1] = 1;
    INDEX5.iter().position(|x| *x == e).map(|p| p + 1)
}

/// The two tet vertices not on edge `e`, ascending.
fn edge_others(e: usize) -> [usize; 2] {
    let [i, j] = EDGES[e];
    let mut o = (0..4).filter(|&v| v != i && v != j);
    [o.next().expect("vertex"), o.next().expect("vertex")]
}

#[derive(Clone, Debug)]
pub struct ClosedFormFunction {
    pub name: String,
    /// `(kind, entity, 0-based index in block)` of the DOF expected to be 1.
    pub target: Option<(DofKind, usize, usize)>,
    /// DOF kinds the printed relations speak about.
    pub scope: Vec<DofKind>,
    pub poly: P,
}

struct Ctx {
    g: SimplexGeometry<Q>,
    r: [Q; 4],
    eval: DofEvaluator<Q>,
    normals5: Vec<DofSpec>,
}

impl Ctx {
    fn new(g: &SimplexGeometry<Q>) -> Result<Self> {
        let r = [g.height(0)?, g.height(1)?, g.height(2)?, g.height(3)?];
        let normals5 = dof_list(ElementFamily::P5E7, &Orientation::Cyclic, [1; 4])
            .into_iter()
            .filter(|d| d.kind == DofKind::Normal)
            .collect();
        Ok(Self {
            g: g.clone(),
            r,
            eval: DofEvaluator::new(g, NormalScaling::Unit)?,
            normals5,
        })
    }

    /// `N^(5)_{m,l}(p)`, `l` 1-based.
    fn n5(&self, m: usize, l: usize, p: &P) -> Q {
        self.eval.apply(&self.normals5[10 * m + l - 1], p)
    }

    /// `n_a . n_b` for unit outward normals.
    fn nn(&self, a: usize, b: usize) -> Q {
        self.r[a].clone() * self.r[b].clone() * self.g.gram(a, b)
    }

    fn inv_r(&self, a: usize) -> Q {
        q(1, 1) / self.r[a].clone()
    }
}

const ETF: [DofKind; 3] = [DofKind::Edge, DofKind::Face, DofKind::Cell];
const ALL: [DofKind; 4] = [DofKind::Edge, DofKind::Face, DofKind::Cell, DofKind::Normal];

fn func(name: String, target: Option<(DofKind, usize, usize)>, scope: &[DofKind], poly: P) -> ClosedFormFunction {
    ClosedFormFunction {
        name,
        target,
        scope: scope.to_vec(),
        poly,
    }
}

// ---------------------------------------------------------------- P4E6

fn tilde_e4(e: usize, t: usize) -> P {
    let [i, j] = EDGES[e];
    let b = &lam(i) * &lam(j);
    let inner = match t {
        1 => lam(i).pow(2).scale(&q(7, 1)) - lam(i).scale(&q(6, 1)) + cst(1),
        2 => (&lam(i) * &lam(j)).scale(&q(21, 1)) - lam(i).scale(&q(6, 1)) - lam(j).scale(&q(6, 1))
            + cst(2),
        _ => lam(j).pow(2).scale(&q(7, 1)) - lam(j).scale(&q(6, 1)) + cst(1),
    };
    (&b * &inner).scale(&q(60, 1))
}

fn tilde_f4(m: usize, t: usize) -> P {
    let v = face_ijk(m)[t - 1];
    (&BaryPoly::face_bubble(m) * &(lam(v).scale(&q(7, 1)) - cst(2))).scale(&q(180, 1))
}

fn tilde_t4() -> P {
    BaryPoly::monomial(MultiIndex4([1, 1, 1, 1]), q(840, 1))
}

/// `phi^(N,4)_{m,l}` including the `r_m` factor; `l` is 1-based.
fn n4_all(c: &Ctx) -> Vec<Vec<P>> {
    (0..4)
        .map(|m| {
            let [i, j, k] = face_ijk(m);
            let t0 = phi_tilde_n4::<Q>(m, 0);
            let ti = phi_tilde_n4::<Q>(m, 1 + i);
            let tj = phi_tilde_n4::<Q>(m, 1 + j);
            let tk = phi_tilde_n4::<Q>(m, 1 + k);
            let tj4 = phi_tilde_n4::<Q>(m, 5 + j);
            let tk4 = phi_tilde_n4::<Q>(m, 5 + k);
            let w = |s: i64, cs: [i64; 6]| -> P {
                let p = lc(vec![
                    (q(cs[0], 1), &t0),
                    (q(cs[1], 1), &ti),
                    (q(cs[2], 1), &tj),
                    (q(cs[3], 1), &tk),
                    (q(cs[4], 1), &tj4),
                    (q(cs[5], 1), &tk4),
                ]);
                p.scale(&(c.r[m].clone() * q(s, 1)))
            };
            vec![
                w(6, [1, 5, 0, 0, -10, -10]),
                w(6, [-4, 5, 10, 5, 10, 0]),
                w(6, [-4, 5, 5, 10, 0, 10]),
                w(12, [11, -10, -15, -15, -25, -25]),
                w(6, [-3, -5, 5, -5, 50, 0]),
                w(6, [-3, -5, -5, 5, 0, 50]),
            ]
        })
        .collect()
}

fn p4e6_functions(c: &Ctx, corrected: bool) -> Vec<ClosedFormFunction> {
    let mut out = Vec::new();
    let n4 = n4_all(c);
    let nf = |m: usize, l: usize| -> &P { &n4[m][l - 1] };

    // auxiliary P4 functions
    for e in 0..6 {
        for t in 1..=3 {
            out.push(func(
                format!("tilde_phi(E,4)_{},{}", e + 1, t),
                Some((DofKind::Edge, e, t - 1)),
                &ETF,
                tilde_e4(e, t),
            ));
        }
    }
    for m in 0..4 {
        for t in 1..=3 {
            out.push(func(
                format!("tilde_phi(F,4)_{},{}", m + 1, t),
                Some((DofKind::Face, m, t - 1)),
                &ETF,
                tilde_f4(m, t),
            ));
        }
    }
    out.push(func("tilde_phi(T,4)_1".into(), Some((DofKind::Cell, 0, 0)), &ETF, tilde_t4()));
    for m in 0..4 {
        for s in 0..9 {
            if s == 1 + m || s == 5 + m {
                continue;
            }
            out.push(func(
                format!("tilde_phi(N,4)_{},{}", m + 1, s),
                None,
                &ETF,
                phi_tilde_n4(m, s),
            ));
        }
    }

    // dual basis
    for m in 0..4 {
        for l in 1..=6 {
            out.push(func(
                format!("phi(N,4)_{},{}", m + 1, l),
                Some((DofKind::Normal, m, l - 1)),
                &ALL,
                nf(m, l).clone(),
            ));
        }
    }

    let mut t = tilde_t4();
    for m in 0..4 {
        for l in 1..=3 {
            t += nf(m, l).scale(&(q(2, 1) * c.inv_r(m)));
        }
        for l in 4..=6 {
            t += nf(m, l).scale(&(q(4, 3) * c.inv_r(m)));
        }
    }
    out.push(func("phi(T,4)_1".into(), Some((DofKind::Cell, 0, 0)), &ALL, t));

    // (1/r_a) sum w_l N_{a,l}
    let grp = |a: usize, w: &[(i64, usize)]| -> P {
        let mut p = BaryPoly::zero();
        for (x, l) in w {
            p += nf(a, *l).scale(&(q(*x, 1) * c.inv_r(a)));
        }
        p
    };
    // n_m^T (x n_a / r_a + y n_m / r_m) N_{m,l}
    let nrm = |m: usize, a: usize, x: i64, y: i64, l: usize| -> P {
        let coef = q(x, 1) * c.nn(m, a) * c.inv_r(a) + q(y, 1) * c.inv_r(m);
        nf(m, l).scale(&coef)
    };
    for m in 0..4 {
        let [i, j, k] = face_ijk(m);
        let f1 = tilde_f4(m, 1) - grp(i, &[(6, 1), (6, 2), (2, 3), (2, 4), (2, 5), (4, 6)])
            + grp(j, &[(6, 3), (1, 4), (2, 5)])
            + grp(k, &[(6, 2), (2, 4), (1, 6)])
            - (nrm(m, i, 2, 6, 1) + nrm(m, k, 1, 2, 5) + nrm(m, j, 1, 2, 6));
        let f2 = tilde_f4(m, 2) - grp(j, &[(6, 1), (2, 2), (6, 3), (2, 4), (4, 5), (2, 6)])
            + grp(k, &[(6, 3), (2, 4), (1, 5)])
            + grp(i, &[(6, 1), (1, 5), (2, 6)])
            - (nrm(m, j, 2, 6, 2) + nrm(m, k, 1, 2, 4) + nrm(m, i, 1, 2, 6));
        let f3 = tilde_f4(m, 3) - grp(k, &[(2, 1), (6, 2), (6, 3), (4, 4), (2, 5), (2, 6)])
            + grp(i, &[(6, 2), (1, 4), (2, 6)])
            + grp(j, &[(6, 1), (2, 5), (1, 6)])
            - (nrm(m, k, 2, 6, 3) + nrm(m, j, 1, 2, 4) + nrm(m, i, 1, 2, 5));
        for (t, f) in [f1, f2, f3].into_iter().enumerate() {
            out.push(func(
                format!("phi(F,4)_{},{}", m + 1, t + 1),
                Some((DofKind::Face, m, t)),
                &ALL,
                f,
            ));
        }
    }

    // (2 n_i / r_i + 2 n_j / r_j)^T n_b N_{b,l}
    let cross = |i: usize, j: usize, b: usize, nb: usize, l: usize| -> P {
        let coef = q(2, 1) * (c.nn(i, nb) * c.inv_r(i) + c.nn(j, nb) * c.inv_r(j));
        nf(b, l).scale(&coef)
    };
    for e in 0..6 {
        let [i, j] = EDGES[e];
        let [it, jt] = edge_others(e);
        let e1 = tilde_e4(e, 1)
            + grp(
                i,
                &[
                    (6, tau(i, j)),
                    (2, tau(i, it)),
                    (2, tau(i, jt)),
                    (1, tau(i, j) + 3),
                    (2, tau(i, it) + 3),
                    (2, tau(i, jt) + 3),
                ],
            )
            + grp(j, &[(2, tau(j, i))])
            + cross(i, j, it, it, tau(it, i))
            + cross(i, j, jt, jt, tau(jt, i));
        let e2 = if corrected {
            tilde_e4(e, 2)
                - grp(i, &[(12, tau(i, j)), (2, tau(i, it) + 3), (2, tau(i, jt) + 3)])
                - grp(j, &[(12, tau(j, i)), (2, tau(j, it) + 3), (2, tau(j, jt) + 3)])
                + cross(i, j, it, it, tau(it, jt) + 3)
                + cross(i, j, jt, jt, tau(jt, it) + 3)
        } else {
            // printed: no 1/r_j on the second group, n_jt paired with N_it
            let second = nf(j, tau(j, i)).scale(&q(12, 1))
                + nf(j, tau(j, it) + 3).scale(&q(2, 1))
                + nf(j, tau(j, jt) + 3).scale(&q(2, 1));
            tilde_e4(e, 2)
                + grp(i, &[(12, tau(i, j)), (2, tau(i, it) + 3), (2, tau(i, jt) + 3)])
                + second
                + cross(i, j, it, jt, tau(it, jt) + 3)
                + cross(i, j, jt, jt, tau(jt, it) + 3)
        };
        let last_face = if corrected { j } else { i };
        let last_l = if corrected { tau(j, jt) + 3 } else { tau(i, jt) + 3 };
        let e3 = tilde_e4(e, 3)
            + grp(
                j,
                &[
                    (6, tau(j, i)),
                    (2, tau(j, it)),
                    (2, tau(j, jt)),
                    (1, tau(j, i) + 3),
                    (2, tau(j, it) + 3),
                ],
            )
            + nf(last_face, last_l).scale(&(q(2, 1) * c.inv_r(j)))
            + grp(i, &[(2, tau(i, j))])
            + cross(i, j, it, it, tau(it, j))
            + cross(i, j, jt, jt, tau(jt, j));
        for (t, f) in [e1, e2, e3].into_iter().enumerate() {
            out.push(func(
                format!("phi(E,4)_{},{}", e + 1, t + 1),
                Some((DofKind::Edge, e, t)),
                &ALL,
                f,
            ));
        }
    }
    out
}

// ---------------------------------------------------------------- P5E7

fn tilde_e5(e: usize, t: usize) -> P {
    let [i, j] = EDGES[e];
    let b = &lam(i) * &lam(j);
    let li = lam(i);
    let lj = lam(j);
    let cubic = |x: &P| x.pow(3).scale(&q(42, 1)) - x.pow(2).scale(&q(56, 1)) + x.scale(&q(21, 1)) - cst(2);
    let mixed = |x: &P, y: &P| {
        (&x.pow(2) * y).scale(&q(252, 1)) - (x * y).scale(&q(168, 1)) - x.pow(2).scale(&q(56, 1))
            + x.scale(&q(42, 1))
            + y.scale(&q(21, 1))
            - cst(6)
    };
    let inner = match t {
        1 => cubic(&li),
        2 => cubic(&lj),
        3 => mixed(&li, &lj),
        _ => mixed(&lj, &li),
    };
    (&b * &inner).scale(&q(60, 1))
}

fn tilde_f5(m: usize, t: usize) -> P {
    let [i, j, k] = face_ijk(m);
    let f1 = |a: usize| lam(a).pow(2).scale(&q(12, 1)) - lam(a).scale(&q(8, 1)) + cst(1);
    let f2 = |a: usize, b: usize| {
        (&lam(a) * &lam(b)).scale(&q(18, 1)) - lam(a).scale(&q(4, 1)) - lam(b).scale(&q(4, 1)) + cst(1)
    };
    let (s, inner) = match t {
        1 => (1260, f1(i)),
        2 => (1260, f1(j)),
        3 => (1260, f1(k)),
        4 => (2520, f2(i, j)),
        5 => (2520, f2(i, k)),
        _ => (2520, f2(j, k)),
    };
    (&BaryPoly::face_bubble(m) * &inner).scale(&q(s, 1))
}

fn tilde_t5(m: usize) -> P {
    let b = BaryPoly::monomial(MultiIndex4([1, 1, 1, 1]), q(3360, 1));
    &b * &(lam(m).scale(&q(9, 1)) - cst(2))
}

/// `phi^(N,5)_{m,l}` with all `r` factors; the second printed `l = 2` line
/// is taken as `l = 3`. The printed coupling `+-(r_j b_{j,1} + r_k b_{k,2})`
/// only cancels the moments of `phi_{m,13}` on faces j, k for special
/// shapes; `corrected` solves for the two coupling weights instead.
fn n5_all(c: &Ctx, corrected: bool) -> Vec<Vec<P>> {
    let t = |m: usize, s: usize| phi_tilde_n5::<Q>(m, s);
    let btilde = |m: usize, which: usize| -> P {
        let [i, j, k] = face_ijk(m);
        if which == 1 {
            lc(vec![
                (q(240, 1), &t(m, 0)),
                (q(-270, 1), &t(m, 1 + i)),
                (q(-1620, 1), &t(m, 1 + j)),
                (q(-270, 1), &t(m, 1 + k)),
                (q(1680, 1), &t(m, 5 + j)),
                (q(-540, 1), &t(m, 9 + j)),
            ])
        } else {
            lc(vec![
                (q(30, 1), &t(m, 0)),
                (q(1350, 1), &t(m, 1 + i)),
                (q(-1680, 1), &t(m, 5 + i)),
                (q(-540, 1), &t(m, 9 + j)),
                (q(-540, 1), &t(m, 9 + k)),
            ])
        }
    };
    (0..4)
        .map(|m| {
            let [i, j, k] = face_ijk(m);
            // columns: 0, i, j, k, i+4, j+4, k+4, j+8, k+8, 13
            let basis = [
                t(m, 0),
                t(m, 1 + i),
                t(m, 1 + j),
                t(m, 1 + k),
                t(m, 5 + i),
                t(m, 5 + j),
                t(m, 5 + k),
                t(m, 9 + j),
                t(m, 9 + k),
                t(m, 13),
            ];
            let bj = btilde(j, 1).scale(&c.r[j]);
            let bk = btilde(k, 2).scale(&c.r[k]);
            let extra = &bj + &bk;
            let (nj, nk) = (c.n5(j, 2, &bj), c.n5(k, 1, &bk));
            let rows: [([i64; 10], i64); 10] = [
                ([-10, -450, 0, 0, 560, 0, 0, 180, 180, 0], 0),
                ([80, -90, -540, -90, 0, 560, 0, -180, 0, 0], 0),
                ([80, -90, -90, -540, 0, 0, 560, 0, -180, 0], 0),
                ([60, -360, 90, -90, 0, 0, 0, 180, -2160, 5040], 1),
                ([60, 4680, -90, 90, -5040, 0, 0, -2160, 180, -5040], -1),
                ([-180, -1530, 3240, -1350, 1680, -3360, 1680, 2160, -2700, 5040], 1),
                ([-690, 2520, 2070, 2340, -1680, -1680, -1680, -180, 2700, -5040], -1),
                ([-690, -2520, 2340, 2070, 3360, -1680, -1680, 2700, -180, 5040], 1),
                ([-180, 3510, -1350, 3240, -3360, 1680, -3360, -2700, 2160, -5040], -1),
                ([2400, -8820, -8820, -8820, 6720, 6720, 6720, 0, 0, 0], 0),
            ];
            rows.iter()
                .map(|(w, s)| {
                    let p = lc(w.iter().zip(&basis).map(|(x, b)| (q(*x, 1), b)).collect())
                        .scale(&c.r[m]);
                    if corrected {
                        let a = -c.n5(j, 2, &p) / nj.clone();
                        let b = -c.n5(k, 1, &p) / nk.clone();
                        &p + &(bj.scale(&a) + bk.scale(&b))
                    } else {
                        p + extra.scale(&q(*s, 1))
                    }
                })
                .collect()
        })
        .collect()
}

fn p5e7_functions(c: &Ctx, corrected: bool) -> Vec<ClosedFormFunction> {
    let mut out = Vec::new();
    for e in 0..6 {
        for t in 1..=4 {
            out.push(func(
                format!("tilde_phi(E,5)_{},{}", e + 1, t),
                Some((DofKind::Edge, e, t - 1)),
                &ETF,
                tilde_e5(e, t),
            ));
        }
    }
    for m in 0..4 {
        for t in 1..=6 {
            out.push(func(
                format!("tilde_phi(F,5)_{},{}", m + 1, t),
                Some((DofKind::Face, m, t - 1)),
                &ETF,
                tilde_f5(m, t),
            ));
        }
    }
    for m in 0..4 {
        out.push(func(
            format!("tilde_phi(T,5)_{}", m + 1),
            Some((DofKind::Cell, 0, m)),
            &ETF,
            tilde_t5(m),
        ));
    }
    for m in 0..4 {
        let [_, j, k] = face_ijk(m);
        let mut s: Vec<usize> = (0..9).filter(|&s| s != 1 + m && s != 5 + m).collect();
        s.extend([9 + j, 9 + k, 13]);
        for s in s {
            out.push(func(
                format!("tilde_phi(N,5)_{},{}", m + 1, s),
                None,
                &ETF,
                phi_tilde_n5(m, s),
            ));
        }
    }

    let n5 = n5_all(c, corrected);
    let nf = |m: usize, l: usize| -> &P { &n5[m][l - 1] };
    for m in 0..4 {
        for l in 1..=10 {
            out.push(func(
                format!("phi(N,5)_{},{}", m + 1, l),
                Some((DofKind::Normal, m, l - 1)),
                &ALL,
                nf(m, l).clone(),
            ));
        }
    }

    let grp = |a: usize, scale: Q, w: &[(i64, usize)]| -> P {
        let mut p = BaryPoly::zero();
        for (x, l) in w {
            p += nf(a, *l).scale(&(q(*x, 1) * scale.clone() * c.inv_r(a)));
        }
        p
    };
    let one = q(1, 1);

    // phi(T,5): sigma(tau(.), tau(.)) read on vertex labels or on positions;
    // "vertex-tau" also replaces the fixed index 1 on faces j, k by tau
    for reading in ["vertex", "vertex-tau", "literal"] {
        for m in 0..4 {
            let [i, j, k] = face_ijk(m);
            let sg = |a: usize, x: usize, y: usize| -> Option<usize> {
                if reading != "literal" {
                    sigma(a, x, y)
                } else {
                    sigma(a, tau(a, x) - 1, tau(a, y) - 1)
                }
            };
            let mut poly = tilde_t5(m)
                - grp(
                    m,
                    q(4, 3),
                    &[(6, 1), (6, 2), (6, 3), (3, 4), (3, 5), (3, 6), (3, 7), (3, 8), (3, 9), (2, 10)],
                );
            let mut defined = true;
            let mut side = |a: usize, first: usize, o1: usize, o2: usize| -> P {
                let idx = [sg(a, m, o1), sg(a, m, o2), sg(a, o1, m), sg(a, o2, m)];
                if idx.iter().any(Option::is_none) {
                    defined = false;
                    return BaryPoly::zero();
                }
                let idx: Vec<usize> = idx.into_iter().map(|x| x.expect("checked")).collect();
                grp(
                    a,
                    q(2, 3),
                    &[(18, first), (6, idx[0]), (6, idx[1]), (3, idx[2]), (3, idx[3]), (2, 10)],
                )
            };
            poly += side(i, tau(i, m), j, k);
            let fixed = |a: usize| if reading == "vertex-tau" { tau(a, m) } else { 1 };
            poly += side(j, fixed(j), i, k);
            poly += side(k, fixed(k), i, j);
            if defined {
                out.push(func(
                    format!("phi(T,5)_{} [{reading} sigma]", m + 1),
                    Some((DofKind::Cell, 0, m)),
                    &ALL,
                    poly,
                ));
            } else {
                out.push(func(
                    format!("phi(T,5)_{} [{reading} sigma: index undefined]", m + 1),
                    None,
                    &[],
                    BaryPoly::zero(),
                ));
            }
        }
    }

    // phi(F,5)
    let dot = |m: usize, a: usize, w: &[(i64, usize)]| -> P {
        grp(m, c.nn(a, m) * c.inv_r(a) * c.r[m].clone(), w)
    };
    for m in 0..4 {
        let [i, j, k] = face_ijk(m);
        let fs = [
            tilde_f5(m, 1)
                + grp(i, one.clone(), &[(12, 1), (12, 2), (3, 3), (6, 4), (3, 5), (3, 6), (6, 7), (2, 8), (2, 9), (2, 10)])
                + grp(j, one.clone(), &[(12, 3), (2, 8), (1, 9)])
                + grp(k, one.clone(), &[(12, 2), (2, 6), (1, 7)])
                + dot(m, i, &[(9, 1), (2, 4), (2, 5)])
                + dot(m, j, &[(12, 1), (1, 4), (2, 5)])
                + dot(m, k, &[(12, 1), (2, 4), (1, 5)]),
            tilde_f5(m, 2)
                + grp(j, one.clone(), &[(12, 1), (3, 2), (12, 3), (3, 4), (6, 5), (2, 6), (2, 7), (6, 8), (3, 9), (2, 10)])
                + grp(i, one.clone(), &[(12, 1), (2, 4), (1, 5)])
                + grp(k, one.clone(), &[(12, 3), (1, 8), (2, 9)])
                + dot(m, j, &[(9, 2), (2, 6), (2, 7)])
                + dot(m, i, &[(12, 2), (2, 6), (1, 7)])
                + dot(m, k, &[(12, 2), (1, 6), (2, 7)]),
            tilde_f5(m, 3)
                + grp(k, one.clone(), &[(3, 1), (12, 2), (12, 3), (2, 4), (2, 5), (6, 6), (3, 7), (3, 8), (6, 9), (2, 10)])
                + grp(i, one.clone(), &[(12, 2), (1, 6), (2, 7)])
                + grp(j, one.clone(), &[(12, 2), (1, 4), (2, 5)])
                + dot(m, k, &[(9, 3), (2, 8), (2, 9)])
                + dot(m, i, &[(12, 3), (1, 8), (2, 9)])
                + dot(m, j, &[(12, 3), (2, 8), (1, 9)]),
            tilde_f5(m, 4)
                - grp(i, one.clone(), &[(36, 1), (12, 4), (6, 5), (6, 7), (2, 8), (2, 10)])
                + grp(k, one.clone(), &[(6, 7), (6, 9), (1, 10)])
                - grp(j, one.clone(), &[(36, 3), (6, 5), (2, 6), (12, 8), (6, 9), (2, 10)])
                + dot(m, i, &[(4, 4), (6, 7), (2, 10)])
                + dot(m, j, &[(6, 4), (4, 7), (2, 10)])
                + dot(m, k, &[(6, 4), (6, 7), (1, 10)]),
            tilde_f5(m, 5)
                - grp(i, one.clone(), &[(36, 2), (6, 4), (6, 6), (12, 7), (2, 9), (2, 10)])
                + grp(j, one.clone(), &[(6, 5), (6, 8), (1, 10)])
                - grp(k, one.clone(), &[(36, 2), (2, 4), (12, 6), (6, 7), (6, 9), (2, 10)])
                + dot(m, i, &[(4, 5), (6, 8), (2, 10)])
                + dot(m, j, &[(6, 5), (6, 8), (1, 10)])
                + dot(m, k, &[(6, 5), (4, 8), (2, 10)]),
            tilde_f5(m, 6)
                - grp(j, one.clone(), &[(36, 1), (6, 4), (12, 5), (2, 7), (2, 8), (2, 10)])
                + grp(i, one.clone(), &[(6, 4), (6, 6), (1, 10)])
                - grp(k, one.clone(), &[(36, 3), (2, 5), (6, 6), (6, 8), (12, 9), (2, 10)])
                + dot(m, i, &[(6, 6), (6, 9), (1, 10)])
                + dot(m, j, &[(4, 6), (6, 9), (2, 10)])
                + dot(m, k, &[(6, 6), (4, 9), (2, 10)]),
        ];
        for (t, f) in fs.into_iter().enumerate() {
            out.push(func(
                format!("phi(F,5)_{},{}", m + 1, t + 1),
                Some((DofKind::Face, m, t)),
                &ALL,
                f,
            ));
        }
    }

    // phi(E,5): `sgn` read literally (+-1) and as an indicator (0/1)
    for reading in ["sgn", "indicator"] {
        let sg = |x: i64| -> i64 {
            let s = x.signum();
            if reading == "sgn" {
                s
            } else {
                s.max(0)
            }
        };
        for e in 0..6 {
            let [i, j] = EDGES[e];
            let [it, jt] = edge_others(e);
            let mut built = Vec::new();
            let mut defined = true;
            for (a, b) in [(i, j), (j, i)] {
                let ta = |v: usize| tau(a, v) as i64;
                let sq = |v: usize| (2 * (ta(v) + 1)) as usize;
                let pick = |v: usize, x: i64| -> usize { (2 * (ta(v) + 1) + sg(x)) as usize };
                let ids = [
                    (24, tau(a, b)),
                    (6, tau(a, it)),
                    (6, tau(a, jt)),
                    (6, sq(b)),
                    (6, sq(b) + 1),
                    (2, pick(it, ta(it) - ta(jt))),
                    (4, pick(it, ta(jt) - ta(it))),
                    (2, pick(jt, ta(jt) - ta(it))),
                    (4, pick(jt, ta(it) - ta(jt))),
                    (2, 10),
                ];
                if ids.iter().any(|(_, l)| *l < 1 || *l > 10) {
                    defined = false;
                    break;
                }
                let ids: Vec<(i64, usize)> = ids.to_vec();
                let p = tilde_e5(e, if a == i { 1 } else { 2 }) - grp(a, q(1, 3), &ids)
                    + grp(b, q(2, 1), &[(1, tau(b, a))])
                    + grp(it, q(2, 1), &[(1, tau(it, a))]).scale(&(c.nn(i, it) * c.inv_r(i) + c.nn(j, it) * c.inv_r(j)))
                        .scale(&c.r[it])
                    + grp(jt, q(2, 1), &[(1, tau(jt, a))]).scale(&(c.nn(i, jt) * c.inv_r(i) + c.nn(j, jt) * c.inv_r(j)))
                        .scale(&c.r[jt]);
                built.push(p);
            }
            for (a, b, t) in [(i, j, 3usize), (j, i, 4usize)] {
                let sq = |x: usize, v: usize| 2 * (tau(x, v) + 1);
                let (Some(s1), Some(s2), Some(s3), Some(s4)) =
                    (sigma(a, it, b), sigma(a, jt, b), sigma(it, a, b), sigma(jt, a, b))
                else {
                    defined = false;
                    break;
                };
                let p = tilde_e5(e, t)
                    + grp(a, one.clone(), &[(36, tau(a, b)), (6, sq(a, b)), (6, sq(a, b) + 1), (2, s1), (2, s2), (1, 10)])
                    - grp(b, one.clone(), &[(24, tau(b, a)), (2, sq(b, a)), (2, sq(b, a) + 1)])
                    + grp(it, q(2, 1), &[(1, s3)]).scale(&(c.nn(i, it) * c.inv_r(i) + c.nn(j, it) * c.inv_r(j)))
                        .scale(&c.r[it])
                    + grp(jt, q(2, 1), &[(1, s4)]).scale(&(c.nn(i, jt) * c.inv_r(i) + c.nn(j, jt) * c.inv_r(j)))
                        .scale(&c.r[jt]);
                built.push(p);
            }
            if !defined {
                out.push(func(
                    format!("phi(E,5)_{},* [{reading}: index out of range]", e + 1),
                    None,
                    &[],
                    BaryPoly::zero(),
                ));
                continue;
            }
            for (t, f) in built.into_iter().enumerate() {
                out.push(func(
                    format!("phi(E,5)_{},{} [{reading}]", e + 1, t + 1),
                    Some((DofKind::Edge, e, t)),
                    &ALL,
                    f,
                ));
            }
        }
    }
    out
}

/// Printed functions of the given family on a tet with rational heights.
/// `corrected` swaps in the repaired `phi(E,4)_{m,2..3}` and the
/// geometry-dependent coupling of `phi(N,5)`.
pub fn closed_form_functions(
    family: ElementFamily,
    g: &SimplexGeometry<Q>,
    corrected: bool,
) -> Result<Vec<ClosedFormFunction>> {
    let c = Ctx::new(g)?;
    Ok(match family {
        ElementFamily::P4E6 => p4e6_functions(&c, corrected),
        ElementFamily::P5E7 => p5e7_functions(&c, corrected),
        ElementFamily::GeneralEnriched(_) => Vec::new(),
    })
}

/// Outcome of evaluating one printed function against the DOFs in scope.
#[derive(Clone, Debug)]
pub struct DualityFinding {
    pub name: String,
    pub holds: bool,
    /// `(dof label, value, expected)` for every violated relation.
    pub offending: Vec<(String, Q, Q)>,
    /// Set when the function is a dual function, but of another DOF.
    pub dual_to: Option<String>,
}

pub fn dof_label(d: &DofSpec, index: usize) -> String {
    let k = match d.kind {
        DofKind::Edge => "E",
        DofKind::Face => "F",
        DofKind::Cell => "T",
        DofKind::Normal => "N",
    };
    if d.kind == DofKind::Cell {
        format!("{k}_{}", index + 1)
    } else {
        format!("{k}_{},{}", d.entity + 1, index + 1)
    }
}

/// Applies every DOF in scope (unit normals) to every function.
pub fn check_duality(
    family: ElementFamily,
    g: &SimplexGeometry<Q>,
    functions: &[ClosedFormFunction],
) -> Result<Vec<DualityFinding>> {
    let eval = DofEvaluator::new(g, NormalScaling::Unit)?;
    let dofs = dof_list(family, &Orientation::Cyclic, [1; 4]);
    // index of each DOF inside its (kind, entity) block
    let mut block_index = Vec::with_capacity(dofs.len());
    for (n, d) in dofs.iter().enumerate() {
        let before = dofs[..n]
            .iter()
            .filter(|o| o.kind == d.kind && o.entity == d.entity)
            .count();
        block_index.push(before);
    }
    Ok(functions
        .iter()
        .map(|f| {
            if f.scope.is_empty() {
                return DualityFinding {
                    name: f.name.clone(),
                    holds: false,
                    offending: Vec::new(),
                    dual_to: None,
                };
            }
            let mut offending = Vec::new();
            let mut nonzero = Vec::new();
            for (d, idx) in dofs.iter().zip(&block_index) {
                if !f.scope.contains(&d.kind) {
                    continue;
                }
                let v = eval.apply(d, &f.poly);
                if v != q(0, 1) {
                    nonzero.push((dof_label(d, *idx), v.clone()));
                }
                let expected = if f.target == Some((d.kind, d.entity, *idx)) {
                    q(1, 1)
                } else {
                    q(0, 1)
                };
                if v != expected {
                    offending.push((dof_label(d, *idx), v, expected));
                }
            }
            let holds = offending.is_empty();
            let dual_to = match nonzero.as_slice() {
                [(label, v)] if !holds && *v == q(1, 1) => Some(label.clone()),
                _ => None,
            };
            DualityFinding {
                name: f.name.clone(),
                holds,
                offending,
                dual_to,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_helpers_match_printed_examples() {
        // 1-based examples: tau_3(1) = 2, sigma_2(4,1) = 6, sigma_2(1,4) = 9, sigma_3(1,4) = 7
        assert_eq!(tau(2, 0), 2);
        assert_eq!(tau(3, 0), 1);
        assert_eq!(sigma(1, 3, 0), Some(6));
        assert_eq!(sigma(1, 0, 3), Some(9));
        assert_eq!(sigma(2, 0, 3), Some(7));
        assert_eq!(sigma(1, 1, 0), None);
    }
}

