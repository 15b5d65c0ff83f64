//! Element families and their shape-function spans.

use std::fmt;
use std::str::FromStr;

use crate::barypoly::{monomials_of_degree, BaryPoly, MultiIndex4};
use crate::error::{Error, Result};
use crate::geometry::SimplexGeometry;
use crate::linalg::nullspace;
use crate::scalar::Scalar;

use super::dofs::{cell_indices, face_indices, DofEvaluator, DofKind, DofSpec, NormalScaling};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementFamily {
    /// `P_l` plus four per-face spaces of `b_F^2 P_{l-2}` functions with
    /// vanishing value moments and zero mean normal derivative.
    GeneralEnriched(usize),
    /// `P_4` plus 20 sextic functions.
    P4E6,
    /// `P_5` plus 36 septic functions.
    P5E7,
}

impl ElementFamily {
    pub fn general(ell: usize) -> Result<Self> {
        if ell < 3 {
            return Err(Error::Unsupported(format!(
                "enriched family needs l >= 3, got {ell}"
            )));
        }
        Ok(ElementFamily::GeneralEnriched(ell))
    }

    pub fn ell(&self) -> usize {
        match self {
            ElementFamily::GeneralEnriched(l) => *l,
            ElementFamily::P4E6 => 4,
            ElementFamily::P5E7 => 5,
        }
    }

    /// Highest polynomial degree in the shape space.
    pub fn max_degree(&self) -> usize {
        match self {
            ElementFamily::GeneralEnriched(l) => l + 4,
            ElementFamily::P4E6 => 6,
            ElementFamily::P5E7 => 7,
        }
    }

    pub fn edge_block(&self) -> usize {
        self.ell() - 1
    }

    pub fn face_block(&self) -> usize {
        let l = self.ell();
        (l - 2) * (l - 1) / 2
    }

    pub fn cell_block(&self) -> usize {
        let l = self.ell();
        if l < 4 {
            0
        } else {
            (l - 3) * (l - 2) * (l - 1) / 6
        }
    }

    pub fn normal_block(&self) -> usize {
        let l = self.ell();
        l * (l - 1) / 2
    }

    pub fn ndofs(&self) -> usize {
        6 * self.edge_block() + 4 * self.face_block() + self.cell_block() + 4 * self.normal_block()
    }

    /// Short name as accepted on the command line.
    pub fn name(&self) -> String {
        match self {
            ElementFamily::GeneralEnriched(3) => "p3".into(),
            ElementFamily::GeneralEnriched(4) => "p4e8".into(),
            ElementFamily::GeneralEnriched(l) => format!("general:{l}"),
            ElementFamily::P4E6 => "p4e6".into(),
            ElementFamily::P5E7 => "p5e7".into(),
        }
    }

    /// Space label such as `P3+8P7`.
    pub fn label(&self) -> String {
        match self {
            ElementFamily::GeneralEnriched(l) => {
                let extra = 4 * (l * (l - 1) / 2 - 1);
                format!("P{l}+{extra}P{}", l + 4)
            }
            ElementFamily::P4E6 => "P4+20P6".into(),
            ElementFamily::P5E7 => "P5+36P7".into(),
        }
    }
}

/// `(l^3 + 18 l^2 - l - 18) / 6`.
pub fn closed_form_ndofs(l: usize) -> usize {
    (l * l * l + 18 * l * l - l - 18) / 6
}

impl fmt::Display for ElementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ElementFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p3" => Ok(ElementFamily::GeneralEnriched(3)),
            "p4e8" => Ok(ElementFamily::GeneralEnriched(4)),
            "p4e6" => Ok(ElementFamily::P4E6),
            "p5e7" => Ok(ElementFamily::P5E7),
            other => {
                let l = other
                    .strip_prefix("general:")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::Unsupported(format!("unknown element `{s}`")))?;
                ElementFamily::general(l)
            }
        }
    }
}

/// 0-based `(m, t)` pairs selecting the face-bubble functions.
pub const FACE_PAIRS: [(usize, usize); 8] = [
    (0, 2),
    (0, 3),
    (1, 3),
    (1, 0),
    (2, 0),
    (2, 1),
    (3, 1),
    (3, 2),
];

fn lam<S: Scalar>(i: usize) -> BaryPoly<S> {
    BaryPoly::lambda(i)
}

fn c<S: Scalar>(n: i64, d: i64) -> S {
    S::from_ratio(n, d)
}

/// `sum_k coeffs[k] lambda_i^k`.
fn upoly<S: Scalar>(i: usize, coeffs: &[i64]) -> BaryPoly<S> {
    BaryPoly::from_terms(coeffs.iter().enumerate().map(|(k, &a)| {
        let mut e = [0; 4];
        e[i] = k as u32;
        (MultiIndex4(e), S::from_i64(a))
    }))
}

/// The `l = 4` normal-moment functions, indexed with
/// 0-based vertices: `s = 0` vertex function, `s = 1 + t` edge type,
/// `s = 5 + t` face-bubble type.
pub fn phi_tilde_n4<S: Scalar>(m: usize, s: usize) -> BaryPoly<S> {
    let g = upoly::<S>(m, &[-2, 21, -56, 42]);
    match s {
        0 => upoly::<S>(m, &[0, -4, 30, -60, 35]).scale(&c(1, 4)),
        1..=4 => {
            let t = s - 1;
            (&(&lam::<S>(t).pow(2) * &lam(m)) * &g).scale(&c(1, 2))
        }
        _ => {
            let t = s - 5;
            (&BaryPoly::face_bubble(t) * &g).scale(&c(1, 2))
        }
    }
}

/// The `l = 5` normal-moment functions: `s = 0` vertex, `1 + t`, `5 + t`,
/// `9 + t` and `13` (the corner function), 0-based vertices.
pub fn phi_tilde_n5<S: Scalar>(m: usize, s: usize) -> BaryPoly<S> {
    let g1 = upoly::<S>(m, &[1, -16, 72, -120, 66]);
    match s {
        0 => (&lam::<S>(m) * &upoly(m, &[5, -60, 210, -280, 126])).scale(&c(-1, 5)),
        1..=4 => {
            let t = s - 1;
            -(&(&lam::<S>(t).pow(2) * &lam(m)) * &g1)
        }
        5..=8 => {
            let t = s - 5;
            let lm = |k: u32| lam::<S>(m).pow(k);
            let lt = lam::<S>(t);
            let inner = lm(4).scale(&c(99, 1)) - (&lm(3) * &lt).scale(&c(165, 1))
                - lm(3).scale(&c(135, 1))
                + (&lm(2) * &lt).scale(&c(180, 1))
                + lm(2).scale(&c(54, 1))
                - (&lt * &lm(1)).scale(&c(54, 1))
                - lm(1).scale(&c(6, 1))
                + lt.scale(&c(4, 1));
            (&(&lt.pow(2) * &lam(m)) * &inner).scale(&c(-1, 4))
        }
        9..=12 => {
            let t = s - 9;
            -(&BaryPoly::face_bubble(t) * &g1)
        }
        _ => {
            let i = (m + 1) % 4;
            let k = (m + 3) % 4;
            let g = upoly::<S>(m, &[-4, 54, -180, 165]);
            (&(&lam::<S>(i) * &BaryPoly::face_bubble(k)) * &g).scale(&c(1, 4))
        }
    }
}

/// Enrichment functions added on top of `P_l`.
pub fn enrichment_span<S: Scalar>(
    family: ElementFamily,
    g: &SimplexGeometry<S>,
) -> Result<Vec<BaryPoly<S>>> {
    match family {
        ElementFamily::P4E6 => {
            let mut out = Vec::with_capacity(20);
            for m in 0..4 {
                for t in (0..4).filter(|&t| t != m) {
                    out.push(phi_tilde_n4(m, 1 + t));
                }
            }
            for (m, t) in FACE_PAIRS {
                out.push(phi_tilde_n4(m, 5 + t));
            }
            Ok(out)
        }
        ElementFamily::P5E7 => {
            let mut out = Vec::with_capacity(36);
            for m in 0..4 {
                for t in (0..4).filter(|&t| t != m) {
                    out.push(phi_tilde_n5(m, 1 + t));
                }
            }
            for m in 0..4 {
                for t in (0..4).filter(|&t| t != m) {
                    out.push(phi_tilde_n5(m, 5 + t));
                }
            }
            for (m, t) in FACE_PAIRS {
                out.push(phi_tilde_n5(m, 9 + t));
            }
            for m in 0..4 {
                out.push(phi_tilde_n5(m, 13));
            }
            Ok(out)
        }
        ElementFamily::GeneralEnriched(l) => {
            let mut out = Vec::new();
            for m in 0..4 {
                out.extend(face_enrichment(l, m, g)?);
            }
            Ok(out)
        }
    }
}

/// Basis of `{ v in b_{F_m}^2 P_{l-2} : face moments of degree l-3 on F_m,
/// cell moments of degree l-4 and the mean normal derivative on F_m vanish }`.
pub fn face_enrichment<S: Scalar>(
    l: usize,
    m: usize,
    g: &SimplexGeometry<S>,
) -> Result<Vec<BaryPoly<S>>> {
    let bubble2 = BaryPoly::<S>::face_bubble(m).pow(2);
    let candidates: Vec<BaryPoly<S>> = monomials_of_degree((l - 2) as u32)
        .into_iter()
        .map(|a| &bubble2 * &BaryPoly::monomial(a, S::one()))
        .collect();

    let face = super::dofs::Orientation::Ascending.face(m);
    let mut rows: Vec<DofSpec> = face_indices(l - 3)
        .into_iter()
        .map(|idx| DofSpec {
            kind: DofKind::Face,
            entity: m,
            vertices: face.to_vec(),
            monomial: MultiIndex4::on_vertices(&face, &idx),
            normal_sign: 1,
        })
        .collect();
    if l >= 4 {
        rows.extend(cell_indices(l - 4).into_iter().map(|idx| DofSpec {
            kind: DofKind::Cell,
            entity: 0,
            vertices: vec![0, 1, 2, 3],
            monomial: MultiIndex4(idx),
            normal_sign: 1,
        }));
    }
    rows.push(DofSpec {
        kind: DofKind::Normal,
        entity: m,
        vertices: face.to_vec(),
        monomial: MultiIndex4::ZERO,
        normal_sign: 1,
    });

    let eval = DofEvaluator::new(g, NormalScaling::Height)?;
    let matrix: Vec<Vec<S>> = rows
        .iter()
        .map(|d| candidates.iter().map(|p| eval.apply(d, p)).collect())
        .collect();
    let kernel = nullspace(&matrix, candidates.len());
    let expected = l * (l - 1) / 2 - 1;
    if kernel.len() != expected {
        return Err(Error::NullspaceDimension {
            face: m,
            found: kernel.len(),
            expected,
        });
    }
    Ok(kernel
        .into_iter()
        .map(|v| {
            let mut p = BaryPoly::zero();
            for (coef, cand) in v.iter().zip(&candidates) {
                if !coef.is_zero() {
                    p += cand.scale(coef);
                }
            }
            p
        })
        .collect())
}

/// The full spanning set: degree-`l` monomials followed by the enrichment.
pub fn shape_span<S: Scalar>(
    family: ElementFamily,
    g: &SimplexGeometry<S>,
) -> Result<Vec<BaryPoly<S>>> {
    let mut span: Vec<BaryPoly<S>> = monomials_of_degree(family.ell() as u32)
        .into_iter()
        .map(|mi| BaryPoly::monomial(mi, S::one()))
        .collect();
    span.extend(enrichment_span(family, g)?);
    Ok(span)
}
