//! Metric data of a single tetrahedron.
//!
//! Local numbering: vertices `0..4`; face `m` is the face opposite vertex
//! `m`; edges are the six vertex pairs in lexicographic order ([`EDGES`]).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Local edges as ascending vertex pairs.
pub const EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Vertices of face `m` (all vertices except `m`) in ascending order.
pub fn face_vertices(m: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for v in 0..4 {
        if v != m {
            out[k] = v;
            k += 1;
        }
    }
    out
}

/// Local id of the edge joining `a` and `b`.
pub fn edge_id(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    EDGES.iter().position(|e| *e == [a, b]).expect("valid edge")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexGeometry<S> {
    vertices: [[S; 3]; 4],
    grad: [[S; 3]; 4],
    volume: S,
}

fn sub3<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> [S; 3] {
    [
        a[0].clone() - b[0].clone(),
        a[1].clone() - b[1].clone(),
        a[2].clone() - b[2].clone(),
    ]
}

pub(crate) fn dot3<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> S {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

fn cross3<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> [S; 3] {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

impl<S: Scalar> SimplexGeometry<S> {
    /// Builds the geometry of a positively oriented, non-degenerate tet.
    pub fn new(vertices: [[S; 3]; 4]) -> Result<Self> {
        let e1 = sub3(&vertices[1], &vertices[0]);
        let e2 = sub3(&vertices[2], &vertices[0]);
        let e3 = sub3(&vertices[3], &vertices[0]);
        // rows of the inverse Jacobian are the gradients of lambda_1..3
        let c23 = cross3(&e2, &e3);
        let c31 = cross3(&e3, &e1);
        let c12 = cross3(&e1, &e2);
        let det = dot3(&e1, &c23);

        let det_f = det.to_f64();
        if S::EXACT {
            if det.is_zero() {
                return Err(Error::DegenerateGeometry(0.0));
            }
        } else {
            let mut span = 0.0f64;
            for axis in 0..3 {
                let (lo, hi) = vertices.iter().fold((f64::MAX, f64::MIN), |(lo, hi), v| {
                    let x = v[axis].to_f64();
                    (lo.min(x), hi.max(x))
                });
                span = span.max(hi - lo);
            }
            if det_f.abs() / 6.0 < 1e-14 * span.powi(3) {
                return Err(Error::DegenerateGeometry(det_f / 6.0));
            }
        }
        if det.is_negative() {
            return Err(Error::NegativeOrientation(det_f / 6.0));
        }

        let scale = |v: [S; 3]| -> [S; 3] {
            [
                v[0].clone() / det.clone(),
                v[1].clone() / det.clone(),
                v[2].clone() / det.clone(),
            ]
        };
        let g1 = scale(c23);
        let g2 = scale(c31);
        let g3 = scale(c12);
        let g0 = [
            -(g1[0].clone() + g2[0].clone() + g3[0].clone()),
            -(g1[1].clone() + g2[1].clone() + g3[1].clone()),
            -(g1[2].clone() + g2[2].clone() + g3[2].clone()),
        ];
        let volume = det / S::from_i64(6);
        Ok(Self {
            vertices,
            grad: [g0, g1, g2, g3],
            volume,
        })
    }

    pub fn from_f64(vertices: [[f64; 3]; 4]) -> Result<Self> {
        Self::new(vertices.map(|v| v.map(S::from_f64)))
    }

    /// The unit reference tet with vertices 0, e_x, e_y, e_z.
    pub fn reference() -> Self {
        Self::from_f64([
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .expect("reference tet is valid")
    }

    pub fn vertices(&self) -> &[[S; 3]; 4] {
        &self.vertices
    }

    pub fn grad_lambda(&self, i: usize) -> &[S; 3] {
        &self.grad[i]
    }

    pub fn volume(&self) -> &S {
        &self.volume
    }

    /// `grad(lambda_i) . grad(lambda_j)`.
    pub fn gram(&self, i: usize, j: usize) -> S {
        dot3(&self.grad[i], &self.grad[j])
    }

    /// `r_m^2 = 1 / |grad lambda_m|^2`, always representable.
    pub fn height_squared(&self, m: usize) -> S {
        S::one() / self.gram(m, m)
    }

    /// Distance `r_m` from vertex `m` to face `m`.
    pub fn height(&self, m: usize) -> Result<S> {
        self.height_squared(m)
            .sqrt_exact()
            .ok_or(Error::Irrational("face height"))
    }

    /// `|F_m| = 3 |T| / r_m`.
    pub fn face_area(&self, m: usize) -> Result<S> {
        let g = self
            .gram(m, m)
            .sqrt_exact()
            .ok_or(Error::Irrational("face area"))?;
        Ok(S::from_i64(3) * self.volume.clone() * g)
    }

    pub fn edge_length(&self, e: usize) -> Result<S> {
        let [a, b] = EDGES[e];
        let d = sub3(&self.vertices[b], &self.vertices[a]);
        dot3(&d, &d)
            .sqrt_exact()
            .ok_or(Error::Irrational("edge length"))
    }

    /// Outward unit normal of face `m`: `-grad(lambda_m) / |grad(lambda_m)|`.
    pub fn outward_normal(&self, m: usize) -> Result<[S; 3]> {
        let norm = self
            .gram(m, m)
            .sqrt_exact()
            .ok_or(Error::Irrational("face normal"))?;
        Ok(self.grad[m].clone().map(|c| -c / norm.clone()))
    }

    /// Physical point of barycentric coordinates `w`.
    pub fn point(&self, w: &[S; 4]) -> [S; 3] {
        let mut x = [S::zero(), S::zero(), S::zero()];
        for (wi, v) in w.iter().zip(&self.vertices) {
            for k in 0..3 {
                x[k] = x[k].clone() + wi.clone() * v[k].clone();
            }
        }
        x
    }

    /// Barycentric coordinates of the physical point `x`.
    pub fn barycentric(&self, x: &[S; 3]) -> [S; 4] {
        let mut w: [S; 4] = std::array::from_fn(|_| S::zero());
        for i in 1..4 {
            let d = sub3(x, &self.vertices[0]);
            w[i] = dot3(&self.grad[i], &d);
        }
        w[0] = S::one() - w[1].clone() - w[2].clone() - w[3].clone();
        w
    }

    /// Measure of a local entity given by its vertex list (2, 3 or 4 ids).
    pub fn entity_measure(&self, vertices: &[usize]) -> Result<S> {
        match vertices.len() {
            2 => self.edge_length(edge_id(vertices[0], vertices[1])),
            3 => {
                let m = (0..4).find(|v| !vertices.contains(v)).expect("face");
                self.face_area(m)
            }
            4 => Ok(self.volume.clone()),
            n => Err(Error::Unsupported(format!("entity with {n} vertices"))),
        }
    }

    pub fn to_f64(&self) -> SimplexGeometry<f64> {
        SimplexGeometry {
            vertices: self.vertices.clone().map(|v| v.map(|c| c.to_f64())),
            grad: self.grad.clone().map(|v| v.map(|c| c.to_f64())),
            volume: self.volume.to_f64(),
        }
    }
}

impl SimplexGeometry<f64> {
    /// Longest edge length, used as the element size.
    pub fn diameter(&self) -> f64 {
        (0..6)
            .map(|e| self.edge_length(e).expect("float sqrt"))
            .fold(0.0, f64::max)
    }
}
