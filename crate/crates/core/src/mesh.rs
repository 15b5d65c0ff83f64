//! Uniform Kuhn meshes of the unit cube and their entity maps.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{face_vertices, SimplexGeometry, EDGES};

pub const MAX_LEVEL: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Positively oriented global vertex quadruples.
    pub tets: Vec<[usize; 4]>,
    pub level: usize,
}

/// `(2^(level-1))^3` cubes, each cut into the six Kuhn tetrahedra around
/// its `(0,0,0)-(1,1,1)` diagonal.
pub fn uniform_cube_mesh(level: usize) -> Result<Mesh> {
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(Error::MeshLevel(level));
    }
    let n = 1usize << (level - 1);
    let h = 1.0 / n as f64;
    let np = n + 1;
    let id = |i: usize, j: usize, k: usize| (i * np + j) * np + k;
    let mut vertices = Vec::with_capacity(np * np * np);
    for i in 0..np {
        for j in 0..np {
            for k in 0..np {
                vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for perm in PERMS {
                    let mut p = [i, j, k];
                    let mut t = [id(p[0], p[1], p[2]); 4];
                    for (s, axis) in perm.iter().enumerate() {
                        p[*axis] += 1;
                        t[s + 1] = id(p[0], p[1], p[2]);
                    }
                    let even = matches!(perm, [0, 1, 2] | [1, 2, 0] | [2, 0, 1]);
                    if !even {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }
    let mesh = Mesh {
        vertices,
        tets,
        level,
    };
    debug_assert!(mesh.tets.iter().enumerate().all(|(t, _)| mesh.geometry(t).is_ok()));
    Ok(mesh)
}

impl Mesh {
    /// Cube edge length `2^-(level-1)`.
    pub fn h(&self) -> f64 {
        1.0 / (1usize << (self.level - 1)) as f64
    }

    pub fn tet_vertices(&self, t: usize) -> [[f64; 3]; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn geometry(&self, t: usize) -> Result<SimplexGeometry<f64>> {
        SimplexGeometry::from_f64(self.tet_vertices(t))
    }

    pub fn total_volume(&self) -> Result<f64> {
        (0..self.tets.len()).try_fold(0.0, |acc, t| Ok(acc + self.geometry(t)?.volume()))
    }

    /// ASCII export: "nv nt", coordinates, then 0-based tets.
    pub fn write_ascii(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.vertices.len(), self.tets.len())?;
        for v in &self.vertices {
            writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.tets {
            writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3])?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EntityMaps {
    /// Sorted vertex pairs, in id order.
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub edge_index: HashMap<[usize; 2], usize>,
    pub face_index: HashMap<[usize; 3], usize>,
    /// Incident tets, smaller id first; the second is `None` on the boundary.
    pub face_tets: Vec<(usize, Option<usize>)>,
    /// Outward normal of the first incident tet.
    pub face_normals: Vec<[f64; 3]>,
    pub boundary_edges: Vec<bool>,
    pub boundary_faces: Vec<bool>,
    /// Global id of each local edge / face (face `m` opposite local vertex `m`).
    pub tet_edges: Vec<[usize; 6]>,
    pub tet_faces: Vec<[usize; 4]>,
}

fn sorted<const N: usize>(mut a: [usize; N]) -> [usize; N] {
    a.sort_unstable();
    a
}

fn on_common_boundary_plane(points: &[[f64; 3]]) -> bool {
    (0..3).any(|axis| {
        [0.0, 1.0]
            .iter()
            .any(|&side| points.iter().all(|p| (p[axis] - side).abs() < 1e-12))
    })
}

pub fn extract_entities(mesh: &Mesh) -> Result<EntityMaps> {
    let mut edge_set = Vec::new();
    let mut face_set = Vec::new();
    for t in &mesh.tets {
        for [a, b] in EDGES {
            edge_set.push(sorted([t[a], t[b]]));
        }
        for m in 0..4 {
            let [a, b, c] = face_vertices(m);
            face_set.push(sorted([t[a], t[b], t[c]]));
        }
    }
    edge_set.sort_unstable();
    edge_set.dedup();
    face_set.sort_unstable();
    face_set.dedup();
    let edge_index: HashMap<[usize; 2], usize> =
        edge_set.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let face_index: HashMap<[usize; 3], usize> =
        face_set.iter().enumerate().map(|(i, f)| (*f, i)).collect();

    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); face_set.len()];
    let mut tet_edges = Vec::with_capacity(mesh.tets.len());
    let mut tet_faces = Vec::with_capacity(mesh.tets.len());
    for (ti, t) in mesh.tets.iter().enumerate() {
        tet_edges.push(std::array::from_fn(|e| {
            let [a, b] = EDGES[e];
            edge_index[&sorted([t[a], t[b]])]
        }));
        let faces: [usize; 4] = std::array::from_fn(|m| {
            let [a, b, c] = face_vertices(m);
            face_index[&sorted([t[a], t[b], t[c]])]
        });
        for (m, f) in faces.iter().enumerate() {
            incident[*f].push((ti, m));
        }
        tet_faces.push(faces);
    }

    let mut face_tets = Vec::with_capacity(face_set.len());
    let mut face_normals = Vec::with_capacity(face_set.len());
    for (f, inc) in incident.iter().enumerate() {
        if inc.len() > 2 || inc.is_empty() {
            return Err(Error::NonConforming(face_set[f]));
        }
        let (t0, m0) = inc[0];
        let other = inc.get(1).map(|x| x.0);
        face_tets.push((t0, other));
        face_normals.push(mesh.geometry(t0)?.outward_normal(m0)?);
    }
    let boundary_faces: Vec<bool> = face_tets.iter().map(|(_, o)| o.is_none()).collect();
    let boundary_edges = edge_set
        .iter()
        .map(|e| on_common_boundary_plane(&[mesh.vertices[e[0]], mesh.vertices[e[1]]]))
        .collect();
    Ok(EntityMaps {
        edges: edge_set,
        faces: face_set,
        edge_index,
        face_index,
        face_tets,
        face_normals,
        boundary_edges,
        boundary_faces,
        tet_edges,
        tet_faces,
    })
}

impl EntityMaps {
    /// +1 when tet `t`'s outward normal on local face `m` is the stored
    /// global normal.
    pub fn normal_sign(&self, t: usize, m: usize) -> i8 {
        let f = self.tet_faces[t][m];
        if self.face_tets[f].0 == t {
            1
        } else {
            -1
        }
    }
}
