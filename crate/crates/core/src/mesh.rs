//! Structured triangulation of the unit square.
//!
//! Vertex `(i, j)` sits at `(i/M, j/M)` and has index `j (M+1) + i`. Each grid
//! cell is cut along its lower-left to upper-right diagonal, so the longest
//! edge, and hence the mesh size, is `sqrt(2)/M`.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

/// Local edge `k` joins local vertices `LOCAL_EDGES[k]`.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

#[derive(Debug, Clone)]
pub struct Mesh {
    m: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<Vec<usize>>,
    h: f64,
}

impl Mesh {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Counterclockwise vertex triples.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Edges as `(low, high)` vertex pairs, sorted.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge index of each local edge (see [`LOCAL_EDGES`]).
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.tri_edges
    }

    /// Triangles incident to each edge.
    pub fn edge_triangles(&self) -> &[Vec<usize>] {
        &self.edge_tris
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Half the cross product of the two edges leaving vertex 0.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edge_tris.iter().filter(|ts| ts.len() == 1).count()
    }

    /// Debug dump: `v x y` per vertex, then `t i j k` per triangle (0-based).
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {:.17e} {:.17e}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

pub fn build_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "mesh needs at least one subdivision per side".into(),
        ));
    }
    let n = m + 1;
    let inv = 1.0 / m as f64;
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push([i as f64 * inv, j as f64 * inv]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let v00 = j * n + i;
            let v10 = v00 + 1;
            let v01 = v00 + n;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edges: Vec<[usize; 2]> = triangles
        .iter()
        .flat_map(|t| {
            LOCAL_EDGES.iter().map(move |&(a, b)| {
                let (x, y) = (t[a], t[b]);
                [x.min(y), x.max(y)]
            })
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let index: HashMap<[usize; 2], usize> =
        edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();

    let mut edge_tris = vec![Vec::with_capacity(2); edges.len()];
    let tri_edges = triangles
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let mut out = [0; 3];
            for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
                let key = [t[a].min(t[b]), t[a].max(t[b])];
                out[k] = index[&key];
                edge_tris[out[k]].push(ti);
            }
            out
        })
        .collect();

    Ok(Mesh {
        m,
        vertices,
        triangles,
        edges,
        tri_edges,
        edge_tris,
        h: std::f64::consts::SQRT_2 * inv,
    })
}
