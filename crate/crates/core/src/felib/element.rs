//! Lagrange reference elements on the triangle `(0,0), (1,0), (0,1)`.
//!
//! Local node order: the three vertices, then `r - 1` nodes on each local edge
//! listed from the edge's first vertex to its second (edges as in
//! [`crate::mesh::LOCAL_EDGES`]), then interior nodes. Bases are written in
//! barycentric coordinates `L0 = 1 - x - y`, `L1 = x`, `L2 = y`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::mesh::LOCAL_EDGES;

const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

#[inline]
fn bary(p: [f64; 2]) -> [f64; 3] {
    [1.0 - p[0] - p[1], p[0], p[1]]
}

/// A nodal basis on the reference triangle.
pub trait ReferenceElement: Send + Sync + fmt::Debug {
    /// Registry key, e.g. `"P2"`.
    fn name(&self) -> &'static str;

    fn degree(&self) -> usize;

    fn num_nodes(&self) -> usize {
        let r = self.degree();
        (r + 1) * (r + 2) / 2
    }

    /// Nodes per edge interior.
    fn nodes_per_edge(&self) -> usize {
        self.degree() - 1
    }

    fn nodes_per_interior(&self) -> usize {
        let r = self.degree();
        if r >= 3 {
            (r - 1) * (r - 2) / 2
        } else {
            0
        }
    }

    /// Reference coordinates of the local nodes.
    fn nodes(&self) -> &[[f64; 2]];

    /// Writes all basis values at `p` into `out` (length `num_nodes`).
    fn eval_basis(&self, p: [f64; 2], out: &mut [f64]);

    /// Writes reference-space gradients at `p` into `out`.
    fn eval_grad(&self, p: [f64; 2], out: &mut [[f64; 2]]);
}

fn lagrange_nodes(r: usize) -> Vec<[f64; 2]> {
    let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut nodes = verts.to_vec();
    let rf = r as f64;
    for &(a, b) in &LOCAL_EDGES {
        for k in 1..r {
            let s = k as f64 / rf;
            nodes.push([
                (1.0 - s) * verts[a][0] + s * verts[b][0],
                (1.0 - s) * verts[a][1] + s * verts[b][1],
            ]);
        }
    }
    if r == 3 {
        nodes.push([1.0 / 3.0, 1.0 / 3.0]);
    }
    nodes
}

#[derive(Debug)]
pub struct LagrangeP1 {
    nodes: Vec<[f64; 2]>,
}

#[derive(Debug)]
pub struct LagrangeP2 {
    nodes: Vec<[f64; 2]>,
}

#[derive(Debug)]
pub struct LagrangeP3 {
    nodes: Vec<[f64; 2]>,
}

impl Default for LagrangeP1 {
    fn default() -> Self {
        Self {
            nodes: lagrange_nodes(1),
        }
    }
}

impl Default for LagrangeP2 {
    fn default() -> Self {
        Self {
            nodes: lagrange_nodes(2),
        }
    }
}

impl Default for LagrangeP3 {
    fn default() -> Self {
        Self {
            nodes: lagrange_nodes(3),
        }
    }
}

impl ReferenceElement for LagrangeP1 {
    fn name(&self) -> &'static str {
        "P1"
    }

    fn degree(&self) -> usize {
        1
    }

    fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    fn eval_basis(&self, p: [f64; 2], out: &mut [f64]) {
        out[..3].copy_from_slice(&bary(p));
    }

    fn eval_grad(&self, _p: [f64; 2], out: &mut [[f64; 2]]) {
        out[..3].copy_from_slice(&DL);
    }
}

impl ReferenceElement for LagrangeP2 {
    fn name(&self) -> &'static str {
        "P2"
    }

    fn degree(&self) -> usize {
        2
    }

    fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    fn eval_basis(&self, p: [f64; 2], out: &mut [f64]) {
        let l = bary(p);
        for i in 0..3 {
            out[i] = l[i] * (2.0 * l[i] - 1.0);
        }
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            out[3 + k] = 4.0 * l[a] * l[b];
        }
    }

    fn eval_grad(&self, p: [f64; 2], out: &mut [[f64; 2]]) {
        let l = bary(p);
        for i in 0..3 {
            let c = 4.0 * l[i] - 1.0;
            out[i] = [c * DL[i][0], c * DL[i][1]];
        }
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            out[3 + k] = [
                4.0 * (l[b] * DL[a][0] + l[a] * DL[b][0]),
                4.0 * (l[b] * DL[a][1] + l[a] * DL[b][1]),
            ];
        }
    }
}

impl ReferenceElement for LagrangeP3 {
    fn name(&self) -> &'static str {
        "P3"
    }

    fn degree(&self) -> usize {
        3
    }

    fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    fn eval_basis(&self, p: [f64; 2], out: &mut [f64]) {
        let l = bary(p);
        for i in 0..3 {
            out[i] = 0.5 * l[i] * (3.0 * l[i] - 1.0) * (3.0 * l[i] - 2.0);
        }
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            // node at 1/3 along a->b is nearer a
            out[3 + 2 * k] = 4.5 * l[a] * l[b] * (3.0 * l[a] - 1.0);
            out[4 + 2 * k] = 4.5 * l[a] * l[b] * (3.0 * l[b] - 1.0);
        }
        out[9] = 27.0 * l[0] * l[1] * l[2];
    }

    fn eval_grad(&self, p: [f64; 2], out: &mut [[f64; 2]]) {
        let l = bary(p);
        for i in 0..3 {
            let c = 0.5 * (27.0 * l[i] * l[i] - 18.0 * l[i] + 2.0);
            out[i] = [c * DL[i][0], c * DL[i][1]];
        }
        let comb = |ca: f64, a: usize, cb: f64, b: usize| {
            [ca * DL[a][0] + cb * DL[b][0], ca * DL[a][1] + cb * DL[b][1]]
        };
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            let (la, lb) = (l[a], l[b]);
            out[3 + 2 * k] = comb(4.5 * (6.0 * la * lb - lb), a, 4.5 * (3.0 * la * la - la), b);
            out[4 + 2 * k] = comb(4.5 * (3.0 * lb * lb - lb), a, 4.5 * (6.0 * la * lb - la), b);
        }
        let mut g = [0.0; 2];
        for d in 0..2 {
            g[d] =
                27.0 * (DL[0][d] * l[1] * l[2] + l[0] * DL[1][d] * l[2] + l[0] * l[1] * DL[2][d]);
        }
        out[9] = g;
    }
}

type Factory = Box<dyn Fn() -> Arc<dyn ReferenceElement> + Send + Sync>;

/// Reference elements keyed by name.
pub struct ElementRegistry {
    factories: BTreeMap<String, Factory>,
}

impl ElementRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding `P1`, `P2` and `P3`.
    pub fn with_lagrange() -> Self {
        let mut reg = Self::empty();
        reg.register("P1", || Arc::new(LagrangeP1::default()));
        reg.register("P2", || Arc::new(LagrangeP2::default()));
        reg.register("P3", || Arc::new(LagrangeP3::default()));
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Arc<dyn ReferenceElement> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn ReferenceElement>> {
        self.factories.get(name).map(|f| f())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }
}

impl fmt::Debug for ElementRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

pub fn default_registry() -> &'static ElementRegistry {
    static REG: OnceLock<ElementRegistry> = OnceLock::new();
    REG.get_or_init(ElementRegistry::with_lagrange)
}

/// Lagrange element of degree `r` from the default registry.
pub fn reference_element(r: usize) -> Result<Arc<dyn ReferenceElement>> {
    default_registry()
        .get(&format!("P{r}"))
        .ok_or_else(|| Error::InvalidArgument(format!("unsupported element degree {r}")))
}
