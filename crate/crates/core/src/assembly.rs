//! Galerkin assembly on an [`FeSpace`]: mass, frozen-coefficient stiffness,
//! load vectors and error norms.
//!
//! No boundary integrals appear anywhere; the zero-flux condition is natural.

use crate::coeff::DiffusionParams;
use crate::error::Result;
use crate::felib::{CellGeometry, FeField, FeSpace, QuadratureRule, Tabulation};
use crate::sparsela::{to_csr, CsrMatrix, TripletBuffer};

/// Precomputed sparsity pattern and tabulations for repeated assembly on one space.
#[derive(Debug, Clone)]
pub struct Assembler {
    space: FeSpace,
    tab: Tabulation,
    pattern: CsrMatrix,
    /// `slots[t * nloc^2 + i * nloc + j]` is the CSR position of local entry `(i, j)`.
    slots: Vec<usize>,
    /// Reference mass matrix; the physical one is this times the Jacobian determinant.
    ref_mass: Vec<f64>,
    /// Cells with bitwise-identical affine maps (up to translation) share a class.
    cell_class: Vec<usize>,
    classes: Vec<GeometryClass>,
    /// Physical quadrature points, `nq` per cell in cell order.
    quad_points: Vec<[f64; 2]>,
}

/// Tables shared by all cells with the same Jacobian.
#[derive(Debug, Clone)]
struct GeometryClass {
    /// Physical basis gradients, `[q * nloc + i]`.
    grads: Vec<[f64; 2]>,
    /// `w_q |det J| grad phi_i . grad phi_j` for `j >= i`, packed per point.
    products: Vec<f64>,
}

impl Assembler {
    pub fn new(space: &FeSpace, rule: &QuadratureRule) -> Self {
        let n = space.ndof();
        let nloc = space.nloc();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in 0..space.num_cells() {
            let dofs = space.cell_dofs(t);
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut cols = Vec::new();
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            cols.extend_from_slice(row);
            row_offsets.push(cols.len());
        }
        let pattern = CsrMatrix::from_pattern(n, row_offsets, cols)
            .expect("pattern built from sorted unique rows");

        let mut slots = Vec::with_capacity(space.num_cells() * nloc * nloc);
        for t in 0..space.num_cells() {
            let dofs = space.cell_dofs(t);
            for &i in dofs {
                for &j in dofs {
                    slots.push(pattern.slot(i, j).expect("entry in pattern"));
                }
            }
        }

        let tab = space.tabulate(rule);
        let mut ref_mass = vec![0.0; nloc * nloc];
        for q in 0..tab.num_points() {
            let phi = &tab.values[q * nloc..(q + 1) * nloc];
            for i in 0..nloc {
                for j in 0..nloc {
                    ref_mass[i * nloc + j] += tab.weights[q] * phi[i] * phi[j];
                }
            }
        }

        let nq = tab.num_points();
        let mut keys: Vec<[u64; 4]> = Vec::new();
        let mut classes = Vec::new();
        let mut cell_class = Vec::with_capacity(space.num_cells());
        let mut quad_points = Vec::with_capacity(space.num_cells() * nq);
        for t in 0..space.num_cells() {
            let geo = space.geometry(t);
            let key =
                [geo.jac[0][0], geo.jac[0][1], geo.jac[1][0], geo.jac[1][1]].map(f64::to_bits);
            let class = match keys.iter().position(|k| *k == key) {
                Some(c) => c,
                None => {
                    keys.push(key);
                    classes.push(GeometryClass::new(&tab, geo));
                    classes.len() - 1
                }
            };
            cell_class.push(class);
            quad_points.extend(tab.points.iter().map(|&p| geo.map(p)));
        }

        Self {
            space: space.clone(),
            tab,
            pattern,
            slots,
            ref_mass,
            cell_class,
            classes,
            quad_points,
        }
    }

    /// Physical quadrature points of every cell, `nq` consecutive entries per cell.
    pub fn quad_points(&self) -> &[[f64; 2]] {
        &self.quad_points
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn tabulation(&self) -> &Tabulation {
        &self.tab
    }

    /// All-zero matrix with the space's coupling pattern.
    pub fn zero_matrix(&self) -> CsrMatrix {
        self.pattern.clone()
    }

    pub fn element_mass(&self, t: usize, out: &mut [f64]) {
        let det = self.space.geometry(t).det.abs();
        for (o, m) in out.iter_mut().zip(&self.ref_mass) {
            *o = det * m;
        }
    }

    /// Local matrix of `int coeff(|grad frozen|^2) grad phi_i . grad phi_j`.
    /// A `None` field means a zero gradient everywhere.
    pub fn element_stiffness<C: Fn(f64) -> f64>(
        &self,
        t: usize,
        frozen: Option<&FeField>,
        coeff: &C,
        scratch: &mut ElementScratch,
        out: &mut [f64],
    ) {
        let nloc = self.tab.nloc;
        let nq = self.tab.num_points();
        let class = &self.classes[self.cell_class[t]];
        let packed = nloc * (nloc + 1) / 2;
        let acc = &mut scratch.packed;
        acc.iter_mut().for_each(|a| *a = 0.0);
        for q in 0..nq {
            let s2 = match frozen {
                Some(f) => {
                    let c = f.coeffs();
                    let mut g = [0.0; 2];
                    for (&d, pg) in self.space.cell_dofs(t).iter().zip(&class.grads[q * nloc..]) {
                        g[0] += c[d] * pg[0];
                        g[1] += c[d] * pg[1];
                    }
                    g[0] * g[0] + g[1] * g[1]
                }
                None => 0.0,
            };
            let k = coeff(s2);
            for (a, p) in acc
                .iter_mut()
                .zip(&class.products[q * packed..(q + 1) * packed])
            {
                *a += k * p;
            }
        }
        let mut idx = 0;
        for i in 0..nloc {
            for j in i..nloc {
                out[i * nloc + j] = acc[idx];
                out[j * nloc + i] = acc[idx];
                idx += 1;
            }
        }
    }

    pub fn scratch(&self) -> ElementScratch {
        let n = self.tab.nloc;
        ElementScratch {
            packed: vec![0.0; n * (n + 1) / 2],
        }
    }

    fn scatter(&self, t: usize, local: &[f64], out: &mut CsrMatrix) {
        let nl2 = local.len();
        let slots = &self.slots[t * nl2..(t + 1) * nl2];
        let vals = out.values_mut();
        for (&s, &v) in slots.iter().zip(local) {
            vals[s] += v;
        }
    }

    pub fn mass(&self) -> CsrMatrix {
        let mut out = self.zero_matrix();
        let mut local = vec![0.0; self.ref_mass.len()];
        for t in 0..self.space.num_cells() {
            self.element_mass(t, &mut local);
            self.scatter(t, &local, &mut out);
        }
        out
    }

    /// Overwrites `out` (which must come from [`Self::zero_matrix`]) with the
    /// stiffness matrix for the given coefficient.
    pub fn stiffness_into<C: Fn(f64) -> f64>(
        &self,
        frozen: Option<&FeField>,
        coeff: C,
        out: &mut CsrMatrix,
    ) {
        out.values_mut().iter_mut().for_each(|v| *v = 0.0);
        let mut scratch = self.scratch();
        let mut local = vec![0.0; self.tab.nloc * self.tab.nloc];
        for t in 0..self.space.num_cells() {
            self.element_stiffness(t, frozen, &coeff, &mut scratch, &mut local);
            self.scatter(t, &local, out);
        }
    }

    /// Stiffness with coefficient `sigma(|grad frozen|^2)`.
    pub fn stiffness(&self, frozen: &FeField, params: &DiffusionParams) -> CsrMatrix {
        let mut out = self.zero_matrix();
        self.stiffness_into(Some(frozen), |s2| params.sigma_unchecked(s2), &mut out);
        out
    }

    /// Unit-coefficient stiffness (discrete Neumann Laplacian).
    pub fn laplacian(&self) -> CsrMatrix {
        let mut out = self.zero_matrix();
        self.stiffness_into(None, |_| 1.0, &mut out);
        out
    }

    /// Stiffness built through a triplet buffer visiting cells in `order`.
    pub fn stiffness_triplets(
        &self,
        frozen: &FeField,
        params: &DiffusionParams,
        order: &[usize],
    ) -> Result<CsrMatrix> {
        let nloc = self.tab.nloc;
        let mut buf = TripletBuffer::with_capacity(self.space.ndof(), order.len() * nloc * nloc);
        let mut scratch = self.scratch();
        let mut local = vec![0.0; nloc * nloc];
        let coeff = |s2| params.sigma_unchecked(s2);
        for &t in order {
            self.element_stiffness(t, Some(frozen), &coeff, &mut scratch, &mut local);
            let dofs = self.space.cell_dofs(t);
            for (a, &i) in dofs.iter().enumerate() {
                for (b, &j) in dofs.iter().enumerate() {
                    buf.push(i, j, local[a * nloc + b]);
                }
            }
        }
        to_csr(&buf)
    }

    /// Writes `int g phi_i` into `out`.
    pub fn load_into<G: Fn(f64, f64) -> f64>(&self, g: G, out: &mut [f64]) {
        let samples: Vec<f64> = self.quad_points.iter().map(|p| g(p[0], p[1])).collect();
        self.load_from_samples(&samples, out);
    }

    /// Load vector from forcing values already sampled at [`Self::quad_points`].
    pub fn load_from_samples(&self, samples: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let nloc = self.tab.nloc;
        let nq = self.tab.num_points();
        for t in 0..self.space.num_cells() {
            let det = self.space.geometry(t).det.abs();
            let dofs = self.space.cell_dofs(t);
            for q in 0..nq {
                let wg = self.tab.weights[q] * det * samples[t * nq + q];
                let phi = &self.tab.values[q * nloc..(q + 1) * nloc];
                for (&d, &p) in dofs.iter().zip(phi) {
                    out[d] += wg * p;
                }
            }
        }
    }

    pub fn load<G: Fn(f64, f64) -> f64>(&self, g: G) -> Vec<f64> {
        let mut out = vec![0.0; self.space.ndof()];
        self.load_into(g, &mut out);
        out
    }

    /// Smallest and largest `sigma(|grad frozen|^2)` over all quadrature points.
    pub fn coefficient_range(&self, frozen: &FeField, params: &DiffusionParams) -> (f64, f64) {
        let nq = self.tab.num_points();
        let mut values = vec![0.0; nq];
        let mut grads = vec![[0.0; 2]; nq];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in 0..self.space.num_cells() {
            frozen.eval_cell(t, &self.tab, &mut values, &mut grads);
            for g in &grads {
                let s = params.sigma_unchecked(g[0] * g[0] + g[1] * g[1]);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        (lo, hi)
    }
}

impl GeometryClass {
    fn new(tab: &Tabulation, geo: &CellGeometry) -> Self {
        let nloc = tab.nloc;
        let nq = tab.num_points();
        let det = geo.det.abs();
        let grads: Vec<[f64; 2]> = tab
            .ref_grads
            .iter()
            .map(|&g| geo.push_gradient(g))
            .collect();
        let mut products = Vec::with_capacity(nq * nloc * (nloc + 1) / 2);
        for q in 0..nq {
            let w = tab.weights[q] * det;
            let pg = &grads[q * nloc..(q + 1) * nloc];
            for i in 0..nloc {
                for j in i..nloc {
                    products.push(w * (pg[i][0] * pg[j][0] + pg[i][1] * pg[j][1]));
                }
            }
        }
        Self { grads, products }
    }
}

/// Per-cell work buffer for [`Assembler::element_stiffness`].
#[derive(Debug, Clone)]
pub struct ElementScratch {
    packed: Vec<f64>,
}

pub fn assemble_mass(space: &FeSpace, rule: &QuadratureRule) -> CsrMatrix {
    Assembler::new(space, rule).mass()
}

pub fn assemble_stiffness(
    space: &FeSpace,
    rule: &QuadratureRule,
    frozen: &FeField,
    params: &DiffusionParams,
) -> CsrMatrix {
    Assembler::new(space, rule).stiffness(frozen, params)
}

pub fn assemble_load<G: Fn(f64, f64) -> f64>(
    space: &FeSpace,
    rule: &QuadratureRule,
    g: G,
) -> Vec<f64> {
    Assembler::new(space, rule).load(g)
}

fn integrate_cells<F: FnMut(f64, [f64; 2], [f64; 2]) -> f64>(
    field: &FeField,
    rule: &QuadratureRule,
    mut integrand: F,
) -> f64 {
    let space = field.space();
    let tab = space.tabulate(rule);
    let nq = tab.num_points();
    let mut values = vec![0.0; nq];
    let mut grads = vec![[0.0; 2]; nq];
    let mut total = 0.0;
    for t in 0..space.num_cells() {
        let geo = space.geometry(t);
        field.eval_cell(t, &tab, &mut values, &mut grads);
        let det = geo.det.abs();
        for q in 0..nq {
            let x = geo.map(tab.points[q]);
            total += tab.weights[q] * det * integrand(values[q], grads[q], x);
        }
    }
    total
}

/// `||field - exact||_{L2}` by quadrature; use a rule of degree at least `2r + 4`.
pub fn l2_error<F: Fn(f64, f64) -> f64>(field: &FeField, exact: F, rule: &QuadratureRule) -> f64 {
    integrate_cells(field, rule, |v, _, x| {
        let d = v - exact(x[0], x[1]);
        d * d
    })
    .sqrt()
}

/// `||grad field - exact_grad||_{L2}`.
pub fn h1_seminorm_error<F: Fn(f64, f64) -> [f64; 2]>(
    field: &FeField,
    exact_grad: F,
    rule: &QuadratureRule,
) -> f64 {
    integrate_cells(field, rule, |_, g, x| {
        let e = exact_grad(x[0], x[1]);
        (g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2)
    })
    .sqrt()
}

/// `||field||_{L2}`.
pub fn l2_norm(field: &FeField, rule: &QuadratureRule) -> f64 {
    l2_error(field, |_, _| 0.0, rule)
}
