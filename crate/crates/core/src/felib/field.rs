use super::quadrature::QuadratureRule;
use super::space::{FeSpace, Tabulation};
use crate::error::{Error, Result};

/// Coefficients of a function in an [`FeSpace`], one per global DOF.
#[derive(Debug, Clone)]
pub struct FeField {
    space: FeSpace,
    coeffs: Vec<f64>,
}

/// Field values and physical gradients at the points of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadValues {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

impl FeField {
    pub fn new(space: FeSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::InvalidArgument(format!(
                "field has {} coefficients, space has {} DOFs",
                coeffs.len(),
                space.ndof()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn constant(space: &FeSpace, c: f64) -> Self {
        Self {
            coeffs: vec![c; space.ndof()],
            space: space.clone(),
        }
    }

    pub fn zeros(space: &FeSpace) -> Self {
        Self::constant(space, 0.0)
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Fills `values` and `grads` (one entry per tabulated point) on cell `t`.
    #[inline]
    pub fn eval_cell(
        &self,
        t: usize,
        tab: &Tabulation,
        values: &mut [f64],
        grads: &mut [[f64; 2]],
    ) {
        let dofs = self.space.cell_dofs(t);
        let geo = self.space.geometry(t);
        let nloc = tab.nloc;
        for q in 0..tab.num_points() {
            let row = q * nloc;
            let mut v = 0.0;
            let mut g = [0.0; 2];
            for (i, &d) in dofs.iter().enumerate() {
                let c = self.coeffs[d];
                v += c * tab.values[row + i];
                let rg = tab.ref_grads[row + i];
                g[0] += c * rg[0];
                g[1] += c * rg[1];
            }
            values[q] = v;
            grads[q] = geo.push_gradient(g);
        }
    }

    /// Values and gradients of the field on triangle `tri` at `rule`'s points.
    pub fn eval_at_quad(&self, tri: usize, rule: &QuadratureRule) -> Result<QuadValues> {
        if tri >= self.space.num_cells() {
            return Err(Error::InvalidArgument(format!(
                "triangle {tri} out of range ({} cells)",
                self.space.num_cells()
            )));
        }
        let tab = self.space.tabulate(rule);
        let n = tab.num_points();
        let mut values = vec![0.0; n];
        let mut gradients = vec![[0.0; 2]; n];
        self.eval_cell(tri, &tab, &mut values, &mut gradients);
        let geo = self.space.geometry(tri);
        Ok(QuadValues {
            points: tab.points.iter().map(|&p| geo.map(p)).collect(),
            values,
            gradients,
        })
    }
}

/// Lagrange interpolant: nodal values of `f` at every DOF coordinate.
pub fn interpolate<F: Fn(f64, f64) -> f64>(space: &FeSpace, f: F) -> FeField {
    let coeffs = space.dof_coords().iter().map(|p| f(p[0], p[1])).collect();
    FeField {
        space: space.clone(),
        coeffs,
    }
}
