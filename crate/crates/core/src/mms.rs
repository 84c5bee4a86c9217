//! Manufactured solution `u = exp(t/100) cos(2 pi x) cos(2 pi y) / 4` and the
//! forcing that makes it solve `u_t - div(sigma(|grad u|^2) grad u) = g`.
//!
//! The cosine factors give `grad u . n = 0` on every side of the unit square,
//! so `u` also satisfies the zero-flux boundary condition.

use std::f64::consts::PI;

use crate::coeff::DiffusionParams;
use crate::stepper::Forcing;

const K: f64 = 2.0 * PI;
const GROWTH: f64 = 0.01;

#[inline]
fn amplitude(t: f64) -> f64 {
    0.25 * (GROWTH * t).exp()
}

pub fn exact_u(x: f64, y: f64, t: f64) -> f64 {
    amplitude(t) * (K * x).cos() * (K * y).cos()
}

pub fn exact_u_t(x: f64, y: f64, t: f64) -> f64 {
    GROWTH * exact_u(x, y, t)
}

pub fn exact_grad_u(x: f64, y: f64, t: f64) -> [f64; 2] {
    let a = amplitude(t) * K;
    let (sx, cx) = (K * x).sin_cos();
    let (sy, cy) = (K * y).sin_cos();
    [-a * sx * cy, -a * cx * sy]
}

/// `[[u_xx, u_xy], [u_xy, u_yy]]`
pub fn exact_hessian_u(x: f64, y: f64, t: f64) -> [[f64; 2]; 2] {
    let a = amplitude(t) * K * K;
    let (sx, cx) = (K * x).sin_cos();
    let (sy, cy) = (K * y).sin_cos();
    let diag = -a * cx * cy;
    let off = a * sx * sy;
    [[diag, off], [off, diag]]
}

pub fn exact_laplacian_u(x: f64, y: f64, t: f64) -> f64 {
    -2.0 * K * K * exact_u(x, y, t)
}

/// `u_t - sigma Lap u - 2 sigma' (grad u)^T H grad u`, with `sigma` evaluated
/// at `|grad u|^2`.
pub fn forcing_g(params: &DiffusionParams, x: f64, y: f64, t: f64) -> f64 {
    let g = exact_grad_u(x, y, t);
    let h = exact_hessian_u(x, y, t);
    let s2 = g[0] * g[0] + g[1] * g[1];
    let hg = [
        h[0][0] * g[0] + h[0][1] * g[1],
        h[1][0] * g[0] + h[1][1] * g[1],
    ];
    exact_u_t(x, y, t)
        - params.sigma_unchecked(s2) * exact_laplacian_u(x, y, t)
        - 2.0 * params.sigma_prime_unchecked(s2) * (hg[0] * g[0] + hg[1] * g[1])
}

/// The manufactured problem for one value of `lambda`.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedProblem {
    pub params: DiffusionParams,
}

impl ManufacturedProblem {
    pub fn new(params: DiffusionParams) -> Self {
        Self { params }
    }

    pub fn u(&self, x: f64, y: f64, t: f64) -> f64 {
        exact_u(x, y, t)
    }

    pub fn u0(&self, x: f64, y: f64) -> f64 {
        exact_u(x, y, 0.0)
    }

    pub fn grad_u(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        exact_grad_u(x, y, t)
    }

    pub fn g(&self, x: f64, y: f64, t: f64) -> f64 {
        forcing_g(&self.params, x, y, t)
    }

    /// `||u(., t)||_{L2}` in closed form: `exp(t/100) / 8`.
    pub fn l2_norm(&self, t: f64) -> f64 {
        amplitude(t) * 0.5
    }
}

/// [`forcing_g`] as a [`Forcing`] that keeps the spatial trigonometric
/// factors of the last point set, so each new time level costs one `exp` plus
/// arithmetic per point.
#[derive(Debug, Clone)]
pub struct ManufacturedForcing {
    params: DiffusionParams,
    points: Vec<[f64; 2]>,
    /// `(sin kx, cos kx, sin ky, cos ky)` per point.
    trig: Vec<[f64; 4]>,
}

impl ManufacturedForcing {
    pub fn new(params: DiffusionParams) -> Self {
        Self {
            params,
            points: Vec::new(),
            trig: Vec::new(),
        }
    }
}

impl Forcing for ManufacturedForcing {
    fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        forcing_g(&self.params, x, y, t)
    }

    fn sample(&mut self, points: &[[f64; 2]], t: f64, out: &mut [f64]) {
        if self.points != points {
            self.points = points.to_vec();
            self.trig = points
                .iter()
                .map(|p| {
                    let (sx, cx) = (K * p[0]).sin_cos();
                    let (sy, cy) = (K * p[1]).sin_cos();
                    [sx, cx, sy, cy]
                })
                .collect();
        }
        let a = amplitude(t);
        let ak = a * K;
        let akk = ak * K;
        for (o, &[sx, cx, sy, cy]) in out.iter_mut().zip(&self.trig) {
            let u = a * cx * cy;
            let g = [-ak * sx * cy, -ak * cx * sy];
            let diag = -akk * cx * cy;
            let off = akk * sx * sy;
            let s2 = g[0] * g[0] + g[1] * g[1];
            let quad = diag * s2 + 2.0 * off * g[0] * g[1];
            *o = GROWTH * u
                - self.params.sigma_unchecked(s2) * (-2.0 * K * K * u)
                - 2.0 * self.params.sigma_prime_unchecked(s2) * quad;
        }
    }
}
