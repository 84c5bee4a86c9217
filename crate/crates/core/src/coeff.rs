//! The regularized diffusion coefficient `sigma(s2) = 1 / sqrt(lambda^2 + s2)`.
//!
//! Every function takes the squared gradient magnitude `s2 = |grad u|^2` rather
//! than `|grad u|` itself. The linearization matrix
//! `A(p) = sigma(|p|^2) I + 2 sigma'(|p|^2) p p^T` has the exact eigenpairs
//! `sigma` (across `p`) and `lambda^2 sigma^3` (along `p`).

use crate::error::{Error, Result};

/// Holds the regularization parameter `lambda > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    lambda: f64,
}

impl DiffusionParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!(
                "lambda must be finite and positive, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `sigma(s2)` without the domain check, for assembly loops where `s2` is a
    /// sum of squares.
    #[inline]
    pub fn sigma_unchecked(&self, s2: f64) -> f64 {
        1.0 / (self.lambda * self.lambda + s2).sqrt()
    }

    #[inline]
    pub fn sigma_prime_unchecked(&self, s2: f64) -> f64 {
        let s = self.sigma_unchecked(s2);
        -0.5 * s * s * s
    }
}

fn check_s2(s2: f64) -> Result<()> {
    if s2.is_nan() || s2 < 0.0 {
        Err(Error::Domain(format!(
            "squared gradient magnitude must be nonnegative, got {s2}"
        )))
    } else {
        Ok(())
    }
}

/// `1 / sqrt(lambda^2 + s2)`, in `(0, 1/lambda]`.
pub fn sigma(params: &DiffusionParams, s2: f64) -> Result<f64> {
    check_s2(s2)?;
    Ok(params.sigma_unchecked(s2))
}

/// Derivative with respect to `s2`: `-sigma^3 / 2`.
pub fn sigma_prime(params: &DiffusionParams, s2: f64) -> Result<f64> {
    check_s2(s2)?;
    Ok(params.sigma_prime_unchecked(s2))
}

/// `2 |sigma'(s2)| s2`, which equals `sigma - lambda^2 sigma^3`.
pub fn gamma(params: &DiffusionParams, s2: f64) -> Result<f64> {
    check_s2(s2)?;
    Ok(2.0 * params.sigma_prime_unchecked(s2).abs() * s2)
}

/// Symmetric 2x2 matrix stored row-major.
pub type Mat2 = [[f64; 2]; 2];

/// `A(grad) = sigma I + 2 sigma' grad grad^T`, evaluated at `s2 = |grad|^2`.
pub fn a_matrix(params: &DiffusionParams, grad: [f64; 2]) -> Result<Mat2> {
    if !(grad[0].is_finite() && grad[1].is_finite()) {
        return Err(Error::NonFinite("a_matrix gradient"));
    }
    let s2 = grad[0] * grad[0] + grad[1] * grad[1];
    let s = params.sigma_unchecked(s2);
    let c = 2.0 * params.sigma_prime_unchecked(s2);
    let off = c * grad[0] * grad[1];
    Ok([
        [s + c * grad[0] * grad[0], off],
        [off, s + c * grad[1] * grad[1]],
    ])
}

/// Eigenvalues of `A(grad)` in closed form: `(lambda^2 sigma^3, sigma)`.
pub fn a_eigenvalues(params: &DiffusionParams, grad: [f64; 2]) -> (f64, f64) {
    let s = params.sigma_unchecked(grad[0] * grad[0] + grad[1] * grad[1]);
    let l2 = params.lambda * params.lambda;
    (l2 * s * s * s, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(l: f64) -> DiffusionParams {
        DiffusionParams::new(l).unwrap()
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(DiffusionParams::new(0.0).is_err());
        assert!(DiffusionParams::new(-1.0).is_err());
        assert!(DiffusionParams::new(f64::NAN).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&p(1.0), 0.0).unwrap(), 1.0);
        assert_eq!(sigma(&p(1.0), 3.0).unwrap(), 0.5);
        assert_abs_diff_eq!(sigma(&p(0.2), 0.0).unwrap(), 5.0, epsilon = 1e-14);
        assert!(sigma(&p(1.0), -1e-3).is_err());
        assert!(sigma_prime(&p(1.0), -1.0).is_err());
        assert!(gamma(&p(1.0), -1.0).is_err());
    }

    #[test]
    fn sigma_prime_examples() {
        assert_eq!(sigma_prime(&p(1.0), 0.0).unwrap(), -0.5);
        assert_eq!(sigma_prime(&p(1.0), 3.0).unwrap(), -0.0625);
        let pp = p(0.5);
        let h = 1e-5;
        let fd = (sigma(&pp, 0.75 + h).unwrap() - sigma(&pp, 0.75 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(sigma_prime(&pp, 0.75).unwrap(), fd, epsilon = 1e-8);
    }

    #[test]
    fn sigma_prime_matches_fd_on_log_grid() {
        let pp = p(0.8);
        for k in 0..=60 {
            let s2 = 10f64.powf(-6.0 + 12.0 * k as f64 / 60.0);
            let h = 1e-4 * s2;
            let fd = (sigma(&pp, s2 + h).unwrap() - sigma(&pp, s2 - h).unwrap()) / (2.0 * h);
            let exact = sigma_prime(&pp, s2).unwrap();
            assert!(((fd - exact) / exact).abs() < 1e-6, "s2={s2}");
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&p(1.0), 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(gamma(&p(1.0), 3.0).unwrap(), 0.375, epsilon = 1e-15);
        let pp = p(0.7);
        let s = sigma(&pp, 2.2).unwrap();
        assert_abs_diff_eq!(
            gamma(&pp, 2.2).unwrap(),
            s - 0.49 * s * s * s,
            epsilon = 1e-12
        );
    }

    #[test]
    fn a_matrix_examples() {
        let a = a_matrix(&p(1.0), [0.0, 0.0]).unwrap();
        assert_eq!(a, [[1.0, 0.0], [0.0, 1.0]]);
        let a = a_matrix(&p(1.0), [3f64.sqrt(), 0.0]).unwrap();
        assert_abs_diff_eq!(a[0][0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1][1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a[0][1], 0.0, epsilon = 1e-15);
        assert!(a_matrix(&p(1.0), [f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn a_matrix_eigenvalues_closed_form() {
        let pp = p(0.3);
        let g = [0.4, -1.1];
        let a = a_matrix(&pp, g).unwrap();
        // eigenvalues of a symmetric 2x2 by the quadratic formula
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let (lo, hi) = a_eigenvalues(&pp, g);
        assert_abs_diff_eq!(tr / 2.0 - disc, lo, epsilon = 1e-12);
        assert_abs_diff_eq!(tr / 2.0 + disc, hi, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn sigma_bounded_and_decreasing(l in 0.05f64..5.0, s2 in 0.0f64..1e4, ds in 1e-6f64..10.0) {
            let pp = p(l);
            let a = sigma(&pp, s2).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0 / l * (1.0 + 1e-15));
            prop_assert!(sigma(&pp, s2 + ds).unwrap() < a);
        }

        #[test]
        fn physical_feature_strict(l in 0.05f64..5.0, s2 in 1e-8f64..1e6) {
            let pp = p(l);
            prop_assert!(2.0 * sigma_prime(&pp, s2).unwrap().abs() * s2 < sigma(&pp, s2).unwrap());
        }

        #[test]
        fn a_matrix_rayleigh_bounds(l in 0.05f64..5.0, gx in -10.0f64..10.0, gy in -10.0f64..10.0,
                                    xi0 in -1.0f64..1.0, xi1 in -1.0f64..1.0) {
            let pp = p(l);
            let a = a_matrix(&pp, [gx, gy]).unwrap();
            let q = xi0 * (a[0][0] * xi0 + a[0][1] * xi1) + xi1 * (a[1][0] * xi0 + a[1][1] * xi1);
            let n2 = xi0 * xi0 + xi1 * xi1;
            let (lo, hi) = a_eigenvalues(&pp, [gx, gy]);
            let tol = 1e-12 * hi * n2.max(1.0);
            prop_assert!(q >= lo * n2 - tol);
            prop_assert!(q <= hi * n2 + tol);
        }
    }
}
