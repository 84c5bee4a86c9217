use super::csr::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed from the returned iterate.
    pub final_relative_residual: f64,
    /// Tolerance actually applied: the requested one, raised to the rounding
    /// floor `8 eps || |A| |x| + |b| || / ||b||` when that is larger.
    pub tolerance: f64,
    /// Implies `final_relative_residual <= tolerance`.
    pub converged: bool,
}

/// Relative residual below which rounding in `b - A x` dominates.
fn rounding_floor(a: &CsrMatrix, b: &[f64], x: &[f64], b_norm: f64) -> f64 {
    let (rows, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    let mut acc = 0.0;
    for i in 0..a.dim() {
        let mut s = b[i].abs();
        for k in rows[i]..rows[i + 1] {
            s += (vals[k] * x[cols[k]]).abs();
        }
        acc += s * s;
    }
    8.0 * f64::EPSILON * acc.sqrt() / b_norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.matvec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, starting from `x0`.
///
/// Stops once the relative residual drops to `rel_tol` (or to the rounding
/// floor of the residual computation, if that is higher), checked against the
/// true residual before returning. Running out of iterations is not an error;
/// the report carries `converged = false`.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: matrix {n}, rhs {}, guess {}",
            b.len(),
            x0.len()
        )));
    }
    if a.values().iter().chain(b).chain(x0).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cg_solve input"));
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                final_relative_residual: 0.0,
                tolerance: rel_tol,
                converged: true,
            },
        ));
    }

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    residual(a, b, &x, &mut r);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    let mut tol = rel_tol.max(rounding_floor(a, b, &x, b_norm));
    let mut iterations = 0;

    while iterations < max_iter {
        if rel <= tol {
            // guard against drift of the recursively updated residual
            residual(a, b, &x, &mut r);
            rel = dot(&r, &r).sqrt() / b_norm;
            tol = rel_tol.max(rounding_floor(a, b, &x, b_norm));
            if rel <= tol {
                break;
            }
            for ((zi, ri), d) in z.iter_mut().zip(&r).zip(&inv_diag) {
                *zi = ri * d;
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NonFinite("cg_solve iteration"));
        }
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        iterations += 1;
    }

    residual(a, b, &x, &mut r);
    let final_rel = dot(&r, &r).sqrt() / b_norm;
    if !final_rel.is_finite() {
        return Err(Error::NonFinite("cg_solve result"));
    }
    let tol = rel_tol.max(rounding_floor(a, b, &x, b_norm));
    Ok((
        x,
        SolveReport {
            iterations,
            final_relative_residual: final_rel,
            tolerance: tol,
            converged: final_rel <= tol,
        },
    ))
}
