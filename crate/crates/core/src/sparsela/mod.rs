//! Sparse symmetric linear algebra: triplet accumulation, CSR storage and a
//! Jacobi-preconditioned conjugate gradient solver.

mod cg;
mod csr;

pub use cg::{cg_solve, SolveReport};
pub use csr::{to_csr, CsrMatrix, TripletBuffer};
