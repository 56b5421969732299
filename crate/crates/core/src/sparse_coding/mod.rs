//! Per-signal sparse approximation with a fixed dictionary.
//!
//! Every coder solves (exactly or approximately) one of
//!
//! * `min ||y - D x||^2  s.t. ||x||_0 <= T0` (primal-dual active set, OMP,
//!   brute-force enumeration), or
//! * `min ||y - D x||^2 + lambda ||x||_1` (coordinate descent LASSO).
//!
//! All solvers are pure functions of their inputs. The hot paths work from
//! the dictionary Gram matrix `D^T D` and the correlations `D^T y`, so a
//! caller coding many signals against one dictionary only pays for one
//! matrix product per signal.

mod brute_force;
mod code;
pub(crate) mod coder;
mod dictionary;
mod lasso;
pub(crate) mod linalg;
mod omp;
mod pdas;

pub use brute_force::{brute_force_best_subset, MAX_ENUMERATED_SUPPORTS};
pub use code::{DualState, SparseCode};
pub use coder::{CoderConfig, Encoded};
pub use dictionary::{Dictionary, UNIT_NORM_TOLERANCE};
pub use lasso::{lasso_encode, LassoConfig, LassoOutput};
pub use linalg::restricted_least_squares;
pub use omp::{omp_encode, OmpConfig, OmpOutput};
pub use pdas::{pdas_encode, sacrifice, PdasConfig, PdasOutput};

use crate::error::{check_len, Result};

/// Squared residual `||y - D x||^2`.
pub fn objective(y: &[f64], dict: &Dictionary, code: &SparseCode) -> Result<f64> {
    let residual = residual(y, dict, code)?;
    Ok(residual.iter().map(|r| r * r).sum())
}

/// Dual variable `g_j = (y - D x)^T d_j` for every atom.
pub fn compute_dual(y: &[f64], dict: &Dictionary, code: &SparseCode) -> Result<Vec<f64>> {
    let residual = residual(y, dict, code)?;
    Ok(dict.correlations(&residual))
}

/// `y - D x`.
pub fn residual(y: &[f64], dict: &Dictionary, code: &SparseCode) -> Result<Vec<f64>> {
    check_len("signal", dict.signal_dim(), y.len())?;
    check_len("sparse code", dict.num_atoms(), code.len())?;
    let mut r = y.to_vec();
    for (&j, &v) in code.support().iter().zip(code.values()) {
        for (ri, di) in r.iter_mut().zip(dict.atom(j)) {
            *ri -= v * di;
        }
    }
    Ok(r)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_signal(y: &[f64], dict: &Dictionary) -> Result<()> {
    check_len("signal", dict.signal_dim(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(crate::error::invalid("signal contains non-finite values"));
    }
    Ok(())
}
