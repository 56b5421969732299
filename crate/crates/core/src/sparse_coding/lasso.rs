//! l1-penalised least squares `||y - D x||^2 + lambda ||x||_1` by cyclic
//! coordinate descent with soft thresholding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::pdas::dual_from_gram;
use super::{check_signal, Dictionary, SparseCode};

/// Slack allowed in the subgradient conditions before a run counts as
/// converged.
pub const KKT_TOLERANCE: f64 = 5e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    /// Stop once a full sweep changes no coefficient by more than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl LassoConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            tolerance: 1e-7,
            max_sweeps: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("LASSO lambda must be finite and nonnegative"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("LASSO tolerance must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(invalid("LASSO max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoOutput {
    pub code: SparseCode,
    pub sweeps: usize,
    pub converged: bool,
}

pub fn lasso_encode(y: &[f64], dict: &Dictionary, cfg: &LassoConfig) -> Result<LassoOutput> {
    check_signal(y, dict)?;
    cfg.validate()?;
    let corr = dict.correlations(y);
    Ok(lasso_prepared(dict.gram(), &corr, cfg))
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub(crate) fn lasso_prepared(gram: &DMatrix<f64>, corr: &[f64], cfg: &LassoConfig) -> LassoOutput {
    let k = corr.len();
    let data = gram.as_slice();
    let half_lambda = 0.5 * cfg.lambda;
    let mut x = vec![0.0; k];
    // g = D^T (y - D x), kept current through rank-one column updates
    let mut g = corr.to_vec();
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut max_step = 0.0f64;
        for j in 0..k {
            let diag = data[j * k + j];
            let updated = soft_threshold(diag * x[j] + g[j], half_lambda) / diag;
            let step = updated - x[j];
            if step != 0.0 {
                x[j] = updated;
                for (gi, gij) in g.iter_mut().zip(&data[j * k..(j + 1) * k]) {
                    *gi -= step * gij;
                }
                max_step = max_step.max(step.abs());
            }
        }
        if max_step < cfg.tolerance {
            // refresh g to shed accumulated drift before certifying
            let (support, values): (Vec<usize>, Vec<f64>) = x
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .unzip();
            dual_from_gram(gram, corr, &support, &values, &mut g);
            if kkt_violation(&x, &g, cfg.lambda) <= KKT_TOLERANCE {
                converged = true;
                break;
            }
        }
    }
    LassoOutput {
        code: SparseCode::from_dense(&x),
        sweeps,
        converged,
    }
}

/// Largest violation of the optimality conditions
/// `|2 g_j| <= lambda` (x_j = 0) and `2 g_j = lambda sign(x_j)` (x_j != 0).
pub(crate) fn kkt_violation(x: &[f64], g: &[f64], lambda: f64) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xj, &gj)| {
            if xj == 0.0 {
                (2.0 * gj.abs() - lambda).max(0.0)
            } else {
                (2.0 * gj - lambda * xj.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}
