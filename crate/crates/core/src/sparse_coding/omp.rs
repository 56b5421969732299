//! Orthogonal matching pursuit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::linalg::{solve_on_support, DEFAULT_RIDGE};
use super::pdas::{dual_from_gram, objective_from_gram};
use super::{check_signal, dot, Dictionary, SparseCode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmpConfig {
    /// Maximum number of atoms.
    pub sparsity: usize,
    /// Optional early stop once `||r||^2 <= threshold`.
    #[serde(default)]
    pub residual_threshold: Option<f64>,
}

impl OmpConfig {
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            residual_threshold: None,
        }
    }

    pub fn validate(&self, signal_dim: usize, num_atoms: usize) -> Result<()> {
        let bound = signal_dim.min(num_atoms);
        if self.sparsity == 0 || self.sparsity > bound {
            return Err(invalid(format!(
                "OMP sparsity {} must lie in 1..={bound}",
                self.sparsity
            )));
        }
        if let Some(t) = self.residual_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("OMP residual threshold must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmpOutput {
    pub code: SparseCode,
    /// `||R_i||^2` for `i = 0..=steps`; entry 0 is `||y||^2`.
    pub residual_norms_sq: Vec<f64>,
}

/// Greedy coding: at each step add the unselected atom most correlated with
/// the residual (ties towards the lower index), then refit all selected
/// coefficients by least squares.
pub fn omp_encode(y: &[f64], dict: &Dictionary, cfg: &OmpConfig) -> Result<OmpOutput> {
    check_signal(y, dict)?;
    cfg.validate(dict.signal_dim(), dict.num_atoms())?;
    let corr = dict.correlations(y);
    omp_prepared(dict.gram(), &corr, dot(y, y), cfg)
}

pub(crate) fn omp_prepared(
    gram: &DMatrix<f64>,
    corr: &[f64],
    y_norm_sq: f64,
    cfg: &OmpConfig,
) -> Result<OmpOutput> {
    let k = corr.len();
    let mut selected: Vec<usize> = Vec::with_capacity(cfg.sparsity);
    let mut in_set = vec![false; k];
    let mut x: Vec<f64> = Vec::new();
    let mut g = corr.to_vec();
    let mut scratch = Vec::new();
    let mut norms = vec![y_norm_sq];

    while selected.len() < cfg.sparsity {
        if cfg.residual_threshold.is_some_and(|t| norms[norms.len() - 1] <= t) {
            break;
        }
        let mut pick = None;
        let mut best = 0.0;
        for (j, gj) in g.iter().enumerate() {
            if !in_set[j] && gj.abs() > best {
                best = gj.abs();
                pick = Some(j);
            }
        }
        // residual already orthogonal to every remaining atom
        let Some(j) = pick else { break };
        selected.push(j);
        in_set[j] = true;

        x.clear();
        x.extend(selected.iter().map(|&i| corr[i]));
        solve_on_support(gram, &selected, &mut x, DEFAULT_RIDGE, &mut scratch)?;
        dual_from_gram(gram, corr, &selected, &x, &mut g);
        norms.push(objective_from_gram(gram, corr, y_norm_sq, &selected, &x));
    }

    let mut pairs: Vec<(usize, f64)> = selected.into_iter().zip(x).collect();
    pairs.sort_unstable_by_key(|p| p.0);
    let (support, values) = pairs.into_iter().unzip();
    Ok(OmpOutput {
        code: SparseCode::from_sorted(k, support, values),
        residual_norms_sq: norms,
    })
}
