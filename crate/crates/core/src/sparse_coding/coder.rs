use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seed::mix;

use super::lasso::lasso_prepared;
use super::omp::omp_prepared;
use super::pdas::pdas_prepared;
use super::{check_signal, dot, Dictionary, LassoConfig, OmpConfig, PdasConfig, SparseCode};

/// Choice of sparse coder together with its configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoderConfig {
    Pdas(PdasConfig),
    Omp(OmpConfig),
    Lasso(LassoConfig),
}

/// Result of one signal's coding, common to all coders.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub code: SparseCode,
    pub iterations: usize,
    pub converged: bool,
}

impl CoderConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CoderConfig::Pdas(_) => "pdas",
            CoderConfig::Omp(_) => "omp",
            CoderConfig::Lasso(_) => "lasso",
        }
    }

    /// Support bound `T0` for the l0 coders.
    pub fn sparsity(&self) -> Option<usize> {
        match self {
            CoderConfig::Pdas(c) => Some(c.sparsity),
            CoderConfig::Omp(c) => Some(c.sparsity),
            CoderConfig::Lasso(_) => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            CoderConfig::Lasso(c) => Some(c.lambda),
            _ => None,
        }
    }

    pub fn validate(&self, signal_dim: usize, num_atoms: usize) -> Result<()> {
        match self {
            CoderConfig::Pdas(c) => c.validate(signal_dim, num_atoms),
            CoderConfig::Omp(c) => c.validate(signal_dim, num_atoms),
            CoderConfig::Lasso(c) => c.validate(),
        }
    }

    /// Codes `y`. `stream` selects an independent random stream for coders
    /// that need one (PDAS initial set); callers coding many signals pass the
    /// signal index so results do not depend on evaluation order.
    pub fn encode(&self, y: &[f64], dict: &Dictionary, stream: u64) -> Result<Encoded> {
        check_signal(y, dict)?;
        self.validate(dict.signal_dim(), dict.num_atoms())?;
        let corr = dict.correlations(y);
        self.encode_prepared(dict.gram(), &corr, dot(y, y), stream)
    }

    pub(crate) fn encode_prepared(
        &self,
        gram: &DMatrix<f64>,
        corr: &[f64],
        y_norm_sq: f64,
        stream: u64,
    ) -> Result<Encoded> {
        Ok(match self {
            CoderConfig::Pdas(cfg) => {
                let out = pdas_prepared(gram, corr, y_norm_sq, cfg, mix(cfg.seed, stream))?;
                Encoded {
                    code: out.code,
                    iterations: out.iterations,
                    converged: out.converged,
                }
            }
            CoderConfig::Omp(cfg) => {
                let out = omp_prepared(gram, corr, y_norm_sq, cfg)?;
                Encoded {
                    iterations: out.residual_norms_sq.len() - 1,
                    code: out.code,
                    converged: true,
                }
            }
            CoderConfig::Lasso(cfg) => {
                let out = lasso_prepared(gram, corr, cfg);
                Encoded {
                    code: out.code,
                    iterations: out.sweeps,
                    converged: out.converged,
                }
            }
        })
    }
}

/// Codes every column of `signals` (`n x p`). Columns are processed in
/// blocks so that `D^T Y` is one matrix product per block.
pub(crate) fn encode_columns(
    coder: &CoderConfig,
    dict: &Dictionary,
    signals: &DMatrix<f64>,
    stream_offset: u64,
) -> Result<Vec<Encoded>> {
    const BLOCK: usize = 2048;
    let gram = dict.gram();
    let p = signals.ncols();
    let n = signals.nrows();
    let code_block = |start: usize| -> Result<Vec<Encoded>> {
        let end = (start + BLOCK).min(p);
        let block = signals.columns(start, end - start);
        let corr = dict.matrix().tr_mul(&block);
        let k = dict.num_atoms();
        (start..end)
            .map(|col| {
                let local = col - start;
                let y = &signals.as_slice()[col * n..(col + 1) * n];
                let c = &corr.as_slice()[local * k..(local + 1) * k];
                coder.encode_prepared(gram, c, dot(y, y), stream_offset + col as u64)
            })
            .collect()
    };
    let starts: Vec<usize> = (0..p).step_by(BLOCK).collect();

    #[cfg(feature = "parallel")]
    let blocks: Vec<Result<Vec<Encoded>>> = {
        use rayon::prelude::*;
        starts.par_iter().map(|&s| code_block(s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<Result<Vec<Encoded>>> = starts.iter().map(|&s| code_block(s)).collect();

    let mut out = Vec::with_capacity(p);
    for block in blocks {
        out.extend(block?);
    }
    Ok(out)
}
