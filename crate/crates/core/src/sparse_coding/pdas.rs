//! Primal-dual active set (PDAS) coder for the cardinality-constrained
//! least squares problem.
//!
//! With unit-norm atoms, a coordinate-wise minimizer `x` of
//! `||y - D x||^2  s.t. ||x||_0 <= T0` has a dual `g = D^T (y - D x)` whose
//! support is complementary to that of `x`. Each atom gets a sacrifice
//! `h_j = (x_j + g_j)^2 / 2`, the loss incurred by forcing coordinate `j` to
//! zero; the active set is the `T0` atoms with the largest sacrifice. The
//! method alternates a least-squares fit on the active set with this
//! re-selection until the set stops changing.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};

use super::linalg::{solve_on_support, DEFAULT_RIDGE};
use super::{check_signal, dot, Dictionary, DualState, SparseCode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdasConfig {
    /// Exact support size `T0`.
    pub sparsity: usize,
    /// Iteration cap `R`.
    pub max_iterations: usize,
    /// Ridge added to singular restricted Gram matrices.
    pub ridge_epsilon: f64,
    /// Seed for the random initial active set.
    pub seed: u64,
}

impl PdasConfig {
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            max_iterations: 20,
            ridge_epsilon: DEFAULT_RIDGE,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, signal_dim: usize, num_atoms: usize) -> Result<()> {
        let bound = signal_dim.min(num_atoms);
        if self.sparsity == 0 || self.sparsity > bound {
            return Err(invalid(format!(
                "PDAS sparsity {} must lie in 1..={bound}",
                self.sparsity
            )));
        }
        if self.max_iterations == 0 {
            return Err(invalid("PDAS max_iterations must be at least 1"));
        }
        if !(self.ridge_epsilon >= 0.0 && self.ridge_epsilon.is_finite()) {
            return Err(invalid("PDAS ridge_epsilon must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdasOutput {
    pub code: SparseCode,
    pub dual: DualState,
    /// Number of least-squares fits performed.
    pub iterations: usize,
    /// `true` when the active set reached a fixed point within the cap.
    pub converged: bool,
    /// `||y - D x||^2` of the returned code, from the normal equations.
    pub objective: f64,
}

impl PdasOutput {
    /// JSON dump of support, values, `g`, `h` and the iteration count.
    pub fn debug_json(&self) -> String {
        serde_json::json!({
            "support": self.code.support(),
            "values": self.code.values(),
            "g": self.dual.g,
            "h": self.dual.h,
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
        })
        .to_string()
    }
}

/// Elementwise `h_j = (x_j + g_j)^2 / 2`.
pub fn sacrifice(code: &SparseCode, g: &[f64]) -> Result<Vec<f64>> {
    check_len("dual vector", code.len(), g.len())?;
    let mut h: Vec<f64> = g.to_vec();
    for (&j, &v) in code.support().iter().zip(code.values()) {
        h[j] += v;
    }
    h.iter_mut().for_each(|v| *v = 0.5 * *v * *v);
    Ok(h)
}

/// Codes `y` with exactly `cfg.sparsity` atoms.
///
/// When the iteration cap is hit before the active set settles, the iterate
/// with the lowest objective seen is returned with `converged = false`.
pub fn pdas_encode(y: &[f64], dict: &Dictionary, cfg: &PdasConfig) -> Result<PdasOutput> {
    check_signal(y, dict)?;
    cfg.validate(dict.signal_dim(), dict.num_atoms())?;
    let corr = dict.correlations(y);
    pdas_prepared(dict.gram(), &corr, dot(y, y), cfg, cfg.seed)
}

struct Iterate {
    active: Vec<usize>,
    x: Vec<f64>,
    objective: f64,
}

/// PDAS from precomputed `G = D^T D`, `c = D^T y` and `||y||^2`.
pub(crate) fn pdas_prepared(
    gram: &DMatrix<f64>,
    corr: &[f64],
    y_norm_sq: f64,
    cfg: &PdasConfig,
    seed: u64,
) -> Result<PdasOutput> {
    let k = corr.len();
    let t0 = cfg.sparsity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut active = rand::seq::index::sample(&mut rng, k, t0).into_vec();
    active.sort_unstable();

    let mut scratch = Vec::with_capacity(t0 * t0);
    let mut g = vec![0.0; k];
    let mut h = vec![0.0; k];
    let mut order: Vec<usize> = Vec::with_capacity(k);
    let mut best: Option<Iterate> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        iterations += 1;

        let mut x: Vec<f64> = active.iter().map(|&j| corr[j]).collect();
        solve_on_support(gram, &active, &mut x, cfg.ridge_epsilon, &mut scratch)?;
        dual_from_gram(gram, corr, &active, &x, &mut g);
        let objective = objective_from_gram(gram, corr, y_norm_sq, &active, &x);

        // h_I = g_I^2 / 2, h_A = x_A^2 / 2
        for (hj, gj) in h.iter_mut().zip(&g) {
            *hj = 0.5 * gj * gj;
        }
        for (&j, &v) in active.iter().zip(&x) {
            h[j] = 0.5 * v * v;
        }
        let next = top_scores(&h, t0, &mut order);

        let settled = next == active;
        let improves = best.as_ref().is_none_or(|b| objective < b.objective);
        if settled || improves {
            best = Some(Iterate {
                active: active.clone(),
                x,
                objective,
            });
        }
        if settled {
            converged = true;
            break;
        }
        active = next;
    }

    let best = best.expect("at least one iteration runs");
    dual_from_gram(gram, corr, &best.active, &best.x, &mut g);
    let mut h: Vec<f64> = g.iter().map(|v| 0.5 * v * v).collect();
    for (&j, &v) in best.active.iter().zip(&best.x) {
        h[j] = 0.5 * v * v;
    }
    Ok(PdasOutput {
        code: SparseCode::from_sorted(k, best.active, best.x),
        dual: DualState { g, h },
        iterations,
        converged,
        objective: best.objective,
    })
}

/// `g = c - G[:, A] x_A`.
pub(crate) fn dual_from_gram(
    gram: &DMatrix<f64>,
    corr: &[f64],
    active: &[usize],
    x: &[f64],
    g: &mut [f64],
) {
    g.copy_from_slice(corr);
    let k = corr.len();
    let data = gram.as_slice();
    for (&a, &v) in active.iter().zip(x) {
        let col = &data[a * k..(a + 1) * k];
        for (gj, gaj) in g.iter_mut().zip(col) {
            *gj -= v * gaj;
        }
    }
}

/// `||y||^2 - 2 c_A^T x + x^T G_AA x`, clamped at zero.
pub(crate) fn objective_from_gram(
    gram: &DMatrix<f64>,
    corr: &[f64],
    y_norm_sq: f64,
    active: &[usize],
    x: &[f64],
) -> f64 {
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (r, &i) in active.iter().enumerate() {
        lin += corr[i] * x[r];
        let mut row = 0.0;
        for (c, &j) in active.iter().enumerate() {
            row += gram[(i, j)] * x[c];
        }
        quad += x[r] * row;
    }
    (y_norm_sq - 2.0 * lin + quad).max(0.0)
}

/// Indices of the `t` largest scores, ties resolved towards the lower index,
/// returned in ascending index order.
pub(crate) fn top_scores(scores: &[f64], t: usize, order: &mut Vec<usize>) -> Vec<usize> {
    order.clear();
    order.extend(0..scores.len());
    let rank = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if t < order.len() {
        order.select_nth_unstable_by(t, rank);
    }
    let mut top = order[..t].to_vec();
    top.sort_unstable();
    top
}
