use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};
use crate::sparse_coding::coder::encode_columns;
use crate::sparse_coding::{CoderConfig, Dictionary, PdasConfig};
use crate::timing::Stopwatch;

use super::init::{init_dictionary, DictionaryInit};

/// A replacement atom may not have `|<d_i, d_new>|` above this with any
/// other atom.
const DUPLICATE_COHERENCE: f64 = 0.999;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub ksvd_iterations: usize,
    pub num_atoms: usize,
    pub coder: CoderConfig,
    #[serde(default)]
    pub init: DictionaryInit,
    /// Atoms used by fewer training signals than this are replaced.
    #[serde(default = "default_min_usage")]
    pub min_usage: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_min_usage() -> usize {
    1
}

impl TrainConfig {
    pub fn new(coder: CoderConfig) -> Self {
        Self {
            ksvd_iterations: 10,
            num_atoms: 256,
            coder,
            init: DictionaryInit::Dct,
            min_usage: 1,
            seed: 0,
        }
    }

    pub fn validate(&self, signal_dim: usize) -> Result<()> {
        if self.ksvd_iterations == 0 {
            return Err(invalid("K-SVD needs at least one iteration"));
        }
        if self.num_atoms == 0 {
            return Err(invalid("dictionary needs at least one atom"));
        }
        self.coder.validate(signal_dim, self.num_atoms)
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(CoderConfig::Pdas(PdasConfig::new(2)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    /// `||Y - D X||_F^2` right after the coding stage.
    pub objective_after_coding: f64,
    /// Same objective after the atom sweep.
    pub objective_after_update: f64,
    pub atoms_replaced: usize,
    pub converged_fraction: f64,
    pub mean_coder_iterations: f64,
    pub coding_seconds: f64,
    pub update_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: Vec<IterationStats>,
    pub warnings: Vec<String>,
}

impl TrainReport {
    pub fn initial_objective(&self) -> Option<f64> {
        self.iterations.first().map(|s| s.objective_after_coding)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.iterations.last().map(|s| s.objective_after_update)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AtomUpdate {
    /// New unit-norm atom and the new coefficients, as `(signal, value)`
    /// pairs over the signals that used the atom.
    Updated { atom: Vec<f64>, row: Vec<(usize, f64)> },
    /// No training signal uses the atom.
    Dead,
}

/// Best rank-1 approximation `sigma u v^T` of `e`, returned as the unit left
/// singular vector `u` and the row `sigma v = e^T u`.
///
/// The sign is fixed so that the first non-negligible entry of `u` is
/// positive. Returns `None` for a zero matrix.
pub fn rank_one_approximation(e: &DMatrix<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
    let (n, m) = e.shape();
    if n == 0 || m == 0 {
        return None;
    }
    // eigen-decompose the smaller of the two Gram matrices
    let mut u = if m <= n {
        let eig = SymmetricEigen::new(e.tr_mul(e));
        let top = argmax(eig.eigenvalues.as_slice());
        e * eig.eigenvectors.column(top)
    } else {
        let eig = SymmetricEigen::new(e * e.transpose());
        let top = argmax(eig.eigenvalues.as_slice());
        eig.eigenvectors.column(top).into_owned()
    };
    let norm = u.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    u /= norm;
    let mut row = e.tr_mul(&u);
    if row.iter().all(|&v| v == 0.0) {
        return None;
    }
    let scale = u.amax();
    if let Some(first) = u.iter().find(|v| v.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            u.neg_mut();
            row.neg_mut();
        }
    }
    Some((u.as_slice().to_vec(), row.as_slice().to_vec()))
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn check_shapes(signals: &DMatrix<f64>, dict: &Dictionary, codes: &DMatrix<f64>) -> Result<()> {
    check_len("signal dimension", dict.signal_dim(), signals.nrows())?;
    check_len("code rows", dict.num_atoms(), codes.nrows())?;
    check_len("code columns", signals.ncols(), codes.ncols())
}

/// `||Y - D X||_F^2`.
pub fn total_objective(signals: &DMatrix<f64>, dict: &Dictionary, codes: &DMatrix<f64>) -> Result<f64> {
    check_shapes(signals, dict, codes)?;
    Ok((signals - dict.matrix() * codes).norm_squared())
}

/// Recomputes atom `j` and its coefficient row from the rank-1 SVD of the
/// residual without atom `j`, restricted to the signals that use it.
pub fn update_atom(
    j: usize,
    signals: &DMatrix<f64>,
    dict: &Dictionary,
    codes: &DMatrix<f64>,
) -> Result<AtomUpdate> {
    check_shapes(signals, dict, codes)?;
    if j >= dict.num_atoms() {
        return Err(invalid(format!("atom index {j} out of range")));
    }
    let users: Vec<usize> = (0..signals.ncols()).filter(|&p| codes[(j, p)] != 0.0).collect();
    if users.is_empty() {
        return Ok(AtomUpdate::Dead);
    }
    let n = dict.signal_dim();
    let mut restricted = DMatrix::zeros(n, users.len());
    for (c, &p) in users.iter().enumerate() {
        let fit = dict.matrix() * codes.column(p);
        let xj = codes[(j, p)];
        for i in 0..n {
            restricted[(i, c)] = signals[(i, p)] - fit[i] + dict.atom(j)[i] * xj;
        }
    }
    Ok(match rank_one_approximation(&restricted) {
        Some((atom, row)) => AtomUpdate::Updated {
            atom,
            row: users.into_iter().zip(row).collect(),
        },
        None => AtomUpdate::Updated {
            atom: dict.atom(j).to_vec(),
            row: users.into_iter().map(|p| (p, 0.0)).collect(),
        },
    })
}

/// Replacement for a dead atom `j`: the normalized residual of the worst
/// represented training signal, skipping candidates that would nearly
/// duplicate an existing atom. `None` when no candidate qualifies.
pub fn replace_dead_atom(
    j: usize,
    signals: &DMatrix<f64>,
    dict: &Dictionary,
    codes: &DMatrix<f64>,
) -> Result<Option<Vec<f64>>> {
    check_shapes(signals, dict, codes)?;
    if j >= dict.num_atoms() {
        return Err(invalid(format!("atom index {j} out of range")));
    }
    let residual = signals - dict.matrix() * codes;
    Ok(pick_replacement(&residual, dict, j))
}

fn pick_replacement(residual: &DMatrix<f64>, dict: &Dictionary, j: usize) -> Option<Vec<f64>> {
    let norms: Vec<f64> = residual.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..norms.len()).filter(|&p| norms[p] > 0.0).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order.into_iter().find_map(|p| {
        let candidate: Vec<f64> = residual.column(p).iter().map(|v| v / norms[p]).collect();
        let duplicate = (0..dict.num_atoms()).any(|i| {
            i != j
                && crate::sparse_coding::dot(dict.atom(i), &candidate).abs() > DUPLICATE_COHERENCE
        });
        (!duplicate).then_some(candidate)
    })
}

/// Whether atom `j` nearly coincides with a lower-indexed atom. Such an atom
/// only splits usage with its twin, so it is recycled like a dead one.
fn duplicates_earlier_atom(dict: &Dictionary, j: usize) -> bool {
    let dj = dict.atom(j);
    (0..j).any(|i| crate::sparse_coding::dot(dict.atom(i), dj).abs() > DUPLICATE_COHERENCE)
}

/// Runs K-SVD on the columns of `training` (`n x p`).
pub fn ksvd_train(training: &DMatrix<f64>, cfg: &TrainConfig) -> Result<(Dictionary, TrainReport)> {
    if training.ncols() == 0 || training.nrows() == 0 {
        return Err(invalid("training set is empty"));
    }
    if training.iter().any(|v| !v.is_finite()) {
        return Err(invalid("training signals contain non-finite values"));
    }
    let n = training.nrows();
    cfg.validate(n)?;
    let mut report = TrainReport::default();
    if cfg.num_atoms < n {
        report.warnings.push(format!(
            "dictionary with {} atoms is not overcomplete for signal dimension {n}",
            cfg.num_atoms
        ));
    }
    let dict = init_dictionary(training, cfg.num_atoms, cfg.init, cfg.seed)?;
    train_from(training, dict, cfg, report)
}

/// Runs K-SVD starting from `initial` instead of `cfg.init`, e.g. to resume
/// from a saved dictionary. `cfg.num_atoms` must match.
pub fn ksvd_train_from(
    training: &DMatrix<f64>,
    initial: Dictionary,
    cfg: &TrainConfig,
) -> Result<(Dictionary, TrainReport)> {
    if training.ncols() == 0 || training.nrows() == 0 {
        return Err(invalid("training set is empty"));
    }
    if training.iter().any(|v| !v.is_finite()) {
        return Err(invalid("training signals contain non-finite values"));
    }
    check_len("initial dictionary signal dimension", training.nrows(), initial.signal_dim())?;
    check_len("initial dictionary atoms", cfg.num_atoms, initial.num_atoms())?;
    cfg.validate(training.nrows())?;
    train_from(training, initial, cfg, TrainReport::default())
}

fn train_from(
    training: &DMatrix<f64>,
    mut dict: Dictionary,
    cfg: &TrainConfig,
    mut report: TrainReport,
) -> Result<(Dictionary, TrainReport)> {
    let n = training.nrows();
    let p = training.ncols();
    let k = dict.num_atoms();

    for iteration in 0..cfg.ksvd_iterations {
        let clock = Stopwatch::start();
        let encoded = encode_columns(&cfg.coder, &dict, training, (iteration * p) as u64)?;
        let mut codes = DMatrix::zeros(k, p);
        let mut converged = 0usize;
        let mut coder_iterations = 0usize;
        for (col, enc) in encoded.iter().enumerate() {
            for (&j, &v) in enc.code.support().iter().zip(enc.code.values()) {
                codes[(j, col)] = v;
            }
            converged += enc.converged as usize;
            coder_iterations += enc.iterations;
        }
        drop(encoded);
        let mut residual = training - dict.matrix() * &codes;
        let objective_after_coding = residual.norm_squared();
        let coding_seconds = clock.seconds();

        let clock = Stopwatch::start();
        let mut replaced = 0;
        let mut users: Vec<usize> = Vec::with_capacity(p);
        for j in 0..k {
            users.clear();
            users.extend((0..p).filter(|&col| codes[(j, col)] != 0.0));
            if users.len() < cfg.min_usage || duplicates_earlier_atom(&dict, j) {
                for &col in &users {
                    let xj = codes[(j, col)];
                    for (r, d) in residual.column_mut(col).iter_mut().zip(dict.atom(j)) {
                        *r += d * xj;
                    }
                    codes[(j, col)] = 0.0;
                }
                if let Some(atom) = pick_replacement(&residual, &dict, j) {
                    dict.set_atom(j, &atom);
                    replaced += 1;
                }
                continue;
            }
            let mut restricted = DMatrix::zeros(n, users.len());
            for (c, &col) in users.iter().enumerate() {
                let xj = codes[(j, col)];
                for ((e, r), d) in restricted
                    .column_mut(c)
                    .iter_mut()
                    .zip(residual.column(col).iter())
                    .zip(dict.atom(j))
                {
                    *e = r + d * xj;
                }
            }
            let Some((atom, row)) = rank_one_approximation(&restricted) else {
                continue;
            };
            for (c, &col) in users.iter().enumerate() {
                codes[(j, col)] = row[c];
                for ((r, e), a) in residual
                    .column_mut(col)
                    .iter_mut()
                    .zip(restricted.column(c).iter())
                    .zip(&atom)
                {
                    *r = e - a * row[c];
                }
            }
            dict.set_atom(j, &atom);
        }
        let objective_after_update = residual.norm_squared();

        report.iterations.push(IterationStats {
            objective_after_coding,
            objective_after_update,
            atoms_replaced: replaced,
            converged_fraction: converged as f64 / p as f64,
            mean_coder_iterations: coder_iterations as f64 / p as f64,
            coding_seconds,
            update_seconds: clock.seconds(),
        });
    }
    Ok((dict, report))
}
