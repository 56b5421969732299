#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_denoise::Dictionary;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dictionary(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Dictionary {
    Dictionary::normalized(DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

pub fn random_signal(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Random orthonormal `n x n` matrix from the QR factors of a Gaussian-ish
/// matrix.
pub fn random_orthonormal(n: usize, rng: &mut ChaCha8Rng) -> Dictionary {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    Dictionary::normalized(m.qr().q()).unwrap()
}

/// `D^T (y - D x)` and the residual, computed densely.
pub fn dense_dual(y: &[f64], d: &DMatrix<f64>, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let r = DVector::from_column_slice(y) - d * DVector::from_column_slice(x);
    let g = d.tr_mul(&r);
    (g.iter().copied().collect(), r.iter().copied().collect())
}

/// Least-squares objective on a support via an SVD solve.
pub fn lstsq_objective(y: &[f64], d: &DMatrix<f64>, support: &[usize]) -> f64 {
    let yv = DVector::from_column_slice(y);
    if support.is_empty() {
        return yv.norm_squared();
    }
    let sub = d.select_columns(support);
    let x = sub.clone().svd(true, true).solve(&yv, 1e-12).unwrap();
    (yv - sub * x).norm_squared()
}

/// Exhaustive best subset over every support of size at most `t`.
pub fn oracle_best_objective(y: &[f64], d: &DMatrix<f64>, t: usize) -> f64 {
    fn rec(y: &[f64], d: &DMatrix<f64>, t: usize, start: usize, cur: &mut Vec<usize>, best: &mut f64) {
        *best = best.min(lstsq_objective(y, d, cur));
        if cur.len() == t {
            return;
        }
        for j in start..d.ncols() {
            cur.push(j);
            rec(y, d, t, j + 1, cur, best);
            cur.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(y, d, t, 0, &mut Vec::new(), &mut best);
    best
}
