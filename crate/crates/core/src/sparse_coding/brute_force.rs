//! Exhaustive best-subset search, used as a test oracle.

use crate::error::{invalid, Result};

use super::linalg::{solve_on_support, DEFAULT_RIDGE};
use super::{check_signal, Dictionary, SparseCode};

/// Upper bound on the number of supports the oracle will enumerate.
pub const MAX_ENUMERATED_SUPPORTS: u64 = 1_000_000;

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u64) {
            Some(v) => v / (i as u64 + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Global minimizer of `||y - D x||^2` over supports of size at most
/// `sparsity`.
///
/// Supports of exactly `min(sparsity, K)` atoms are enumerated in
/// lexicographic order; a smaller support is contained in some enumerated one
/// whose least-squares fit is no worse. Ties keep the lexicographically
/// first support.
pub fn brute_force_best_subset(y: &[f64], dict: &Dictionary, sparsity: usize) -> Result<SparseCode> {
    check_signal(y, dict)?;
    let k = dict.num_atoms();
    let n = dict.signal_dim();
    if sparsity == 0 {
        return Ok(SparseCode::zeros(k));
    }
    let size = sparsity.min(k);
    if size > n {
        return Err(invalid(format!("sparsity {size} exceeds signal dimension {n}")));
    }
    let count = binomial(k, size);
    if count > MAX_ENUMERATED_SUPPORTS {
        return Err(invalid(format!(
            "C({k}, {size}) = {count} supports exceeds the enumeration guard"
        )));
    }

    let gram = dict.gram();
    let corr = dict.correlations(y);
    let mut scratch = Vec::new();
    let mut fit = vec![0.0; n];
    let mut support: Vec<usize> = (0..size).collect();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    loop {
        let mut z: Vec<f64> = support.iter().map(|&j| corr[j]).collect();
        solve_on_support(gram, &support, &mut z, DEFAULT_RIDGE, &mut scratch)?;
        dict.synthesize_into(&support, &z, &mut fit);
        let err: f64 = y.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, support.clone(), z));
        }
        if !next_combination(&mut support, k) {
            break;
        }
    }
    let (_, support, values) = best.expect("at least one support");
    Ok(SparseCode::from_sorted(k, support, values))
}

/// Advances `c` to the next size-`c.len()` subset of `0..n` in lexicographic
/// order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
