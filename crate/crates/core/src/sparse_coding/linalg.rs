//! Small dense kernels for the normal equations on an active set.

use crate::error::{invalid, Error, Result};

use super::{check_signal, Dictionary};

/// A pivot below this fraction of the largest diagonal entry marks the
/// restricted Gram matrix as numerically singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-10;

/// Ridge used when the restricted Gram matrix is singular.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// In-place Cholesky factorisation of the row-major `k x k` matrix `a`.
/// Only the lower triangle is read and written. Returns `false` if a pivot
/// falls below `floor`.
fn cholesky_in_place(a: &mut [f64], k: usize, floor: f64) -> bool {
    for j in 0..k {
        let mut d = a[j * k + j];
        for p in 0..j {
            d -= a[j * k + p] * a[j * k + p];
        }
        if !(d > floor) {
            return false;
        }
        let d = d.sqrt();
        a[j * k + j] = d;
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= a[i * k + p] * a[j * k + p];
            }
            a[i * k + j] = s / d;
        }
    }
    true
}

fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * k + p] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for p in i + 1..k {
            s -= l[p * k + i] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Solves `(G_AA) z = c_A`, falling back to `(G_AA + ridge I) z = c_A` when
/// `G_AA` is singular within tolerance. `rhs` is overwritten with `z`.
/// Returns whether the ridge fallback was used.
pub(crate) fn solve_on_support(
    gram: &nalgebra::DMatrix<f64>,
    support: &[usize],
    rhs: &mut [f64],
    ridge: f64,
    scratch: &mut Vec<f64>,
) -> Result<bool> {
    let k = support.len();
    debug_assert_eq!(rhs.len(), k);
    let fill = |scratch: &mut Vec<f64>, shift: f64| {
        scratch.clear();
        scratch.resize(k * k, 0.0);
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate().take(r + 1) {
                scratch[r * k + c] = gram[(i, j)];
            }
            scratch[r * k + r] += shift;
        }
    };
    fill(scratch, 0.0);
    let max_diag = (0..k).map(|r| scratch[r * k + r]).fold(0.0f64, f64::max);
    if cholesky_in_place(scratch, k, SINGULAR_PIVOT_RATIO * max_diag) {
        cholesky_solve(scratch, k, rhs);
        return Ok(false);
    }
    if ridge <= 0.0 {
        return Err(Error::Singular(k));
    }
    fill(scratch, ridge);
    if !cholesky_in_place(scratch, k, 0.0) {
        return Err(Error::Singular(k));
    }
    cholesky_solve(scratch, k, rhs);
    Ok(true)
}

/// Least-squares coefficients of `y` on the atoms in `support`
/// (`argmin_z ||y - D_A z||^2`). When `D_A^T D_A` is singular the ridge
/// solution `(D_A^T D_A + ridge I)^{-1} D_A^T y` is returned instead.
///
/// Values are returned in the order of `support`.
pub fn restricted_least_squares(
    y: &[f64],
    dict: &Dictionary,
    support: &[usize],
    ridge: f64,
) -> Result<Vec<f64>> {
    check_signal(y, dict)?;
    if support.is_empty() {
        return Err(invalid("support must be nonempty"));
    }
    if support.len() > dict.signal_dim() {
        return Err(invalid(format!(
            "support of size {} exceeds signal dimension {}",
            support.len(),
            dict.signal_dim()
        )));
    }
    if let Some(&j) = support.iter().find(|&&j| j >= dict.num_atoms()) {
        return Err(invalid(format!("atom index {j} out of range")));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(invalid("ridge must be a finite nonnegative number"));
    }
    let k = support.len();
    let mut gram = nalgebra::DMatrix::zeros(k, k);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            gram[(r, c)] = super::dot(dict.atom(i), dict.atom(j));
        }
    }
    let local: Vec<usize> = (0..k).collect();
    let mut rhs: Vec<f64> = support.iter().map(|&j| super::dot(dict.atom(j), y)).collect();
    solve_on_support(&gram, &local, &mut rhs, ridge, &mut Vec::new())?;
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn orthonormal_subset_returns_correlations() {
        let d = Dictionary::new(DMatrix::identity(3, 3)).unwrap();
        let z = restricted_least_squares(&[5.0, 1.0, 7.0], &d, &[0, 2], 1e-8).unwrap();
        assert_eq!(z, vec![5.0, 7.0]);
    }

    #[test]
    fn rejects_bad_supports() {
        let d = Dictionary::new(DMatrix::identity(2, 2)).unwrap();
        let y = [1.0, 2.0];
        assert!(restricted_least_squares(&y, &d, &[], 1e-8).is_err());
        assert!(restricted_least_squares(&y, &d, &[2], 1e-8).is_err());
        let wide = Dictionary::normalized(DMatrix::from_column_slice(
            2,
            3,
            &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        ))
        .unwrap();
        assert!(restricted_least_squares(&y, &wide, &[0, 1, 2], 1e-8).is_err());
    }

    #[test]
    fn duplicated_atoms_use_ridge_and_match_min_norm_fit() {
        let s = 0.5f64.sqrt();
        let d = Dictionary::new(DMatrix::from_column_slice(
            3,
            3,
            &[s, s, 0.0, s, s, 0.0, 0.0, 0.0, 1.0],
        ))
        .unwrap();
        let y = [3.0, 1.0, 2.0];
        let z = restricted_least_squares(&y, &d, &[0, 1], 1e-8).unwrap();
        assert!(z.iter().all(|v| v.is_finite()));
        // pseudoinverse oracle: projection of y on span{(s, s, 0)}
        let proj = [2.0, 2.0, 0.0];
        let fit: Vec<f64> = (0..3)
            .map(|i| z[0] * d.atom(0)[i] + z[1] * d.atom(1)[i])
            .collect();
        for i in 0..3 {
            assert!((fit[i] - proj[i]).abs() < 1e-4, "{fit:?}");
        }
        assert!(matches!(
            restricted_least_squares(&y, &d, &[0, 1], 0.0),
            Err(Error::Singular(2))
        ));
    }

    #[test]
    fn matches_nalgebra_lstsq_on_random_support() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let m = DMatrix::from_fn(8, 5, |_, _| rng.random_range(-1.0..1.0));
        let d = Dictionary::normalized(m).unwrap();
        let y: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let support = [0, 2, 4];
        let z = restricted_least_squares(&y, &d, &support, 1e-8).unwrap();
        let sub = DMatrix::from_fn(8, 3, |i, c| d.atom(support[c])[i]);
        let oracle = sub
            .svd(true, true)
            .solve(&nalgebra::DVector::from_column_slice(&y), 1e-14)
            .unwrap();
        for c in 0..3 {
            assert!((z[c] - oracle[c]).abs() < 1e-10);
        }
    }
}
