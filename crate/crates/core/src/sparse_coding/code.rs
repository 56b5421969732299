use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};

/// A length-`K` coefficient vector stored as (sorted support, values).
///
/// Entries off the support are exactly zero. Entries on the support may be
/// zero too (a least-squares fit can produce one); the support is what the
/// coder selected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCode {
    len: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCode {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a code from parallel support/value lists. The support need not
    /// be sorted but must be distinct and in range.
    pub fn new(len: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_len("sparse code values", support.len(), values.len())?;
        let mut pairs: Vec<(usize, f64)> = support.into_iter().zip(values).collect();
        pairs.sort_by_key(|&(j, _)| j);
        if let Some(&(j, _)) = pairs.last() {
            if j >= len {
                return Err(invalid(format!("support index {j} out of range for length {len}")));
            }
        }
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("support indices must be distinct"));
        }
        let (support, values) = pairs.into_iter().unzip();
        Ok(Self {
            len,
            support,
            values,
        })
    }

    /// Keeps only nonzero entries of a dense vector.
    pub fn from_dense(dense: &[f64]) -> Self {
        let (support, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .unzip();
        Self {
            len: dense.len(),
            support,
            values,
        }
    }

    pub(crate) fn from_sorted(len: usize, support: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(support.len(), values.len());
        Self {
            len,
            support,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of selected atoms.
    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.support.binary_search(&j) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for (&j, &v) in self.support.iter().zip(&self.values) {
            out[j] = v;
        }
        out
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Primal-dual state of the active set method: the dual vector `g`
/// (residual correlations) and the sacrifice `h` used to rank atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_sorts_and_validates() {
        let c = SparseCode::new(5, vec![3, 1], vec![2.0, -1.0]).unwrap();
        assert_eq!(c.support(), &[1, 3]);
        assert_eq!(c.values(), &[-1.0, 2.0]);
        assert_eq!(c.to_dense(), vec![0.0, -1.0, 0.0, 2.0, 0.0]);
        assert_eq!(c.get(3), 2.0);
        assert_eq!(c.get(0), 0.0);
        assert!(SparseCode::new(5, vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(SparseCode::new(5, vec![5], vec![1.0]).is_err());
        assert!(SparseCode::new(5, vec![1], vec![]).is_err());
    }

    #[test]
    fn dense_round_trip_drops_zeros() {
        let c = SparseCode::from_dense(&[0.0, 1.5, 0.0, -2.0]);
        assert_eq!(c.support(), &[1, 3]);
        assert_eq!(c.l1_norm(), 3.5);
    }
}
