use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{check_len, invalid, Result};

use super::SparseCode;

/// Allowed deviation of an atom's Euclidean norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-8;

/// An `n x K` matrix of unit-norm atoms (one atom per column).
///
/// The Gram matrix `D^T D` is computed on first use and cached; mutation
/// through the crate-internal setters drops the cache.
#[derive(Clone, Debug)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
    gram: OnceLock<DMatrix<f64>>,
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Dictionary {
    /// Wraps a matrix whose columns already have unit norm.
    pub fn new(atoms: DMatrix<f64>) -> Result<Self> {
        validate_shape(&atoms)?;
        for (j, col) in atoms.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(invalid(format!("atom {j} has norm {norm}, expected 1")));
            }
        }
        Ok(Self::from_trusted(atoms))
    }

    /// Normalizes every column to unit norm. Zero columns are rejected.
    pub fn normalized(mut atoms: DMatrix<f64>) -> Result<Self> {
        validate_shape(&atoms)?;
        for (j, mut col) in atoms.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(invalid(format!("atom {j} is zero and cannot be normalized")));
            }
            col /= norm;
        }
        Ok(Self::from_trusted(atoms))
    }

    pub(crate) fn from_trusted(atoms: DMatrix<f64>) -> Self {
        Self {
            atoms,
            gram: OnceLock::new(),
        }
    }

    /// Signal dimension `n`.
    pub fn signal_dim(&self) -> usize {
        self.atoms.nrows()
    }

    /// Atom count `K`.
    pub fn num_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atom(&self, j: usize) -> &[f64] {
        let n = self.signal_dim();
        &self.atoms.as_slice()[j * n..(j + 1) * n]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.atoms
    }

    /// `D^T D`, symmetric `K x K`.
    pub fn gram(&self) -> &DMatrix<f64> {
        self.gram.get_or_init(|| self.atoms.tr_mul(&self.atoms))
    }

    /// `D^T y`.
    pub fn correlations(&self, y: &[f64]) -> Vec<f64> {
        (0..self.num_atoms())
            .map(|j| super::dot(self.atom(j), y))
            .collect()
    }

    /// `D x`.
    pub fn synthesize(&self, code: &SparseCode) -> Result<Vec<f64>> {
        check_len("sparse code", self.num_atoms(), code.len())?;
        let mut out = vec![0.0; self.signal_dim()];
        self.synthesize_into(code.support(), code.values(), &mut out);
        Ok(out)
    }

    pub(crate) fn synthesize_into(&self, support: &[usize], values: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&j, &v) in support.iter().zip(values) {
            for (o, d) in out.iter_mut().zip(self.atom(j)) {
                *o += v * d;
            }
        }
    }

    /// Largest `|<d_i, d_j>|` over distinct atoms.
    pub fn mutual_coherence(&self) -> f64 {
        let g = self.gram();
        let k = self.num_atoms();
        let mut best = 0.0f64;
        for j in 0..k {
            for i in 0..j {
                best = best.max(g[(i, j)].abs());
            }
        }
        best
    }

    pub(crate) fn set_atom(&mut self, j: usize, atom: &[f64]) {
        self.atoms.column_mut(j).copy_from_slice(atom);
        self.gram = OnceLock::new();
    }
}

fn validate_shape(atoms: &DMatrix<f64>) -> Result<()> {
    if atoms.nrows() == 0 || atoms.ncols() == 0 {
        return Err(invalid("dictionary must have at least one row and one atom"));
    }
    if atoms.iter().any(|v| !v.is_finite()) {
        return Err(invalid("dictionary contains non-finite entries"));
    }
    Ok(())
}
