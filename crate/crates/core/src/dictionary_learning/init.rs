use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sparse_coding::Dictionary;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictionaryInit {
    /// Separable overcomplete DCT.
    #[default]
    Dct,
    /// Randomly chosen (normalized) training signals.
    Sample,
}

/// Initial dictionary with `num_atoms` unit-norm columns.
pub fn init_dictionary(
    training: &DMatrix<f64>,
    num_atoms: usize,
    mode: DictionaryInit,
    seed: u64,
) -> Result<Dictionary> {
    if num_atoms == 0 {
        return Err(invalid("dictionary needs at least one atom"));
    }
    match mode {
        DictionaryInit::Dct => overcomplete_dct(training.nrows(), num_atoms),
        DictionaryInit::Sample => sample_atoms(training, num_atoms, seed),
    }
}

/// Overcomplete 2-D DCT for `edge x edge` patches (`signal_dim = edge^2`).
///
/// A 1-D frequency grid of `m = ceil(sqrt(num_atoms))` DCT-II cosines
/// `cos(pi (2i + 1) k / 2m)` is built (non-DC atoms made zero mean), the
/// separable products are taken row-frequency-major, and the first
/// `num_atoms` are kept. With `num_atoms = signal_dim` this is the orthonormal
/// 2-D DCT-II basis.
pub fn overcomplete_dct(signal_dim: usize, num_atoms: usize) -> Result<Dictionary> {
    let edge = (signal_dim as f64).sqrt().round() as usize;
    if edge * edge != signal_dim || edge == 0 {
        return Err(invalid(format!(
            "DCT initialisation needs a square patch, got signal dimension {signal_dim}"
        )));
    }
    if num_atoms == 0 {
        return Err(invalid("dictionary needs at least one atom"));
    }
    let m = (num_atoms as f64).sqrt().ceil() as usize;
    let basis: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut v: Vec<f64> = (0..edge)
                .map(|i| (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * m) as f64).cos())
                .collect();
            if k > 0 {
                let mean = v.iter().sum::<f64>() / edge as f64;
                v.iter_mut().for_each(|x| *x -= mean);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    let atoms = DMatrix::from_fn(signal_dim, num_atoms, |p, a| {
        let (kr, kc) = (a / m, a % m);
        let (r, c) = (p / edge, p % edge);
        basis[kr][r] * basis[kc][c]
    });
    Dictionary::normalized(atoms)
}

fn sample_atoms(training: &DMatrix<f64>, num_atoms: usize, seed: u64) -> Result<Dictionary> {
    let usable: Vec<usize> = (0..training.ncols())
        .filter(|&j| training.column(j).norm() > 0.0)
        .collect();
    if usable.len() < num_atoms {
        return Err(invalid(format!(
            "sampling {num_atoms} atoms needs as many nonzero training signals, found {}",
            usable.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, usable.len(), num_atoms);
    let atoms = DMatrix::from_fn(training.nrows(), num_atoms, |i, a| training[(i, usable[picks.index(a)])]);
    Dictionary::normalized(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_dct_is_orthonormal() {
        let d = overcomplete_dct(64, 64).unwrap();
        let g = d.gram();
        for i in 0..64 {
            for j in 0..64 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn overcomplete_dct_has_unit_atoms_and_dc_first() {
        let d = overcomplete_dct(64, 256).unwrap();
        assert_eq!(d.num_atoms(), 256);
        for j in 0..256 {
            let norm: f64 = d.atom(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-8);
        }
        assert!(d.atom(0).iter().all(|&v| (v - 0.125).abs() < 1e-12));
        let truncated = overcomplete_dct(64, 200).unwrap();
        assert_eq!(truncated.num_atoms(), 200);
    }

    #[test]
    fn dct_rejects_non_square_patch() {
        assert!(overcomplete_dct(60, 100).is_err());
    }

    #[test]
    fn sampling_is_seeded_and_guarded() {
        let y = DMatrix::from_fn(4, 10, |i, j| (i + 2 * j) as f64 + 1.0);
        let a = init_dictionary(&y, 5, DictionaryInit::Sample, 3).unwrap();
        let b = init_dictionary(&y, 5, DictionaryInit::Sample, 3).unwrap();
        assert_eq!(a, b);
        assert!(init_dictionary(&y, 11, DictionaryInit::Sample, 3).is_err());
        for j in 0..5 {
            let norm: f64 = a.atom(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-8);
        }
    }
}
