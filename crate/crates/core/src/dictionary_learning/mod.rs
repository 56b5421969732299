//! K-SVD dictionary learning.

mod atlas;
mod init;
mod io;
mod ksvd;

pub use atlas::{render_atlas, ATLAS_SEPARATOR};
pub use init::{init_dictionary, overcomplete_dct, DictionaryInit};
pub use io::{load_dictionary_csv, read_dictionary_csv, save_dictionary_csv, write_dictionary_csv};
pub use ksvd::{
    ksvd_train, ksvd_train_from, rank_one_approximation, replace_dead_atom, total_objective, update_atom,
    AtomUpdate, IterationStats, TrainConfig, TrainReport,
};
