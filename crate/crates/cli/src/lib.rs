//! Batch runner behind the `sparse-denoise` binary: JSON run files,
//! denoising jobs, sparsity sweeps and result records.

pub mod record;
pub mod run;
pub mod spec;
pub mod sweep;

pub use record::{BenchmarkRecord, RecordWriter, CSV_HEADER};
pub use run::{denoise_config, image_name, run_denoise, run_job, JobOutcome, RunSummary};
pub use spec::{CoderKind, OutputFormat, RunSpec};
pub use sweep::{best_per_sigma, sweep_sparsity, SweepBest, SweepPoint};
