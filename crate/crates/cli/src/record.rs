use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Serialize, Serializer};

use crate::spec::OutputFormat;

pub const CSV_HEADER: [&str; 10] = [
    "image", "sigma", "coder", "t0", "lambda", "psnr_db", "ssim", "seconds", "converged_frac", "seed",
];

/// One (image, sigma, coder) cell of a benchmark.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub image: String,
    pub sigma: f64,
    pub coder: String,
    pub t0: Option<usize>,
    pub lambda: Option<f64>,
    #[serde(serialize_with = "metric")]
    pub psnr_db: f64,
    #[serde(serialize_with = "metric")]
    pub ssim: f64,
    pub seconds: f64,
    pub converged_frac: f64,
    pub seed: u64,
}

/// Non-finite values are written as the strings `inf`, `-inf` and `nan`.
fn metric<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_number(*v))
    }
}

fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        format!("{v}")
    }
}

impl BenchmarkRecord {
    pub fn csv_fields(&self) -> [String; 10] {
        [
            self.image.clone(),
            self.sigma.to_string(),
            self.coder.clone(),
            self.t0.map(|t| t.to_string()).unwrap_or_default(),
            self.lambda.map(|l| l.to_string()).unwrap_or_default(),
            format_number(self.psnr_db),
            format_number(self.ssim),
            format_number(self.seconds),
            format_number(self.converged_frac),
            self.seed.to_string(),
        ]
    }
}

/// Single appender for a run's records. CSV rows are flushed as they
/// arrive; JSON is written as one array on [`RecordWriter::finish`].
pub enum RecordWriter {
    Csv { path: PathBuf, writer: csv::Writer<File> },
    Json { path: PathBuf, records: Vec<BenchmarkRecord> },
}

impl RecordWriter {
    pub fn create(out_dir: &Path, format: OutputFormat) -> anyhow::Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(match format {
            OutputFormat::Csv => {
                let path = out_dir.join("records.csv");
                let mut writer = csv::Writer::from_path(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                writer.write_record(CSV_HEADER)?;
                writer.flush()?;
                RecordWriter::Csv { path, writer }
            }
            OutputFormat::Json => {
                let path = out_dir.join("records.json");
                let mut w = RecordWriter::Json { path, records: Vec::new() };
                w.write_json()?;
                w
            }
        })
    }

    pub fn path(&self) -> &Path {
        match self {
            RecordWriter::Csv { path, .. } | RecordWriter::Json { path, .. } => path,
        }
    }

    pub fn append(&mut self, record: &BenchmarkRecord) -> anyhow::Result<()> {
        match self {
            RecordWriter::Csv { writer, .. } => {
                writer.write_record(record.csv_fields())?;
                writer.flush()?;
            }
            RecordWriter::Json { records, .. } => records.push(record.clone()),
        }
        Ok(())
    }

    fn write_json(&mut self) -> anyhow::Result<()> {
        if let RecordWriter::Json { path, records } = self {
            let mut out = BufWriter::new(
                File::create(&*path).with_context(|| format!("creating {}", path.display()))?,
            );
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
            out.flush()?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<PathBuf> {
        self.write_json()?;
        Ok(self.path().to_path_buf())
    }
}
