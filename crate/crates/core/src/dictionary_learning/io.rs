//! Dictionary persistence as CSV: a header line `n,K` followed by `n` rows of
//! `K` comma-separated values (row-major).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sparse_coding::Dictionary;

fn parse_err(detail: impl Into<String>) -> Error {
    Error::Parse {
        what: "dictionary CSV",
        detail: detail.into(),
    }
}

pub fn write_dictionary_csv<W: Write>(dict: &Dictionary, mut out: W) -> Result<()> {
    let (n, k) = (dict.signal_dim(), dict.num_atoms());
    writeln!(out, "{n},{k}")?;
    let m = dict.matrix();
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for j in 0..k {
            if j > 0 {
                line.push(',');
            }
            // shortest representation that round-trips exactly
            line.push_str(&format!("{:?}", m[(i, j)]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_dictionary_csv<R: Read>(input: R) -> Result<Dictionary> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| parse_err("missing header"))??;
    let dims: Vec<usize> = header
        .trim()
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(format!("bad header {header:?}: {e}")))?;
    let [n, k] = dims[..] else {
        return Err(parse_err(format!("header must be `n,K`, got {header:?}")));
    };
    let mut values = Vec::with_capacity(n * k);
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("row {row}: {e}")))?,
            );
        }
        if values.len() - before != k {
            return Err(parse_err(format!("row {row} has {} values, expected {k}", values.len() - before)));
        }
    }
    if values.len() != n * k {
        return Err(parse_err(format!("expected {n} rows, found {}", values.len() / k.max(1))));
    }
    Dictionary::new(DMatrix::from_row_slice(n, k, &values))
}

pub fn save_dictionary_csv(dict: &Dictionary, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_dictionary_csv(dict, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_dictionary_csv(path: impl AsRef<Path>) -> Result<Dictionary> {
    read_dictionary_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary_learning::overcomplete_dct;

    #[test]
    fn round_trip_is_exact() {
        let d = overcomplete_dct(16, 25).unwrap();
        let mut buf = Vec::new();
        write_dictionary_csv(&d, &mut buf).unwrap();
        assert!(buf.starts_with(b"16,25\n"));
        let back = read_dictionary_csv(&buf[..]).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_dictionary_csv(&b""[..]).is_err());
        assert!(read_dictionary_csv(&b"2\n1,0\n"[..]).is_err());
        assert!(read_dictionary_csv(&b"2,2\n1,0\n0\n"[..]).is_err());
        assert!(read_dictionary_csv(&b"2,2\n1,0\n"[..]).is_err());
        // columns must be unit norm
        assert!(read_dictionary_csv(&b"2,1\n1\n1\n"[..]).is_err());
        assert!(read_dictionary_csv(&b"2,2\n1,0\n0,1\n"[..]).is_ok());
    }
}
