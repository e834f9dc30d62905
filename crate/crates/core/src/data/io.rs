//! Dataset files.
//!
//! * CSV: header `x0,...,x{d-1},y`, one sample per row.
//! * Binary: magic `RDDS`, format version (u32), N (u64), d (u64), sigma (f64),
//!   then the N×d covariates row-major and the N labels, all little-endian.
//! * Sidecar JSON: `{"epsilon": .., "corrupted_indices": [..]}`. Only test and
//!   reporting code reads it.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{DroError, Result};

const MAGIC: &[u8; 4] = b"RDDS";
const VERSION: u32 = 1;

pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".to_string());
    w.write_record(&header)?;
    for (row, y) in data.covariates.rows().into_iter().zip(data.labels.iter()) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        rec.push(format!("{y:?}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a dataset CSV. `sigma` is not stored in the file.
pub fn read_csv<R: Read>(reader: R, sigma: f64) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols == 0 || &header[cols - 1] != "y" {
        return Err(DroError::Format("last CSV column must be 'y'".into()));
    }
    for (j, h) in header.iter().take(cols - 1).enumerate() {
        if h != format!("x{j}") {
            return Err(DroError::Format(format!("expected column 'x{j}', found '{h}'")));
        }
    }
    let (values, n) = read_numeric_records(&mut r, cols)?;
    let d = cols - 1;
    let mut x = Array2::zeros((n, d));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        for j in 0..d {
            x[[i, j]] = values[i * cols + j];
        }
        y[i] = values[i * cols + d];
    }
    Dataset::new(x, y, sigma)
}

/// Read a headered CSV of points; every column is a coordinate.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Array2<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    let cols = r.headers()?.len();
    let (values, n) = read_numeric_records(&mut r, cols)?;
    Array2::from_shape_vec((n, cols), values).map_err(|e| DroError::Format(e.to_string()))
}

fn read_numeric_records<R: Read>(r: &mut csv::Reader<R>, cols: usize) -> Result<(Vec<f64>, usize)> {
    let mut values = Vec::new();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != cols {
            return Err(DroError::Format(format!("row {} has {} fields, expected {cols}", n + 1, rec.len())));
        }
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| DroError::Format(format!("row {}: '{field}' is not a number", n + 1)))?;
            values.push(v);
        }
        n += 1;
    }
    Ok((values, n))
}

pub fn write_binary<W: Write>(data: &Dataset, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(data.n() as u64).to_le_bytes())?;
    w.write_all(&(data.dim() as u64).to_le_bytes())?;
    w.write_all(&data.sigma.to_le_bytes())?;
    for v in data.covariates.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in data.labels.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Dataset> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DroError::Format("not a dataset file (bad magic)".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(DroError::Format(format!("unsupported dataset format version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    let d = read_u64(&mut r)? as usize;
    let sigma = read_f64(&mut r)?;
    let mut x = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        x.push(read_f64(&mut r)?);
    }
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        y.push(read_f64(&mut r)?);
    }
    let x = Array2::from_shape_vec((n, d), x).map_err(|e| DroError::Format(e.to_string()))?;
    Dataset::new(x, Array1::from(y), sigma)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Ground-truth provenance stored next to a contaminated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub epsilon: f64,
    pub corrupted_indices: Vec<usize>,
}

impl Sidecar {
    pub fn from_dataset(data: &Dataset, epsilon: f64) -> Self {
        let corrupted_indices = data.corrupted_indices().map(|s| s.iter().copied().collect()).unwrap_or_default();
        Self { epsilon, corrupted_indices }
    }

    pub fn index_set(&self) -> BTreeSet<usize> {
        self.corrupted_indices.iter().copied().collect()
    }
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(data, BufWriter::new(File::create(path)?))
}

pub fn load_csv(path: impl AsRef<Path>, sigma: f64) -> Result<Dataset> {
    read_csv(BufReader::new(File::open(path)?), sigma)
}

pub fn save_binary(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_binary(data, BufWriter::new(File::create(path)?))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<Dataset> {
    read_binary(BufReader::new(File::open(path)?))
}

pub fn save_sidecar(sidecar: &Sidecar, path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, sidecar)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Sidecar> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy() -> Dataset {
        Dataset::new(array![[0.1, -2.0], [1e-300, 3.5]], array![1.0, -1.0], 2.0).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_csv(&toy(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,y\n"));
        assert_eq!(read_csv(&buf[..], 2.0).unwrap(), toy());
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_binary(&toy(), &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 8 + 8 * 6);
        assert_eq!(read_binary(&buf[..]).unwrap(), toy());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_csv("a,b\n1,2\n".as_bytes(), 1.0).is_err());
        assert!(read_csv("x0,y\n1,zz\n".as_bytes(), 1.0).is_err());
        assert!(read_csv("x0,y\n1\n".as_bytes(), 1.0).is_err());
        assert!(read_binary(&b"NOPE0000"[..]).is_err());
    }

    #[test]
    fn points_csv_uses_every_column() {
        let p = read_points_csv("a,b,c\n1,2,3\n4,5,6\n".as_bytes()).unwrap();
        assert_eq!(p, array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
    }
}
