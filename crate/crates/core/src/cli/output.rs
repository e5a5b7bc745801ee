//! On-disk formats.
//!
//! Cochains are raw little-endian `f64` arrays (`name.bin`) with a JSON sidecar
//! (`name.json`) holding degree and length. Operators are written as Matrix
//! Market coordinate files, time series as CSV and summaries as JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dec::Cochain;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    degree: u8,
    len: usize,
    dtype: String,
}

const DTYPE: &str = "f64le";

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_cochain(path: &Path, c: &Cochain) -> Result<()> {
    let bytes: Vec<u8> = c.values().iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = Sidecar {
        degree: c.degree(),
        len: c.len(),
        dtype: DTYPE.into(),
    };
    write_json(&sidecar_path(path), &meta)
}

pub fn read_cochain(path: &Path) -> Result<Cochain> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: Sidecar = serde_json::from_str(&text)?;
    if meta.dtype != DTYPE {
        return Err(Error::InvalidArgument(format!(
            "unsupported cochain dtype '{}'",
            meta.dtype
        )));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * meta.len {
        return Err(Error::LengthMismatch {
            expected: meta.len,
            found: bytes.len() / 8,
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8 bytes")))
        .collect();
    Ok(Cochain::new(meta.degree, values))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `rows` under `header`; floats use the shortest round-trip form.
pub fn write_series(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_matrix_market(path: &Path, m: &CsrMatrix) -> Result<()> {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.nrows(), m.ncols(), m.nnz()));
    for (i, j, v) in m.triplets() {
        out.push_str(&format!("{} {} {:e}\n", i + 1, j + 1, v));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// `{experiment}_{meshtag}_{timestamp}` files inside one directory.
pub struct RunFiles {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl RunFiles {
    pub fn create(dir: &Path, experiment: &str, mesh_tag: &str) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%3fZ");
        Ok(RunFiles {
            dir: dir.to_path_buf(),
            prefix: format!("{experiment}_{mesh_tag}_{stamp}"),
            written: Vec::new(),
        })
    }

    pub fn path(&mut self, suffix: &str) -> PathBuf {
        let p = self.dir.join(format!("{}_{suffix}", self.prefix));
        self.written.push(p.clone());
        p
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
