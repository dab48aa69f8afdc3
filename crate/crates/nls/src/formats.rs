//! Matrix Market export and import, eigenvector binaries, CSV tables.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nls_core::assembly::SparseForm;
use nls_core::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Write the lower triangle of `a` as symmetric coordinate Matrix Market, 1-based.
///
/// `meta` is stored as a single-line JSON comment after the header.
pub fn write_matrix_market(path: &Path, a: &SparseForm, meta: &Value) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let lower = a.matrix.lower_entries();
    writeln!(w, "{MM_HEADER}")?;
    writeln!(w, "% {}", serde_json::to_string(meta).map_err(io::Error::other)?)?;
    writeln!(w, "{} {} {}", a.n(), a.n(), lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
    }
    w.flush()
}

/// A symmetric matrix read back from Matrix Market, with its JSON metadata comment if any.
#[derive(Debug, Clone)]
pub struct MatrixMarket {
    pub matrix: CsrMatrix,
    pub meta: Option<Value>,
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Read a `coordinate real symmetric` file, mirroring the stored triangle.
pub fn read_matrix_market(path: &Path) -> io::Result<MatrixMarket> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(bad(format!("unsupported header: {header}")));
    }
    if fields[3] != "real" || fields[4] != "symmetric" {
        return Err(bad(format!("only real symmetric matrices are supported, got {} {}", fields[3], fields[4])));
    }
    let mut meta = None;
    let mut size = None;
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if let Some(c) = t.strip_prefix('%') {
            if meta.is_none() {
                meta = serde_json::from_str(c.trim()).ok();
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let v: Vec<usize> = t.split_whitespace().map(|s| s.parse().map_err(|_| bad(format!("bad size line: {t}")))).collect::<io::Result<_>>()?;
        if v.len() != 3 || v[0] != v[1] {
            return Err(bad(format!("expected square size line, got {t}")));
        }
        size = Some((v[0], v[2]));
        break;
    }
    let (n, nnz) = size.ok_or_else(|| bad("missing size line"))?;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut seen = 0;
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad(format!("bad entry line: {t}")));
        }
        let i: usize = parts[0].parse().map_err(|_| bad(format!("bad row index: {t}")))?;
        let j: usize = parts[1].parse().map_err(|_| bad(format!("bad column index: {t}")))?;
        let v: f64 = parts[2].parse().map_err(|_| bad(format!("bad value: {t}")))?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(bad(format!("index out of range: {t}")));
        }
        rows[i - 1].push((j - 1, v));
        if i != j {
            rows[j - 1].push((i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(bad(format!("expected {nnz} entries, found {seen}")));
    }
    for r in &mut rows {
        r.sort_by_key(|e| e.0);
    }
    Ok(MatrixMarket { matrix: CsrMatrix::from_rows(rows), meta })
}

/// Sidecar describing an eigenvector binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigvecMeta {
    pub n: usize,
    pub k: usize,
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
    pub eigenvalues: Vec<f64>,
    pub grid: Value,
}

/// Little-endian `f64`, column-major `n × k`, plus a JSON sidecar at `path` with `.json` appended.
pub fn write_eigenvectors(path: &Path, vectors: &[Vec<f64>], eigenvalues: &[f64], grid: Value) -> io::Result<()> {
    let n = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != n) {
        return Err(bad("eigenvectors of unequal length"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    for v in vectors {
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    let meta = EigvecMeta {
        n,
        k: vectors.len(),
        dtype: "f64".into(),
        byte_order: "little".into(),
        layout: "column_major".into(),
        eigenvalues: eigenvalues.to_vec(),
        grid,
    };
    fs::write(sidecar(path), serde_json::to_string_pretty(&meta).map_err(io::Error::other)?)
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

pub fn read_eigenvectors(path: &Path) -> io::Result<(EigvecMeta, Vec<Vec<f64>>)> {
    let meta: EigvecMeta = serde_json::from_slice(&fs::read(sidecar(path))?).map_err(|e| bad(e.to_string()))?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * meta.n * meta.k {
        return Err(bad(format!("expected {} bytes, found {}", 8 * meta.n * meta.k, bytes.len())));
    }
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let cols = if meta.n == 0 { vec![Vec::new(); meta.k] } else { vals.chunks(meta.n).map(<[f64]>::to_vec).collect() };
    Ok((meta, cols))
}

/// Write rows under a header line.
pub fn write_csv<R: AsRef<[String]>>(path: &Path, header: &[&str], rows: &[R]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io::Error::other)?;
    w.write_record(header).map_err(io::Error::other)?;
    for r in rows {
        w.write_record(r.as_ref()).map_err(io::Error::other)?;
    }
    w.flush()
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
