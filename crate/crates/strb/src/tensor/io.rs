//! Serialization: Matrix Market for sparse matrices, a small binary
//! container for dense matrices and third-order tensors.
//!
//! Container layout: magic `STRB`, little-endian `u32` version (currently 1),
//! `u8` number of dimensions, that many little-endian `u64` dimensions, then
//! the payload as little-endian `f64` in storage order (column-major for
//! matrices, first-index-fastest for tensors). Text floats are written in
//! shortest round-trip scientific notation, so read-after-write is exact.

use super::sparse::SparseMatrix;
use super::tensor3::Tensor3;
use super::{Result, TensorError};
use crate::DMat;
use std::io::{BufRead, Read, Write};

const MAGIC: &[u8; 4] = b"STRB";
const VERSION: u32 = 1;

fn write_header(w: &mut impl Write, dims: &[u64]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[dims.len() as u8])?;
    for &d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    Ok(())
}

fn read_header(r: &mut impl Read, expect_ndims: u8) -> Result<Vec<u64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TensorError::Format(format!("bad magic {magic:?}, expected \"STRB\"")));
    }
    let mut vbuf = [0u8; 4];
    r.read_exact(&mut vbuf)?;
    let version = u32::from_le_bytes(vbuf);
    if version != VERSION {
        return Err(TensorError::Format(format!("unsupported container version {version}")));
    }
    let mut nd = [0u8; 1];
    r.read_exact(&mut nd)?;
    if nd[0] != expect_ndims {
        return Err(TensorError::Format(format!(
            "expected {expect_ndims} dimensions, file has {}",
            nd[0]
        )));
    }
    let mut dims = Vec::with_capacity(nd[0] as usize);
    for _ in 0..nd[0] {
        let mut dbuf = [0u8; 8];
        r.read_exact(&mut dbuf)?;
        dims.push(u64::from_le_bytes(dbuf));
    }
    Ok(dims)
}

fn write_payload(w: &mut impl Write, data: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(data.len() * 8);
    for &v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_payload(r: &mut impl Read, len: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Writes a dense matrix (column-major payload).
pub fn write_dense(w: &mut impl Write, m: &DMat) -> Result<()> {
    write_header(w, &[m.nrows() as u64, m.ncols() as u64])?;
    write_payload(w, m.as_slice())
}

/// Reads a dense matrix written by [`write_dense`].
pub fn read_dense(r: &mut impl Read) -> Result<DMat> {
    let dims = read_header(r, 2)?;
    let (rows, cols) = (dims[0] as usize, dims[1] as usize);
    let data = read_payload(r, rows * cols)?;
    Ok(DMat::from_column_slice(rows, cols, &data))
}

/// Writes a third-order tensor (first-index-fastest payload).
pub fn write_tensor3(w: &mut impl Write, t: &Tensor3) -> Result<()> {
    let (d1, d2, d3) = t.dims();
    write_header(w, &[d1 as u64, d2 as u64, d3 as u64])?;
    write_payload(w, t.data())
}

/// Reads a tensor written by [`write_tensor3`].
pub fn read_tensor3(r: &mut impl Read) -> Result<Tensor3> {
    let dims = read_header(r, 3)?;
    let (d1, d2, d3) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let data = read_payload(r, d1 * d2 * d3)?;
    Tensor3::from_raw((d1, d2, d3), data)
}

/// Writes Matrix Market coordinate format (`real general`, 1-based indices).
pub fn write_sparse_matrix_market(w: &mut impl Write, m: &SparseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (i, j, v) in m.iter() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads Matrix Market coordinate format; `general` and `symmetric`
/// storage are accepted (symmetric files mirror their off-diagonal entries).
pub fn read_sparse_matrix_market(r: &mut impl BufRead) -> Result<SparseMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| TensorError::Format("empty Matrix Market file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5
        || !fields[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !fields[1].eq_ignore_ascii_case("matrix")
        || !fields[2].eq_ignore_ascii_case("coordinate")
        || !fields[3].eq_ignore_ascii_case("real")
    {
        return Err(TensorError::Format(format!("unsupported Matrix Market header: {header}")));
    }
    let symmetric = match fields[4].to_ascii_lowercase().as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(TensorError::Format(format!("unsupported symmetry kind: {other}")))
        }
    };

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        if line.trim_start().starts_with('%') || line.trim().is_empty() {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line =
        size_line.ok_or_else(|| TensorError::Format("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| TensorError::Format(format!("bad size line: {size_line}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(TensorError::Format(format!("bad size line: {size_line}")));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);

    let mut triplets = Vec::with_capacity(nnz);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(TensorError::Format(format!("short entry line: {t}")));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| TensorError::Format(format!("bad row index in: {t}")))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| TensorError::Format(format!("bad column index in: {t}")))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| TensorError::Format(format!("bad value in: {t}")))?;
        if i == 0 || j == 0 {
            return Err(TensorError::Format(format!("indices are 1-based, got: {t}")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    if triplets.len() < nnz {
        return Err(TensorError::Format(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}
