//! Binary feature store.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "STPF"
//! 4       4     version (u32) = 1
//! 8       8     frame count T (u64)
//! 16      8     dimension D (u64)
//! 24      4·T·D payload, f32, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"STPF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

/// Serializes a matrix into the STPF byte layout.
pub fn encode(data: ArrayView2<'_, f32>) -> Result<Vec<u8>> {
    let (rows, cols) = data.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::Data(format!(
            "feature matrix must be non-empty, got {rows}x{cols}"
        )));
    }
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * rows * cols);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(rows as u64).to_le_bytes());
    buf.extend_from_slice(&(cols as u64).to_le_bytes());
    for (t, row) in data.rows().into_iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite value {v} at frame {t}, column {c}"
                )));
            }
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

/// Parses STPF bytes. `path` is only used for diagnostics.
pub fn decode(bytes: &[u8], path: &Path) -> Result<Array2<f32>> {
    let format = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    if bytes.len() < HEADER_LEN {
        return Err(format(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if bytes[0..4] != MAGIC {
        return Err(format(format!("bad magic {:?}", &bytes[0..4])));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format(format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if rows == 0 || cols == 0 {
        return Err(format(format!("degenerate shape {rows}x{cols}")));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| format(format!("shape {rows}x{cols} overflows")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::Corruption {
            path: path.to_path_buf(),
            msg: format!(
                "payload has {} bytes, header declares {rows}x{cols} ({expected} bytes)",
                payload.len()
            ),
        });
    }
    if payload.len() > expected {
        return Err(format(format!(
            "{} trailing bytes after {rows}x{cols} payload",
            payload.len() - expected
        )));
    }
    let mut values = Vec::with_capacity(expected / 4);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Corruption {
                path: path.to_path_buf(),
                msg: format!("non-finite value at frame {}", i / cols as usize),
            });
        }
        values.push(v);
    }
    Ok(Array2::from_shape_vec((rows as usize, cols as usize), values).unwrap())
}

pub fn write(path: &Path, data: ArrayView2<'_, f32>) -> Result<()> {
    let bytes = encode(data)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Array2<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
