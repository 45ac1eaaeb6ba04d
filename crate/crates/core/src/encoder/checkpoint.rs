//! Versioned model archive: a JSON metadata document followed by one binary
//! block per tensor.
//!
//! ```text
//! "STPC" | version u32 = 1 | metadata length u64 | metadata JSON
//! then per tensor, in metadata order:
//! block magic ("STPF" for f32, "STPD" for f64) | version u32 = 1 | rows u64 | cols u64 | payload
//! ```
//! All integers and floats are little-endian, payloads row-major.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EncoderConfig, EncoderParams, TemporalEncoder};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"STPC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModalityMeta {
    name: String,
    input_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Metadata {
    version: u32,
    dtype: String,
    config: EncoderConfig,
    modalities: Vec<ModalityMeta>,
    tensors: Vec<TensorMeta>,
    /// Additional tensors (optimizer state), stored after the parameters.
    extra_tensors: Vec<TensorMeta>,
    state: serde_json::Value,
}

/// Model parameters plus optional optimizer tensors and free-form state.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub params: EncoderParams<T>,
    pub extra_tensors: Vec<(String, Array2<T>)>,
    pub state: serde_json::Value,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn new(params: EncoderParams<T>) -> Self {
        Self {
            params,
            extra_tensors: Vec::new(),
            state: serde_json::Value::Null,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let params = self.params.tensors();
        let meta = Metadata {
            version: VERSION,
            dtype: T::DTYPE.to_string(),
            config: self.params.config.clone(),
            modalities: self
                .params
                .modalities
                .iter()
                .zip(&self.params.encoders)
                .map(|(n, e)| ModalityMeta {
                    name: n.clone(),
                    input_dim: e.input_dim,
                })
                .collect(),
            tensors: params.iter().map(|(n, t)| tensor_meta(n, t)).collect(),
            extra_tensors: self.extra_tensors.iter().map(|(n, t)| tensor_meta(n, t)).collect(),
            state: self.state.clone(),
        };
        let json = serde_json::to_vec(&meta).expect("metadata serializes");
        let mut buf = Vec::new();
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
        buf.extend_from_slice(&json);
        for (_, t) in &params {
            write_block(&mut buf, t);
        }
        for (_, t) in &self.extra_tensors {
            write_block(&mut buf, t);
        }
        buf
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, path };
        if r.take(4)? != MAGIC {
            return Err(r.format("bad checkpoint magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(r.format(&format!("unsupported checkpoint version {version}")));
        }
        let len = r.u64()? as usize;
        let meta: Metadata = serde_json::from_slice(r.take(len)?).map_err(|e| Error::json(path, e))?;
        let stored_f64 = match meta.dtype.as_str() {
            "f32" => false,
            "f64" => true,
            other => return Err(r.format(&format!("unknown dtype {other}"))),
        };
        meta.config.validate()?;
        let encoders = meta
            .modalities
            .iter()
            .map(|m| TemporalEncoder::<T>::init(&meta.config, m.input_dim, &mut rng::rng(0, &[])))
            .collect::<Result<Vec<_>>>()?;
        let mut params = EncoderParams {
            config: meta.config.clone(),
            modalities: meta.modalities.iter().map(|m| m.name.clone()).collect(),
            encoders,
        };
        let expected: Vec<(String, (usize, usize))> =
            params.tensors().into_iter().map(|(n, t)| (n, t.dim())).collect();
        if expected.len() != meta.tensors.len() {
            return Err(r.format("tensor list does not match the encoder configuration"));
        }
        for ((name, dim), tm) in expected.iter().zip(&meta.tensors) {
            if *name != tm.name || *dim != (tm.rows, tm.cols) {
                return Err(r.format(&format!("tensor {} does not match {name} {dim:?}", tm.name)));
            }
        }
        for slot in params.tensors_mut() {
            *slot = r.block(stored_f64)?;
        }
        let mut extra_tensors = Vec::with_capacity(meta.extra_tensors.len());
        for tm in &meta.extra_tensors {
            let t: Array2<T> = r.block(stored_f64)?;
            if t.dim() != (tm.rows, tm.cols) {
                return Err(r.format(&format!("extra tensor {} has wrong shape", tm.name)));
            }
            extra_tensors.push((tm.name.clone(), t));
        }
        if r.pos != bytes.len() {
            return Err(r.format("trailing bytes after last tensor"));
        }
        Ok(Self {
            params,
            extra_tensors,
            state: meta.state,
        })
    }
}

fn tensor_meta<T>(name: &str, t: &Array2<T>) -> TensorMeta {
    TensorMeta {
        name: name.to_string(),
        rows: t.nrows(),
        cols: t.ncols(),
    }
}

fn write_block<T: Scalar>(buf: &mut Vec<u8>, t: &Array2<T>) {
    let f64_block = T::DTYPE == "f64";
    buf.extend_from_slice(if f64_block { b"STPD" } else { b"STPF" });
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&(t.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(t.ncols() as u64).to_le_bytes());
    for &v in t.iter() {
        if f64_block {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        } else {
            buf.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn format(&self, msg: &str) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            msg: msg.to_string(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Corruption {
                path: self.path.to_path_buf(),
                msg: format!("truncated at byte {}", self.pos),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn block<T: Scalar>(&mut self, f64_block: bool) -> Result<Array2<T>> {
        let magic = self.take(4)?;
        let want: &[u8] = if f64_block { b"STPD" } else { b"STPF" };
        if magic != want {
            return Err(self.format("bad tensor block magic"));
        }
        if self.u32()? != 1 {
            return Err(self.format("bad tensor block version"));
        }
        let rows = self.u64()? as usize;
        let cols = self.u64()? as usize;
        let width = if f64_block { 8 } else { 4 };
        let payload = self.take(rows * cols * width)?;
        let values: Vec<T> = payload
            .chunks_exact(width)
            .map(|c| {
                if f64_block {
                    T::of(f64::from_le_bytes(c.try_into().unwrap()))
                } else {
                    T::of(f64::from(f32::from_le_bytes(c.try_into().unwrap())))
                }
            })
            .collect();
        Ok(Array2::from_shape_vec((rows, cols), values).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params<T: Scalar>() -> EncoderParams<T> {
        let cfg = EncoderConfig {
            model_dim: 8,
            mlp_hidden: 8,
            ..Default::default()
        };
        EncoderParams::init(&cfg, &[("a".into(), 3), ("b".into(), 5)], 11).unwrap()
    }

    #[test]
    fn round_trip_f32_and_f64() {
        let mut ck = Checkpoint::new(params::<f32>());
        ck.extra_tensors.push(("adam.m.0".into(), Array2::from_elem((2, 2), 0.5)));
        ck.state = serde_json::json!({"epoch": 3});
        let back = Checkpoint::<f32>::from_bytes(&ck.to_bytes(), Path::new("mem")).unwrap();
        assert_eq!(back, ck);

        let ck64 = Checkpoint::new(params::<f64>());
        let back = Checkpoint::<f64>::from_bytes(&ck64.to_bytes(), Path::new("mem")).unwrap();
        assert_eq!(back, ck64);
    }

    #[test]
    fn truncated_is_corruption() {
        let bytes = Checkpoint::new(params::<f32>()).to_bytes();
        let err = Checkpoint::<f32>::from_bytes(&bytes[..bytes.len() - 3], Path::new("mem"));
        assert!(matches!(err, Err(Error::Corruption { .. })));
    }

    #[test]
    fn bad_magic_is_format_error() {
        let mut bytes = Checkpoint::new(params::<f32>()).to_bytes();
        bytes[3] = b'X';
        let err = Checkpoint::<f32>::from_bytes(&bytes, Path::new("mem"));
        assert!(matches!(err, Err(Error::Format { .. })));
    }
}
