//! Binary dataset (`SEDO-DS1`) and checkpoint (`SEDOCK1`) files.
//!
//! All integers and floats are little-endian; every file ends with the
//! CRC-32 of all preceding bytes.
//!
//! Dataset layout:
//!
//! ```text
//! "SEDODS1\0"  u32 version  u32 benchmark id
//! u64 N  u64 m  u64 Q  u64 n_x  u64 n_t
//! f64[N*m] inputs (row-major)  f64[N*Q] targets (row-major)
//! u32 crc
//! ```
//!
//! Checkpoint layout:
//!
//! ```text
//! "SEDOCK1\0"  u32 version
//! u64 len  u8[len] config JSON (UTF-8)
//! u64 m  f64[m] input mean  f64[m] input std
//! u64 L  u64[L] branch widths  u64 P  f64[P] branch params
//! u64 L  u64[L] trunk widths   u64 P  f64[P] trunk params
//! u64 E  f64[E] loss history
//! u32 crc
//! ```

use std::path::Path;

use crate::config::RunConfig;
use crate::datagen::{Benchmark, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::OperatorModel;
use crate::nn::Mlp;
use crate::train::{Checkpoint, Standardization};

pub const DATASET_MAGIC: &[u8; 8] = b"SEDODS1\0";
pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SEDOCK1\0";
pub const VERSION: u32 = 1;

const DATASET_HEADER: usize = 8 + 4 + 4 + 5 * 8;

fn format_err(what: impl Into<String>) -> Error {
    Error::Format(what.into())
}

fn seal(mut buf: Vec<u8>) -> Vec<u8> {
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

/// Checks magic, version and checksum; returns the body between the
/// version and the checksum.
fn unseal<'a>(bytes: &'a [u8], magic: &[u8; 8]) -> Result<&'a [u8]> {
    if bytes.len() < 8 + 4 + 4 {
        return Err(format_err(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != magic {
        return Err(format_err("bad magic"));
    }
    let (payload, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(payload) != stored {
        return Err(format_err("checksum mismatch"));
    }
    let version = u32::from_le_bytes(payload[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(format_err(format!("unsupported version {version}")));
    }
    Ok(&payload[12..])
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.buf.len() {
            return Err(format_err("unexpected end of data"));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A u64 count that must fit in the remaining bytes at `unit` bytes each.
    fn len(&mut self, unit: usize) -> Result<usize> {
        let n = self.u64()?;
        match usize::try_from(n).ok().and_then(|n| n.checked_mul(unit)) {
            Some(bytes) if bytes <= self.buf.len() => Ok(n as usize),
            _ => Err(format_err(format!("length {n} exceeds the file"))),
        }
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| format_err("length overflow"))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(&self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(format_err(format!("{} trailing bytes", self.buf.len())))
        }
    }
}

fn put_u64(buf: &mut Vec<u8>, v: usize) {
    buf.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_f64s(buf: &mut Vec<u8>, vs: &[f64]) {
    for v in vs {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_dataset(d: &Dataset) -> Vec<u8> {
    let mut buf = Vec::with_capacity(DATASET_HEADER + 8 * (d.inputs.data.len() + d.targets.data.len()) + 4);
    buf.extend_from_slice(DATASET_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&d.benchmark.id().to_le_bytes());
    for v in [d.len(), d.sensors(), d.targets.cols, d.n_x, d.n_t] {
        put_u64(&mut buf, v);
    }
    put_f64s(&mut buf, &d.inputs.data);
    put_f64s(&mut buf, &d.targets.data);
    seal(buf)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { buf: unseal(bytes, DATASET_MAGIC)? };
    let id = r.u32()?;
    let benchmark = Benchmark::from_id(id).ok_or_else(|| format_err(format!("unknown benchmark id {id}")))?;
    let mut dims = [0usize; 5];
    for d in &mut dims {
        *d = usize::try_from(r.u64()?).map_err(|_| format_err("dimension overflows usize"))?;
    }
    let [n, m, q, n_x, n_t] = dims;
    if n_x.checked_mul(n_t) != Some(q) {
        return Err(format_err(format!("Q = {q} but grid is {n_x}x{n_t}")));
    }
    let count = |a: usize, b: usize| a.checked_mul(b).ok_or_else(|| format_err("dimension overflow"));
    let (n_in, n_out) = (count(n, m)?, count(n, q)?);
    if count(n_in.saturating_add(n_out), 8)? != r.buf.len() {
        return Err(format_err("payload size does not match the header"));
    }
    let inputs = Matrix::from_vec(n, m, r.f64s(n_in)?)?;
    let targets = Matrix::from_vec(n, q, r.f64s(n_out)?)?;
    r.finish()?;
    Dataset::new(benchmark, inputs, targets, n_x, n_t)
}

pub fn save_dataset(path: &Path, d: &Dataset) -> Result<()> {
    Ok(std::fs::write(path, encode_dataset(d))?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    decode_dataset(&std::fs::read(path)?)
}

fn put_mlp(buf: &mut Vec<u8>, net: &Mlp) {
    put_u64(buf, net.widths().len());
    for &w in net.widths() {
        put_u64(buf, w);
    }
    put_u64(buf, net.num_params());
    put_f64s(buf, net.params());
}

fn read_mlp(r: &mut Reader, cfg: &RunConfig) -> Result<Mlp> {
    let layers = r.len(8)?;
    let widths = (0..layers)
        .map(|_| r.u64().and_then(|w| usize::try_from(w).map_err(|_| format_err("width overflows usize"))))
        .collect::<Result<Vec<_>>>()?;
    let n = r.len(8)?;
    let params = r.f64s(n)?;
    Mlp::from_params(&widths, cfg.activation, params).map_err(|e| format_err(format!("network block: {e}")))
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let json = serde_json::to_string(&ck.config).expect("config serializes");
    put_u64(&mut buf, json.len());
    buf.extend_from_slice(json.as_bytes());
    put_u64(&mut buf, ck.standardization.mean.len());
    put_f64s(&mut buf, &ck.standardization.mean);
    put_f64s(&mut buf, &ck.standardization.std);
    put_mlp(&mut buf, &ck.model.branch);
    put_mlp(&mut buf, &ck.model.trunk);
    put_u64(&mut buf, ck.loss_history.len());
    put_f64s(&mut buf, &ck.loss_history);
    seal(buf)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf: unseal(bytes, CHECKPOINT_MAGIC)? };
    let len = r.len(1)?;
    let text = std::str::from_utf8(r.take(len)?).map_err(|_| format_err("config block is not UTF-8"))?;
    let config = RunConfig::from_json(text).map_err(|e| format_err(format!("config block: {e}")))?;
    let m = r.len(16)?;
    let standardization = Standardization { mean: r.f64s(m)?, std: r.f64s(m)? };
    let branch = read_mlp(&mut r, &config)?;
    let trunk = read_mlp(&mut r, &config)?;
    let e = r.len(8)?;
    let loss_history = r.f64s(e)?;
    r.finish()?;
    if branch.input_width() != m {
        return Err(format_err("branch input width disagrees with the statistics block"));
    }
    let dict = config.dictionary().map_err(|e| format_err(format!("config block: {e}")))?;
    let model = OperatorModel::from_parts(branch, trunk, dict).map_err(|e| format_err(format!("network blocks: {e}")))?;
    Ok(Checkpoint { config, model, standardization, loss_history })
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    Ok(std::fs::write(path, encode_checkpoint(ck))?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&std::fs::read(path)?)
}
