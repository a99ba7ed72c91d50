//! Parameter checkpoints: a little-endian binary format that round-trips
//! bit-exactly, and a JSON mirror for inspection.
//!
//! Binary layout: `b"TCLP"`, `u32` version, `u32` tensor count, then per
//! tensor `u32` name length, UTF-8 name, `u32` rank, `u64` dims, `f64` data.

use std::fs;
use std::path::Path;

use topoclasp_core::autodiff::{ParamSet, Tensor};

use crate::error::{AppError, Result};

const MAGIC: &[u8; 4] = b"TCLP";
const VERSION: u32 = 1;

pub fn encode(params: &ParamSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + params.num_scalars() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for entry in params.entries() {
        out.extend_from_slice(&(entry.name.len() as u32).to_le_bytes());
        out.extend_from_slice(entry.name.as_bytes());
        out.extend_from_slice(&2u32.to_le_bytes());
        for d in entry.tensor.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for x in entry.tensor.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| AppError::Parse(format!("checkpoint truncated at byte {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<ParamSet> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(AppError::Parse("not a parameter checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(AppError::Parse(format!("unsupported checkpoint version {version}")));
    }
    let count = r.u32()?;
    let mut params = ParamSet::new();
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|e| AppError::Parse(format!("checkpoint name is not UTF-8: {e}")))?
            .to_string();
        let rank = r.u32()?;
        if rank != 2 {
            return Err(AppError::Parse(format!("tensor '{name}' has rank {rank}, expected 2")));
        }
        let (rows, cols) = (r.u64()? as usize, r.u64()? as usize);
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| AppError::Parse(format!("tensor '{name}' dims overflow")))?;
        let raw = r.take(len.checked_mul(8).ok_or_else(|| AppError::Parse("size overflow".into()))?)?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        params.push(name, Tensor::from_vec(rows, cols, data)?);
    }
    if r.pos != bytes.len() {
        return Err(AppError::Parse(format!("{} trailing bytes in checkpoint", bytes.len() - r.pos)));
    }
    Ok(params)
}

pub fn save_binary(params: &ParamSet, path: &Path) -> Result<()> {
    fs::write(path, encode(params)).map_err(|e| AppError::io(path, e))
}

pub fn load_binary(path: &Path) -> Result<ParamSet> {
    decode(&fs::read(path).map_err(|e| AppError::io(path, e))?)
}

pub fn save_json(params: &ParamSet, path: &Path) -> Result<()> {
    let text = serde_json::to_string(params).map_err(|e| AppError::Internal(e.to_string()))?;
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn load_json(path: &Path) -> Result<ParamSet> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::Parse(format!("{}: {e}", path.display())))
}
