//! Shared binary checkpoint encoding.
//!
//! Layout: magic bytes, u32 version, u32 dimension list, then one block per
//! parameter matrix as u32 element count followed by little-endian f32
//! values. Block order is fixed by each model's `blocks()` enumeration.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::mat::Mat;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(
    path: &Path,
    magic: &[u8; 8],
    dims: &[u32],
    blocks: &[&Mat<f32>],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(magic)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(dims.len() as u32).to_le_bytes())?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    for b in blocks {
        w.write_all(&(b.data.len() as u32).to_le_bytes())?;
        for v in &b.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read and validate header; returns the dimension list.
pub fn read_header(r: &mut impl Read, magic: &[u8; 8], path: &Path) -> Result<Vec<u32>> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got)
        .map_err(|_| Error::format(format!("{}: truncated header", path.display())))?;
    if &got != magic {
        return Err(Error::format(format!(
            "{}: bad magic (expected {:?})",
            path.display(),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(r, path)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(format!(
            "{}: unsupported version {version}",
            path.display()
        )));
    }
    let n = read_u32(r, path)? as usize;
    if n > 64 {
        return Err(Error::format(format!(
            "{}: implausible dimension count {n}",
            path.display()
        )));
    }
    let mut dims = Vec::with_capacity(n);
    for _ in 0..n {
        dims.push(read_u32(r, path)?);
    }
    Ok(dims)
}

/// Read one block into a preallocated matrix; the stored element count must
/// match the expected shape exactly.
pub fn read_block(r: &mut impl Read, target: &mut Mat<f32>, name: &str, path: &Path) -> Result<()> {
    let len = read_u32(r, path)? as usize;
    if len != target.data.len() {
        return Err(Error::format(format!(
            "{}: block {name}: expected {} values, file has {len}",
            path.display(),
            target.data.len()
        )));
    }
    let mut buf = vec![0u8; len * 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::format(format!("{}: block {name}: truncated", path.display())))?;
    for (i, chunk) in buf.chunks_exact(4).enumerate() {
        target.data[i] = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    Ok(())
}

pub fn expect_eof(r: &mut impl Read, path: &Path) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(Error::format(format!(
            "{}: trailing bytes after parameter blocks",
            path.display()
        ))),
    }
}

pub fn open_reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::format(format!("{}: truncated", path.display())))?;
    Ok(u32::from_le_bytes(b))
}
