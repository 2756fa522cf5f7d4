//! Binary range-map archives and atomic file writes.
//!
//! Layout (little endian): `RMAP`, version byte, u32 rows, u32 cols,
//! f64 bin spacing, f64 prf, then rows×cols interleaved (re, im) f64 pairs in
//! row-major order. Version 2 inserts a u32 start bin after the prf for maps
//! cropped to a range window; uncropped maps are always written as version 1.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::range_map::RangeMap;

pub const MAGIC: &[u8; 4] = b"RMAP";

pub fn to_bytes(map: &RangeMap) -> Result<Vec<u8>> {
    let rows = u32::try_from(map.rows()).map_err(|_| Error::Format("too many rows".into()))?;
    let cols = u32::try_from(map.cols()).map_err(|_| Error::Format("too many columns".into()))?;
    let mut out = Vec::with_capacity(33 + 16 * map.data.len());
    out.extend_from_slice(MAGIC);
    if map.start_bin == 0 {
        out.push(1);
    } else {
        out.push(2);
    }
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&map.bin_spacing.to_le_bytes());
    out.extend_from_slice(&map.prf.to_le_bytes());
    if map.start_bin != 0 {
        let start = u32::try_from(map.start_bin).map_err(|_| Error::Format("start bin too large".into()))?;
        out.extend_from_slice(&start.to_le_bytes());
    }
    for v in map.data.iter() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format("archive truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<RangeMap> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::Format("not an RMAP archive".into()));
    }
    let version = cur.take(1)?[0];
    if version != 1 && version != 2 {
        return Err(Error::Format(format!("unsupported archive version {version}")));
    }
    let rows = cur.u32()? as usize;
    let cols = cur.u32()? as usize;
    let bin_spacing = cur.f64()?;
    let prf = cur.f64()?;
    let start_bin = if version == 2 { cur.u32()? as usize } else { 0 };
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    if bytes.len() - cur.pos != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {expected} for {rows}x{cols}",
            bytes.len() - cur.pos
        )));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = cur.f64()?;
        let im = cur.f64()?;
        values.push(Complex64::new(re, im));
    }
    let data = Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Format(e.to_string()))?;
    Ok(RangeMap {
        data,
        bin_spacing,
        prf,
        start_bin,
    })
}

pub fn write_range_map<W: Write>(map: &RangeMap, mut writer: W) -> Result<()> {
    writer.write_all(&to_bytes(map)?)?;
    Ok(())
}

pub fn read_range_map<R: Read>(mut reader: R) -> Result<RangeMap> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::param("path", format!("`{}` has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn save_range_map(path: &Path, map: &RangeMap) -> Result<()> {
    atomic_write(path, &to_bytes(map)?)
}

pub fn load_range_map(path: &Path) -> Result<RangeMap> {
    from_bytes(&fs::read(path)?)
}
