//! Self-describing little-endian field snapshot format:
//! `"QSLF"`, version `u16`, `d`, `N`, `Nt` as `u32`, `L` as `f64`, then
//! `Nt * N^d` complex pairs `(re, im)` as `f64`, row-major.

use std::io::{Read, Write};

use super::{Grid, SampledField, C64};
use crate::error::{QslError, Result};

pub const FIELD_MAGIC: &[u8; 4] = b"QSLF";
pub const FIELD_VERSION: u16 = 1;

pub fn write_field<W: Write>(mut w: W, field: &SampledField) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(26 + 16 * field.values().len());
    buf.extend_from_slice(FIELD_MAGIC);
    buf.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.nt() as u32).to_le_bytes());
    buf.extend_from_slice(&g.length().to_le_bytes());
    for z in field.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const K: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; K]> {
    let end = *pos + K;
    let chunk = bytes
        .get(*pos..end)
        .ok_or_else(|| QslError::Format("truncated header or payload".into()))?;
    *pos = end;
    Ok(chunk.try_into().expect("length checked"))
}

pub fn read_field<R: Read>(mut r: R) -> Result<SampledField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0;
    if &take::<4>(&bytes, &mut pos)? != FIELD_MAGIC {
        return Err(QslError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(&bytes, &mut pos)?);
    if version != FIELD_VERSION {
        return Err(QslError::Format(format!("unsupported version {version}")));
    }
    let d = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let n = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let nt = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let length = f64::from_le_bytes(take(&bytes, &mut pos)?);
    let grid = Grid::new(d, length, n, nt)?;
    let count = nt * grid.spatial_len();
    if bytes.len() - pos != 16 * count {
        return Err(QslError::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len() - pos,
            16 * count
        )));
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let re = f64::from_le_bytes(take(&bytes, &mut pos)?);
        let im = f64::from_le_bytes(take(&bytes, &mut pos)?);
        values.push(C64::new(re, im));
    }
    SampledField::from_values(&grid, values)
}
