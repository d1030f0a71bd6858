//! `SSF1` field-series files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "SSF1"                 4 bytes magic
//! dim            u8      1 or 2
//! n              u32     nodes per axis
//! geometry       f64     x_min, x_max (dim 1) or L (dim 2)
//! count          u32     number of snapshots
//! per snapshot:  f64 time, then n (1D) or n*n (2D) f64 values, row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{FieldSeries, Grid, Grid1D, Grid2D, ScalarFieldSnapshot};

pub const MAGIC: &[u8; 4] = b"SSF1";

pub fn write_series<W: Write>(mut w: W, series: &FieldSeries) -> Result<()> {
    w.write_all(MAGIC)?;
    match series.grid() {
        Grid::D1(g) => {
            w.write_all(&[1u8])?;
            w.write_all(&(g.n() as u32).to_le_bytes())?;
            w.write_all(&g.x_min().to_le_bytes())?;
            w.write_all(&g.x_max().to_le_bytes())?;
        }
        Grid::D2(g) => {
            w.write_all(&[2u8])?;
            w.write_all(&(g.n() as u32).to_le_bytes())?;
            w.write_all(&g.half_width().to_le_bytes())?;
        }
    }
    w.write_all(&(series.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * (series.grid().len() + 1));
    for s in series.snapshots() {
        buf.clear();
        buf.extend_from_slice(&s.t().to_le_bytes());
        for v in s.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series<R: Read>(mut r: R) -> Result<FieldSeries> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected SSF1")));
    }
    let dim = read_u8(&mut r)?;
    let n = read_u32(&mut r)? as usize;
    let grid = match dim {
        1 => {
            let (a, b) = (read_f64(&mut r)?, read_f64(&mut r)?);
            Grid::D1(Grid1D::new(n, a, b).map_err(|e| Error::Format(e.to_string()))?)
        }
        2 => Grid::D2(Grid2D::new(n, read_f64(&mut r)?).map_err(|e| Error::Format(e.to_string()))?),
        d => return Err(Error::Format(format!("unsupported dimensionality {d}"))),
    };
    let count = read_u32(&mut r)? as usize;
    let mut snapshots = Vec::with_capacity(count);
    let mut bytes = vec![0u8; 8 * grid.len()];
    for _ in 0..count {
        let t = read_f64(&mut r)?;
        r.read_exact(&mut bytes).map_err(truncated)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        snapshots.push(
            ScalarFieldSnapshot::new(grid, t, values).map_err(|e| Error::Format(e.to_string()))?,
        );
    }
    FieldSeries::new(snapshots).map_err(|e| Error::Format(e.to_string()))
}

pub fn save(path: impl AsRef<Path>, series: &FieldSeries) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_series(std::io::BufWriter::new(f), series)
}

pub fn load(path: impl AsRef<Path>) -> Result<FieldSeries> {
    let f = std::fs::File::open(path)?;
    read_series(std::io::BufReader::new(f))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated file".into())
    } else {
        Error::Io(e)
    }
}

pub(crate) fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(b[0])
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}
