//! `SSC1` network checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "SSC1"                     4 bytes magic
//! arch tag        u8         0 = MLP, 1 = FCN
//! activation      u8         0 = tanh, 1 = sin, 2 = identity
//! input_dim       u32
//! MLP:  u32 count, then count u32 hidden widths
//! FCN:  u32 K, u32 count + branch widths, u32 count + trunk widths
//! param count     u64
//! params          f64 each, flat layout of `NetworkParams`
//! adam step       u64
//! m, v            param count f64 each
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{Activation, AdamHyper, AdamState, Arch, FcnArch, MlpArch, NetworkParams};
use crate::error::{Error, Result};
use crate::ssf::{read_f64, read_u32, read_u64, read_u8};

pub const MAGIC: &[u8; 4] = b"SSC1";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParams,
    pub adam: AdamState,
}

fn put_widths(buf: &mut Vec<u8>, widths: &[usize]) {
    buf.extend_from_slice(&(widths.len() as u32).to_le_bytes());
    for &w in widths {
        buf.extend_from_slice(&(w as u32).to_le_bytes());
    }
}

fn get_widths<R: Read>(r: &mut R) -> Result<Vec<usize>> {
    let count = read_u32(r)? as usize;
    if count > 1 << 16 {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    (0..count).map(|_| Ok(read_u32(r)? as usize)).collect()
}

pub fn write_checkpoint<W: Write>(mut w: W, params: &NetworkParams, adam: &AdamState) -> Result<()> {
    let n = params.theta().len();
    if adam.m.len() != n || adam.v.len() != n {
        return Err(Error::InvalidArgument("optimizer state does not match parameters".into()));
    }
    let mut buf = Vec::with_capacity(64 + 24 * n);
    buf.extend_from_slice(MAGIC);
    match params.arch() {
        Arch::Mlp(a) => {
            buf.extend_from_slice(&[0u8, a.activation.tag()]);
            buf.extend_from_slice(&(a.input_dim as u32).to_le_bytes());
            put_widths(&mut buf, &a.hidden);
        }
        Arch::Fcn(a) => {
            buf.extend_from_slice(&[1u8, a.activation.tag()]);
            buf.extend_from_slice(&(a.input_dim as u32).to_le_bytes());
            buf.extend_from_slice(&(a.latent as u32).to_le_bytes());
            put_widths(&mut buf, &a.branch_hidden);
            put_widths(&mut buf, &a.trunk_hidden);
        }
    }
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for v in params.theta() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&adam.step.to_le_bytes());
    for v in adam.m.iter().chain(&adam.v) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated file".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected SSC1")));
    }
    let kind = read_u8(&mut r)?;
    let activation = Activation::from_tag(read_u8(&mut r)?)
        .ok_or_else(|| Error::Format("unknown activation tag".into()))?;
    let input_dim = read_u32(&mut r)? as usize;
    let arch = match kind {
        0 => Arch::Mlp(MlpArch { input_dim, hidden: get_widths(&mut r)?, activation }),
        1 => {
            let latent = read_u32(&mut r)? as usize;
            let branch_hidden = get_widths(&mut r)?;
            let trunk_hidden = get_widths(&mut r)?;
            Arch::Fcn(FcnArch { input_dim, branch_hidden, trunk_hidden, latent, activation })
        }
        t => return Err(Error::Format(format!("unknown architecture tag {t}"))),
    };
    arch.validate().map_err(|e| Error::Format(e.to_string()))?;
    let n = read_u64(&mut r)? as usize;
    if n != arch.param_count() {
        return Err(Error::Format(format!(
            "parameter count {n} does not match architecture ({})",
            arch.param_count()
        )));
    }
    let read_vec = |r: &mut R| (0..n).map(|_| read_f64(r)).collect::<Result<Vec<f64>>>();
    let theta = read_vec(&mut r)?;
    let step = read_u64(&mut r)?;
    let m = read_vec(&mut r)?;
    let v = read_vec(&mut r)?;
    let params = NetworkParams::new(arch, theta).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Checkpoint { params, adam: AdamState { m, v, step, hyper: AdamHyper::default() } })
}

pub fn save(path: impl AsRef<Path>, params: &NetworkParams, adam: &AdamState) -> Result<()> {
    write_checkpoint(std::fs::File::create(path)?, params, adam)
}

pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
