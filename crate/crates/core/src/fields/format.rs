//! The `SCHWF001` field file format.
//!
//! ```text
//! magic       8 bytes  "SCHWF001"
//! header_len  u32 LE
//! header      UTF-8 JSON {version, n, sizes, extents, origin, t, frame, m, hbar}
//! samples     f64 LE pairs (re, im), row-major with y1 fastest
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridSpec, WaveField};
use crate::error::{Error, Result};
use crate::gauge::PhysicalConstants;
use crate::spacetime::Observer;

pub const MAGIC: &[u8; 8] = b"SCHWF001";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    n: usize,
    sizes: Vec<usize>,
    extents: Vec<f64>,
    origin: Vec<f64>,
    t: f64,
    frame: Observer,
    m: f64,
    hbar: f64,
}

pub fn write_field<W: Write>(mut w: W, f: &WaveField) -> Result<()> {
    let spec = f.spec();
    let header = Header {
        version: VERSION,
        n: spec.dim(),
        sizes: spec.sizes().to_vec(),
        extents: spec.extents().to_vec(),
        origin: spec.origin().to_vec(),
        t: f.time(),
        frame: f.frame().clone(),
        m: f.consts().m,
        hbar: f.consts().hbar,
    };
    let json = serde_json::to_vec(&header)?;
    let len = u32::try_from(json.len()).map_err(|_| Error::Format("header too large".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(16 * f.samples().len());
    for z in f.samples() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<WaveField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected SCHWF001".into()));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(|_| Error::Format("truncated header length".into()))?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json).map_err(|_| Error::Format("truncated header".into()))?;
    let h: Header = serde_json::from_slice(&json)?;
    if h.version != VERSION {
        return Err(Error::Format(format!("unsupported version {}", h.version)));
    }
    if h.n != h.sizes.len() {
        return Err(Error::Format(format!("header n = {} but {} sizes", h.n, h.sizes.len())));
    }
    let spec = GridSpec::new(h.sizes, h.extents, h.origin)?;
    let consts = PhysicalConstants::new(h.m, h.hbar)?;
    let mut raw = vec![0u8; 16 * spec.len()];
    r.read_exact(&mut raw).map_err(|_| Error::Format("truncated sample block".into()))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    let samples = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    WaveField::new(spec, h.t, samples, h.frame, consts)
}

impl WaveField {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        write_field(std::io::BufWriter::new(file), self)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<WaveField> {
        let file = std::fs::File::open(path)?;
        read_field(std::io::BufReader::new(file))
    }
}
