//! Binary solution container, JSON sidecars and CSV helpers.
//!
//! Container layout, little endian: magic `EDGN1`, version `u32`, alpha
//! `f64`, grid dims `4 × u32`, extents `4 × f64`, convention tag (`u32`
//! length + UTF-8), component count `u32`, then per component a name (`u32`
//! length + UTF-8), a rank `u32`, the shape (`rank × u32`) and the row-major
//! complex128 payload as (re, im) pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array3, ArrayD, IxDyn};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::geometry::{EdgeGrid, FormData, PhysicalField};
use crate::{EdgeError, Result};

pub const MAGIC: &[u8; 5] = b"EDGN1";
pub const VERSION: u32 = 1;
/// Transform and coordinate conventions of the payload.
pub const CONVENTION: &str = "offset-dft;forward=exp(-i);inverse=exp(+i)/(2pi)^d;Y1=y1-alpha*y2;Y2=y2";

/// Largest accepted name or tag length, to fail fast on garbage input.
const MAX_STRING: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub alpha: f64,
    pub grid: EdgeGrid,
    pub convention: String,
    pub components: Vec<(String, ArrayD<Complex64>)>,
}

impl Container {
    pub fn new(alpha: f64, grid: EdgeGrid, config_hash: &str) -> Self {
        Self {
            alpha,
            grid,
            convention: format!("{CONVENTION};config={config_hash}"),
            components: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, data: ArrayD<Complex64>) {
        self.components.push((name.to_string(), data));
    }

    pub fn push_field(&mut self, name: &str, field: &PhysicalField) {
        self.push(name, field.data.clone().into_dyn());
    }

    pub fn get(&self, name: &str) -> Result<&ArrayD<Complex64>> {
        self.components
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| EdgeError::Corrupt(format!("component {name:?} missing")))
    }

    pub fn field(&self, name: &str) -> Result<PhysicalField> {
        let data = self
            .get(name)?
            .clone()
            .into_dimensionality::<ndarray::Ix4>()
            .map_err(|_| EdgeError::Corrupt(format!("component {name:?} is not 4-dimensional")))?;
        if data.dim() != self.grid.shape() {
            return Err(EdgeError::Corrupt(format!(
                "component {name:?} has shape {:?}, header says {:?}",
                data.dim(),
                self.grid.shape()
            )));
        }
        Ok(PhysicalField { grid: self.grid, data })
    }

    pub fn trace(&self, name: &str) -> Result<Array3<Complex64>> {
        self.get(name)?
            .clone()
            .into_dimensionality::<ndarray::Ix3>()
            .map_err(|_| EdgeError::Corrupt(format!("component {name:?} is not 3-dimensional")))
    }

    pub fn form_data(&self) -> Result<FormData> {
        FormData::new(self.field("f1")?, self.field("f2")?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&self.alpha.to_le_bytes());
        let g = self.grid;
        for d in [g.nx, g.nx, g.ny, g.ny] {
            b.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for e in [g.lx, g.lx, g.ly, g.ly] {
            b.extend_from_slice(&e.to_le_bytes());
        }
        put_str(&mut b, &self.convention);
        b.extend_from_slice(&(self.components.len() as u32).to_le_bytes());
        for (name, data) in &self.components {
            put_str(&mut b, name);
            b.extend_from_slice(&(data.ndim() as u32).to_le_bytes());
            for &d in data.shape() {
                b.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for z in data.iter() {
                b.extend_from_slice(&z.re.to_le_bytes());
                b.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(5)? != MAGIC {
            return Err(EdgeError::Corrupt("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(EdgeError::Corrupt(format!("unsupported version {version}")));
        }
        let alpha = r.f64()?;
        let dims = [r.u32()?, r.u32()?, r.u32()?, r.u32()?];
        let ext = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
        if dims[0] != dims[1] || dims[2] != dims[3] || ext[0] != ext[1] || ext[2] != ext[3] {
            return Err(EdgeError::Corrupt("non-square grid header".into()));
        }
        let grid = EdgeGrid {
            nx: dims[0] as usize,
            ny: dims[2] as usize,
            lx: ext[0],
            ly: ext[2],
        };
        let convention = r.string()?;
        if !convention.starts_with(CONVENTION) {
            return Err(EdgeError::Corrupt(format!("unknown convention {convention:?}")));
        }
        let count = r.u32()?;
        let mut components = Vec::new();
        for _ in 0..count {
            let name = r.string()?;
            let rank = r.u32()? as usize;
            if rank > 8 {
                return Err(EdgeError::Corrupt(format!("rank {rank} of {name:?}")));
            }
            let shape: Vec<usize> = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_>>()?;
            let len: usize = shape.iter().product();
            if len.checked_mul(16).is_none_or(|n| n > r.remaining()) {
                return Err(EdgeError::Corrupt(format!("truncated payload of {name:?}")));
            }
            let mut v = Vec::with_capacity(len);
            for _ in 0..len {
                let re = r.f64()?;
                let im = r.f64()?;
                v.push(Complex64::new(re, im));
            }
            let data = ArrayD::from_shape_vec(IxDyn(&shape), v)
                .map_err(|e| EdgeError::Corrupt(format!("{name:?}: {e}")))?;
            components.push((name, data));
        }
        if r.remaining() != 0 {
            return Err(EdgeError::Corrupt(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self {
            alpha,
            grid,
            convention,
            components,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

fn put_str(b: &mut Vec<u8>, s: &str) {
    b.extend_from_slice(&(s.len() as u32).to_le_bytes());
    b.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(EdgeError::Corrupt("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()?;
        if n > MAX_STRING {
            return Err(EdgeError::Corrupt(format!("string length {n}")));
        }
        String::from_utf8(self.take(n as usize)?.to_vec()).map_err(|e| EdgeError::Corrupt(e.to_string()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// CSV text: a `# config <hash>` line, the header row, then the rows.
pub fn csv_with_hash(hash: &str, body: &str) -> String {
    format!("# config {hash}\n{body}")
}

/// Writes `text` to `dir/name`, creating `dir`.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}
