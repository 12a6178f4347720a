//! `.gfd` binary grid dumps.
//!
//! Layout, all little-endian 64-bit: the magic `b"SNLGFD01"`, then as `u64`
//! the dimension `d`, the counts `N_1..N_d`, the component count (1, `d` or
//! `d*d`) and the step count `M` (0 for a single spatial field); then as
//! `f64` the extents `L_1..L_d` and the horizon `T`. Samples follow as `f64`,
//! slice by slice; within a slice components are stored as consecutive
//! blocks and nodes with axis 1 varying fastest.

use std::io::{Read, Write};
use std::path::Path;

use snl_core::{Codomain, GridFunction, SpaceTimeField, TensorGrid};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SNLGFD01";

/// A decoded dump: `steps == 0` holds a single spatial field.
#[derive(Debug, Clone, PartialEq)]
pub enum Dump {
    Spatial(GridFunction),
    SpaceTime(SpaceTimeField),
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn header(grid: &TensorGrid, components: usize, steps: usize, horizon: f64) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    put_u64(&mut out, grid.dim() as u64);
    for &n in grid.counts() {
        put_u64(&mut out, n as u64);
    }
    put_u64(&mut out, components as u64);
    put_u64(&mut out, steps as u64);
    for &l in grid.extents() {
        put_f64(&mut out, l);
    }
    put_f64(&mut out, horizon);
    out
}

pub fn encode_spatial(f: &GridFunction) -> Vec<u8> {
    let mut out = header(f.grid(), f.components(), 0, 0.0);
    for &v in f.data() {
        put_f64(&mut out, v);
    }
    out
}

pub fn encode(field: &SpaceTimeField) -> Vec<u8> {
    let mut out = header(field.grid(), field.components(), field.steps(), field.horizon());
    for s in field.slices() {
        for &v in s.data() {
            put_f64(&mut out, v);
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| Error::Config("gfd: truncated file".into()))?;
        self.pos = end;
        Ok(chunk.try_into().expect("8 bytes"))
    }

    fn u64(&mut self) -> Result<usize> {
        usize::try_from(u64::from_le_bytes(self.take()?)).map_err(|_| Error::Config("gfd: count overflow".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Dump> {
    if bytes.get(..8) != Some(&MAGIC[..]) {
        return Err(Error::Config("gfd: bad magic".into()));
    }
    let mut r = Reader { bytes, pos: 8 };
    let d = r.u64()?;
    if d == 0 || d > 16 {
        return Err(Error::Config(format!("gfd: implausible dimension {d}")));
    }
    let counts = (0..d).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    let components = r.u64()?;
    let steps = r.u64()?;
    let extents = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let horizon = r.f64()?;
    let grid = TensorGrid::new(&extents, &counts)?;
    let codomain = [Codomain::Scalar, Codomain::Vector, Codomain::Matrix]
        .into_iter()
        .find(|c| c.components(d) == components)
        .ok_or_else(|| Error::Config(format!("gfd: {components} components do not fit dimension {d}")))?;
    let per_slice = grid.len() * components;
    let slices = if steps == 0 { 1 } else { steps + 1 };
    if bytes.len() != r.pos + 8 * per_slice * slices {
        return Err(Error::Config("gfd: sample count does not match the header".into()));
    }
    let read_slice = |r: &mut Reader|  -> Result<GridFunction> {
        let data = (0..per_slice).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        Ok(GridFunction::new(grid.clone(), codomain, data)?)
    };
    if steps == 0 {
        return Ok(Dump::Spatial(read_slice(&mut r)?));
    }
    let fields = (0..=steps).map(|_| read_slice(&mut r)).collect::<Result<Vec<_>>>()?;
    Ok(Dump::SpaceTime(SpaceTimeField::new(horizon, fields)?))
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<Dump> {
    let mut bytes = Vec::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
