//! Binary snapshots of a real-space field.
//!
//! Layout, all little-endian: magic `APFS`, `u8` version, `u8` dim, two
//! reserved bytes, `u32` mode count per axis, `f64` box length per axis,
//! `f64` time, the field components one after another in row-major order as
//! `f64`, and a CRC-32 of the component bytes.

use std::fs;
use std::path::Path;

use swimflow::{forward, inverse, Grid, RealVectorField, State};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"APFS";
pub const VERSION: u8 = 1;

/// A time stamp and the field values at the collocation points.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: RealVectorField,
}

impl Snapshot {
    pub fn from_state(state: &State) -> CliResult<Self> {
        Ok(Self { t: state.t, field: inverse(&state.p)? })
    }

    pub fn to_state(&self) -> State {
        State::new(self.t, forward(&self.field))
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn encode(&self) -> Vec<u8> {
        let g = self.grid();
        let d = g.dim();
        let values = self.field.values();
        let mut out = Vec::with_capacity(8 + 12 * d + 8 + 8 * values.len() + 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, d as u8, 0, 0]);
        for n in g.modes() {
            out.extend_from_slice(&(*n as u32).to_le_bytes());
        }
        for l in g.lengths() {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&self.t.to_le_bytes());
        let start = out.len();
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out[start..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> CliResult<Self> {
        let bad = |m: String| Err(CliError::Snapshot(m));
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return bad("bad magic".into());
        }
        let head = r.take(4)?;
        if head[0] != VERSION {
            return bad(format!("unsupported version {}", head[0]));
        }
        let d = head[1] as usize;
        if !(2..=3).contains(&d) {
            return bad(format!("unsupported dimension {d}"));
        }
        let modes: Vec<usize> = (0..d).map(|_| r.u32().map(|v| v as usize)).collect::<CliResult<_>>()?;
        let lengths: Vec<f64> = (0..d).map(|_| r.f64()).collect::<CliResult<_>>()?;
        let t = r.f64()?;
        let grid = Grid::new(d, &modes, &lengths)?;
        let count = d * grid.real_len();
        let payload = r.take(8 * count)?;
        let crc = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if r.pos != bytes.len() {
            return bad(format!("{} trailing bytes", bytes.len() - r.pos));
        }
        if crc32fast::hash(payload) != crc {
            return bad("checksum mismatch".into());
        }
        let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { t, field: RealVectorField::from_values(grid, values)? })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let Some(end) = end else {
            return Err(CliError::Snapshot(format!("truncated at byte {}", self.bytes.len())));
        };
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn write_snapshot(state: &State, path: &Path) -> CliResult<()> {
    let bytes = Snapshot::from_state(state)?.encode();
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> CliResult<Snapshot> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Snapshot::decode(&bytes)
}
