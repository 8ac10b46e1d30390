//! Binary snapshots, little-endian throughout.
//!
//! Header: magic `MHDE`, version `u32`, `d` as `u32`, `dims` as three `u32`,
//! `lengths` as three `f64`, `time` as `f64`. Body: `ρ, u₁, u₂, u₃, θ, H₁,
//! H₂, H₃`, each a contiguous row-major `f64` array.

use crate::field_state::{FieldState, Grid};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"MHDE";
pub const VERSION: u32 = 1;
const HEADER_BYTES: usize = 4 + 4 + 4 + 12 + 24 + 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SnapshotError {
    #[error("snapshot i/o error: {0}")]
    Io(String),
    #[error("bad snapshot magic {found:?}")]
    MagicMismatch { found: [u8; 4] },
    #[error("snapshot version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("snapshot truncated: {got} bytes, expected {expected}")]
    Truncated { expected: usize, got: usize },
    #[error("snapshot has {extra} bytes past the last field")]
    TrailingBytes { extra: usize },
    #[error("snapshot grid {found:?} differs from the run grid {expected:?}")]
    DimensionMismatch { expected: [usize; 3], found: [usize; 3] },
    #[error("invalid snapshot header: {0}")]
    InvalidHeader(String),
}

pub fn encode_snapshot(state: &FieldState) -> Vec<u8> {
    let g = &state.grid;
    let n = g.n_points();
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * 8 * n);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.d() as u32).to_le_bytes());
    for n in g.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for l in g.lengths() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&state.time.to_le_bytes());
    let fields = [&state.rho, &state.u[0], &state.u[1], &state.u[2], &state.theta, &state.h[0], &state.h[1], &state.h[2]];
    for f in fields {
        for v in f.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut b = [0u8; N];
        b.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        b
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

/// Decodes a snapshot; no state is returned unless every check passes.
pub fn decode_snapshot(bytes: &[u8]) -> Result<FieldState, SnapshotError> {
    if bytes.len() < 8 {
        return Err(SnapshotError::Truncated { expected: HEADER_BYTES, got: bytes.len() });
    }
    let mut c = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = c.take();
    if magic != MAGIC {
        return Err(SnapshotError::MagicMismatch { found: magic });
    }
    let version = c.u32();
    if version != VERSION {
        return Err(SnapshotError::VersionMismatch { found: version, expected: VERSION });
    }
    if bytes.len() < HEADER_BYTES {
        return Err(SnapshotError::Truncated { expected: HEADER_BYTES, got: bytes.len() });
    }
    let d = c.u32() as usize;
    let dims = [c.u32(), c.u32(), c.u32()].map(|v| v as usize);
    let lengths = [c.f64(), c.f64(), c.f64()];
    let time = c.f64();
    if !(1..=3).contains(&d) || dims[d..].iter().any(|&n| n != 1) {
        return Err(SnapshotError::InvalidHeader(format!("d = {d} with dims {dims:?}")));
    }
    let grid = Grid::new(d, &dims[..d], lengths).map_err(|e| SnapshotError::InvalidHeader(e.to_string()))?;
    if !time.is_finite() {
        return Err(SnapshotError::InvalidHeader(format!("time {time}")));
    }
    let n = grid.n_points();
    let expected = HEADER_BYTES + 8 * 8 * n;
    if bytes.len() < expected {
        return Err(SnapshotError::Truncated { expected, got: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(SnapshotError::TrailingBytes { extra: bytes.len() - expected });
    }
    let mut field = || (0..n).map(|_| c.f64()).collect::<Vec<f64>>();
    let rho = field();
    let u = [field(), field(), field()];
    let theta = field();
    let h = [field(), field(), field()];
    Ok(FieldState { grid, time, rho, u, theta, h })
}

pub fn write_snapshot(state: &FieldState, path: &Path) -> Result<(), SnapshotError> {
    state.check_shapes().map_err(|e| SnapshotError::InvalidHeader(e.to_string()))?;
    std::fs::write(path, encode_snapshot(state)).map_err(|e| SnapshotError::Io(format!("{}: {e}", path.display())))
}

pub fn read_snapshot(path: &Path) -> Result<FieldState, SnapshotError> {
    let bytes = std::fs::read(path).map_err(|e| SnapshotError::Io(format!("{}: {e}", path.display())))?;
    decode_snapshot(&bytes)
}

/// Reads a snapshot that must live on `grid`.
pub fn read_snapshot_on(path: &Path, grid: &Grid) -> Result<FieldState, SnapshotError> {
    let s = read_snapshot(path)?;
    if s.grid.dims() != grid.dims() || s.grid.d() != grid.d() || s.grid.lengths() != grid.lengths() {
        return Err(SnapshotError::DimensionMismatch { expected: grid.dims(), found: s.grid.dims() });
    }
    Ok(s)
}
