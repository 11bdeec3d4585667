//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | bytes        | content                                          |
//! |--------------|--------------------------------------------------|
//! | 8            | magic `GAUGEFX1`                                 |
//! | 8            | `u64` grid size `N`                              |
//! | 8            | `f64` domain length `L`                          |
//! | 8            | `u64` component count, always 6                  |
//! | 6 x 8        | component names, NUL-padded ASCII                |
//! | 6 x N^3 x 8  | `f64` grids in component order, row-major        |
//!
//! Grid index is `(ix * N + iy) * N + iz` at `x = (ix, iy, iz) * L / N`.
//! A JSON sidecar at `<path>.json` repeats the header for humans.

use std::fs;
use std::path::{Path, PathBuf};

use gaugefix_core::maxwell::{FieldState, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MAGIC: &[u8; 8] = b"GAUGEFX1";
pub const COMPONENTS: [&str; 6] = ["A_x", "A_y", "A_z", "pi_x", "pi_y", "pi_z"];
const HEADER_LEN: usize = 8 + 8 + 8 + 8 + 6 * 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub grid_n: usize,
    pub domain_length: f64,
    pub components: Vec<String>,
    pub byte_order: String,
    pub layout: String,
}

impl Sidecar {
    fn for_state(state: &FieldState) -> Self {
        Self {
            format: String::from_utf8_lossy(MAGIC).into_owned(),
            grid_n: state.grid_n(),
            domain_length: state.domain_length(),
            components: COMPONENTS.iter().map(|s| s.to_string()).collect(),
            byte_order: "little-endian".into(),
            layout: "row-major f64, index (ix*N + iy)*N + iz".into(),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn encode(state: &FieldState) -> Vec<u8> {
    let cells = state.a()[0].len();
    let mut out = Vec::with_capacity(HEADER_LEN + 6 * cells * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(state.grid_n() as u64).to_le_bytes());
    out.extend_from_slice(&state.domain_length().to_le_bytes());
    out.extend_from_slice(&(COMPONENTS.len() as u64).to_le_bytes());
    for name in COMPONENTS {
        let mut padded = [0u8; 8];
        padded[..name.len()].copy_from_slice(name.as_bytes());
        out.extend_from_slice(&padded);
    }
    for grid in state.a().iter().chain(state.pi()) {
        for x in grid {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<FieldState, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("{} bytes is shorter than the {HEADER_LEN}-byte header", bytes.len()));
    }
    if &bytes[..8] != MAGIC {
        return Err("bad magic".into());
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8 bytes") };
    let n = u64::from_le_bytes(word(8));
    let length = f64::from_le_bytes(word(16));
    let count = u64::from_le_bytes(word(24));
    if count != COMPONENTS.len() as u64 {
        return Err(format!("expected 6 components, header says {count}"));
    }
    for (i, name) in COMPONENTS.iter().enumerate() {
        let raw = word(32 + 8 * i);
        let end = raw.iter().position(|&b| b == 0).unwrap_or(8);
        if &raw[..end] != name.as_bytes() || raw[end..].iter().any(|&b| b != 0) {
            return Err(format!("component {i} should be {name}"));
        }
    }
    let cells = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(n)?.checked_mul(n))
        .ok_or_else(|| format!("grid size {n} overflows"))?;
    let expected = cells
        .checked_mul(6 * 8)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| format!("grid size {n} overflows"))?;
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes for N = {n}, found {}", bytes.len()));
    }
    let mut grids = bytes[HEADER_LEN..]
        .chunks_exact(cells * 8)
        .map(|chunk| chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect());
    let mut next = || -> Vec<f64> { grids.next().expect("six grids") };
    let a: VectorField = [next(), next(), next()];
    let pi: VectorField = [next(), next(), next()];
    FieldState::new(a, pi, n as usize, length).map_err(|e| e.to_string())
}

/// Writes the snapshot and its sidecar.
pub fn write(path: &Path, state: &FieldState) -> Result<()> {
    fs::write(path, encode(state)).map_err(|e| HarnessError::io(path, e))?;
    let sidecar = sidecar_path(path);
    let json = serde_json::to_string_pretty(&Sidecar::for_state(state))?;
    fs::write(&sidecar, json + "\n").map_err(|e| HarnessError::io(sidecar, e))
}

/// Reads a snapshot; the sidecar is not consulted.
pub fn read(path: &Path) -> Result<FieldState> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    decode(&bytes).map_err(|reason| HarnessError::Snapshot {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FieldState {
        let len = 64;
        let grid = |c: usize| (0..len).map(|i| (i * 7 + c) as f64 * 0.25 - 3.0).collect::<Vec<_>>();
        FieldState::new([grid(0), grid(1), grid(2)], [grid(3), grid(4), grid(5)], 4, 2.5).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let state = sample();
        let back = decode(&encode(&state)).unwrap();
        assert_eq!(back.a(), state.a());
        assert_eq!(back.pi(), state.pi());
        assert_eq!(back.grid_n(), 4);
        assert_eq!(back.domain_length(), 2.5);
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..8], b"GAUGEFX1");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.5);
        assert_eq!(&bytes[32..40], b"A_x\0\0\0\0\0");
        assert_eq!(&bytes[72..80], b"pi_z\0\0\0\0");
        assert_eq!(bytes.len(), HEADER_LEN + 6 * 64 * 8);
        // first value of A_x
        assert_eq!(f64::from_le_bytes(bytes[80..88].try_into().unwrap()), -3.0);
    }

    #[test]
    fn rejects_damage() {
        let good = encode(&sample());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(decode(&bad_magic).unwrap_err().contains("magic"));
        assert!(decode(&good[..good.len() - 1]).is_err());
        assert!(decode(&good[..10]).is_err());
        let mut bad_name = good.clone();
        bad_name[33] = b'B';
        assert!(decode(&bad_name).is_err());
        let mut bad_n = good;
        bad_n[8] = 5;
        assert!(decode(&bad_n).is_err());
    }

    #[test]
    fn sidecar_sits_next_to_snapshot() {
        assert_eq!(sidecar_path(Path::new("/tmp/x.bin")), PathBuf::from("/tmp/x.bin.json"));
    }
}
