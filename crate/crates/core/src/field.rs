//! Complex fields on uniform periodic grids and their binary file format.
//!
//! A field file is a 64-byte little-endian header followed by `n_points`
//! interleaved `(re, im)` pairs of `f64`:
//!
//! | offset | type  | content         |
//! |--------|-------|-----------------|
//! | 0      | [u8;4]| magic `BWKB`    |
//! | 4      | u32   | format version  |
//! | 8      | u64   | `n_points`      |
//! | 16     | f64   | `x_min`         |
//! | 24     | f64   | `x_max`         |
//! | 32     | f64   | `epsilon`       |
//! | 40     | f64   | `t`             |
//! | 48     | 16 B  | reserved, zero  |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"BWKB";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;
/// Default number of grid points per lattice cell at scale `ε`.
pub const POINTS_PER_CELL: usize = 16;

/// Uniform periodic grid `x_j = x_min + j Δx` on `[x_min, x_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl WaveGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) || n < 2 {
            return Err(Error::invalid(format!(
                "grid [{x_min}, {x_max}) with {n} points"
            )));
        }
        Ok(WaveGrid { x_min, x_max, n })
    }

    /// Smallest power-of-two grid with `Δx ≤ ε·period/points_per_cell`.
    pub fn resolving(x_min: f64, x_max: f64, epsilon: f64, period: f64, points_per_cell: usize) -> Result<Self> {
        if !(epsilon > 0.0) || points_per_cell == 0 {
            return Err(Error::invalid("need epsilon > 0 and points_per_cell >= 1"));
        }
        let limit = epsilon * period / points_per_cell as f64;
        let n = (((x_max - x_min) / limit).ceil() as usize).max(2).next_power_of_two();
        Self::new(x_min, x_max, n)
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Fails unless `Δx ≤ ε·period/points_per_cell`.
    pub fn check_resolution(&self, epsilon: f64, period: f64, points_per_cell: usize) -> Result<()> {
        let limit = epsilon * period / points_per_cell as f64;
        if self.dx() > limit * (1.0 + 1e-12) {
            return Err(Error::Resolution { dx: self.dx(), limit });
        }
        Ok(())
    }
}

/// Complex samples on a [`WaveGrid`] at scale `ε` and time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub epsilon: f64,
    pub t: f64,
    pub grid: WaveGrid,
    pub values: Vec<Complex64>,
}

impl WaveField {
    pub fn zeros(grid: WaveGrid, epsilon: f64, t: f64) -> Self {
        WaveField {
            epsilon,
            t,
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn from_fn(grid: WaveGrid, epsilon: f64, t: f64, f: impl Fn(f64) -> Complex64) -> Self {
        WaveField {
            epsilon,
            t,
            grid,
            values: grid.points().into_iter().map(f).collect(),
        }
    }

    /// Fails unless `other` lives on the same grid at the same `ε`.
    pub fn check_compatible(&self, other: &WaveField) -> Result<()> {
        if self.grid != other.grid || self.epsilon != other.epsilon {
            return Err(Error::GridMismatch(format!(
                "{:?} at eps {} vs {:?} at eps {}",
                self.grid, self.epsilon, other.grid, other.epsilon
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[0..4].copy_from_slice(MAGIC);
        header[4..8].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        header[8..16].copy_from_slice(&(self.grid.n as u64).to_le_bytes());
        header[16..24].copy_from_slice(&self.grid.x_min.to_le_bytes());
        header[24..32].copy_from_slice(&self.grid.x_max.to_le_bytes());
        header[32..40].copy_from_slice(&self.epsilon.to_le_bytes());
        header[40..48].copy_from_slice(&self.t.to_le_bytes());
        out.write_all(&header)?;
        let mut body = Vec::with_capacity(16 * self.values.len());
        for z in &self.values {
            body.extend_from_slice(&z.re.to_le_bytes());
            body.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&body)
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        input
            .read_exact(&mut header)
            .map_err(|e| Error::Format(format!("header at byte 0: {e}")))?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("bad magic at byte 0".into()));
        }
        let word = |r: std::ops::Range<usize>| -> [u8; 8] { header[r].try_into().expect("8 bytes") };
        let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version} at byte 4")));
        }
        let n = u64::from_le_bytes(word(8..16)) as usize;
        let x_min = f64::from_le_bytes(word(16..24));
        let x_max = f64::from_le_bytes(word(24..32));
        let epsilon = f64::from_le_bytes(word(32..40));
        let t = f64::from_le_bytes(word(40..48));
        let grid = WaveGrid::new(x_min, x_max, n).map_err(|e| Error::Format(format!("byte 8: {e}")))?;
        let mut body = vec![0u8; 16 * n];
        input
            .read_exact(&mut body)
            .map_err(|e| Error::Format(format!("body at byte {HEADER_LEN}: {e}")))?;
        let values = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Ok(WaveField {
            epsilon,
            t,
            grid,
            values,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

/// Discrete `L²` norm `(Δx Σ|ψ_j|²)^{1/2}`, exact for band-limited fields.
pub fn mass(psi: &WaveField) -> f64 {
    (psi.grid.dx() * psi.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}
