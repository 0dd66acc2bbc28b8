//! Land/water bitmask over a regular lon/lat grid, with the `MSK1` file
//! format: magic `MSK1`, u16 width, u16 height (little-endian), then the
//! bitmask row-major, MSB-first within each byte. Row 0 is the northernmost
//! band; column 0 starts at longitude -180.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geo::wrap_lon;

const MAGIC: [u8; 4] = [0x4D, 0x53, 0x4B, 0x31]; // "MSK1"

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandMask {
    width: u16,
    height: u16,
    bits: Vec<u8>,
}

impl LandMask {
    pub fn new_filled(width: u16, height: u16, value: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "mask dimensions must be nonzero".into(),
            ));
        }
        let nbytes = Self::payload_len(width, height);
        let fill = if value { 0xFF } else { 0x00 };
        Ok(LandMask {
            width,
            height,
            bits: vec![fill; nbytes],
        })
    }

    fn payload_len(width: u16, height: u16) -> usize {
        (width as usize * height as usize).div_ceil(8)
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    /// Set cell (row, col); row 0 = northernmost band.
    pub fn set(&mut self, row: u16, col: u16, value: bool) {
        assert!(row < self.height && col < self.width);
        let idx = row as usize * self.width as usize + col as usize;
        let (byte, bit) = (idx / 8, 7 - (idx % 8));
        if value {
            self.bits[byte] |= 1 << bit;
        } else {
            self.bits[byte] &= !(1 << bit);
        }
    }

    pub fn get(&self, row: u16, col: u16) -> bool {
        assert!(row < self.height && col < self.width);
        let idx = row as usize * self.width as usize + col as usize;
        (self.bits[idx / 8] >> (7 - (idx % 8))) & 1 == 1
    }

    /// Total lookup for any finite coordinate pair: longitude wraps, latitude
    /// clamps onto the boundary cells.
    pub fn lookup(&self, lon: f64, lat: f64) -> bool {
        let lon = wrap_lon(lon);
        let lat = lat.clamp(-90.0, 90.0);
        let col_f = (lon + 180.0) / 360.0 * self.width as f64;
        let col = (col_f.floor() as i64).clamp(0, self.width as i64 - 1) as u16;
        let row_f = (90.0 - lat) / 180.0 * self.height as f64;
        let row = (row_f.floor() as i64).clamp(0, self.height as i64 - 1) as u16;
        self.get(row, col)
    }

    /// Fraction of set cells weighted by spherical cell area.
    pub fn covered_area_fraction(&self) -> f64 {
        let mut covered = 0.0;
        let mut total = 0.0;
        for row in 0..self.height {
            let lat_hi = 90.0 - 180.0 * row as f64 / self.height as f64;
            let lat_lo = 90.0 - 180.0 * (row + 1) as f64 / self.height as f64;
            let band = lat_hi.to_radians().sin() - lat_lo.to_radians().sin();
            for col in 0..self.width {
                total += band;
                if self.get(row, col) {
                    covered += band;
                }
            }
        }
        covered / total
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.bits.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::Format(format!(
                "mask: truncated header ({} bytes, need 8)",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Format(format!(
                "mask: bad magic {:02X?}, expected {:02X?}",
                &bytes[..4],
                MAGIC
            )));
        }
        let width = u16::from_le_bytes([bytes[4], bytes[5]]);
        let height = u16::from_le_bytes([bytes[6], bytes[7]]);
        if width == 0 || height == 0 {
            return Err(Error::Format("mask: zero dimension".into()));
        }
        let expected = Self::payload_len(width, height);
        let payload = &bytes[8..];
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "mask: payload is {} bytes, expected {} for {}x{}",
                payload.len(),
                expected,
                width,
                height
            )));
        }
        Ok(LandMask {
            width,
            height,
            bits: payload.to_vec(),
        })
    }

    pub fn to_path(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}
