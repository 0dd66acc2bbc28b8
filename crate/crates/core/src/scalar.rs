//! Storage scalar abstraction.
//!
//! Embedding matrices are stored in either `f32` or `f64` (the two payload
//! types of the `EMB1` file format). All distance and angle accumulation is
//! done in 64-bit arithmetic regardless of the storage precision, so the
//! compute layer only needs a cheap widening view of the stored data.

use std::borrow::Cow;
use std::fmt;

use num_traits::{AsPrimitive, Float, FromPrimitive};

/// Element type of the `EMB1` payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size_of(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Dtype::F32),
            1 => Some(Dtype::F64),
            _ => None,
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dtype::F32 => write!(f, "f32"),
            Dtype::F64 => write!(f, "f64"),
        }
    }
}

/// Floating-point storage scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + AsPrimitive<f64> + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    const DTYPE: Dtype;

    /// Bit pattern used for exact-duplicate detection.
    fn bit_pattern(self) -> u64;

    fn from_f64_lossy(v: f64) -> Self;

    /// Widen a stored slice to `f64` for accumulation. Borrowed (free) for
    /// `f64` storage, a one-time copy for `f32`.
    fn widen(data: &[Self]) -> Cow<'_, [f64]>;

    fn write_le(self, out: &mut Vec<u8>);

    /// Read one value from exactly `DTYPE.size_of()` little-endian bytes.
    fn read_le(bytes: &[u8]) -> Self;
}

impl Scalar for f32 {
    const DTYPE: Dtype = Dtype::F32;

    fn bit_pattern(self) -> u64 {
        self.to_bits() as u64
    }

    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }

    fn widen(data: &[Self]) -> Cow<'_, [f64]> {
        Cow::Owned(data.iter().map(|&v| v as f64).collect())
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("f32 needs 4 bytes"))
    }
}

impl Scalar for f64 {
    const DTYPE: Dtype = Dtype::F64;

    fn bit_pattern(self) -> u64 {
        self.to_bits()
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn widen(data: &[Self]) -> Cow<'_, [f64]> {
        Cow::Borrowed(data)
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("f64 needs 8 bytes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widen_is_borrowed_for_f64() {
        let v = vec![1.0f64, 2.0];
        assert!(matches!(f64::widen(&v), Cow::Borrowed(_)));
    }

    #[test]
    fn widen_converts_f32() {
        let v = vec![1.5f32, -2.25];
        let w = f32::widen(&v);
        assert_eq!(&*w, &[1.5f64, -2.25]);
    }

    #[test]
    fn le_round_trip() {
        let mut buf = Vec::new();
        1.25f32.write_le(&mut buf);
        (-3.5f64).write_le(&mut buf);
        assert_eq!(f32::read_le(&buf[..4]), 1.25);
        assert_eq!(f64::read_le(&buf[4..]), -3.5);
    }
}
