//! Embedding matrices and their on-disk formats.
//!
//! Binary `EMB1`: magic `EMB1`, u8 dtype (0 = f32, 1 = f64), u64 rows,
//! u64 cols (little-endian), then the row-major payload. CSV embeddings
//! carry `lon,lat` ahead of the feature columns `e0..e{D-1}`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::scalar::{Dtype, Scalar};

const MAGIC: [u8; 4] = [0x45, 0x4D, 0x42, 0x31]; // "EMB1"
const HEADER_LEN: usize = 4 + 1 + 8 + 8;

/// Where an embedding matrix came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Produced by a synthetic encoder; holds the encoder description.
    Encoder(String),
    /// Loaded from an external file.
    File(String),
    /// Constructed in memory (tests, ad-hoc data).
    Adhoc,
}

/// Row-major `n x d` matrix of embedding vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix<F: Scalar> {
    data: Vec<F>,
    rows: usize,
    cols: usize,
    provenance: Provenance,
}

impl<F: Scalar> EmbeddingMatrix<F> {
    pub fn new(data: Vec<F>, rows: usize, cols: usize, provenance: Provenance) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput("embedding matrix with zero dimension"));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "embedding data length {} does not match {rows} x {cols}",
                data.len()
            )));
        }
        for (i, row) in data.chunks_exact(cols).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("non-finite value in row {i}")));
            }
        }
        Ok(EmbeddingMatrix {
            data,
            rows,
            cols,
            provenance,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    /// Copy the given rows into a new matrix (provenance is preserved).
    pub fn gather(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput("gather with no indices"));
        }
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Ok(EmbeddingMatrix {
            data,
            rows: indices.len(),
            cols: self.cols,
            provenance: self.provenance.clone(),
        })
    }

    /// 64-bit view of the payload for accumulation; borrows when `F = f64`.
    pub fn widened(&self) -> std::borrow::Cow<'_, [f64]> {
        F::widen(&self.data)
    }

    pub fn write_emb1<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&[F::DTYPE.code()])?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * F::DTYPE.size_of());
        for &v in &self.data {
            v.write_le(&mut buf);
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_emb1_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_emb1(std::io::BufWriter::new(f))
    }

    /// Write as CSV `lon,lat,e0,...`; `coords` must be row-aligned.
    pub fn write_csv<W: Write>(&self, coords: &[GeoPoint], mut w: W) -> Result<()> {
        if coords.len() != self.rows {
            return Err(Error::InvalidParameter(format!(
                "coords length {} does not match {} rows",
                coords.len(),
                self.rows
            )));
        }
        write!(w, "lon,lat")?;
        for j in 0..self.cols {
            write!(w, ",e{j}")?;
        }
        writeln!(w)?;
        for (p, row) in coords.iter().zip(self.data.chunks_exact(self.cols)) {
            write!(w, "{},{}", p.lon(), p.lat())?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// An embedding loaded from disk, in whichever precision the file carried.
#[derive(Debug, Clone)]
pub enum DynEmbedding {
    F32(EmbeddingMatrix<f32>),
    F64(EmbeddingMatrix<f64>),
}

impl DynEmbedding {
    pub fn rows(&self) -> usize {
        match self {
            DynEmbedding::F32(m) => m.rows(),
            DynEmbedding::F64(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            DynEmbedding::F32(m) => m.cols(),
            DynEmbedding::F64(m) => m.cols(),
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            DynEmbedding::F32(_) => Dtype::F32,
            DynEmbedding::F64(_) => Dtype::F64,
        }
    }
}

/// Parse an `EMB1` byte stream.
pub fn read_emb1(bytes: &[u8], descriptor: &str) -> Result<DynEmbedding> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "EMB1: truncated header ({} bytes, need {HEADER_LEN})",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Format(format!(
            "EMB1: bad magic {:02X?}, expected {:02X?}",
            &bytes[..4],
            MAGIC
        )));
    }
    let dtype = Dtype::from_code(bytes[4])
        .ok_or_else(|| Error::Format(format!("EMB1: unknown dtype code {}", bytes[4])))?;
    let rows = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[13..21].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::Format("EMB1: zero dimension in header".into()));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|e| e.checked_mul(dtype.size_of()))
        .ok_or_else(|| Error::Format("EMB1: dimension overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "EMB1: payload is {} bytes, expected {} for {rows} x {cols} {dtype}",
            payload.len(),
            expected
        )));
    }
    fn decode<F: Scalar>(payload: &[u8], rows: usize, cols: usize, desc: &str) -> Result<EmbeddingMatrix<F>> {
        let data: Vec<F> = payload
            .chunks_exact(F::DTYPE.size_of())
            .map(F::read_le)
            .collect();
        EmbeddingMatrix::new(data, rows, cols, Provenance::File(desc.to_string()))
    }
    match dtype {
        Dtype::F32 => Ok(DynEmbedding::F32(decode(payload, rows, cols, descriptor)?)),
        Dtype::F64 => Ok(DynEmbedding::F64(decode(payload, rows, cols, descriptor)?)),
    }
}

pub fn read_emb1_path(path: &Path) -> Result<DynEmbedding> {
    let bytes = std::fs::read(path)?;
    read_emb1(&bytes, &path.display().to_string())
}

/// Read a CSV embedding (`lon,lat,e0,...`); returns the feature matrix and
/// the row-aligned coordinates.
pub fn read_csv_embedding<R: Read>(r: R, descriptor: &str) -> Result<(EmbeddingMatrix<f64>, Vec<GeoPoint>)> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("embedding CSV: missing header".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 3 || cols[0] != "lon" || cols[1] != "lat" {
        return Err(Error::Format(
            "embedding CSV: expected header 'lon,lat,e0,...'".into(),
        ));
    }
    for (j, c) in cols[2..].iter().enumerate() {
        if *c != format!("e{j}") {
            return Err(Error::Format(format!(
                "embedding CSV: feature column {} named '{c}', expected 'e{j}'",
                j + 2
            )));
        }
    }
    let d = cols.len() - 2;
    let mut data = Vec::new();
    let mut coords = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 2 {
            return Err(Error::Format(format!(
                "embedding CSV: row {i} has {} fields, expected {}",
                fields.len(),
                d + 2
            )));
        }
        let mut parse = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| {
                Error::Format(format!("embedding CSV: row {i}: bad {what} '{s}'"))
            })?;
            if !v.is_finite() {
                return Err(Error::Format(format!(
                    "embedding CSV: row {i}: non-finite {what}"
                )));
            }
            Ok(v)
        };
        let lon = parse(fields[0], "lon")?;
        let lat = parse(fields[1], "lat")?;
        coords.push(GeoPoint::new(lon, lat));
        for (j, f) in fields[2..].iter().enumerate() {
            data.push(parse(f, &format!("e{j}"))?);
        }
    }
    let rows = coords.len();
    let m = EmbeddingMatrix::new(data, rows, d, Provenance::File(descriptor.to_string()))?;
    Ok((m, coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_f32() -> EmbeddingMatrix<f32> {
        EmbeddingMatrix::new(
            vec![1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0],
            3,
            2,
            Provenance::Adhoc,
        )
        .unwrap()
    }

    #[test]
    fn emb1_header_math() {
        let mut buf = Vec::new();
        small_f32().write_emb1(&mut buf).unwrap();
        assert_eq!(buf.len(), 21 + 24);
    }

    #[test]
    fn emb1_round_trip_both_dtypes() {
        let m32 = small_f32();
        let mut buf = Vec::new();
        m32.write_emb1(&mut buf).unwrap();
        match read_emb1(&buf, "t").unwrap() {
            DynEmbedding::F32(back) => assert_eq!(back.data(), m32.data()),
            _ => panic!("dtype changed"),
        }

        let m64 =
            EmbeddingMatrix::new(vec![0.5f64, -0.25, 1e-12, 3.0], 2, 2, Provenance::Adhoc).unwrap();
        let mut buf = Vec::new();
        m64.write_emb1(&mut buf).unwrap();
        match read_emb1(&buf, "t").unwrap() {
            DynEmbedding::F64(back) => assert_eq!(back.data(), m64.data()),
            _ => panic!("dtype changed"),
        }
    }

    #[test]
    fn emb1_truncation_reports_expected_vs_actual() {
        let mut buf = Vec::new();
        small_f32().write_emb1(&mut buf).unwrap();
        buf.pop();
        match read_emb1(&buf, "t").unwrap_err() {
            Error::Format(msg) => {
                assert!(msg.contains("23"), "{msg}");
                assert!(msg.contains("24"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn emb1_bad_magic() {
        let mut buf = Vec::new();
        small_f32().write_emb1(&mut buf).unwrap();
        buf[1] = b'X';
        assert!(matches!(read_emb1(&buf, "t"), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_rejected_with_row_index() {
        let err = EmbeddingMatrix::new(
            vec![1.0f64, 2.0, f64::NAN, 4.0],
            2,
            2,
            Provenance::Adhoc,
        )
        .unwrap_err();
        match err {
            Error::Format(msg) => assert!(msg.contains("row 1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_with_coords() {
        let m = EmbeddingMatrix::new(vec![1.5f64, -2.0, 0.0, 4.25], 2, 2, Provenance::Adhoc)
            .unwrap();
        let coords = vec![GeoPoint::new(10.0, 20.0), GeoPoint::new(-30.0, -40.0)];
        let mut buf = Vec::new();
        m.write_csv(&coords, &mut buf).unwrap();
        let (back, back_coords) = read_csv_embedding(&buf[..], "t").unwrap();
        assert_eq!(back.data(), m.data());
        assert_eq!(back_coords[1].lat(), -40.0);
    }
}
