//! Geographic points on the unit sphere.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Wrap a longitude into `[-180, 180)`.
pub fn wrap_lon(lon: f64) -> f64 {
    let mut l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return 360.0 - eps rounding back to 180.0 exactly.
    if l >= 180.0 {
        l = -180.0;
    }
    l
}

/// A location given as degrees plus its unit 3-vector on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lon: f64,
    lat: f64,
    unit3: [f64; 3],
}

impl GeoPoint {
    /// Build a point, wrapping longitude into `[-180, 180)` and clamping
    /// latitude to `[-90, 90]`.
    pub fn new(lon: f64, lat: f64) -> Self {
        let lon = wrap_lon(lon);
        let lat = lat.clamp(-90.0, 90.0);
        let (phi, lambda) = (lat.to_radians(), lon.to_radians());
        let unit3 = [
            phi.cos() * lambda.cos(),
            phi.cos() * lambda.sin(),
            phi.sin(),
        ];
        GeoPoint { lon, lat, unit3 }
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn unit3(&self) -> [f64; 3] {
        self.unit3
    }

    /// Great-circle angle to another point, in radians.
    pub fn angle_to(&self, other: &GeoPoint) -> f64 {
        let a = self.unit3;
        let b = other.unit3;
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }
}

/// Sampling scheme that produced a point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Fibonacci,
    Sphere,
    Land,
    Grid,
    Naive,
    Stratified,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Fibonacci,
        Scheme::Sphere,
        Scheme::Land,
        Scheme::Grid,
        Scheme::Naive,
        Scheme::Stratified,
    ];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::Fibonacci => "fibonacci",
            Scheme::Sphere => "sphere",
            Scheme::Land => "land",
            Scheme::Grid => "grid",
            Scheme::Naive => "naive",
            Scheme::Stratified => "stratified",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fibonacci" => Ok(Scheme::Fibonacci),
            "sphere" => Ok(Scheme::Sphere),
            "land" => Ok(Scheme::Land),
            "grid" => Ok(Scheme::Grid),
            "naive" => Ok(Scheme::Naive),
            "stratified" => Ok(Scheme::Stratified),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampling scheme '{other}'"
            ))),
        }
    }
}

/// An ordered, deduplicated set of points with its generation parameters.
#[derive(Debug, Clone)]
pub struct GeoPointSet {
    points: Vec<GeoPoint>,
    scheme: Option<Scheme>,
    seed: u64,
    warning: Option<String>,
}

impl GeoPointSet {
    /// Deduplicate by exact `(lon, lat)` bit equality, keeping the first
    /// occurrence, and wrap into a set.
    pub fn new(points: Vec<GeoPoint>, scheme: Option<Scheme>, seed: u64) -> Self {
        let points = dedup_points(points);
        GeoPointSet {
            points,
            scheme,
            seed,
            warning: None,
        }
    }

    pub(crate) fn with_warning(mut self, warning: String) -> Self {
        self.warning = Some(warning);
        self
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    pub fn scheme_label(&self) -> String {
        match self.scheme {
            Some(s) => s.to_string(),
            None => "external".to_string(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// Write as CSV with header `lon,lat`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lon,lat")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.lon(), p.lat())?;
        }
        Ok(())
    }

    pub fn to_csv_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Read a `lon,lat` CSV written by [`GeoPointSet::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("point CSV: missing header".into()))??;
        if header.trim() != "lon,lat" {
            return Err(Error::Format(format!(
                "point CSV: expected header 'lon,lat', got '{}'",
                header.trim()
            )));
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let lon = parse_field(it.next(), "lon", i)?;
            let lat = parse_field(it.next(), "lat", i)?;
            if it.next().is_some() {
                return Err(Error::Format(format!(
                    "point CSV: row {i} has more than 2 fields"
                )));
            }
            points.push(GeoPoint::new(lon, lat));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput("point CSV has no rows"));
        }
        Ok(GeoPointSet::new(points, None, 0))
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(f)
    }
}

fn parse_field(field: Option<&str>, name: &str, row: usize) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Format(format!("point CSV: row {row} missing {name}")))?;
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("point CSV: row {row}: bad {name} '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!(
            "point CSV: row {row}: non-finite {name}"
        )));
    }
    Ok(v)
}

/// Exact `(lon, lat)` bit-equality dedup, first occurrence kept.
pub fn dedup_points(points: Vec<GeoPoint>) -> Vec<GeoPoint> {
    use std::collections::HashSet;
    let mut seen: HashSet<(u64, u64)> = HashSet::with_capacity(points.len());
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if seen.insert((p.lon().to_bits(), p.lat().to_bits())) {
            out.push(p);
        }
    }
    out
}
