//! Coordinate sampling on the sphere: the six supported schemes.
//!
//! Every scheme is deterministic in `(scheme, n, seed, mask)`. Random schemes
//! draw each point from its own counter-addressed stream, so generation order
//! (serial or parallel) cannot change the output.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::{wrap_lon, GeoPoint, GeoPointSet, Scheme};
use crate::mask::LandMask;
use crate::rng::{substream, IndexedRng};

/// Golden angle in radians.
const GOLDEN_ANGLE: f64 = std::f64::consts::PI * (3.0 - 2.23606797749978969); // pi * (3 - sqrt 5)

/// Consecutive rejected draws allowed before land sampling gives up.
const LAND_REJECTION_GUARD: u64 = 10_000_000;

/// Number of equal-area latitude bands used by the stratified scheme.
const STRATIFIED_BANDS: usize = 18;

/// Fibonacci lattice: point `i` at `z = 1 - 2(i + 0.5)/n`, longitude stepped
/// by the golden angle.
pub fn sample_fibonacci(n: usize) -> Result<GeoPointSet> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_fibonacci: n = 0"));
    }
    let points: Vec<GeoPoint> = (0..n)
        .into_par_iter()
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let lat = z.asin().to_degrees();
            let lon = wrap_lon((i as f64 * GOLDEN_ANGLE).to_degrees());
            GeoPoint::new(lon, lat)
        })
        .collect();
    Ok(GeoPointSet::new(points, Some(Scheme::Fibonacci), 0))
}

fn uniform_sphere_point(rng: &mut impl Rng) -> GeoPoint {
    let lon = -180.0 + 360.0 * rng.random::<f64>();
    let lat = (2.0 * rng.random::<f64>() - 1.0).asin().to_degrees();
    GeoPoint::new(lon, lat)
}

/// Area-uniform sampling on the sphere.
pub fn sample_uniform_sphere(n: usize, seed: u64) -> Result<GeoPointSet> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_uniform_sphere: n = 0"));
    }
    let streams = IndexedRng::new(substream(seed, "sphere"));
    let points: Vec<GeoPoint> = (0..n as u64)
        .into_par_iter()
        .map(|i| uniform_sphere_point(&mut streams.at(i)))
        .collect();
    Ok(GeoPointSet::new(points, Some(Scheme::Sphere), seed))
}

/// Uniform in raw `(lon, lat)` degrees: deliberately oversamples the poles.
pub fn sample_naive(n: usize, seed: u64) -> Result<GeoPointSet> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_naive: n = 0"));
    }
    let streams = IndexedRng::new(substream(seed, "naive"));
    let points: Vec<GeoPoint> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.at(i);
            let lon = -180.0 + 360.0 * rng.random::<f64>();
            let lat = -90.0 + 180.0 * rng.random::<f64>();
            GeoPoint::new(lon, lat)
        })
        .collect();
    Ok(GeoPointSet::new(points, Some(Scheme::Naive), seed))
}

/// Regular lon/lat lattice of cell centers; `n = width * height`.
pub fn sample_grid(width: usize, height: usize) -> Result<GeoPointSet> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyInput("sample_grid: zero dimension"));
    }
    let mut points = Vec::with_capacity(width * height);
    for row in 0..height {
        let lat = -90.0 + 180.0 * (row as f64 + 0.5) / height as f64;
        for col in 0..width {
            let lon = -180.0 + 360.0 * (col as f64 + 0.5) / width as f64;
            points.push(GeoPoint::new(lon, lat));
        }
    }
    Ok(GeoPointSet::new(points, Some(Scheme::Grid), 0))
}

/// Stratified sampling: 18 latitude bands of equal spherical area, an equal
/// point budget per band (remainder spread over the southernmost bands),
/// area-uniform within each band. Falls back to plain uniform-sphere
/// sampling, with a warning recorded on the set, when `n` is smaller than
/// the band count.
pub fn sample_stratified(n: usize, seed: u64) -> Result<GeoPointSet> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_stratified: n = 0"));
    }
    if n < STRATIFIED_BANDS {
        let set = sample_uniform_sphere(n, seed)?;
        let points = set.points().to_vec();
        return Ok(
            GeoPointSet::new(points, Some(Scheme::Stratified), seed).with_warning(format!(
                "n = {n} is below the {STRATIFIED_BANDS}-band cell count; fell back to uniform-sphere sampling"
            )),
        );
    }
    let base = n / STRATIFIED_BANDS;
    let remainder = n % STRATIFIED_BANDS;
    // Band b (south to north) covers z in [z_b, z_{b+1}] with equal width.
    let band_of_index = |i: usize| -> usize {
        // Bands 0..remainder hold (base + 1) points each.
        let cut = remainder * (base + 1);
        if i < cut {
            i / (base + 1)
        } else {
            remainder + (i - cut) / base
        }
    };
    let streams = IndexedRng::new(substream(seed, "stratified"));
    let points: Vec<GeoPoint> = (0..n)
        .into_par_iter()
        .map(|i| {
            let band = band_of_index(i);
            let z_lo = -1.0 + 2.0 * band as f64 / STRATIFIED_BANDS as f64;
            let z_hi = -1.0 + 2.0 * (band + 1) as f64 / STRATIFIED_BANDS as f64;
            let mut rng = streams.at(i as u64);
            let lon = -180.0 + 360.0 * rng.random::<f64>();
            let z = z_lo + (z_hi - z_lo) * rng.random::<f64>();
            GeoPoint::new(lon, z.clamp(-1.0, 1.0).asin().to_degrees())
        })
        .collect();
    Ok(GeoPointSet::new(points, Some(Scheme::Stratified), seed))
}

/// Rejection sampling of uniform-sphere draws against a land mask.
pub fn sample_land(n: usize, seed: u64, mask: &LandMask) -> Result<GeoPointSet> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_land: n = 0"));
    }
    let streams = IndexedRng::new(substream(seed, "land"));
    let mut points = Vec::with_capacity(n);
    let mut rejected: u64 = 0;
    let mut candidate: u64 = 0;
    while points.len() < n {
        let p = uniform_sphere_point(&mut streams.at(candidate));
        candidate += 1;
        if mask.lookup(p.lon(), p.lat()) {
            points.push(p);
        } else {
            rejected += 1;
            if rejected >= LAND_REJECTION_GUARD {
                return Err(Error::MaskExhausted(rejected));
            }
        }
    }
    Ok(GeoPointSet::new(points, Some(Scheme::Land), seed))
}

/// Dispatch by scheme. `grid` derives its lattice from `n` as the smallest
/// `2h x h` lattice with at least `n` cells (the set size is then `2h^2`,
/// not `n`). `land` requires a mask.
pub fn sample(scheme: Scheme, n: usize, seed: u64, mask: Option<&LandMask>) -> Result<GeoPointSet> {
    match scheme {
        Scheme::Fibonacci => sample_fibonacci(n),
        Scheme::Sphere => sample_uniform_sphere(n, seed),
        Scheme::Naive => sample_naive(n, seed),
        Scheme::Stratified => sample_stratified(n, seed),
        Scheme::Grid => {
            let h = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
            sample_grid(2 * h, h)
        }
        Scheme::Land => {
            let mask = mask.ok_or_else(|| {
                Error::InvalidParameter("land scheme requires a mask".into())
            })?;
            sample_land(n, seed, mask)
        }
    }
}
