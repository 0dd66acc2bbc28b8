//! Real spherical harmonics with orthonormal normalization.
//!
//! Basis values are produced through the fully normalized associated
//! Legendre recurrence (values stay O(1) at all supported degrees, no
//! factorial overflow). The Condon-Shortley phase is omitted. Columns are
//! ordered `(l, m)` lexicographically with `m` running from `-l` to `l`;
//! negative orders carry `sin(|m| lambda)`, positive orders `cos(m lambda)`.

use rayon::prelude::*;

use crate::embedding::{EmbeddingMatrix, Provenance};
use crate::error::{Error, Result};
use crate::geo::GeoPointSet;

/// Degrees above this are rejected.
pub const MAX_DEGREE: usize = 200;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Number of basis functions up to degree `l`: `(l + 1)^2`.
pub fn basis_size(l: usize) -> usize {
    (l + 1) * (l + 1)
}

/// Fill one row of spherical-harmonic basis values for a location given in
/// degrees. `out` must hold `basis_size(l_max)` values.
pub fn sh_row(lon_deg: f64, lat_deg: f64, l_max: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), basis_size(l_max));
    let lambda = lon_deg.to_radians();
    // Colatitude convention: x = cos(theta) = sin(lat), s = sin(theta) >= 0.
    let x = lat_deg.to_radians().sin();
    let s = (1.0 - x * x).max(0.0).sqrt();

    let col = |l: usize, m: isize| -> usize { l * l + (m + l as isize) as usize };

    // cos(m lambda), sin(m lambda) by incremental rotation.
    let (sin_l, cos_l) = lambda.sin_cos();

    // p_diag = normalized P_{m,m}; the inner loop climbs degree at fixed m.
    let mut p_diag = (0.25 / std::f64::consts::PI).sqrt(); // P_{0,0}
    let (mut cos_m, mut sin_m) = (1.0f64, 0.0f64); // m = 0

    for m in 0..=l_max {
        if m > 0 {
            p_diag *= s * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let c = cos_m * cos_l - sin_m * sin_l;
            let sn = sin_m * cos_l + cos_m * sin_l;
            cos_m = c;
            sin_m = sn;
        }
        let write = |out: &mut [f64], l: usize, p: f64| {
            if m == 0 {
                out[col(l, 0)] = p;
            } else {
                out[col(l, m as isize)] = SQRT_2 * p * cos_m;
                out[col(l, -(m as isize))] = SQRT_2 * p * sin_m;
            }
        };

        let mut p_prev = p_diag; // P_{m,m}
        write(out, m, p_prev);
        if m == l_max {
            break;
        }
        let mut p_curr = x * ((2 * m + 3) as f64).sqrt() * p_diag; // P_{m+1,m}
        write(out, m + 1, p_curr);
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            let p_next = a * (x * p_curr - b * p_prev);
            p_prev = p_curr;
            p_curr = p_next;
            write(out, l, p_curr);
        }
    }
}

/// Encode every point into the `(l_max + 1)^2`-dimensional SH basis.
pub fn encode_spherical_harmonics(points: &GeoPointSet, l_max: usize) -> Result<EmbeddingMatrix<f64>> {
    if points.n() == 0 {
        return Err(Error::EmptyInput("encode_spherical_harmonics: no points"));
    }
    if l_max > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "SH degree {l_max} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    let d = basis_size(l_max);
    let n = points.n();
    let mut data = vec![0.0f64; n * d];
    data.par_chunks_mut(d)
        .zip(points.points().par_iter())
        .for_each(|(row, p)| sh_row(p.lon(), p.lat(), l_max, row));
    EmbeddingMatrix::new(data, n, d, Provenance::Encoder(format!("sh(L={l_max})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use approx::assert_relative_eq;

    #[test]
    fn y00_is_constant() {
        let mut out = [0.0];
        sh_row(17.0, -42.0, 0, &mut out);
        assert_relative_eq!(out[0], 0.282094791773878, epsilon = 1e-12);
    }

    #[test]
    fn degree_one_matches_closed_forms() {
        // Y_{1,-1} = sqrt(3/4pi) * y, Y_{1,0} = sqrt(3/4pi) * z,
        // Y_{1,1} = sqrt(3/4pi) * x (orthonormal, no Condon-Shortley).
        let c = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        for &(lon, lat) in &[(0.0, 0.0), (45.0, 30.0), (-120.0, -75.0), (179.0, 88.0)] {
            let p = GeoPoint::new(lon, lat);
            let [x, y, z] = p.unit3();
            let mut out = [0.0; 4];
            sh_row(lon, lat, 1, &mut out);
            assert_relative_eq!(out[1], c * y, epsilon = 1e-12);
            assert_relative_eq!(out[2], c * z, epsilon = 1e-12);
            assert_relative_eq!(out[3], c * x, epsilon = 1e-12);
        }
    }

    #[test]
    fn addition_theorem_per_degree() {
        // sum_m Y_{lm}^2 = (2l + 1) / 4pi at every point.
        let l_max = 60;
        let mut out = vec![0.0; basis_size(l_max)];
        for &(lon, lat) in &[(12.0, 34.0), (-170.0, -89.5), (89.0, 0.0), (55.5, 66.6)] {
            sh_row(lon, lat, l_max, &mut out);
            for l in 0..=l_max {
                let sum: f64 = (0..2 * l + 1).map(|i| out[l * l + i] * out[l * l + i]).sum();
                let expected = (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI);
                assert_relative_eq!(sum, expected, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn dimension_is_l_plus_one_squared() {
        let pts = GeoPointSet::new(
            vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(10.0, 10.0)],
            None,
            0,
        );
        let emb = encode_spherical_harmonics(&pts, 10).unwrap();
        assert_eq!(emb.cols(), 121);
        assert_eq!(emb.rows(), 2);
    }

    #[test]
    fn degree_guard() {
        let pts = GeoPointSet::new(vec![GeoPoint::new(0.0, 0.0)], None, 0);
        assert!(encode_spherical_harmonics(&pts, MAX_DEGREE + 1).is_err());
    }
}
