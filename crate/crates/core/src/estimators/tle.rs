//! Tight local estimator.
//!
//! Works inside the ball of radius `R_k` around the query. For every ordered
//! neighbor pair `(v_i, v_j)` it measures how far `v_i` could travel toward
//! `v_j` (and toward the reflection `2q - v_j`) before leaving the ball, and
//! compares that boundary distance with the observed separation. The log
//! ratios play the role the radii ratios play in the plain maximum-likelihood
//! estimator and are pooled the same way.

use crate::error::{Error, Result};

/// Surrogate distances smaller than `RELATIVE_FLOOR * R_k` are discarded.
const RELATIVE_FLOOR: f64 = 1e-12;

/// Distance from an interior point to the ball surface along a ray, given
/// `a = Di^2 + V^2 - Dj^2` and `b = 4 V^2 (r^2 - Di^2)` (both from squared
/// lengths), as the positive root `t = (a + sqrt(a^2 + b)) / (2V)`.
#[inline]
fn boundary_distance(a: f64, b: f64, v: f64) -> f64 {
    let disc = (a * a + b).max(0.0).sqrt();
    if a >= 0.0 {
        (a + disc) / (2.0 * v)
    } else {
        // Conjugate form avoids cancellation for negative a.
        let denom = 2.0 * v * (disc - a);
        if denom > 0.0 {
            b / denom
        } else {
            0.0
        }
    }
}

/// Local estimate for `row`, given its neighbor indices and sorted radii and
/// the full data as a widened row-major view.
pub fn tle_local(
    view: &[f64],
    d: usize,
    idx_row: &[u32],
    radii_row: &[f64],
    row: usize,
) -> Result<f64> {
    let k = idx_row.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "tle_local needs at least 2 neighbors".into(),
        ));
    }
    let r = radii_row[k - 1];
    if !(r > 0.0) {
        return Err(Error::DegenerateNeighborhood("outer radius is zero"));
    }
    let _ = row;
    let r2 = r * r;

    // Pairwise squared distances among the k neighbors.
    let nrow = |i: usize| {
        let base = idx_row[i] as usize * d;
        &view[base..base + d]
    };
    let mut pair2 = vec![0.0f64; k * k];
    for i in 0..k {
        let vi = nrow(i);
        for j in (i + 1)..k {
            let vj = nrow(j);
            let mut acc = 0.0;
            for (a, b) in vi.iter().zip(vj) {
                let t = a - b;
                acc += t * t;
            }
            pair2[i * k + j] = acc;
            pair2[j * k + i] = acc;
        }
    }

    let ratio_cap = 1.0 / RELATIVE_FLOOR;
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..k {
        let di = radii_row[i];
        let di2 = di * di;
        let slack = r2 - di2; // >= 0 since radii are sorted up to r
        for j in 0..k {
            if i == j {
                continue;
            }
            let dj2 = radii_row[j] * radii_row[j];
            let v2 = pair2[i * k + j];

            if v2 > 0.0 {
                let v = v2.sqrt();
                let t = boundary_distance(di2 + v2 - dj2, 4.0 * v2 * slack.max(0.0), v);
                // term = ln(R_k / S) with S = r V / t; discard S below the
                // relative floor, i.e. t/V above its reciprocal.
                let ratio = t / v;
                if ratio > 0.0 && ratio <= ratio_cap {
                    sum += ratio.ln();
                    count += 1;
                }
            }

            // Reflected partner 2q - v_j sits at the same radius Dj; its
            // separation from v_i follows from the parallelogram law.
            let w2 = (2.0 * di2 + 2.0 * dj2 - v2).max(0.0);
            if w2 > 0.0 {
                let w = w2.sqrt();
                let t = boundary_distance(di2 + w2 - dj2, 4.0 * w2 * slack.max(0.0), w);
                let ratio = t / w;
                if ratio > 0.0 && ratio <= ratio_cap {
                    sum += ratio.ln();
                    count += 1;
                }
            }
        }
    }

    if count == 0 {
        return Err(Error::DegenerateNeighborhood(
            "no surrogate terms survived thresholding",
        ));
    }
    if sum <= 0.0 {
        return Err(Error::DegenerateNeighborhood(
            "all surrogate separations reach the ball surface",
        ));
    }
    Ok(count as f64 / sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{EmbeddingMatrix, Provenance};
    use crate::knn::knn_exact;
    use crate::rng::IndexedRng;
    use rand::Rng;

    #[test]
    fn shell_neighbors_degenerate() {
        // Query at origin, all neighbors on the unit circle: every surrogate
        // separation reaches the surface, so no log information remains.
        let pts = vec![
            0.0, 0.0, // query
            1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0,
        ];
        let emb = EmbeddingMatrix::new(pts, 5, 2, Provenance::Adhoc).unwrap();
        let t = knn_exact(&emb, 4).unwrap();
        let view = emb.widened();
        let err = tle_local(&view, 2, t.idx_row(0), t.radii_row(0), 0).unwrap_err();
        assert!(matches!(err, Error::DegenerateNeighborhood(_)));
    }

    #[test]
    fn roughly_two_on_planar_data() {
        let mut rng = IndexedRng::new(33).at(0);
        let n = 4000;
        let data: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
        let emb = EmbeddingMatrix::new(data, n, 2, Provenance::Adhoc).unwrap();
        let t = knn_exact(&emb, 20).unwrap();
        let view = emb.widened();
        let mut sum = 0.0;
        for i in 0..n {
            sum += tle_local(&view, 2, t.idx_row(i), t.radii_row(i), i).unwrap();
        }
        let mean = sum / n as f64;
        assert!((mean - 2.0).abs() < 0.25, "mean {mean}");
    }
}
