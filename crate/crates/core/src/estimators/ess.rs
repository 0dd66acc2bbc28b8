//! Expected-simplex-skewness local estimator (order-1 simplices).
//!
//! The statistic is the mean absolute sine of the angle between pairs of
//! mean-centered neighbor vectors. It concentrates around a dimension-
//! specific reference value `m(d) = E[|sin theta|]` for independent uniform
//! directions in `d` dimensions; inverting the observed statistic against
//! that curve yields the local estimate. The curve ships as a Monte-Carlo
//! table (`assets/ess_reference.csv`, regenerated by
//! `examples/regen_ess_reference.rs`).

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{normal, substream, IndexedRng};

const REFERENCE_CSV: &str = include_str!("../../assets/ess_reference.csv");

/// Largest tabulated dimension; inversions clip to this.
pub const MAX_TABULATED_DIM: usize = 200;

/// Reference curve `d -> E[|sin theta|]`, d = 1..=MAX_TABULATED_DIM.
#[derive(Debug, Clone)]
pub struct SinAngleCurve {
    values: Vec<f64>,
}

impl SinAngleCurve {
    fn parse(csv: &str) -> SinAngleCurve {
        let mut values = Vec::with_capacity(MAX_TABULATED_DIM);
        for (i, line) in csv.lines().skip(1).enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let d: usize = it.next().and_then(|s| s.parse().ok()).expect("ess curve: d");
            let m: f64 = it.next().and_then(|s| s.parse().ok()).expect("ess curve: m");
            assert_eq!(d, i + 1, "ess curve rows must be consecutive dimensions");
            values.push(m);
        }
        assert_eq!(values.len(), MAX_TABULATED_DIM, "ess curve length");
        // Monte-Carlo noise must not break monotonicity of the inverse.
        let mut running = f64::NEG_INFINITY;
        for v in values.iter_mut() {
            running = running.max(*v);
            *v = running;
        }
        SinAngleCurve { values }
    }

    pub fn value(&self, d: usize) -> f64 {
        self.values[d - 1]
    }

    /// Monotone piecewise-linear inversion; clips to `[1, MAX_TABULATED_DIM]`.
    pub fn invert(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ess statistic {s} is not finite"
            )));
        }
        if s <= self.values[0] {
            return Ok(1.0);
        }
        let last = *self.values.last().unwrap();
        if s >= last {
            return Ok(MAX_TABULATED_DIM as f64);
        }
        // First index with value > s; interpolate within [idx-1, idx].
        let idx = self.values.partition_point(|&v| v <= s);
        let (lo, hi) = (self.values[idx - 1], self.values[idx]);
        let frac = if hi > lo { (s - lo) / (hi - lo) } else { 0.0 };
        Ok(idx as f64 + frac) // dimensions are idx and idx + 1 (1-based)
    }
}

/// The shipped reference curve.
pub fn reference_curve() -> &'static SinAngleCurve {
    static CURVE: OnceLock<SinAngleCurve> = OnceLock::new();
    CURVE.get_or_init(|| SinAngleCurve::parse(REFERENCE_CSV))
}

/// Monte-Carlo tabulation of `E[|sin theta|]` for iid uniform directions,
/// one row per integer dimension. This is the procedure that produced the
/// shipped asset (seed 20240101, 1e6 pairs per dimension).
pub fn tabulate_sin_angle_curve(max_d: usize, pairs: usize, seed: u64) -> Vec<(usize, f64)> {
    (1..=max_d)
        .into_par_iter()
        .map(|d| {
            let streams = IndexedRng::new(substream(seed, "ess-curve"));
            let mut rng = streams.at(d as u64);
            let mut sum = 0.0;
            let mut u = vec![0.0f64; d];
            let mut v = vec![0.0f64; d];
            for _ in 0..pairs {
                for x in u.iter_mut() {
                    *x = normal(&mut rng);
                }
                for x in v.iter_mut() {
                    *x = normal(&mut rng);
                }
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
                let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nu > 0.0 && nv > 0.0 {
                    let cos = (dot / (nu * nv)).clamp(-1.0, 1.0);
                    sum += (1.0 - cos * cos).max(0.0).sqrt();
                }
            }
            (d, sum / pairs as f64)
        })
        .collect()
}

/// Local estimate for one row: mean-center the neighbor patch, average
/// `|sin|` over neighbor pairs, invert against the reference curve.
pub fn ess_local(view: &[f64], d: usize, idx_row: &[u32]) -> Result<f64> {
    let k = idx_row.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "ess_local needs at least 2 neighbors".into(),
        ));
    }
    let mut mean = vec![0.0f64; d];
    for &j in idx_row {
        let row = &view[j as usize * d..(j as usize + 1) * d];
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= k as f64;
    }
    let centered: Vec<f64> = idx_row
        .iter()
        .flat_map(|&j| {
            let row = &view[j as usize * d..(j as usize + 1) * d];
            row.iter().zip(&mean).map(|(v, m)| v - m).collect::<Vec<f64>>()
        })
        .collect();
    let norms: Vec<f64> = centered
        .chunks_exact(d)
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0..k {
        if norms[a] == 0.0 {
            continue;
        }
        let ra = &centered[a * d..(a + 1) * d];
        for b in (a + 1)..k {
            if norms[b] == 0.0 {
                continue;
            }
            let rb = &centered[b * d..(b + 1) * d];
            let dot: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
            let cos = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            sum += (1.0 - cos * cos).max(0.0).sqrt();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DegenerateNeighborhood(
            "no usable neighbor pairs for ess",
        ));
    }
    reference_curve().invert(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Analytic reference: gamma(d/2)^2 / (gamma((d+1)/2) gamma((d-1)/2)).
    fn analytic_m(d: usize) -> f64 {
        fn ln_gamma(x: f64) -> f64 {
            // Lanczos g = 7, n = 9.
            const C: [f64; 9] = [
                0.99999999999980993,
                676.5203681218851,
                -1259.1392167224028,
                771.32342877765313,
                -176.61502916214059,
                12.507343278686905,
                -0.13857109526572012,
                9.9843695780195716e-6,
                1.5056327351493116e-7,
            ];
            if x < 0.5 {
                return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln()
                    - ln_gamma(1.0 - x);
            }
            let x = x - 1.0;
            let mut a = C[0];
            let t = x + 7.5;
            for (i, &c) in C.iter().enumerate().skip(1) {
                a += c / (x + i as f64);
            }
            0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
        }
        if d == 1 {
            return 0.0;
        }
        let df = d as f64;
        (2.0 * ln_gamma(df / 2.0) - ln_gamma((df + 1.0) / 2.0) - ln_gamma((df - 1.0) / 2.0)).exp()
    }

    #[test]
    fn shipped_curve_matches_analytic_formula() {
        let curve = reference_curve();
        assert_eq!(curve.value(1), 0.0);
        assert_relative_eq!(curve.value(2), 2.0 / std::f64::consts::PI, epsilon = 2e-3);
        for d in [2usize, 3, 5, 10, 50, 200] {
            let diff = (curve.value(d) - analytic_m(d)).abs();
            assert!(diff < 3e-3, "d={d}: table {} vs analytic {}", curve.value(d), analytic_m(d));
        }
    }

    #[test]
    fn tabulation_reproduces_small_dims() {
        let rows = tabulate_sin_angle_curve(3, 200_000, 7);
        assert_eq!(rows[0], (1, 0.0));
        assert!((rows[1].1 - 2.0 / std::f64::consts::PI).abs() < 3e-3);
        assert!((rows[2].1 - std::f64::consts::PI / 4.0).abs() < 3e-3);
    }

    #[test]
    fn inversion_round_trips_through_curve() {
        let curve = reference_curve();
        let d = curve.invert(2.0 / std::f64::consts::PI).unwrap();
        assert!((d - 2.0).abs() < 0.05, "inverted {d}");
        assert_relative_eq!(curve.invert(0.0).unwrap(), 1.0);
        assert_relative_eq!(curve.invert(1.0).unwrap(), MAX_TABULATED_DIM as f64);
    }

    #[test]
    fn collinear_neighbors_clip_to_one() {
        // Five collinear points in 3-D.
        let mut view = Vec::new();
        for i in 0..5 {
            view.extend_from_slice(&[i as f64, 2.0 * i as f64, -i as f64]);
        }
        let idx: Vec<u32> = (0..5).collect();
        let d = ess_local(&view, 3, &idx).unwrap();
        assert_relative_eq!(d, 1.0);
    }
}
