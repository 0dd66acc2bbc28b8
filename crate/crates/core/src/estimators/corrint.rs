//! Correlation-integral (Grassberger-Procaccia) global estimator.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::IndexedRng;

#[derive(Debug, Clone)]
pub struct CorrIntParams {
    /// Radius window as percentiles of the pairwise-distance distribution.
    pub lo_pct: f64,
    pub hi_pct: f64,
    /// Points used for the pair enumeration.
    pub subsample: usize,
    /// Log-spaced radius grid size.
    pub bins: usize,
}

impl Default for CorrIntParams {
    fn default() -> Self {
        CorrIntParams {
            lo_pct: 10.0,
            hi_pct: 50.0,
            subsample: 2000,
            bins: 16,
        }
    }
}

/// Least-squares slope of `ln C(r)` against `ln r` over a log-spaced radius
/// grid between the given percentiles of pairwise distance, evaluated on a
/// seeded subsample.
pub fn corrint_global(view: &[f64], n: usize, d: usize, params: &CorrIntParams, seed: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::EmptyInput("corrint needs at least 2 points"));
    }
    if params.bins < 2 {
        return Err(Error::InvalidParameter("corrint needs at least 2 bins".into()));
    }
    if !(0.0 <= params.lo_pct && params.lo_pct < params.hi_pct && params.hi_pct <= 100.0) {
        return Err(Error::InvalidParameter(
            "corrint percentiles must satisfy 0 <= lo < hi <= 100".into(),
        ));
    }

    let m = params.subsample.max(2).min(n);
    let chosen: Vec<usize> = if m < n {
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = IndexedRng::new(seed).at(0);
        indices.partial_shuffle(&mut rng, m);
        indices.truncate(m);
        indices
    } else {
        (0..n).collect()
    };

    let mut dists = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        let ra = &view[chosen[a] * d..(chosen[a] + 1) * d];
        for b in (a + 1)..m {
            let rb = &view[chosen[b] * d..(chosen[b] + 1) * d];
            let mut acc = 0.0;
            for (x, y) in ra.iter().zip(rb) {
                let t = x - y;
                acc += t * t;
            }
            dists.push(acc.sqrt());
        }
    }
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    let pct = |p: f64| -> f64 {
        let idx = ((dists.len() - 1) as f64 * p / 100.0).round() as usize;
        dists[idx]
    };
    let r_lo = pct(params.lo_pct);
    let r_hi = pct(params.hi_pct);
    if !(r_lo > 0.0) || r_lo >= r_hi {
        return Err(Error::DegenerateNeighborhood(
            "correlation-integral radius window collapsed",
        ));
    }

    let total_pairs = dists.len() as f64;
    let mut xs = Vec::with_capacity(params.bins);
    let mut ys = Vec::with_capacity(params.bins);
    for t in 0..params.bins {
        let r = r_lo * (r_hi / r_lo).powf(t as f64 / (params.bins - 1) as f64);
        let count = dists.partition_point(|&v| v <= r);
        if count > 0 {
            xs.push(r.ln());
            ys.push((count as f64 / total_pairs).ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateNeighborhood(
            "fewer than 2 usable correlation-integral bins",
        ));
    }

    // Least-squares slope.
    let nb = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nb;
    let my = ys.iter().sum::<f64>() / nb;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(Error::DegenerateNeighborhood(
            "correlation-integral radius grid collapsed",
        ));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::IndexedRng;
    use rand::Rng;

    #[test]
    fn uniform_interval_slope_one() {
        let mut rng = IndexedRng::new(21).at(0);
        let n = 4000;
        let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let d = corrint_global(&data, n, 1, &CorrIntParams::default(), 5).unwrap();
        assert!((d - 1.0).abs() < 0.1, "corrint {d}");
    }

    #[test]
    fn uniform_disk_slope_two() {
        let mut rng = IndexedRng::new(22).at(0);
        let n = 4000;
        let mut data = Vec::with_capacity(2 * n);
        let mut produced = 0;
        while produced < n {
            let x = 2.0 * rng.random::<f64>() - 1.0;
            let y = 2.0 * rng.random::<f64>() - 1.0;
            if x * x + y * y <= 1.0 {
                data.push(x);
                data.push(y);
                produced += 1;
            }
        }
        let d = corrint_global(&data, n, 2, &CorrIntParams::default(), 5).unwrap();
        assert!((d - 2.0).abs() < 0.15, "corrint {d}");
    }

    #[test]
    fn coincident_points_collapse() {
        let data = vec![1.0; 64];
        let err = corrint_global(&data, 64, 1, &CorrIntParams::default(), 0).unwrap_err();
        assert!(matches!(err, Error::DegenerateNeighborhood(_)));
    }

    #[test]
    fn deterministic_under_seed() {
        let mut rng = IndexedRng::new(4).at(0);
        let n = 3000;
        let data: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
        let a = corrint_global(&data, n, 2, &CorrIntParams::default(), 9).unwrap();
        let b = corrint_global(&data, n, 2, &CorrIntParams::default(), 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
