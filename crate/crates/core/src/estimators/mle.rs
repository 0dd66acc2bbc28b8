//! Maximum-likelihood local estimator from sorted neighbor radii.

use crate::error::{Error, Result};

/// Local estimate from one row of sorted radii `R_1 <= ... <= R_k`:
/// the reciprocal of the mean log-ratio `ln(R_k / R_j)` over `j < k`.
pub fn mle_local(radii: &[f64]) -> Result<f64> {
    let k = radii.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "mle_local needs at least 2 radii".into(),
        ));
    }
    let rk = radii[k - 1];
    if !(rk > 0.0) {
        return Err(Error::DegenerateNeighborhood("outer radius is zero"));
    }
    let mut sum = 0.0;
    for &rj in &radii[..k - 1] {
        sum += (rk / rj).ln();
    }
    if sum <= 0.0 {
        return Err(Error::DegenerateNeighborhood(
            "all radii equal the outer radius",
        ));
    }
    Ok((k - 1) as f64 / sum)
}

/// Harmonic-mean pooling of local estimates.
pub fn mle_global(locals: &[f64]) -> Result<f64> {
    if locals.is_empty() {
        return Err(Error::EmptyInput("mle_global with no locals"));
    }
    let mut inv_sum = 0.0;
    for &d in locals {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mle_global: nonpositive local estimate {d}"
            )));
        }
        inv_sum += 1.0 / d;
    }
    Ok(locals.len() as f64 / inv_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_computed_example() {
        // [(1/2)(ln 2 + ln 1)]^-1 = 2 / ln 2
        let d = mle_local(&[1.0, 2.0, 2.0]).unwrap();
        assert_relative_eq!(d, 2.0 / std::f64::consts::LN_2, epsilon = 1e-12);
        assert_relative_eq!(d, 2.885390081777927, epsilon = 1e-12);
    }

    #[test]
    fn geometric_radii_give_one() {
        let d = mle_local(&[1.0, std::f64::consts::E]).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_equal_radii_degenerate() {
        assert!(matches!(
            mle_local(&[2.0, 2.0, 2.0]),
            Err(Error::DegenerateNeighborhood(_))
        ));
    }

    #[test]
    fn harmonic_pooling() {
        assert_relative_eq!(mle_global(&[2.0, 2.0]).unwrap(), 2.0);
        assert_relative_eq!(mle_global(&[1.0, 3.0]).unwrap(), 1.5);
        assert_relative_eq!(mle_global(&[4.2; 9]).unwrap(), 4.2, epsilon = 1e-12);
        assert!(mle_global(&[1.0, 0.0]).is_err());
    }
}
