//! Method-of-moments local estimator.

use crate::error::{Error, Result};

/// `d = Rbar / (R_k - Rbar)` with `Rbar` the mean of all `k` radii.
pub fn mom_local(radii: &[f64]) -> Result<f64> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("mom_local with no radii".into()));
    }
    let k = radii.len() as f64;
    let rk = radii[radii.len() - 1];
    if !(rk > 0.0) {
        return Err(Error::DegenerateNeighborhood("outer radius is zero"));
    }
    let rbar = radii.iter().sum::<f64>() / k;
    if rbar >= rk {
        return Err(Error::DegenerateNeighborhood("all radii equal"));
    }
    Ok(rbar / (rk - rbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_computed_examples() {
        // Rbar = 5/3 -> (5/3) / (2 - 5/3) = 5.
        assert_relative_eq!(mom_local(&[1.0, 2.0, 2.0]).unwrap(), 5.0, epsilon = 1e-12);
        // Rbar = 4/3 -> (4/3) / (2/3) = 2.
        assert_relative_eq!(mom_local(&[1.0, 1.0, 2.0]).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn equal_radii_degenerate() {
        assert!(matches!(
            mom_local(&[3.0, 3.0, 3.0]),
            Err(Error::DegenerateNeighborhood(_))
        ));
    }
}
