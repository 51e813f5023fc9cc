use crate::error::{Error, Result};

/// Exponential proximity kernel `exp(-D(x, z)^2 / sigma^2)` with `D` the
/// Euclidean distance between two interpretable vectors.
pub fn kernel_weight(x: &[f64], z: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("kernel width must be > 0, got {sigma}")));
    }
    if x.len() != z.len() {
        return Err(Error::InvalidArgument(format!(
            "interpretable vectors differ in length: {} vs {}",
            x.len(),
            z.len()
        )));
    }
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (sigma * sigma)).exp())
}

/// Kernel weight of a binary sample that disagrees with the explained
/// instance in `disagreements` slots.
#[inline]
pub fn weight_for_disagreements(disagreements: usize, sigma: f64) -> f64 {
    (-(disagreements as f64) / (sigma * sigma)).exp()
}

/// Default kernel width `0.75 * sqrt(d')`.
pub fn default_kernel_width(n_features: usize) -> f64 {
    0.75 * (n_features as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_weigh_one() {
        assert_eq!(kernel_weight(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], 0.3).unwrap(), 1.0);
    }

    #[test]
    fn distance_equal_to_width_gives_inverse_e() {
        let w = kernel_weight(&[1.0, 1.0, 1.0, 1.0], &[0.0, 0.0, 0.0, 0.0], 2.0).unwrap();
        assert!((w - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn two_disagreements_unit_width() {
        let w = kernel_weight(&[1.0, 1.0, 1.0, 1.0], &[1.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        assert!((w - 0.1353352832366127).abs() < 1e-15);
        assert_eq!(w, weight_for_disagreements(2, 1.0));
    }

    #[test]
    fn strictly_decreasing_in_hamming_distance() {
        let sigma = default_kernel_width(6);
        for h in 0..6 {
            assert!(weight_for_disagreements(h, sigma) > weight_for_disagreements(h + 1, sigma));
        }
    }

    #[test]
    fn errors() {
        assert!(kernel_weight(&[1.0], &[1.0], 0.0).is_err());
        assert!(kernel_weight(&[1.0], &[1.0], -1.0).is_err());
        assert!(kernel_weight(&[1.0], &[1.0, 0.0], 1.0).is_err());
    }
}
