//! Standard normal helpers.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

/// Φ(x), accurate in both tails.
pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// 1 − Φ(x).
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ⁻¹(p) for p in (0, 1).
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-15);
        let c = cdf(1.959963984540054);
        assert!((c - 0.975).abs() < 1e-11, "{c}");
        assert!((quantile(0.95) - 1.6448536269514722).abs() < 1e-9);
        assert!(cdf(-40.0) >= 0.0);
        assert!((sf(1.0) + cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-8, 0.001, 0.1, 0.5, 0.7, 0.999] {
            assert!((cdf(quantile(p)) - p).abs() < 1e-9 * p.max(1e-3), "p={p}");
        }
    }
}
