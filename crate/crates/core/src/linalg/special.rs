use crate::error::{Error, Result};

/// Natural log of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma needs a positive finite argument, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// Natural log of B(x, y) = Γ(x)Γ(y)/Γ(x+y) for x, y > 0.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

/// B(x, y) evaluated through [`log_beta`].
pub fn beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_beta(x, y)?.exp())
}

/// Binomial coefficient as a float, `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - std::f64::consts::PI.sqrt().ln()).abs() < 1e-15);
        assert!(log_beta(1.0, 1.0).unwrap().abs() < 1e-15);
        assert!((log_gamma(6.0).unwrap() - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
        assert!(log_beta(1.0, -2.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn large_arguments_stay_finite() {
        // Γ(200) overflows f64, its log does not
        let lb = log_beta(120.5, 90.0).unwrap();
        assert!(lb.is_finite() && lb < 0.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(factorial(5), 120.0);
    }
}
