use crate::{Error, Result};

/// Natural log of the beta function, `ln Γ(a) + ln Γ(b) − ln Γ(a + b)`.
///
/// Going through log-gamma keeps `B(k, 1 − c)` representable for large `k`,
/// where the direct product underflows.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "log_beta requires positive finite arguments, got ({a}, {b})"
        )));
    }
    Ok(libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b))
}

/// `log_beta` for arguments the caller has already validated.
pub(crate) fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}
