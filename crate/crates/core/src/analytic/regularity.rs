use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const HOURS_PER_WEEK: usize = 168;

// Keeps R(t) a usable Beta shape parameter if overrides push it out of (0, 1).
const R_FLOOR: f64 = 1e-9;

/// Time-dependent probability that a user is at their modal location for
/// the hour of the week `t` (Monday 00:00 is `t = 0`).
///
/// `R(t) = c1·sin(2πt/24 + 2π/8) + c2·sin(2πt/12 − 2π/24) + c3`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityModel {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for RegularityModel {
    fn default() -> Self {
        Self {
            c1: 0.148,
            c2: 0.077,
            c3: 0.657,
        }
    }
}

impl RegularityModel {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if ![c1, c2, c3].iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("regularity", "constants must be finite"));
        }
        // Worst case of the two sinusoids bounds the whole week.
        let lo = c3 - c1.abs() - c2.abs();
        let hi = c3 + c1.abs() + c2.abs();
        if lo <= 0.0 || hi >= 1.0 {
            log::debug!("regularity constants reach [{lo}, {hi}]; values will be clamped");
        }
        Ok(Self { c1, c2, c3 })
    }

    /// A model with no daily variation, `R(t) = c3`.
    pub fn constant(c3: f64) -> Result<Self> {
        Self::new(0.0, 0.0, c3)
    }

    /// `R(t)` for `t` in `[0, 168)`.
    pub fn at(&self, t: f64) -> Result<f64> {
        if !(0.0..HOURS_PER_WEEK as f64).contains(&t) {
            return Err(Error::Domain(format!(
                "hour of week {t} outside [0, {HOURS_PER_WEEK})"
            )));
        }
        Ok(self.raw(t))
    }

    /// `R(t)` after reducing `t` modulo one week.
    pub fn at_wrapped(&self, t: f64) -> f64 {
        self.raw(t.rem_euclid(HOURS_PER_WEEK as f64))
    }

    /// Values at the 168 hourly bin midpoints `t + 0.5`.
    pub fn hourly_midpoints(&self) -> [f64; HOURS_PER_WEEK] {
        std::array::from_fn(|h| self.raw(h as f64 + 0.5))
    }

    fn raw(&self, t: f64) -> f64 {
        let v = self.c1 * (2.0 * PI * t / 24.0 + 2.0 * PI / 8.0).sin()
            + self.c2 * (2.0 * PI * t / 12.0 - 2.0 * PI / 24.0).sin()
            + self.c3;
        v.clamp(R_FLOOR, 1.0 - R_FLOOR)
    }
}

/// `R(t)` for `t` in `[0, 168)`.
pub fn regularity(t: f64, model: &RegularityModel) -> Result<f64> {
    model.at(t)
}

/// Traffic density over the hours of the week; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficDensity {
    weights: [f64; HOURS_PER_WEEK],
}

impl Default for TrafficDensity {
    fn default() -> Self {
        Self::uniform()
    }
}

impl TrafficDensity {
    pub fn uniform() -> Self {
        Self {
            weights: [1.0 / HOURS_PER_WEEK as f64; HOURS_PER_WEEK],
        }
    }

    /// Normalizes 168 nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.len() != HOURS_PER_WEEK {
            return Err(Error::invalid(
                "density",
                format!("expected {HOURS_PER_WEEK} weights, got {}", weights.len()),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(
                "density",
                "weights must be finite and nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("density", "weights sum to zero"));
        }
        Ok(Self {
            weights: std::array::from_fn(|h| weights[h] / total),
        })
    }

    pub fn weights(&self) -> &[f64; HOURS_PER_WEEK] {
        &self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_midnight_monday() {
        // mpmath evaluation of the defining sum at t = 0.
        let r = RegularityModel::default().at(0.0).unwrap();
        assert!((r - 0.741_722_737_142_715).abs() < 1e-12);
    }

    #[test]
    fn range_and_mean() {
        let m = RegularityModel::default();
        let mid = m.hourly_midpoints();
        let mean = mid.iter().sum::<f64>() / HOURS_PER_WEEK as f64;
        // Both sinusoids complete whole periods over the week.
        assert!((mean - 0.657).abs() < 1e-12);
        for t in 0..HOURS_PER_WEEK {
            let r = m.at(t as f64).unwrap();
            assert!(r > 0.0 && r < 1.0);
        }
    }

    #[test]
    fn out_of_range_hour() {
        let m = RegularityModel::default();
        assert!(m.at(168.0).is_err());
        assert!(m.at(-0.1).is_err());
        assert_eq!(m.at_wrapped(168.0 + 3.0), m.at(3.0).unwrap());
    }

    #[test]
    fn density_normalizes() {
        let mut w = vec![1.0; HOURS_PER_WEEK];
        w[0] = 167.0;
        let d = TrafficDensity::from_weights(&w).unwrap();
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((d.weights()[0] - 0.5).abs() < 1e-12);
        assert!(TrafficDensity::from_weights(&[1.0; 3]).is_err());
        assert!(TrafficDensity::from_weights(&[0.0; HOURS_PER_WEEK]).is_err());
    }
}
