use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Network-wide rates and path lengths for the location-service comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhlsCostModel {
    /// Location updates per unit time.
    pub f: f64,
    /// First packets per unit time.
    pub r: f64,
    /// Mean hops between a node and its location server.
    pub s: f64,
    /// Mean hops between source and destination.
    pub p: f64,
    /// Mean destinations attempted per first packet under LPR.
    pub t_bar: f64,
}

impl GhlsCostModel {
    pub fn new(f: f64, r: f64, s: f64, p: f64, t_bar: f64) -> Result<Self> {
        for (name, v) in [("f", f), ("r", r), ("s", s), ("p", p), ("t_bar", t_bar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { f, r, s, p, t_bar })
    }
}

/// Update, query and delivery transmissions: `f·s + 2r·s + 2r·p`.
pub fn ghls_total_cost(model: &GhlsCostModel) -> f64 {
    model.f * model.s + 2.0 * model.r * model.s + 2.0 * model.r * model.p
}

/// First-packet delivery only: `2·T̄·r·p`.
pub fn lpr_total_cost(model: &GhlsCostModel) -> f64 {
    2.0 * model.t_bar * model.r * model.p
}

/// The `f/r` above which LPR is strictly cheaper: `(p/s)(2T̄ − 2) − 2`.
pub fn ghls_breakeven(p_over_s: f64, t_bar: f64) -> Result<f64> {
    if !(p_over_s > 0.0 && p_over_s.is_finite()) {
        return Err(Error::invalid(
            "p_over_s",
            format!("must be positive, got {p_over_s}"),
        ));
    }
    if !(t_bar >= 1.0 && t_bar.is_finite()) {
        return Err(Error::invalid(
            "t_bar",
            format!("must be at least 1, got {t_bar}"),
        ));
    }
    Ok(p_over_s * (2.0 * t_bar - 2.0) - 2.0)
}
