use serde::{Deserialize, Serialize};

use super::regularity::{RegularityModel, TrafficDensity, HOURS_PER_WEEK};
use super::special::ln_beta_unchecked;
use crate::{Error, Result};

/// Probability that the target is found among the `k` best-ranked locations.
///
/// Implementations return `0` for `k = 0` and are nondecreasing in `k`.
pub trait SuccessModel {
    fn cdf(&self, k: u32) -> f64;

    fn pmf(&self, k: u32) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cdf(k) - self.cdf(k - 1)
        }
    }
}

impl<M: SuccessModel + ?Sized> SuccessModel for &M {
    fn cdf(&self, k: u32) -> f64 {
        (**self).cdf(k)
    }
}

/// Rank popularity `p_i = c / i`.
///
/// Without truncation this is the empirical form: the `p_i` do not sum to one
/// and act as the per-rank hazard in the sequential product
/// `π(k) = p_k ∏_{i<k} (1 − p_i)`. With truncation at `N` the constant is
/// replaced by `1 / H_N` and the `p_i` are a proper distribution over `[1, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfModel {
    pub c: f64,
    pub n_truncation: Option<u32>,
}

impl Default for ZipfModel {
    fn default() -> Self {
        Self {
            c: 0.48,
            n_truncation: None,
        }
    }
}

impl ZipfModel {
    pub fn new(c: f64, n_truncation: Option<u32>) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::invalid("c", format!("must lie in (0, 1), got {c}")));
        }
        if n_truncation == Some(0) {
            return Err(Error::invalid("n_truncation", "must be positive"));
        }
        Ok(Self { c, n_truncation })
    }

    /// The constant in front of `1/i`: `c`, or `1/H_N` when truncated.
    pub fn constant(&self) -> f64 {
        match self.n_truncation {
            None => self.c,
            Some(n) => 1.0 / (1..=n).map(|i| 1.0 / i as f64).sum::<f64>(),
        }
    }

    /// `p_i` for rank `i ≥ 1`; zero past the truncation point.
    pub fn p(&self, i: u32) -> f64 {
        match self.n_truncation {
            Some(n) if i > n => 0.0,
            _ if i == 0 => 0.0,
            _ => self.constant() / i as f64,
        }
    }

    /// `1 − ∏_{i ≤ k} (1 − p_i)` evaluated as a running product.
    pub fn sequential_cdf(&self, k: u32) -> f64 {
        let survive: f64 = (1..=k).map(|i| 1.0 - self.p(i)).product();
        1.0 - survive
    }
}

/// Attempts-until-hit `K ~ Geom(L)` with `L ~ Beta(α, β)`.
///
/// The default shape `(c, 1 − c)` has CDF `1 − 1/(k·B(k, 1 − c))`. A general
/// shape uses `1 − B(α, β + k)/B(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGeometricModel {
    alpha: f64,
    beta: f64,
}

impl Default for BetaGeometricModel {
    fn default() -> Self {
        Self {
            alpha: 0.48,
            beta: 0.52,
        }
    }
}

impl BetaGeometricModel {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::invalid("c", format!("must lie in (0, 1), got {c}")));
        }
        Ok(Self {
            alpha: c,
            beta: 1.0 - c,
        })
    }

    /// Arbitrary shape, e.g. the tighter-fitting `Beta(0.60, 0.72)`.
    pub fn with_shape(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(
                "shape",
                format!("Beta shape must be positive, got ({alpha}, {beta})"),
            ));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn is_explanatory(&self) -> bool {
        (self.alpha + self.beta - 1.0).abs() < 1e-15
    }
}

impl SuccessModel for BetaGeometricModel {
    fn cdf(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let k = k as f64;
        let log_survival = if self.is_explanatory() {
            -(k.ln() + ln_beta_unchecked(k, self.beta))
        } else {
            ln_beta_unchecked(self.alpha, self.beta + k) - ln_beta_unchecked(self.alpha, self.beta)
        };
        -log_survival.exp_m1()
    }
}

/// Success after `k` attempts averaged over the week:
/// `1 − Σ_t D(t) / (k·B(k, 1 − R(t)))`, with hourly bins evaluated at `t + 0.5`.
#[derive(Debug, Clone)]
pub struct FirstOrderModel {
    regularity: RegularityModel,
    density: TrafficDensity,
    r_mid: [f64; HOURS_PER_WEEK],
}

impl FirstOrderModel {
    pub fn new(regularity: RegularityModel, density: TrafficDensity) -> Self {
        Self {
            r_mid: regularity.hourly_midpoints(),
            regularity,
            density,
        }
    }

    pub fn regularity(&self) -> &RegularityModel {
        &self.regularity
    }

    pub fn density(&self) -> &TrafficDensity {
        &self.density
    }
}

impl Default for FirstOrderModel {
    fn default() -> Self {
        Self::new(RegularityModel::default(), TrafficDensity::uniform())
    }
}

impl SuccessModel for FirstOrderModel {
    fn cdf(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let kf = k as f64;
        let miss: f64 = self
            .density
            .weights()
            .iter()
            .zip(&self.r_mid)
            .map(|(d, r)| d * (-(kf.ln() + ln_beta_unchecked(kf, 1.0 - r))).exp())
            .sum();
        1.0 - miss
    }
}

/// A success model tabulated for `k ∈ [0, max_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    values: Vec<f64>,
}

impl CdfTable {
    pub fn new(model: &impl SuccessModel, max_k: u32) -> Self {
        Self {
            values: (0..=max_k).map(|k| model.cdf(k)).collect(),
        }
    }

    pub fn max_k(&self) -> u32 {
        (self.values.len() - 1) as u32
    }
}

impl SuccessModel for CdfTable {
    /// Panics past the tabulated range.
    fn cdf(&self, k: u32) -> f64 {
        self.values[k as usize]
    }
}

/// Zero-order success after `k` attempts; `0` for `k = 0`.
pub fn zeroth_order_cdf(k: u32, model: &BetaGeometricModel) -> f64 {
    model.cdf(k)
}

pub fn zeroth_order_pmf(k: u32, model: &BetaGeometricModel) -> f64 {
    model.pmf(k)
}

pub fn first_order_cdf(k: u32, regularity: &RegularityModel, density: &TrafficDensity) -> f64 {
    FirstOrderModel::new(*regularity, density.clone()).cdf(k)
}

pub fn first_order_pmf(k: u32, regularity: &RegularityModel, density: &TrafficDensity) -> f64 {
    FirstOrderModel::new(*regularity, density.clone()).pmf(k)
}

/// The zero-order CDF with `c` replaced by `R(t)` for a single hour.
pub fn conditional_cdf_at_time(k: u32, t: f64, regularity: &RegularityModel) -> Result<f64> {
    let r = regularity.at(t)?;
    Ok(BetaGeometricModel::new(r)?.cdf(k))
}
