//! Closed-form performance models.
//!
//! Everything here is a pure function of its inputs. Success models implement
//! [`SuccessModel`], so the grouping and Pareto machinery works for the
//! zero-order beta-geometric model as well as the time-conditioned one.

mod curves;
mod ghls;
mod grouping;
mod pareto;
mod regularity;
mod special;
mod success;

pub use curves::{
    write_fig2, write_fig3, write_fig4, write_fig5, write_fig7, write_regularity, Figure,
};
pub use ghls::{ghls_breakeven, ghls_total_cost, lpr_total_cost, GhlsCostModel};
pub use grouping::{
    enumerate_groupings, group_try_probability, mean_latency, mean_traffic, Grouping,
    MAX_ENUMERATION_K,
};
pub use pareto::{knee_point, pareto_front, FrontPoint};
pub use regularity::{regularity, RegularityModel, TrafficDensity, HOURS_PER_WEEK};
pub use special::log_beta;
pub use success::{
    conditional_cdf_at_time, first_order_cdf, first_order_pmf, zeroth_order_cdf, zeroth_order_pmf,
    BetaGeometricModel, CdfTable, FirstOrderModel, SuccessModel, ZipfModel,
};
