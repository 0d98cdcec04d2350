//! Location profile routing (LPR) workbench.
//!
//! Senders in a MANET address the first packet of a stream to the places a
//! recipient is predicted to be, instead of asking a location service. This
//! crate holds the pieces needed to study that trade-off:
//!
//! * [`analytic`]: closed-form success, latency and traffic models, the
//!   grouping Pareto front and the GHLS break-even condition.
//! * [`profile`]: PPM-style location profiles built from observation traces.
//! * [`mobility`]: a seeded synthetic mobility generator and trace statistics.
//! * [`simnet`]: a static-snapshot MANET simulator with GPSR forwarding, a
//!   GHLS baseline and LPR delivery strategies.

pub mod analytic;
pub mod error;
pub mod mobility;
pub mod profile;
pub mod simnet;

pub use error::{Error, Result};
