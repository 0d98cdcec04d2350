//! Network simulator: unit-disk topologies, GPSR, a hashed location service
//! and grouped first-packet delivery.

mod crossover;
mod events;
mod geometry;
mod ghls;
mod gpsr;
mod lpr;
mod scenario;
mod topology;

pub use crossover::{compare_ghls, CrossoverPoint, CrossoverReport, SweepConfig};
pub use events::EventQueue;
pub use geometry::{segment_intersection, Point};
pub use ghls::{hashed_position, Binding, Exchange, GhlsDirectory};
pub use gpsr::{DeliveryRule, Gpsr, Mode, Route, RouteStatus};
pub use lpr::{lpr_deliver, oracle_deliver, AckPolicy, Candidate, DeliveryOutcome, DeliveryPolicy};
pub use scenario::{
    run_scenario, GhlsSection, GroupingSpec, MetricsRecord, ProfileSource, ScenarioConfig,
    ScenarioReport, SeedSection, StrategyKind, StrategySection, TopologySection, TrafficSection,
    TrialDraw, TrialRecord, World,
};
pub use topology::{build_topology, range_for_degree, Topology};
