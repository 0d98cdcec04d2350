//! Scenario configuration and the trial runner.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::Point;
use super::ghls::GhlsDirectory;
use super::gpsr::{DeliveryRule, Gpsr};
use super::lpr::{
    lpr_deliver, oracle_deliver, AckPolicy, Candidate, DeliveryOutcome, DeliveryPolicy,
};
use super::topology::{build_topology, range_for_degree, Topology};
use crate::analytic::{
    knee_point, mean_latency, mean_traffic, pareto_front, FirstOrderModel, Grouping,
    RegularityModel, SuccessModel, TrafficDensity,
};
use crate::mobility::{CellGrid, MobilityModel, MobilityParams, SyntheticUser};
use crate::profile::{build_profile, CellId, LocationProfile, Order, SlotConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologySection {
    pub nodes: usize,
    /// Side of the square field in meters.
    pub field_size: f64,
    /// Radio range in meters; derived from `avg_degree` when absent.
    pub radio_range: Option<f64>,
    pub avg_degree: f64,
    /// Location cells per field side.
    pub grid_cells: u32,
    /// Hop limit per route; `⌈4·√n⌉` when absent.
    pub ttl: Option<u32>,
    pub delivery_rule: DeliveryRule,
    /// Redraw disconnected placements with successive seeds.
    pub require_connected: bool,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            nodes: 500,
            field_size: 1000.0,
            radio_range: None,
            avg_degree: 16.0,
            grid_cells: 10,
            ttl: None,
            delivery_rule: DeliveryRule::default(),
            require_connected: true,
        }
    }
}

impl TopologySection {
    pub fn range(&self) -> f64 {
        self.radio_range
            .unwrap_or_else(|| range_for_degree(self.nodes, self.field_size, self.avg_degree))
    }

    pub fn cell_size(&self) -> f64 {
        self.field_size / self.grid_cells as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    /// Candidates are the user's true home ranking.
    #[default]
    Model,
    /// Candidates come from an order-1 profile learned on generated weeks.
    Learned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    pub trials: u32,
    pub users: u32,
    pub locations: u32,
    pub floor: f64,
    pub regularity: RegularityModel,
    pub profile: ProfileSource,
    pub training_weeks: u32,
    pub slot_minutes: u32,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            trials: 1000,
            users: 100,
            locations: 40,
            floor: 0.07,
            regularity: RegularityModel::default(),
            profile: ProfileSource::default(),
            training_weeks: 4,
            slot_minutes: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    Lpr,
    Oracle,
    Ghls,
}

/// How the `k` candidates are split into groups.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum GroupingSpec {
    Serial,
    Parallel,
    /// The knee of the analytic front for `k`.
    #[default]
    Knee,
    Explicit(Grouping),
}

impl GroupingSpec {
    pub fn resolve(&self, k: u32, model: &impl SuccessModel) -> Result<Grouping> {
        Ok(match self {
            GroupingSpec::Serial => Grouping::serial(k),
            GroupingSpec::Parallel => Grouping::parallel(k),
            GroupingSpec::Knee => {
                let front = pareto_front(k, model)?;
                knee_point(&front)
                    .expect("front is non-empty")
                    .grouping
                    .clone()
            }
            GroupingSpec::Explicit(g) => {
                if g.k() != k {
                    return Err(Error::config(
                        "strategy.grouping",
                        format!("grouping {g} covers {} locations but k = {k}", g.k()),
                    ));
                }
                g.clone()
            }
        })
    }
}

impl fmt::Display for GroupingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupingSpec::Serial => f.write_str("serial"),
            GroupingSpec::Parallel => f.write_str("parallel"),
            GroupingSpec::Knee => f.write_str("knee"),
            GroupingSpec::Explicit(g) => write!(f, "{g}"),
        }
    }
}

impl FromStr for GroupingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "serial" => Ok(GroupingSpec::Serial),
            "parallel" => Ok(GroupingSpec::Parallel),
            "knee" => Ok(GroupingSpec::Knee),
            other => other.parse().map(GroupingSpec::Explicit),
        }
    }
}

impl Serialize for GroupingSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupingSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategySection {
    pub kind: StrategyKind,
    pub k: u32,
    pub grouping: GroupingSpec,
    pub ack: AckPolicy,
    /// Meters; one cell edge when absent.
    pub acceptance_radius: Option<f64>,
}

impl Default for StrategySection {
    fn default() -> Self {
        Self {
            kind: StrategyKind::default(),
            k: 12,
            grouping: GroupingSpec::default(),
            ack: AckPolicy::default(),
            acceptance_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhlsSection {
    /// Location updates per first packet, `f / r`.
    pub update_ratio: f64,
}

impl Default for GhlsSection {
    fn default() -> Self {
        Self { update_ratio: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedSection {
    pub topology: u64,
    pub mobility: u64,
    pub traffic: u64,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            topology: 1,
            mobility: 2,
            traffic: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub topology: TopologySection,
    pub traffic: TrafficSection,
    pub strategy: StrategySection,
    pub ghls: GhlsSection,
    pub seeds: SeedSection,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        if t.nodes < 2 {
            return Err(Error::config("topology.nodes", "need at least 2 nodes"));
        }
        positive("topology.field_size", t.field_size)?;
        match t.radio_range {
            Some(r) => positive("topology.radio_range", r)?,
            None => positive("topology.avg_degree", t.avg_degree)?,
        }
        if t.grid_cells == 0 {
            return Err(Error::config("topology.grid_cells", "must be positive"));
        }
        if t.ttl == Some(0) {
            return Err(Error::config("topology.ttl", "must be positive"));
        }

        let tr = &self.traffic;
        if tr.users == 0 {
            return Err(Error::config("traffic.users", "must be positive"));
        }
        let cells = t.grid_cells * t.grid_cells;
        if tr.locations == 0 || tr.locations > cells {
            return Err(Error::config(
                "traffic.locations",
                format!("must lie in 1..={cells}, got {}", tr.locations),
            ));
        }
        if !(0.0..=0.3).contains(&tr.floor) {
            return Err(Error::config(
                "traffic.floor",
                format!("must lie in [0, 0.3], got {}", tr.floor),
            ));
        }
        RegularityModel::new(tr.regularity.c1, tr.regularity.c2, tr.regularity.c3)
            .map_err(|e| Error::config("traffic.regularity", e.to_string()))?;
        SlotConfig::new(tr.slot_minutes)
            .map_err(|e| Error::config("traffic.slot_minutes", e.to_string()))?;
        if tr.profile == ProfileSource::Learned && tr.training_weeks == 0 {
            return Err(Error::config(
                "traffic.training_weeks",
                "a learned profile needs at least one week",
            ));
        }

        let s = &self.strategy;
        if s.k == 0 || s.k > crate::analytic::MAX_ENUMERATION_K {
            return Err(Error::config(
                "strategy.k",
                format!(
                    "must lie in 1..={}, got {}",
                    crate::analytic::MAX_ENUMERATION_K,
                    s.k
                ),
            ));
        }
        if let GroupingSpec::Explicit(g) = &s.grouping {
            if g.k() != s.k {
                return Err(Error::config(
                    "strategy.grouping",
                    format!("grouping {g} covers {} locations but k = {}", g.k(), s.k),
                ));
            }
        }
        if let Some(r) = s.acceptance_radius {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::config(
                    "strategy.acceptance_radius",
                    "must be non-negative",
                ));
            }
        }
        if !(self.ghls.update_ratio >= 0.0 && self.ghls.update_ratio.is_finite()) {
            return Err(Error::config("ghls.update_ratio", "must be non-negative"));
        }
        Ok(())
    }

    pub fn slots(&self) -> SlotConfig {
        SlotConfig::new(self.traffic.slot_minutes).expect("validated")
    }

    pub fn grid(&self) -> CellGrid {
        let g = self.topology.grid_cells;
        CellGrid::new(g, g, self.topology.cell_size()).expect("validated")
    }

    pub fn mobility_params(&self, weeks: u32) -> MobilityParams {
        MobilityParams {
            n_users: self.traffic.users,
            n_weeks: weeks,
            locations: self.traffic.locations,
            regularity: self.traffic.regularity,
            unpredictable_floor: self.traffic.floor,
            grid: self.grid(),
            slots: self.slots(),
            seed: self.seeds.mobility,
        }
    }

    /// The analytic success model matching the generator.
    pub fn success_model(&self) -> FirstOrderModel {
        FirstOrderModel::new(self.traffic.regularity, TrafficDensity::uniform())
    }

    pub fn grouping(&self) -> Result<Grouping> {
        self.strategy
            .grouping
            .resolve(self.strategy.k, &self.success_model())
    }

    pub fn delivery_policy(&self) -> DeliveryPolicy {
        DeliveryPolicy {
            acceptance_radius: self
                .strategy
                .acceptance_radius
                .unwrap_or_else(|| self.topology.cell_size()),
            ack: self.strategy.ack,
        }
    }
}

/// Everything a trial needs, built once per scenario.
pub struct World {
    pub config: ScenarioConfig,
    pub topology: Topology,
    pub mobility: MobilityModel,
    pub users: Vec<SyntheticUser>,
    pub profiles: Option<Vec<LocationProfile>>,
    pub directory: GhlsDirectory,
    pub grouping: Grouping,
    /// Seed of the placement actually used.
    pub topology_seed: u64,
    anchors: Vec<usize>,
}

const MAX_TOPOLOGY_ATTEMPTS: u64 = 1000;

fn connected_topology(config: &ScenarioConfig) -> Result<(Topology, u64)> {
    let t = &config.topology;
    let base = config.seeds.topology;
    for attempt in 0..MAX_TOPOLOGY_ATTEMPTS {
        let seed = base.wrapping_add(attempt);
        let topo = build_topology(t.nodes, t.field_size, t.range(), seed)?;
        if topo.is_connected() {
            return Ok((topo, seed));
        }
        if !t.require_connected {
            log::warn!(
                "topology seed {seed} is disconnected (mean degree {:.2})",
                topo.mean_degree()
            );
            return Ok((topo, seed));
        }
    }
    Err(Error::config(
        "topology.require_connected",
        format!("no connected placement in {MAX_TOPOLOGY_ATTEMPTS} seeds from {base}; raise the density"),
    ))
}

impl World {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let (topology, topology_seed) = connected_topology(config)?;
        let weeks = match config.traffic.profile {
            ProfileSource::Model => 0,
            ProfileSource::Learned => config.traffic.training_weeks,
        };
        let mobility = MobilityModel::new(config.mobility_params(weeks))?;
        let users = mobility.generate_users();
        let profiles = (config.traffic.profile == ProfileSource::Learned).then(|| {
            users
                .par_iter()
                .map(|u| build_profile(&u.trace, Order::First, config.slots()))
                .collect()
        });
        let grid = config.grid();
        let anchors = (0..grid.cells())
            .map(|i| {
                let (x, y) = grid.center(grid.cell(i));
                topology.nearest_node(Point::new(x, y))
            })
            .collect();
        let mut directory = GhlsDirectory::new();
        for u in 0..config.traffic.users {
            directory.bind(&topology, u as u64);
        }
        Ok(Self {
            grouping: config.grouping()?,
            config: config.clone(),
            topology,
            mobility,
            users,
            profiles,
            directory,
            topology_seed,
            anchors,
        })
    }

    pub fn router(&self) -> Gpsr<'_> {
        let r = Gpsr::new(&self.topology).with_rule(self.config.topology.delivery_rule);
        match self.config.topology.ttl {
            Some(ttl) => r.with_ttl(ttl),
            None => r,
        }
    }

    pub fn cell_position(&self, cell: CellId) -> Point {
        let (x, y) = self.config.grid().center(cell);
        Point::new(x, y)
    }

    /// Node nearest the center of `cell`, standing in for the target.
    pub fn anchor(&self, cell: CellId) -> usize {
        let g = self.config.topology.grid_cells as i32;
        self.anchors[(cell.y * g + cell.x) as usize]
    }

    pub fn candidates(&self, user: usize, slot_of_week: u32, k: usize) -> Vec<Candidate> {
        let cells: Vec<CellId> = match &self.profiles {
            None => self.users[user].homes.iter().take(k).copied().collect(),
            Some(p) => p[user].top_k(slot_of_week as u64, None, k),
        };
        cells
            .into_iter()
            .map(|cell| Candidate {
                cell,
                position: self.cell_position(cell),
            })
            .collect()
    }

    fn trial_rng(&self, trial: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seeds.traffic);
        rng.set_stream(trial as u64);
        rng
    }

    /// Random inputs of one trial; identical for every strategy.
    pub fn draw(&self, trial: u32) -> TrialDraw {
        let mut rng = self.trial_rng(trial);
        let spw = self.config.slots().slots_per_week();
        let slot_of_week = rng.random_range(0..spw);
        let user = rng.random_range(0..self.users.len());
        let (true_cell, true_rank) =
            self.mobility
                .sample_cell(&self.users[user].homes, slot_of_week, &mut rng);
        let src = rng.random_range(0..self.topology.len());
        TrialDraw {
            user,
            slot_of_week,
            true_cell,
            true_rank,
            src,
        }
    }

    pub fn run_trial(&self, trial: u32) -> TrialRecord {
        let TrialDraw {
            user,
            slot_of_week,
            true_cell,
            true_rank,
            src,
        } = self.draw(trial);

        let router = self.router();
        let policy = self.config.delivery_policy();
        let truth = self.cell_position(true_cell);
        let oracle = oracle_deliver(&router, src, truth, &policy);

        let server = self
            .directory
            .binding(user as u64)
            .expect("every user is bound")
            .server;
        let update = router.route_to_node(self.anchor(true_cell), server);
        let there = router.route_to_node(src, server);
        let back = there.delivered().then(|| router.route_to_node(server, src));
        let query_ok = back.as_ref().is_some_and(|b| b.delivered());
        let query_tx = there.hops() as u64 + back.as_ref().map_or(0, |b| b.hops() as u64);

        let outcome = match self.config.strategy.kind {
            StrategyKind::Oracle => oracle,
            StrategyKind::Lpr => {
                let cands = self.candidates(user, slot_of_week, self.grouping.k() as usize);
                lpr_deliver(&router, src, &cands, true_cell, &self.grouping, &policy)
            }
            StrategyKind::Ghls => DeliveryOutcome {
                success: query_ok && oracle.success,
                latency_factor: 2.0,
                transmissions: query_tx + oracle.transmissions,
                forward_transmissions: there.hops() as u64 + oracle.forward_transmissions,
                return_transmissions: back.as_ref().map_or(0, |b| b.hops() as u64)
                    + oracle.return_transmissions,
                ..oracle
            },
        };

        TrialRecord {
            trial,
            user: user as u32,
            slot_of_week,
            src: src as u32,
            true_cell_x: true_cell.x,
            true_cell_y: true_cell.y,
            true_rank,
            success: outcome.success,
            latency_factor: outcome.latency_factor,
            transmissions: outcome.transmissions,
            forward_transmissions: outcome.forward_transmissions,
            return_transmissions: outcome.return_transmissions,
            groups_tried: outcome.groups_tried,
            copies_sent: outcome.copies_sent,
            shortfall: outcome.shortfall,
            oracle_success: oracle.success,
            oracle_transmissions: oracle.transmissions,
            oracle_forward: oracle.forward_transmissions,
            ghls_update: update.hops() as u64,
            ghls_update_ok: update.delivered(),
            ghls_query: query_tx,
            ghls_query_ok: query_ok,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialDraw {
    pub user: usize,
    pub slot_of_week: u32,
    pub true_cell: CellId,
    pub true_rank: Option<u32>,
    pub src: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub user: u32,
    pub slot_of_week: u32,
    pub src: u32,
    pub true_cell_x: i32,
    pub true_cell_y: i32,
    /// Home rank of the true cell; empty for unpredictable draws.
    pub true_rank: Option<u32>,
    pub success: bool,
    pub latency_factor: f64,
    pub transmissions: u64,
    pub forward_transmissions: u64,
    pub return_transmissions: u64,
    pub groups_tried: u32,
    pub copies_sent: u32,
    pub shortfall: u32,
    pub oracle_success: bool,
    pub oracle_transmissions: u64,
    pub oracle_forward: u64,
    pub ghls_update: u64,
    pub ghls_update_ok: bool,
    pub ghls_query: u64,
    pub ghls_query_ok: bool,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub strategy: StrategyKind,
    pub grouping: String,
    pub trials: u32,
    pub delivered: u32,
    pub reachable: u32,
    pub delivery_ratio: Option<f64>,
    /// Oracle delivery ratio.
    pub reachability: Option<f64>,
    pub delivery_vs_reachability: Option<f64>,
    pub mean_latency_factor: Option<f64>,
    pub latency_p50: Option<f64>,
    pub latency_p90: Option<f64>,
    pub latency_p99: Option<f64>,
    /// Total transmissions over total oracle transmissions.
    pub traffic_factor: Option<f64>,
    pub mean_transmissions: Option<f64>,
    pub mean_oracle_transmissions: Option<f64>,
    pub mean_groups_tried: Option<f64>,
    pub shortfall_trials: u32,
    pub analytic_latency: Option<f64>,
    pub analytic_traffic: Option<f64>,
    pub analytic_success: f64,
    /// Mean update hops, the measured `s`.
    pub ghls_mean_update: Option<f64>,
    pub ghls_mean_query: Option<f64>,
    /// Mean one-way oracle hops, the measured `p`.
    pub mean_path_hops: Option<f64>,
    pub ghls_update_ratio: f64,
    /// Per first packet: queries, deliveries and `f / r` updates.
    pub ghls_cost_per_packet: Option<f64>,
    pub lpr_cost_per_packet: Option<f64>,
    pub nodes: usize,
    pub topology_seed: u64,
    pub mean_degree: f64,
    pub connected: bool,
}

impl MetricsRecord {
    pub fn aggregate(world: &World, trials: &[TrialRecord]) -> Self {
        let n = trials.len() as f64;
        let sum = |f: fn(&TrialRecord) -> f64| trials.iter().map(f).sum::<f64>();
        let delivered = trials.iter().filter(|t| t.success).count() as u32;
        let reachable = trials.iter().filter(|t| t.oracle_success).count() as u32;
        let mut lat: Vec<f64> = trials.iter().map(|t| t.latency_factor).collect();
        lat.sort_by(f64::total_cmp);

        let tx = sum(|t| t.transmissions as f64);
        let oracle_tx = sum(|t| t.oracle_transmissions as f64);
        let mean_update = ratio(sum(|t| t.ghls_update as f64), n);
        let mean_query = ratio(sum(|t| t.ghls_query as f64), n);
        let mean_oracle = ratio(oracle_tx, n);
        let f_over_r = world.config.ghls.update_ratio;
        let lpr_kind = world.config.strategy.kind == StrategyKind::Lpr;
        let model = world.config.success_model();

        Self {
            strategy: world.config.strategy.kind,
            grouping: world.grouping.to_string(),
            trials: trials.len() as u32,
            delivered,
            reachable,
            delivery_ratio: ratio(delivered as f64, n),
            reachability: ratio(reachable as f64, n),
            delivery_vs_reachability: ratio(delivered as f64, reachable as f64),
            mean_latency_factor: ratio(lat.iter().sum(), n),
            latency_p50: percentile(&lat, 0.5),
            latency_p90: percentile(&lat, 0.9),
            latency_p99: percentile(&lat, 0.99),
            traffic_factor: ratio(tx, oracle_tx),
            mean_transmissions: ratio(tx, n),
            mean_oracle_transmissions: mean_oracle,
            mean_groups_tried: ratio(sum(|t| t.groups_tried as f64), n),
            shortfall_trials: trials.iter().filter(|t| t.shortfall > 0).count() as u32,
            analytic_latency: lpr_kind.then(|| mean_latency(&world.grouping, &model)),
            analytic_traffic: lpr_kind.then(|| mean_traffic(&world.grouping, &model)),
            analytic_success: model.cdf(world.grouping.k()),
            ghls_mean_update: mean_update,
            ghls_mean_query: mean_query,
            mean_path_hops: ratio(sum(|t| t.oracle_forward as f64), n),
            ghls_update_ratio: f_over_r,
            ghls_cost_per_packet: match (mean_query, mean_oracle, mean_update) {
                (Some(q), Some(o), Some(u)) => Some(q + o + f_over_r * u),
                _ => None,
            },
            lpr_cost_per_packet: ratio(tx, n).filter(|_| lpr_kind),
            nodes: world.topology.len(),
            topology_seed: world.topology_seed,
            mean_degree: world.topology.mean_degree(),
            connected: world.topology.is_connected(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub metrics: MetricsRecord,
    pub trials: Vec<TrialRecord>,
}

impl ScenarioReport {
    pub fn write_trials_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.trials.is_empty() {
            // serde only emits headers alongside a first row
            w.write_record(TRIAL_COLUMNS)?;
        }
        for t in &self.trials {
            w.serialize(t)?;
        }
        w.flush()?;
        Ok(())
    }
}

const TRIAL_COLUMNS: [&str; 22] = [
    "trial",
    "user",
    "slot_of_week",
    "src",
    "true_cell_x",
    "true_cell_y",
    "true_rank",
    "success",
    "latency_factor",
    "transmissions",
    "forward_transmissions",
    "return_transmissions",
    "groups_tried",
    "copies_sent",
    "shortfall",
    "oracle_success",
    "oracle_transmissions",
    "oracle_forward",
    "ghls_update",
    "ghls_update_ok",
    "ghls_query",
    "ghls_query_ok",
];

/// Runs every trial of `config`. Trials are seeded independently, so the
/// report does not depend on thread count or scheduling.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let world = World::build(config)?;
    let trials: Vec<TrialRecord> = (0..config.traffic.trials)
        .into_par_iter()
        .map(|i| world.run_trial(i))
        .collect();
    Ok(ScenarioReport {
        metrics: MetricsRecord::aggregate(&world, &trials),
        trials,
    })
}
