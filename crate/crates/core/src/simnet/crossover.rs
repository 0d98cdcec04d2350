//! Sweeps the update-to-first-packet ratio and finds where GHLS stops being
//! cheaper than LPR.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::events::EventQueue;
use super::scenario::{ScenarioConfig, StrategyKind, TrialRecord, World};
use crate::analytic::{ghls_breakeven, mean_traffic};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: ScenarioConfig,
    /// `f / r` values to simulate, ascending.
    pub ratios: Vec<f64>,
    pub first_packets: u32,
}

impl SweepConfig {
    /// `steps` evenly spaced ratios over `[lo, hi]`.
    pub fn linspace(
        scenario: ScenarioConfig,
        lo: f64,
        hi: f64,
        steps: usize,
        first_packets: u32,
    ) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid(
                "ratios",
                format!("need 0 <= lo < hi, got [{lo}, {hi}]"),
            ));
        }
        if steps < 2 {
            return Err(Error::invalid("steps", "need at least 2 points"));
        }
        let ratios = (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect();
        Ok(Self {
            scenario,
            ratios,
            first_packets,
        })
    }
}

/// Costs per first packet at one ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverPoint {
    pub update_ratio: f64,
    pub first_packets: u32,
    pub updates: u64,
    pub ghls_update_cost: f64,
    pub ghls_query_cost: f64,
    pub ghls_delivery_cost: f64,
    pub ghls_cost: f64,
    pub lpr_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverReport {
    pub grouping: String,
    pub points: Vec<CrossoverPoint>,
    /// Interpolated ratio where GHLS becomes the more expensive scheme.
    pub empirical_crossover: Option<f64>,
    pub measured_s: f64,
    pub measured_p: f64,
    pub measured_traffic_factor: f64,
    pub analytic_traffic: f64,
    /// Break-even threshold from the measured `p / s` and analytic `T̄`.
    pub analytic_crossover: f64,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    FirstPacket,
    Update,
}

const UPDATE_STREAM: u64 = 1 << 40;

/// One simulated timeline at `f / r`. First packets arrive at rate 1 and
/// updates at rate `ratio`; both streams are seeded independently of the
/// ratio so sweeps share random numbers.
fn simulate_ratio(world: &World, packets: &[TrialRecord], ratio: f64) -> CrossoverPoint {
    let seed = world.config.seeds.traffic;
    let mut fp_clock = ChaCha8Rng::seed_from_u64(seed);
    fp_clock.set_stream(UPDATE_STREAM - 1);
    let mut up_clock = ChaCha8Rng::seed_from_u64(seed);
    up_clock.set_stream(UPDATE_STREAM - 2);

    let router = world.router();
    let spw = world.config.slots().slots_per_week();
    let mut queue = EventQueue::new();
    let exp = |rng: &mut ChaCha8Rng| -> f64 { Exp1.sample(rng) };
    if !packets.is_empty() {
        queue.schedule(exp(&mut fp_clock), Event::FirstPacket);
    }
    if ratio > 0.0 {
        queue.schedule(exp(&mut up_clock) / ratio, Event::Update);
    }

    let (mut served, mut updates) = (0usize, 0u64);
    let (mut update_tx, mut query_tx, mut delivery_tx, mut lpr_tx) = (0u64, 0u64, 0u64, 0u64);
    while let Some((_, event)) = queue.pop() {
        match event {
            Event::FirstPacket => {
                let t = &packets[served];
                query_tx += t.ghls_query;
                delivery_tx += t.oracle_transmissions;
                lpr_tx += t.transmissions;
                served += 1;
                if served == packets.len() {
                    break;
                }
                queue.schedule_in(exp(&mut fp_clock), Event::FirstPacket);
            }
            Event::Update => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(UPDATE_STREAM + updates);
                let user = rng.random_range(0..world.users.len());
                let sow = rng.random_range(0..spw);
                let (cell, _) = world
                    .mobility
                    .sample_cell(&world.users[user].homes, sow, &mut rng);
                let server = world
                    .directory
                    .binding(user as u64)
                    .expect("every user is bound")
                    .server;
                update_tx += router.route_to_node(world.anchor(cell), server).hops() as u64;
                updates += 1;
                queue.schedule_in(exp(&mut up_clock) / ratio, Event::Update);
            }
        }
    }

    let per = |x: u64| {
        if served == 0 {
            0.0
        } else {
            x as f64 / served as f64
        }
    };
    CrossoverPoint {
        update_ratio: ratio,
        first_packets: served as u32,
        updates,
        ghls_update_cost: per(update_tx),
        ghls_query_cost: per(query_tx),
        ghls_delivery_cost: per(delivery_tx),
        ghls_cost: per(update_tx + query_tx + delivery_tx),
        lpr_cost: per(lpr_tx),
    }
}

/// First ratio where `ghls - lpr` turns positive, linearly interpolated
/// between sweep points. A sweep where GHLS already costs more at its first
/// point reports that point.
fn interpolate_crossover(points: &[CrossoverPoint]) -> Option<f64> {
    let gap = |p: &CrossoverPoint| p.ghls_cost - p.lpr_cost;
    let first = points.first()?;
    if gap(first) > 0.0 {
        return Some(first.update_ratio);
    }
    points.windows(2).find_map(|w| {
        let (d0, d1) = (gap(&w[0]), gap(&w[1]));
        (d0 <= 0.0 && d1 > 0.0).then(|| {
            w[0].update_ratio + (w[1].update_ratio - w[0].update_ratio) * (-d0) / (d1 - d0)
        })
    })
}

pub fn compare_ghls(sweep: &SweepConfig) -> Result<CrossoverReport> {
    if sweep.ratios.is_empty() {
        return Err(Error::invalid("ratios", "sweep needs at least one ratio"));
    }
    if sweep.ratios.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::invalid(
            "ratios",
            "ratios must be finite and non-negative",
        ));
    }
    if sweep.ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "ratios",
            "ratios must be strictly ascending",
        ));
    }
    let mut scenario = sweep.scenario.clone();
    scenario.strategy.kind = StrategyKind::Lpr;
    scenario.traffic.trials = sweep.first_packets;
    let world = World::build(&scenario)?;
    let packets: Vec<TrialRecord> = (0..sweep.first_packets)
        .into_par_iter()
        .map(|i| world.run_trial(i))
        .collect();

    let points: Vec<CrossoverPoint> = sweep
        .ratios
        .par_iter()
        .map(|&r| simulate_ratio(&world, &packets, r))
        .collect();

    let n = packets.len().max(1) as f64;
    let measured_s = packets.iter().map(|t| t.ghls_update as f64).sum::<f64>() / n;
    let measured_p = packets.iter().map(|t| t.oracle_forward as f64).sum::<f64>() / n;
    let oracle: u64 = packets.iter().map(|t| t.oracle_transmissions).sum();
    let lpr: u64 = packets.iter().map(|t| t.transmissions).sum();
    let analytic_traffic = mean_traffic(&world.grouping, &scenario.success_model());
    let analytic_crossover = if measured_s > 0.0 {
        ghls_breakeven(measured_p / measured_s, analytic_traffic)?
    } else {
        f64::INFINITY
    };
    Ok(CrossoverReport {
        grouping: world.grouping.to_string(),
        empirical_crossover: interpolate_crossover(&points),
        points,
        measured_s,
        measured_p,
        measured_traffic_factor: if oracle == 0 {
            0.0
        } else {
            lpr as f64 / oracle as f64
        },
        analytic_traffic,
        analytic_crossover,
    })
}
