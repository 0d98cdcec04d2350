//! Synthetic human-mobility traces and their empirical statistics.
//!
//! Each user gets `N` distinct home cells in rank order. For every slot the
//! user is, with probability `unpredictable_floor`, in a uniformly random grid
//! cell; otherwise at a home cell whose rank follows the beta-geometric law
//! with `c = R(t)`, i.e. rank `i` is reached with hazard `R(t)/i`. The
//! predictable-part CDF is rescaled so the overall chance of being in the top
//! `k` homes equals `1 − 1/(k·B(k, 1 − R(t)))` until the floor caps it.

use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{BetaGeometricModel, RegularityModel, SuccessModel};
use crate::profile::{build_profile, CellId, Observation, ObservationTrace, Order, SlotConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub width: u32,
    pub height: u32,
    /// Edge length of one cell in meters.
    pub cell_size: f64,
}

impl Default for CellGrid {
    fn default() -> Self {
        Self {
            width: 20,
            height: 20,
            cell_size: 100.0,
        }
    }
}

impl CellGrid {
    pub fn new(width: u32, height: u32, cell_size: f64) -> Result<Self> {
        let g = Self {
            width,
            height,
            cell_size,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid", "width and height must be positive"));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::invalid("grid", "cell size must be positive"));
        }
        Ok(())
    }

    pub fn cells(&self) -> u32 {
        self.width * self.height
    }

    pub fn cell(&self, index: u32) -> CellId {
        CellId::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn contains(&self, cell: CellId) -> bool {
        (0..self.width as i32).contains(&cell.x) && (0..self.height as i32).contains(&cell.y)
    }

    /// Center of a cell in meters.
    pub fn center(&self, cell: CellId) -> (f64, f64) {
        (
            (cell.x as f64 + 0.5) * self.cell_size,
            (cell.y as f64 + 0.5) * self.cell_size,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub n_users: u32,
    pub n_weeks: u32,
    /// Home cells per user.
    pub locations: u32,
    pub regularity: RegularityModel,
    /// Share of slots spent at a uniformly random cell.
    pub unpredictable_floor: f64,
    pub grid: CellGrid,
    pub slots: SlotConfig,
    pub seed: u64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            n_users: 100,
            n_weeks: 4,
            locations: 40,
            regularity: RegularityModel::default(),
            unpredictable_floor: 0.07,
            grid: CellGrid::default(),
            slots: SlotConfig::default(),
            seed: 0,
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_users == 0 {
            return Err(Error::invalid("n_users", "must be positive"));
        }
        if self.locations == 0 {
            return Err(Error::invalid("locations", "must be positive"));
        }
        if self.locations > self.grid.cells() {
            return Err(Error::invalid(
                "locations",
                format!(
                    "{} home cells do not fit a grid of {} cells",
                    self.locations,
                    self.grid.cells()
                ),
            ));
        }
        if !(0.0..=0.3).contains(&self.unpredictable_floor) {
            return Err(Error::invalid(
                "unpredictable_floor",
                format!("must lie in [0, 0.3], got {}", self.unpredictable_floor),
            ));
        }
        Ok(())
    }
}

/// Per-slot distribution over home ranks shared by every user.
#[derive(Debug, Clone)]
pub struct MobilityModel {
    params: MobilityParams,
    /// `rank_cdf[slot][r]`: chance of rank ≤ `r + 1` given a predictable slot.
    rank_cdf: Vec<Vec<f64>>,
    clamped_slots: usize,
}

impl MobilityModel {
    pub fn new(params: MobilityParams) -> Result<Self> {
        params.validate()?;
        let n = params.locations as usize;
        let floor = params.unpredictable_floor;
        let uniform_hit = floor / params.grid.cells() as f64;
        let mut clamped_slots = 0;
        let rank_cdf = (0..params.slots.slots_per_week())
            .map(|sow| {
                let r = params.regularity.at_wrapped(params.slots.hour_of_week(sow));
                let target = BetaGeometricModel::new(r).expect("regularity clamped to (0, 1)");
                let mut cdf = Vec::with_capacity(n);
                let mut prev = 0.0;
                let mut clamped = false;
                for k in 1..=n {
                    let raw = (target.cdf(k as u32) - uniform_hit * k as f64) / (1.0 - floor);
                    let v = if k == n { 1.0 } else { raw.clamp(prev, 1.0) };
                    clamped |= k < n && (raw > 1.0 || raw < prev);
                    cdf.push(v);
                    prev = v;
                }
                if cdf[0] >= 1.0 && n > 1 {
                    log::warn!("slot {sow}: R = {r:.3} exceeds the reachable top-1 mass; clamped");
                }
                clamped_slots += clamped as usize;
                cdf
            })
            .collect();
        if clamped_slots > 0 {
            log::debug!("{clamped_slots} slots needed rank-distribution clamping");
        }
        Ok(Self {
            params,
            rank_cdf,
            clamped_slots,
        })
    }

    pub fn params(&self) -> &MobilityParams {
        &self.params
    }

    /// Slots where the rescaled rank distribution had to be clamped.
    pub fn clamped_slots(&self) -> usize {
        self.clamped_slots
    }

    /// Cumulative rank distribution for a predictable draw in `slot_of_week`.
    pub fn rank_cdf(&self, slot_of_week: u32) -> &[f64] {
        &self.rank_cdf[slot_of_week as usize]
    }

    /// Chance the user is at their rank-`rank` home (1-based) in the slot,
    /// counting random draws that happen to land there.
    pub fn rank_probability(&self, slot_of_week: u32, rank: u32) -> f64 {
        let cdf = self.rank_cdf(slot_of_week);
        let i = rank as usize - 1;
        let below = if i == 0 { 0.0 } else { cdf[i - 1] };
        let floor = self.params.unpredictable_floor;
        (1.0 - floor) * (cdf[i] - below) + floor / self.params.grid.cells() as f64
    }

    /// Random home cells in rank order.
    pub fn draw_homes<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CellId> {
        index::sample(
            rng,
            self.params.grid.cells() as usize,
            self.params.locations as usize,
        )
        .into_iter()
        .map(|i| self.params.grid.cell(i as u32))
        .collect()
    }

    /// Where the user is during one slot, plus the home rank (1-based) when
    /// the draw was a predictable one.
    pub fn sample_cell<R: Rng + ?Sized>(
        &self,
        homes: &[CellId],
        slot_of_week: u32,
        rng: &mut R,
    ) -> (CellId, Option<u32>) {
        if rng.random::<f64>() < self.params.unpredictable_floor {
            let i = rng.random_range(0..self.params.grid.cells());
            return (self.params.grid.cell(i), None);
        }
        let u: f64 = rng.random();
        let cdf = self.rank_cdf(slot_of_week);
        let rank = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        (homes[rank], Some(rank as u32 + 1))
    }

    /// Stream for one user: the same bits whatever order users are built in.
    pub fn user_rng(&self, user: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        rng.set_stream(user as u64);
        rng
    }

    pub fn generate_user(&self, user: u32) -> SyntheticUser {
        let mut rng = self.user_rng(user);
        let homes = self.draw_homes(&mut rng);
        let spw = self.params.slots.slots_per_week();
        let mut records = Vec::with_capacity((self.params.n_weeks * spw) as usize);
        for week in 0..self.params.n_weeks as u64 {
            for sow in 0..spw {
                let (cell, _) = self.sample_cell(&homes, sow, &mut rng);
                records.push(Observation {
                    slot: week * spw as u64 + sow as u64,
                    cell,
                });
            }
        }
        SyntheticUser {
            trace: ObservationTrace::new(user, records).expect("slots generated in order"),
            homes,
        }
    }

    pub fn generate_users(&self) -> Vec<SyntheticUser> {
        (0..self.params.n_users)
            .into_par_iter()
            .map(|u| self.generate_user(u))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticUser {
    /// Home cells, best rank first.
    pub homes: Vec<CellId>,
    pub trace: ObservationTrace,
}

/// One trace per user, deterministic in `params.seed`.
pub fn generate_trace(params: &MobilityParams) -> Result<Vec<ObservationTrace>> {
    let model = MobilityModel::new(params.clone())?;
    Ok(model
        .generate_users()
        .into_iter()
        .map(|u| u.trace)
        .collect())
}

/// Per slot of the week, the share of observations at each user's modal
/// cell. The mode is taken over the whole trace, ties to the smaller cell.
/// Slots without observations are `NaN`.
pub fn empirical_regularity(traces: &[ObservationTrace], slots: &SlotConfig) -> Vec<f64> {
    let spw = slots.slots_per_week() as usize;
    let mut modal = vec![0u64; spw];
    let mut total = vec![0u64; spw];
    for trace in traces {
        let mut counts: HashMap<CellId, u64> = HashMap::new();
        for o in trace.records() {
            *counts.entry(o.cell).or_default() += 1;
        }
        let Some(mode) = counts
            .into_iter()
            .max_by(|(ca, na), (cb, nb)| na.cmp(nb).then(cb.cmp(ca)))
            .map(|(c, _)| c)
        else {
            continue;
        };
        for o in trace.records() {
            let sow = slots.slot_of_week(o.slot) as usize;
            total[sow] += 1;
            modal[sow] += (o.cell == mode) as u64;
        }
    }
    modal
        .iter()
        .zip(&total)
        .map(|(&m, &t)| {
            if t == 0 {
                f64::NAN
            } else {
                m as f64 / t as f64
            }
        })
        .collect()
}

/// Share of held-out observations that fall in the top-`k` cells of a
/// first-order profile trained on the earlier half of each trace.
pub fn empirical_success_after_k(
    traces: &[ObservationTrace],
    k: usize,
    slots: &SlotConfig,
) -> Result<f64> {
    Ok(empirical_success_curve(traces, &[k], slots)?[0])
}

/// [`empirical_success_after_k`] for several `k`, training each profile once.
pub fn empirical_success_curve(
    traces: &[ObservationTrace],
    ks: &[usize],
    slots: &SlotConfig,
) -> Result<Vec<f64>> {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    let (hits, tested) = traces
        .par_iter()
        .map(|trace| {
            let (train, test) = trace.split_halves(slots);
            if train.is_empty() {
                return (vec![0; ks.len()], 0);
            }
            let profile = build_profile(&train, Order::First, *slots);
            let mut hits = vec![0u64; ks.len()];
            for o in test.records() {
                let ranked = profile.top_k(o.slot, None, max_k);
                if let Some(pos) = ranked.iter().position(|c| *c == o.cell) {
                    for (h, &k) in hits.iter_mut().zip(ks) {
                        *h += (pos < k) as u64;
                    }
                }
            }
            (hits, test.records().len() as u64)
        })
        .reduce(
            || (vec![0; ks.len()], 0),
            |(mut a, na), (b, nb)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, na + nb)
            },
        );
    if tested == 0 {
        return Err(Error::invalid(
            "traces",
            "no held-out observations; traces need at least two weeks",
        ));
    }
    Ok(hits.into_iter().map(|h| h as f64 / tested as f64).collect())
}

/// Observations by 1-based home rank (index 0 counts non-home cells).
pub fn rank_frequencies(users: &[SyntheticUser]) -> Vec<u64> {
    let n = users.iter().map(|u| u.homes.len()).max().unwrap_or(0);
    let mut freq = vec![0u64; n + 1];
    for u in users {
        let rank: HashMap<CellId, usize> = u
            .homes
            .iter()
            .enumerate()
            .map(|(i, c)| (*c, i + 1))
            .collect();
        for o in u.trace.records() {
            freq[rank.get(&o.cell).copied().unwrap_or(0)] += 1;
        }
    }
    freq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(floor: f64, locations: u32) -> MobilityParams {
        MobilityParams {
            n_users: 4,
            n_weeks: 2,
            locations,
            unpredictable_floor: floor,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn single_home_without_floor_never_moves() {
        let traces = generate_trace(&small(0.0, 1)).unwrap();
        for t in &traces {
            let first = t.records()[0].cell;
            assert!(t.records().iter().all(|o| o.cell == first));
        }
        let reg = empirical_regularity(&traces, &SlotConfig::default());
        assert!(reg.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn deterministic_in_seed() {
        let p = small(0.07, 40);
        assert_eq!(generate_trace(&p).unwrap(), generate_trace(&p).unwrap());
        let mut q = p.clone();
        q.seed += 1;
        assert_ne!(generate_trace(&p).unwrap(), generate_trace(&q).unwrap());
    }

    #[test]
    fn user_streams_independent_of_population() {
        let a = MobilityModel::new(small(0.07, 40)).unwrap();
        let mut more = small(0.07, 40);
        more.n_users = 9;
        let b = MobilityModel::new(more).unwrap();
        assert_eq!(a.generate_user(3), b.generate_user(3));
    }

    #[test]
    fn rank_cdf_shape() {
        let m = MobilityModel::new(MobilityParams::default()).unwrap();
        for sow in 0..168 {
            let cdf = m.rank_cdf(sow);
            assert_eq!(cdf.len(), 40);
            assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(*cdf.last().unwrap(), 1.0);
            let r = m.params().regularity.at_wrapped(sow as f64 + 0.5);
            assert!((m.rank_probability(sow, 1) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(MobilityModel::new(small(0.5, 40)).is_err());
        assert!(MobilityModel::new(small(0.0, 0)).is_err());
        assert!(MobilityModel::new(small(0.0, 401)).is_err());
        let mut p = small(0.0, 4);
        p.n_users = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn empirical_success_needs_held_out_data() {
        let mut p = small(0.0, 4);
        p.n_weeks = 1;
        let traces = generate_trace(&p).unwrap();
        assert!(empirical_success_after_k(&traces, 1, &SlotConfig::default()).is_err());
    }

    #[test]
    fn all_homes_found_without_floor() {
        let mut p = small(0.0, 6);
        p.n_weeks = 6;
        let traces = generate_trace(&p).unwrap();
        let s = empirical_success_after_k(&traces, 6, &SlotConfig::default()).unwrap();
        assert!(s > 0.999, "{s}");
    }
}
