//! Location profiles: PPM-style predictors mapping a time slot (and
//! optionally the previous cell) to ranked `(cell, confidence)` pairs.
//!
//! A profile of order `n` keeps counts for every order up to `n`, so an
//! unseen context escapes to the next lower one: order 3 `(slot, previous
//! cell)` → order 1 `(slot)` → order 0 `()`. Confidence is relative frequency.

mod codec;
mod trace;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

pub use codec::{FORMAT_VERSION, MAGIC};
pub use trace::{read_traces, write_traces, CellId, Observation, ObservationTrace, SlotConfig};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    /// No context.
    Zeroth,
    /// Context is the slot of the week.
    First,
    /// Context is the slot of the week and the previously observed cell.
    Third,
}

impl Order {
    pub fn depth(self) -> u8 {
        match self {
            Order::Zeroth => 0,
            Order::First => 1,
            Order::Third => 3,
        }
    }

    pub fn from_depth(depth: u8) -> Result<Self> {
        match depth {
            0 => Ok(Order::Zeroth),
            1 => Ok(Order::First),
            3 => Ok(Order::Third),
            d => Err(Error::invalid(
                "order",
                format!("must be 0, 1 or 3, got {d}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextKey {
    Global,
    Slot(u32),
    SlotPrev(u32, CellId),
}

impl ContextKey {
    fn depth(&self) -> u8 {
        match self {
            ContextKey::Global => 0,
            ContextKey::Slot(_) => 1,
            ContextKey::SlotPrev(..) => 3,
        }
    }
}

pub type Counts = BTreeMap<CellId, u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationProfile {
    order: Order,
    slots: SlotConfig,
    version: u64,
    counts: BTreeMap<ContextKey, Counts>,
}

impl LocationProfile {
    pub fn empty(order: Order, slots: SlotConfig) -> Self {
        Self {
            order,
            slots,
            version: 1,
            counts: BTreeMap::new(),
        }
    }

    /// Assembles a profile (or an update fragment) from raw context counts.
    /// Zero counts are dropped; contexts deeper than `order` are rejected.
    pub fn from_counts(
        order: Order,
        slots: SlotConfig,
        version: u64,
        counts: BTreeMap<ContextKey, Counts>,
    ) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (key, cells) in counts {
            if key.depth() > order.depth() {
                return Err(Error::invalid(
                    "counts",
                    format!("context {key:?} is deeper than order {}", order.depth()),
                ));
            }
            if let ContextKey::Slot(s) | ContextKey::SlotPrev(s, _) = key {
                if s >= slots.slots_per_week() {
                    return Err(Error::invalid(
                        "counts",
                        format!("slot {s} outside week of {} slots", slots.slots_per_week()),
                    ));
                }
            }
            let cells: Counts = cells.into_iter().filter(|(_, n)| *n > 0).collect();
            if !cells.is_empty() {
                clean.insert(key, cells);
            }
        }
        Ok(Self {
            order,
            slots,
            version,
            counts: clean,
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn slot_config(&self) -> SlotConfig {
        self.slots
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn contexts(&self) -> &BTreeMap<ContextKey, Counts> {
        &self.counts
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Contexts consulted for a query, most specific first.
    fn chain(&self, slot_index: u64, prev: Option<CellId>) -> Vec<ContextKey> {
        let sow = self.slots.slot_of_week(slot_index);
        let mut chain = Vec::with_capacity(3);
        if self.order == Order::Third {
            if let Some(p) = prev {
                chain.push(ContextKey::SlotPrev(sow, p));
            }
        }
        if self.order != Order::Zeroth {
            chain.push(ContextKey::Slot(sow));
        }
        chain.push(ContextKey::Global);
        chain
    }

    /// Cells of one context in rank order: count descending, then the
    /// order-0 count descending, then `(x, y)` ascending.
    fn ranked(&self, counts: &Counts) -> Vec<(CellId, u64)> {
        let global = self.counts.get(&ContextKey::Global);
        let mut cells: Vec<(CellId, u64)> = counts.iter().map(|(c, n)| (*c, *n)).collect();
        cells.sort_by(|(ca, na), (cb, nb)| {
            let ga = global.and_then(|g| g.get(ca)).copied().unwrap_or(0);
            let gb = global.and_then(|g| g.get(cb)).copied().unwrap_or(0);
            nb.cmp(na).then(gb.cmp(&ga)).then(ca.cmp(cb))
        });
        cells
    }

    /// Ranked `(cell, confidence)` for the most specific context with data.
    ///
    /// Confidences sum to one; an empty profile yields an empty list.
    pub fn predict(&self, slot_index: u64, prev: Option<CellId>) -> Vec<(CellId, f64)> {
        let Some(counts) = self
            .chain(slot_index, prev)
            .iter()
            .find_map(|key| self.counts.get(key))
        else {
            return Vec::new();
        };
        let total: u64 = counts.values().sum();
        self.ranked(counts)
            .into_iter()
            .map(|(c, n)| (c, n as f64 / total as f64))
            .collect()
    }

    /// Up to `k` cells to address, best first.
    ///
    /// Starts from [`predict`](Self::predict)'s ranking and escapes to lower
    /// orders for cells the specific context has never seen, so fewer than
    /// `k` come back only when the whole profile knows fewer cells.
    pub fn top_k(&self, slot_index: u64, prev: Option<CellId>, k: usize) -> Vec<CellId> {
        let mut out = Vec::with_capacity(k);
        let mut seen = HashSet::with_capacity(k);
        for key in self.chain(slot_index, prev) {
            if out.len() >= k {
                break;
            }
            let Some(counts) = self.counts.get(&key) else {
                continue;
            };
            for (cell, _) in self.ranked(counts) {
                if out.len() >= k {
                    break;
                }
                if seen.insert(cell) {
                    out.push(cell);
                }
            }
        }
        out
    }

    /// Replaces the contexts carried by `delta` and adopts its version.
    pub fn apply_update(&self, delta: &LocationProfile) -> Result<LocationProfile> {
        if delta.version <= self.version {
            return Err(Error::StaleVersion {
                current: self.version,
                offered: delta.version,
            });
        }
        if delta.slots != self.slots || delta.order.depth() > self.order.depth() {
            return Err(Error::invalid(
                "delta",
                "slot configuration or order incompatible with the profile",
            ));
        }
        let mut next = self.clone();
        next.version = delta.version;
        for (key, cells) in &delta.counts {
            next.counts.insert(*key, cells.clone());
        }
        Ok(next)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        codec::decode(bytes)
    }
}

/// Counts every observation of `trace` into contexts up to `order`.
pub fn build_profile(trace: &ObservationTrace, order: Order, slots: SlotConfig) -> LocationProfile {
    let mut profile = LocationProfile::empty(order, slots);
    let mut prev: Option<CellId> = None;
    for obs in trace.records() {
        let sow = slots.slot_of_week(obs.slot);
        let mut bump = |key| {
            *profile
                .counts
                .entry(key)
                .or_default()
                .entry(obs.cell)
                .or_insert(0) += 1;
        };
        bump(ContextKey::Global);
        if order != Order::Zeroth {
            bump(ContextKey::Slot(sow));
        }
        if order == Order::Third {
            if let Some(p) = prev {
                bump(ContextKey::SlotPrev(sow, p));
            }
        }
        prev = Some(obs.cell);
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: CellId = CellId::new(0, 0);
    const B: CellId = CellId::new(1, 0);
    const C: CellId = CellId::new(0, 1);

    fn trace(obs: &[(u64, CellId)]) -> ObservationTrace {
        ObservationTrace::new(
            7,
            obs.iter()
                .map(|&(slot, cell)| Observation { slot, cell })
                .collect(),
        )
        .unwrap()
    }

    fn week(slot_of_week: u64, w: u64) -> u64 {
        w * 168 + slot_of_week
    }

    #[test]
    fn deterministic_trace() {
        let t = trace(&[(week(5, 0), A), (week(5, 1), A), (week(5, 2), A)]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        assert_eq!(p.version(), 1);
        assert_eq!(p.predict(5, None), vec![(A, 1.0)]);
        assert_eq!(p.top_k(5, None, 1), vec![A]);
        assert_eq!(p.top_k(5, None, 10), vec![A]);
    }

    #[test]
    fn frequency_counting() {
        let t = trace(&[
            (week(5, 0), A),
            (week(5, 1), B),
            (week(5, 2), A),
            (week(5, 3), A),
        ]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        assert_eq!(p.predict(week(5, 9), None), vec![(A, 0.75), (B, 0.25)]);
    }

    #[test]
    fn unseen_slot_escapes_to_order_zero() {
        let t = trace(&[(1, A), (2, B), (3, B), (week(1, 1), B)]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        assert_eq!(p.predict(100, None), vec![(B, 0.75), (A, 0.25)]);
        let zero = build_profile(&t, Order::Zeroth, SlotConfig::default());
        assert_eq!(p.predict(100, None), zero.predict(100, None));
    }

    #[test]
    fn empty_profile_predicts_nothing() {
        let p = build_profile(&trace(&[]), Order::Third, SlotConfig::default());
        assert!(p.is_empty());
        assert!(p.predict(0, Some(A)).is_empty());
        assert!(p.top_k(0, None, 3).is_empty());
    }

    #[test]
    fn order_one_beats_order_zero_on_slot_dependent_trace() {
        // Slot 0 is always A and slot 1 always B, so only the slot tells them apart.
        let obs: Vec<_> = (0..20)
            .flat_map(|w| [(week(0, w), A), (week(1, w), B)])
            .collect();
        let t = trace(&obs);
        let score = |order| {
            let p = build_profile(&t, order, SlotConfig::default());
            t.records()
                .iter()
                .filter(|o| p.top_k(o.slot, None, 1) == vec![o.cell])
                .count()
        };
        assert_eq!(score(Order::First), 40);
        assert_eq!(score(Order::Zeroth), 20);
    }

    #[test]
    fn third_order_uses_exact_context() {
        // In slot 2, A follows C but B follows A.
        let mut obs = Vec::new();
        for w in 0..6 {
            let prev = if w % 2 == 0 { C } else { A };
            let here = if w % 2 == 0 { A } else { B };
            obs.push((week(1, w), prev));
            obs.push((week(2, w), here));
        }
        let p = build_profile(&trace(&obs), Order::Third, SlotConfig::default());
        assert_eq!(p.predict(2, Some(C)), vec![(A, 1.0)]);
        assert_eq!(p.predict(2, Some(A)), vec![(B, 1.0)]);
        // Unseen previous cell escapes to the slot context.
        assert_eq!(p.predict(2, Some(B)).len(), 2);
    }

    #[test]
    fn top_k_fills_from_lower_orders() {
        let t = trace(&[(0, A), (1, B), (2, C), (3, C), (week(0, 1), A)]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        assert_eq!(p.predict(0, None), vec![(A, 1.0)]);
        // After the slot's own cells, remaining cells follow the order-0 ranking.
        assert_eq!(p.top_k(0, None, 3), vec![A, C, B]);
    }

    #[test]
    fn ties_break_on_global_count_then_cell() {
        let t = trace(&[(0, B), (1, A), (2, A), (week(5, 1), B), (week(5, 2), A)]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        // In slot 5 both cells have one observation; A is more common overall.
        assert_eq!(p.top_k(5, None, 2), vec![A, B]);
        let t = trace(&[(week(5, 1), C), (week(5, 2), B)]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        assert_eq!(p.top_k(5, None, 2), vec![C, B]);
    }

    #[test]
    fn updates_replace_contexts_and_reject_stale() {
        let t = trace(&[(5, A), (week(5, 1), A)]);
        let p = build_profile(&t, Order::First, SlotConfig::default());
        let mut counts = BTreeMap::new();
        counts.insert(ContextKey::Slot(5), Counts::from([(B, 3)]));
        let stale =
            LocationProfile::from_counts(Order::First, SlotConfig::default(), 1, counts.clone())
                .unwrap();
        assert!(matches!(
            p.apply_update(&stale),
            Err(Error::StaleVersion {
                current: 1,
                offered: 1
            })
        ));
        let delta =
            LocationProfile::from_counts(Order::First, SlotConfig::default(), 2, counts).unwrap();
        let once = p.apply_update(&delta).unwrap();
        assert_eq!(once.version(), 2);
        assert_eq!(once.predict(5, None), vec![(B, 1.0)]);
        assert_eq!(p.apply_update(&delta).unwrap(), once);
        assert!(once.apply_update(&delta).is_err());
    }

    #[test]
    fn from_counts_validates() {
        let mut counts = BTreeMap::new();
        counts.insert(ContextKey::SlotPrev(0, A), Counts::from([(B, 1)]));
        assert!(
            LocationProfile::from_counts(Order::First, SlotConfig::default(), 1, counts).is_err()
        );
        let mut counts = BTreeMap::new();
        counts.insert(ContextKey::Slot(500), Counts::from([(B, 1)]));
        assert!(
            LocationProfile::from_counts(Order::First, SlotConfig::default(), 1, counts).is_err()
        );
    }
}
