//! Grouped multi-copy delivery to predicted locations.

use serde::{Deserialize, Serialize};

use super::events::EventQueue;
use super::geometry::Point;
use super::gpsr::Gpsr;
use crate::analytic::Grouping;
use crate::profile::CellId;

/// Which delivered copies send an acknowledgement back to the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AckPolicy {
    /// Every delivered copy answers with an ACK or NACK.
    #[default]
    EveryAttempt,
    /// Only the copy that finds the target answers.
    SuccessOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryPolicy {
    pub acceptance_radius: f64,
    pub ack: AckPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub cell: CellId,
    pub position: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DeliveryOutcome {
    pub success: bool,
    /// Round trips until the outcome was known.
    pub latency_factor: f64,
    pub transmissions: u64,
    pub forward_transmissions: u64,
    pub return_transmissions: u64,
    pub groups_tried: u32,
    pub copies_sent: u32,
    /// Ranks requested by the grouping that had no candidate.
    pub shortfall: u32,
}

impl DeliveryOutcome {
    fn add_forward(&mut self, hops: u32) {
        self.forward_transmissions += hops as u64;
        self.transmissions += hops as u64;
    }

    fn add_return(&mut self, hops: u32) {
        self.return_transmissions += hops as u64;
        self.transmissions += hops as u64;
    }
}

enum Event {
    Dispatch(usize),
    Resolve { group: usize, hit: bool },
}

/// Sends copies of the first packet to `candidates` group by group. Each
/// group is dispatched in parallel; the next group waits for the previous
/// group's responses, one round trip later.
pub fn lpr_deliver(
    router: &Gpsr,
    src: usize,
    candidates: &[Candidate],
    truth: CellId,
    grouping: &Grouping,
    policy: &DeliveryPolicy,
) -> DeliveryOutcome {
    let k = grouping.k() as usize;
    let groups: Vec<&[Candidate]> = grouping
        .ranges()
        .filter(|r| r.start < candidates.len())
        .map(|r| &candidates[r.start..r.end.min(candidates.len())])
        .collect();
    let mut out = DeliveryOutcome {
        shortfall: k.saturating_sub(candidates.len()) as u32,
        ..Default::default()
    };

    let mut queue = EventQueue::new();
    if !groups.is_empty() {
        queue.schedule(0.0, Event::Dispatch(0));
    }
    while let Some((time, event)) = queue.pop() {
        match event {
            Event::Dispatch(g) => {
                out.groups_tried += 1;
                let mut hit = false;
                for c in groups[g] {
                    out.copies_sent += 1;
                    let fwd = router.route(src, c.position, policy.acceptance_radius);
                    out.add_forward(fwd.hops());
                    if !fwd.delivered() {
                        continue;
                    }
                    let found = c.cell == truth;
                    hit |= found;
                    if found || policy.ack == AckPolicy::EveryAttempt {
                        out.add_return(router.route_to_node(fwd.last(), src).hops());
                    }
                }
                queue.schedule(time + 1.0, Event::Resolve { group: g, hit });
            }
            Event::Resolve { group, hit } => {
                out.latency_factor = time;
                if hit {
                    out.success = true;
                } else if group + 1 < groups.len() {
                    queue.schedule(time, Event::Dispatch(group + 1));
                }
            }
        }
    }
    out
}

/// Single copy sent straight to the true location, with one ACK.
pub fn oracle_deliver(
    router: &Gpsr,
    src: usize,
    truth: Point,
    policy: &DeliveryPolicy,
) -> DeliveryOutcome {
    let mut out = DeliveryOutcome {
        groups_tried: 1,
        copies_sent: 1,
        latency_factor: 1.0,
        ..Default::default()
    };
    let fwd = router.route(src, truth, policy.acceptance_radius);
    out.add_forward(fwd.hops());
    if fwd.delivered() {
        out.success = true;
        out.add_return(router.route_to_node(fwd.last(), src).hops());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simnet::topology::Topology;

    fn line() -> Topology {
        let pts = (0..10).map(|i| Point::new(i as f64 * 10.0, 0.0)).collect();
        Topology::from_positions(pts, 11.0, 100.0).unwrap()
    }

    fn cands(xs: &[i32]) -> Vec<Candidate> {
        xs.iter()
            .map(|&x| Candidate {
                cell: CellId::new(x, 0),
                position: Point::new(x as f64 * 10.0, 0.0),
            })
            .collect()
    }

    const POLICY: DeliveryPolicy = DeliveryPolicy {
        acceptance_radius: 5.0,
        ack: AckPolicy::EveryAttempt,
    };

    #[test]
    fn serial_stops_at_hit() {
        let t = line();
        let r = Gpsr::new(&t);
        let g: Grouping = "1+1+1".parse().unwrap();
        let out = lpr_deliver(&r, 0, &cands(&[3, 5, 7]), CellId::new(5, 0), &g, &POLICY);
        assert!(out.success);
        assert_eq!(out.groups_tried, 2);
        assert_eq!(out.latency_factor, 2.0);
        assert_eq!(out.forward_transmissions, 3 + 5);
        assert_eq!(out.return_transmissions, 3 + 5);
        assert_eq!(out.transmissions, r.transmissions());
    }

    #[test]
    fn parallel_sends_everything() {
        let t = line();
        let r = Gpsr::new(&t);
        let g = Grouping::parallel(3);
        let out = lpr_deliver(&r, 0, &cands(&[3, 5, 7]), CellId::new(3, 0), &g, &POLICY);
        assert!(out.success);
        assert_eq!(out.latency_factor, 1.0);
        assert_eq!(out.copies_sent, 3);
        assert_eq!(out.transmissions, 2 * (3 + 5 + 7));
    }

    #[test]
    fn miss_tries_all_groups() {
        let t = line();
        let r = Gpsr::new(&t);
        let g: Grouping = "1+2".parse().unwrap();
        let policy = DeliveryPolicy {
            ack: AckPolicy::SuccessOnly,
            ..POLICY
        };
        let out = lpr_deliver(&r, 0, &cands(&[3, 5, 7]), CellId::new(9, 0), &g, &policy);
        assert!(!out.success);
        assert_eq!(out.groups_tried, 2);
        assert_eq!(out.latency_factor, 2.0);
        assert_eq!(out.return_transmissions, 0);
    }

    #[test]
    fn shortfall_truncates_groups() {
        let t = line();
        let r = Gpsr::new(&t);
        let g: Grouping = "1+2+3".parse().unwrap();
        let out = lpr_deliver(&r, 0, &cands(&[3, 5]), CellId::new(9, 0), &g, &POLICY);
        assert_eq!(out.shortfall, 4);
        assert_eq!(out.groups_tried, 2);
        assert_eq!(out.copies_sent, 2);
        let none = lpr_deliver(&r, 0, &[], CellId::new(9, 0), &g, &POLICY);
        assert_eq!(none.groups_tried, 0);
        assert_eq!(none.latency_factor, 0.0);
    }

    #[test]
    fn oracle_round_trip() {
        let t = line();
        let r = Gpsr::new(&t);
        let out = oracle_deliver(&r, 2, Point::new(60.0, 0.0), &POLICY);
        assert!(out.success);
        assert_eq!(out.transmissions, 8);
    }
}
