//! Greedy Perimeter Stateless Routing over a [`Topology`].

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::geometry::{segment_intersection, Point};
use super::topology::Topology;

/// When a packet counts as delivered once a node within the acceptance
/// radius holds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryRule {
    /// The first node inside the radius accepts.
    FirstInRadius,
    /// Greedy forwarding continues inside the radius until no neighbour is
    /// closer to the target.
    #[default]
    ClosestInRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Greedy,
    Perimeter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteStatus {
    Delivered,
    /// The perimeter walk returned to its first edge on a face.
    PerimeterLoop,
    TtlExpired,
    /// Stuck in a local minimum with no planar edge to follow.
    NoRoute,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    /// Visited nodes, source first.
    pub path: Vec<usize>,
    /// Forwarding mode of each hop; one shorter than `path`.
    pub modes: Vec<Mode>,
    pub status: RouteStatus,
}

impl Route {
    pub fn hops(&self) -> u32 {
        self.modes.len() as u32
    }

    pub fn delivered(&self) -> bool {
        self.status == RouteStatus::Delivered
    }

    /// Node holding the packet when routing stopped.
    pub fn last(&self) -> usize {
        *self.path.last().expect("path holds the source")
    }
}

#[derive(Debug, Clone, Copy)]
struct PerimeterState {
    lp: Point,
    lf: Point,
    e0: (usize, usize),
    prev: usize,
}

/// Router bound to one topology. Every hop taken by any route increments a
/// shared transmission counter.
#[derive(Debug)]
pub struct Gpsr<'a> {
    topo: &'a Topology,
    ttl: u32,
    rule: DeliveryRule,
    transmissions: AtomicU64,
}

impl<'a> Gpsr<'a> {
    pub fn new(topo: &'a Topology) -> Self {
        Self {
            topo,
            ttl: topo.default_ttl(),
            rule: DeliveryRule::default(),
            transmissions: AtomicU64::new(0),
        }
    }

    pub fn with_ttl(mut self, ttl: u32) -> Self {
        self.ttl = ttl;
        self
    }

    pub fn with_rule(mut self, rule: DeliveryRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn topology(&self) -> &'a Topology {
        self.topo
    }

    pub fn ttl(&self) -> u32 {
        self.ttl
    }

    pub fn transmissions(&self) -> u64 {
        self.transmissions.load(Ordering::Relaxed)
    }

    /// Routes from node `src` toward `target` until a node within `radius`
    /// accepts. Use [`Gpsr::route_to_node`] for node destinations.
    pub fn route(&self, src: usize, target: Point, radius: f64) -> Route {
        self.route_inner(src, target, radius, None)
    }

    pub fn route_to_node(&self, src: usize, dst: usize) -> Route {
        self.route_inner(src, self.topo.position(dst), 0.0, Some(dst))
    }

    fn accepts(&self, node: usize, target: Point, radius: f64, dst: Option<usize>) -> bool {
        if let Some(d) = dst {
            return node == d;
        }
        let p = self.topo.position(node);
        let d = p.dist(target);
        if d > radius {
            return false;
        }
        match self.rule {
            DeliveryRule::FirstInRadius => true,
            DeliveryRule::ClosestInRadius => self
                .topo
                .neighbors(node)
                .iter()
                .all(|&n| self.topo.position(n).dist(target) >= d),
        }
    }

    fn route_inner(&self, src: usize, target: Point, radius: f64, dst: Option<usize>) -> Route {
        let topo = self.topo;
        let mut path = vec![src];
        let mut modes = Vec::new();
        let mut cur = src;
        let mut perimeter: Option<PerimeterState> = None;

        let status = loop {
            if self.accepts(cur, target, radius, dst) {
                break RouteStatus::Delivered;
            }
            if modes.len() as u32 >= self.ttl {
                break RouteStatus::TtlExpired;
            }
            let here = topo.position(cur);
            let d_here = here.dist(target);

            if let Some(st) = perimeter {
                if d_here < st.lp.dist(target) {
                    perimeter = None;
                }
            }

            let (next, mode) = match perimeter {
                None => {
                    let greedy = topo
                        .neighbors(cur)
                        .iter()
                        .copied()
                        .map(|n| (n, topo.position(n).dist(target)))
                        .filter(|&(_, d)| d < d_here)
                        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                    match greedy {
                        Some((n, _)) => (n, Mode::Greedy),
                        None => {
                            let Some(first) = self.ccw_from(cur, here.bearing(target), None) else {
                                break RouteStatus::NoRoute;
                            };
                            perimeter = Some(PerimeterState {
                                lp: here,
                                lf: here,
                                e0: (cur, first),
                                prev: cur,
                            });
                            (first, Mode::Perimeter)
                        }
                    }
                }
                Some(mut st) => {
                    let in_bearing = here.bearing(topo.position(st.prev));
                    let Some(mut a) = self.ccw_from(cur, in_bearing, Some(st.prev)) else {
                        break RouteStatus::NoRoute;
                    };
                    let mut changed = false;
                    // Switch faces while the candidate edge crosses Lf→D
                    // closer to the target than the current face entry.
                    for _ in 0..=topo.planar_neighbors(cur).len() {
                        let pa = topo.position(a);
                        let Some(x) = segment_intersection(here, pa, st.lf, target) else {
                            break;
                        };
                        if x.dist(target) + 1e-9 >= st.lf.dist(target) || x.dist2(here) < 1e-18 {
                            break;
                        }
                        st.lf = x;
                        st.e0 = (cur, a);
                        changed = true;
                        match self.ccw_from(cur, here.bearing(pa), Some(a)) {
                            Some(b) if b != a => {
                                a = b;
                                st.e0 = (cur, a);
                            }
                            _ => break,
                        }
                    }
                    if !changed && st.e0 == (cur, a) {
                        break RouteStatus::PerimeterLoop;
                    }
                    perimeter = Some(st);
                    (a, Mode::Perimeter)
                }
            };

            if let Some(st) = perimeter.as_mut() {
                st.prev = cur;
            }
            self.transmissions.fetch_add(1, Ordering::Relaxed);
            modes.push(mode);
            path.push(next);
            cur = next;
        };
        Route {
            path,
            modes,
            status,
        }
    }

    /// First planar neighbour of `node` counter-clockwise from `bearing`.
    /// `exclude` is only returned when it is the sole neighbour.
    fn ccw_from(&self, node: usize, bearing: f64, exclude: Option<usize>) -> Option<usize> {
        let here = self.topo.position(node);
        let nbrs = self.topo.planar_neighbors(node);
        let best = nbrs
            .iter()
            .copied()
            .filter(|&n| Some(n) != exclude)
            .map(|n| {
                let mut delta = (here.bearing(self.topo.position(n)) - bearing).rem_euclid(TAU);
                if delta <= 1e-12 {
                    delta += TAU;
                }
                (n, delta)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(n, _)| n);
        best.or_else(|| exclude.filter(|e| nbrs.contains(e)))
    }
}
