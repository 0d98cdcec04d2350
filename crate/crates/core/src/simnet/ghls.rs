//! Grid-hash location service: each identifier is hashed to a home position
//! and the node nearest to it serves as that identifier's location server.

use std::collections::BTreeMap;

use serde::Serialize;

use super::geometry::Point;
use super::gpsr::Gpsr;
use super::topology::Topology;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Deterministic home position of `id` in a `field_size` square.
pub fn hashed_position(id: u64, field_size: f64) -> Point {
    let a = splitmix64(id);
    let b = splitmix64(a);
    Point::new(unit(a) * field_size, unit(b) * field_size)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Binding {
    pub home: Point,
    pub server: usize,
    pub position: Option<Point>,
}

/// Cost of a single location-service exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Exchange {
    pub transmissions: u64,
    pub ok: bool,
}

#[derive(Debug, Clone, Default)]
pub struct GhlsDirectory {
    bindings: BTreeMap<u64, Binding>,
}

impl GhlsDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `id` and returns its server node.
    pub fn bind(&mut self, topo: &Topology, id: u64) -> usize {
        self.bindings
            .entry(id)
            .or_insert_with(|| {
                let home = hashed_position(id, topo.field_size());
                Binding {
                    home,
                    server: topo.nearest_node(home),
                    position: None,
                }
            })
            .server
    }

    pub fn binding(&self, id: u64) -> Option<&Binding> {
        self.bindings.get(&id)
    }

    /// `from` reports `position` for `id` to the server. One-way.
    pub fn update(&mut self, router: &Gpsr, id: u64, from: usize, position: Point) -> Exchange {
        let server = self.bind(router.topology(), id);
        let route = router.route_to_node(from, server);
        if route.delivered() {
            self.bindings.get_mut(&id).expect("bound above").position = Some(position);
        }
        Exchange {
            transmissions: route.hops() as u64,
            ok: route.delivered(),
        }
    }

    /// Round trip from `src` to the server of `id` and back. Returns the
    /// stored position when both legs arrive and the server knows one.
    pub fn query(&mut self, router: &Gpsr, src: usize, id: u64) -> (Option<Point>, Exchange) {
        let server = self.bind(router.topology(), id);
        let there = router.route_to_node(src, server);
        if !there.delivered() {
            return (
                None,
                Exchange {
                    transmissions: there.hops() as u64,
                    ok: false,
                },
            );
        }
        let back = router.route_to_node(server, src);
        let ok = back.delivered();
        let position = if ok {
            self.bindings[&id].position
        } else {
            None
        };
        (
            position,
            Exchange {
                transmissions: (there.hops() + back.hops()) as u64,
                ok: ok && position.is_some(),
            },
        )
    }
}
