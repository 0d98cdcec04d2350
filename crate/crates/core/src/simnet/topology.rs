use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::Point;
use crate::{Error, Result};

/// A static snapshot of node positions with unit-disk links and their
/// Gabriel-graph planarization.
#[derive(Debug, Clone)]
pub struct Topology {
    positions: Vec<Point>,
    radio_range: f64,
    field_size: f64,
    adjacency: Vec<Vec<usize>>,
    planar: Vec<Vec<usize>>,
}

impl Topology {
    pub fn from_positions(
        positions: Vec<Point>,
        radio_range: f64,
        field_size: f64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("positions", "need at least one node"));
        }
        if !(radio_range > 0.0 && radio_range.is_finite()) {
            return Err(Error::invalid("radio_range", "must be positive"));
        }
        let n = positions.len();
        let r2 = radio_range * radio_range;
        let mut adjacency = vec![Vec::new(); n];
        for u in 0..n {
            for v in u + 1..n {
                if positions[u].dist2(positions[v]) <= r2 {
                    adjacency[u].push(v);
                    adjacency[v].push(u);
                }
            }
        }
        let planar = gabriel(&positions, &adjacency);
        Ok(Self {
            positions,
            radio_range,
            field_size,
            adjacency,
            planar,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, node: usize) -> Point {
        self.positions[node]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn field_size(&self) -> f64 {
        self.field_size
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn planar_neighbors(&self, node: usize) -> &[usize] {
        &self.planar[node]
    }

    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.adjacency.iter().map(Vec::len).sum();
        total as f64 / self.len() as f64
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.adjacency)
    }

    pub fn is_planar_connected(&self) -> bool {
        connected(&self.planar)
    }

    pub fn nearest_node(&self, p: Point) -> usize {
        (0..self.len())
            .min_by(|&a, &b| {
                self.positions[a]
                    .dist2(p)
                    .total_cmp(&self.positions[b].dist2(p))
            })
            .expect("topology is non-empty")
    }

    /// Hop limit of `⌈4·√n⌉`.
    pub fn default_ttl(&self) -> u32 {
        (4.0 * (self.len() as f64).sqrt()).ceil() as u32
    }
}

/// Keeps edge `(u, v)` unless some node `w` lies in the closed disk with
/// diameter `uv`. Boundary witnesses also remove the edge, so cocircular
/// configurations (e.g. square corners) lose their crossing diagonals.
fn gabriel(positions: &[Point], adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut planar = vec![Vec::new(); positions.len()];
    for (u, nbrs) in adjacency.iter().enumerate() {
        for &v in nbrs.iter().filter(|&&v| v > u) {
            let (pu, pv) = (positions[u], positions[v]);
            let duv = pu.dist2(pv);
            // Any witness inside the disk is also a neighbour of u.
            let blocked = nbrs.iter().any(|&w| {
                w != v && pu.dist2(positions[w]) + pv.dist2(positions[w]) <= duv * (1.0 + 1e-12)
            });
            if !blocked {
                planar[u].push(v);
                planar[v].push(u);
            }
        }
    }
    planar
}

fn connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == adj.len()
}

/// Radio range giving `avg_degree` expected neighbours away from the border.
pub fn range_for_degree(n: usize, field_size: f64, avg_degree: f64) -> f64 {
    (avg_degree * field_size * field_size / (PI * n as f64)).sqrt()
}

/// `n` nodes uniformly placed on a `field_size` square. Disconnected results
/// are allowed; check [`Topology::is_connected`].
pub fn build_topology(n: usize, field_size: f64, radio_range: f64, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::invalid(
            "n",
            format!("need at least 2 nodes, got {n}"),
        ));
    }
    if !(field_size > 0.0 && field_size.is_finite()) {
        return Err(Error::invalid("field_size", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| {
            Point::new(
                rng.random::<f64>() * field_size,
                rng.random::<f64>() * field_size,
            )
        })
        .collect();
    let topo = Topology::from_positions(positions, radio_range, field_size)?;
    if !topo.is_connected() {
        log::debug!("topology (n={n}, seed={seed}) is disconnected");
    }
    Ok(topo)
}
