use std::cmp::Ordering;

use serde::Serialize;

use super::grouping::{enumerate_groupings, mean_latency, mean_traffic, Grouping};
use super::success::{CdfTable, SuccessModel};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontPoint {
    pub grouping: Grouping,
    pub latency: f64,
    pub traffic: f64,
}

impl FrontPoint {
    /// Weakly better on both axes and strictly better on one.
    pub fn dominates(&self, other: &FrontPoint) -> bool {
        self.latency <= other.latency
            && self.traffic <= other.traffic
            && (self.latency < other.latency || self.traffic < other.traffic)
    }
}

fn tie_order(a: &Grouping, b: &Grouping) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.sizes().cmp(b.sizes()))
}

/// Non-dominated groupings of `k` under (min L̄, min T̄), sorted by L̄.
///
/// Points with identical coordinates are all kept, ordered by group count
/// and then lexicographically by group sizes.
pub fn pareto_front(k: u32, model: &impl SuccessModel) -> Result<Vec<FrontPoint>> {
    let groupings = enumerate_groupings(k)?;
    let table = CdfTable::new(model, k);
    let mut points: Vec<FrontPoint> = groupings
        .into_iter()
        .map(|g| FrontPoint {
            latency: mean_latency(&g, &table),
            traffic: mean_traffic(&g, &table),
            grouping: g,
        })
        .collect();
    points.sort_by(|a, b| {
        a.latency
            .total_cmp(&b.latency)
            .then(a.traffic.total_cmp(&b.traffic))
            .then_with(|| tie_order(&a.grouping, &b.grouping))
    });

    // Sweep by latency; within equal latency only the minimal traffic can
    // survive, and it must beat every point of strictly smaller latency.
    let mut front = Vec::new();
    let mut best_traffic = f64::INFINITY;
    let mut i = 0;
    while i < points.len() {
        let latency = points[i].latency;
        let group_min = points[i].traffic;
        let mut j = i;
        while j < points.len() && points[j].latency == latency {
            if points[j].traffic == group_min && group_min < best_traffic {
                front.push(points[j].clone());
            }
            j += 1;
        }
        best_traffic = best_traffic.min(group_min);
        i = j;
    }
    Ok(front)
}

/// Front point farthest below the chord joining the front's extremes, with
/// both axes rescaled to `[0, 1]`. Ties go to the lower latency.
pub fn knee_point(front: &[FrontPoint]) -> Option<&FrontPoint> {
    let first = front.first()?;
    let last = front.last()?;
    let span_l = last.latency - first.latency;
    let span_t = first.traffic - last.traffic;
    if span_l <= 0.0 || span_t <= 0.0 {
        return Some(first);
    }
    let score =
        |p: &FrontPoint| (p.latency - first.latency) / span_l + (p.traffic - last.traffic) / span_t;
    front
        .iter()
        .fold(None::<&FrontPoint>, |best, p| match best {
            Some(b) if score(b) <= score(p) => Some(b),
            _ => Some(p),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::FirstOrderModel;

    #[test]
    fn single_location() {
        let front = pareto_front(1, &FirstOrderModel::default()).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].grouping, Grouping::parallel(1));
        assert_eq!((front[0].latency, front[0].traffic), (1.0, 1.0));
    }

    #[test]
    fn three_locations_all_on_front() {
        let front = pareto_front(3, &FirstOrderModel::default()).unwrap();
        let sizes: Vec<_> = front.iter().map(|p| p.grouping.sizes().to_vec()).collect();
        assert_eq!(sizes, vec![vec![3], vec![2, 1], vec![1, 2], vec![1, 1, 1]]);
    }

    #[test]
    fn endpoints_present() {
        let m = FirstOrderModel::default();
        let front = pareto_front(8, &m).unwrap();
        assert_eq!(front.first().unwrap().grouping, Grouping::parallel(8));
        let min_t = enumerate_groupings(8)
            .unwrap()
            .iter()
            .map(|g| mean_traffic(g, &m))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(front.last().unwrap().traffic, min_t);
    }

    #[test]
    fn knee_is_interior() {
        let front = pareto_front(5, &FirstOrderModel::default()).unwrap();
        let knee = knee_point(&front).unwrap();
        assert_ne!(knee, front.first().unwrap());
        assert_ne!(knee, front.last().unwrap());
        assert!(knee_point(&[]).is_none());
        assert_eq!(knee_point(&front[..1]), front.first());
    }

    struct FoundFirst;
    impl SuccessModel for FoundFirst {
        fn cdf(&self, k: u32) -> f64 {
            if k == 0 {
                0.0
            } else {
                1.0
            }
        }
    }

    #[test]
    fn ties_kept_in_deterministic_order() {
        // The best location always hits, so every grouping that opens with a
        // singleton costs exactly (1, 1).
        let front = pareto_front(3, &FoundFirst).unwrap();
        let sizes: Vec<_> = front.iter().map(|p| p.grouping.sizes().to_vec()).collect();
        assert_eq!(sizes, vec![vec![1, 2], vec![1, 1, 1]]);
        assert!(front.iter().all(|p| p.latency == 1.0 && p.traffic == 1.0));
    }
}
