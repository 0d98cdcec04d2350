use std::fmt;

use serde::{Deserialize, Serialize};

use super::success::SuccessModel;
use crate::{Error, Result};

/// Largest `k` accepted by [`enumerate_groupings`] (2^19 compositions).
pub const MAX_ENUMERATION_K: u32 = 20;

/// An ordered partition of the `k` best-ranked locations.
///
/// Groups hold consecutive ranks assigned left to right, so every location in
/// an earlier group outranks every location in a later one. Groups are tried
/// one after another; members of a group are tried concurrently.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Grouping(Vec<u32>);

impl Grouping {
    pub fn new(sizes: Vec<u32>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("grouping", "needs at least one group"));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("grouping", "group sizes must be at least 1"));
        }
        Ok(Self(sizes))
    }

    /// Every location tried one at a time.
    pub fn serial(k: u32) -> Self {
        Self(vec![1; k.max(1) as usize])
    }

    /// All `k` locations tried at once.
    pub fn parallel(k: u32) -> Self {
        Self(vec![k.max(1)])
    }

    pub fn sizes(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of locations covered.
    pub fn k(&self) -> u32 {
        self.0.iter().sum()
    }

    /// 1-based rank of the best location in each group.
    pub fn leaders(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().scan(1u32, |next, &size| {
            let leader = *next;
            *next += size;
            Some(leader)
        })
    }

    /// 0-based rank ranges covered by each group.
    pub fn ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.leaders()
            .zip(&self.0)
            .map(|(lead, &size)| (lead as usize - 1)..(lead + size) as usize - 1)
    }
}

impl TryFrom<Vec<u32>> for Grouping {
    type Error = Error;

    fn try_from(sizes: Vec<u32>) -> Result<Self> {
        Grouping::new(sizes)
    }
}

impl From<Grouping> for Vec<u32> {
    fn from(g: Grouping) -> Self {
        g.0
    }
}

/// Formats as `1+2+4+5`.
impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Grouping {
    type Err = Error;

    /// Accepts `1+2+4`, `1,2,4` or `[1, 2, 4]`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let sizes = body
            .split(['+', ','])
            .map(|p| {
                p.trim().parse::<u32>().map_err(|_| {
                    Error::invalid("grouping", format!("bad group size `{p}` in `{s}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Grouping::new(sizes)
    }
}

/// `Φ(g) = 1 − Π(κ(g) − 1)`: the chance every earlier group missed.
pub fn group_try_probability(
    g_index: usize,
    grouping: &Grouping,
    model: &impl SuccessModel,
) -> Result<f64> {
    let leader = grouping.leaders().nth(g_index).ok_or_else(|| {
        Error::invalid(
            "g_index",
            format!("grouping has {} groups, index {g_index}", grouping.len()),
        )
    })?;
    Ok(1.0 - model.cdf(leader - 1))
}

/// Expected number of serial rounds, `Σ_g Φ(g)`.
pub fn mean_latency(grouping: &Grouping, model: &impl SuccessModel) -> f64 {
    grouping
        .leaders()
        .map(|lead| 1.0 - model.cdf(lead - 1))
        .sum()
}

/// Expected number of single-location attempts, `Σ_g |g|·Φ(g)`.
pub fn mean_traffic(grouping: &Grouping, model: &impl SuccessModel) -> f64 {
    grouping
        .leaders()
        .zip(grouping.sizes())
        .map(|(lead, &size)| size as f64 * (1.0 - model.cdf(lead - 1)))
        .sum()
}

/// Every ordered composition of `k` (there are `2^(k−1)`).
///
/// Bit `i` of the mask cuts between rank `i + 1` and rank `i + 2`.
pub fn enumerate_groupings(k: u32) -> Result<Vec<Grouping>> {
    if !(1..=MAX_ENUMERATION_K).contains(&k) {
        return Err(Error::invalid(
            "k",
            format!("must lie in [1, {MAX_ENUMERATION_K}], got {k}"),
        ));
    }
    let cuts = k - 1;
    Ok((0u32..1 << cuts)
        .map(|mask| {
            let mut sizes = Vec::with_capacity(mask.count_ones() as usize + 1);
            let mut run = 1;
            for bit in 0..cuts {
                if mask & (1 << bit) != 0 {
                    sizes.push(run);
                    run = 1;
                } else {
                    run += 1;
                }
            }
            sizes.push(run);
            Grouping(sizes)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::analytic::FirstOrderModel;

    #[test]
    fn three_locations_have_four_groupings() {
        let mut got: Vec<Vec<u32>> = enumerate_groupings(3)
            .unwrap()
            .into_iter()
            .map(Vec::from)
            .collect();
        got.sort();
        assert_eq!(got, vec![vec![1, 1, 1], vec![1, 2], vec![2, 1], vec![3]]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_groupings(1).unwrap(), vec![Grouping::parallel(1)]);
        let twelve = enumerate_groupings(12).unwrap();
        assert_eq!(twelve.len(), 2048);
        assert!(twelve.iter().all(|g| g.k() == 12));
        let unique: HashSet<_> = twelve.iter().collect();
        assert_eq!(unique.len(), 2048);
        assert!(enumerate_groupings(0).is_err());
        assert!(enumerate_groupings(21).is_err());
    }

    #[test]
    fn leaders_and_ranges() {
        let g = Grouping::new(vec![3, 1, 2]).unwrap();
        assert_eq!(g.leaders().collect::<Vec<_>>(), vec![1, 4, 5]);
        assert_eq!(g.ranges().collect::<Vec<_>>(), vec![0..3, 3..4, 4..6]);
    }

    #[test]
    fn try_probabilities() {
        let m = FirstOrderModel::default();
        let serial = Grouping::serial(4);
        assert_eq!(group_try_probability(0, &serial, &m).unwrap(), 1.0);
        let second = group_try_probability(1, &serial, &m).unwrap();
        assert!((second - (1.0 - 0.657)).abs() < 1e-12);
        let g = Grouping::new(vec![3, 2]).unwrap();
        assert_eq!(group_try_probability(1, &g, &m).unwrap(), 1.0 - m.cdf(3));
        assert!(group_try_probability(2, &g, &m).is_err());
    }

    #[test]
    fn latency_and_traffic_identities() {
        let m = FirstOrderModel::default();
        assert_eq!(mean_latency(&Grouping::parallel(7), &m), 1.0);
        assert_eq!(mean_traffic(&Grouping::parallel(7), &m), 7.0);
        assert_eq!(mean_traffic(&Grouping::parallel(1), &m), 1.0);

        let serial: f64 = (1..=5).map(|i| 1.0 - m.cdf(i - 1)).sum();
        assert!((mean_latency(&Grouping::serial(5), &m) - serial).abs() < 1e-15);

        let g = Grouping::new(vec![1, 2]).unwrap();
        let miss1 = 1.0 - 0.657;
        assert!((mean_latency(&g, &m) - (1.0 + miss1)).abs() < 1e-12);
        assert!((mean_traffic(&g, &m) - (1.0 + 2.0 * miss1)).abs() < 1e-12);
    }

    #[test]
    fn parse_and_display() {
        let g: Grouping = "1+2+4".parse().unwrap();
        assert_eq!(g.sizes(), &[1, 2, 4]);
        assert_eq!(g.to_string(), "1+2+4");
        assert_eq!("[1, 2]".parse::<Grouping>().unwrap().sizes(), &[1, 2]);
        assert!("1+0".parse::<Grouping>().is_err());
        assert!("".parse::<Grouping>().is_err());
        assert!(Grouping::new(vec![]).is_err());
    }
}
