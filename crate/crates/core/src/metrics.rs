//! Pairwise latency, the alpha-weighted session objective and distribution
//! statistics.
//!
//! A matrix entry for the unordered pair `(i, j)` is the mean of the two
//! one-way latencies `i -> j` and `j -> i`; averaging the entries therefore
//! equals averaging over all ordered pairs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::topology::{FlowDirection, FlowRecord, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no allocated flow for a leg of {0} -> {1}")]
    MissingFlow(NodeId, NodeId),
    #[error("pair latency needs two distinct users")]
    SameUser,
    #[error("objective needs at least two users with feasible pairs")]
    TooFewUsers,
    #[error("empty sample")]
    EmptySample,
}

/// Leg latencies of one session, indexed for pair lookups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowTable {
    up: BTreeMap<NodeId, f64>,
    down: BTreeMap<NodeId, f64>,
    inter: BTreeMap<(NodeId, NodeId), f64>,
    relay_of: BTreeMap<NodeId, NodeId>,
}

impl FlowTable {
    pub fn new(flows: &[FlowRecord], relay_of: &BTreeMap<NodeId, NodeId>) -> Self {
        let mut t = FlowTable {
            relay_of: relay_of.clone(),
            ..Default::default()
        };
        for f in flows {
            match f.direction {
                FlowDirection::Upstream => {
                    t.up.insert(f.src, f.latency_ms);
                }
                FlowDirection::Downstream => {
                    t.down.insert(f.dst, f.latency_ms);
                }
                FlowDirection::InterRelay => {
                    t.inter.insert((f.src, f.dst), f.latency_ms);
                }
            }
        }
        t
    }

    /// Builds a table from explicit legs; used for terrestrial schemes and tests.
    pub fn from_legs(
        up: BTreeMap<NodeId, f64>,
        down: BTreeMap<NodeId, f64>,
        inter: BTreeMap<(NodeId, NodeId), f64>,
        relay_of: BTreeMap<NodeId, NodeId>,
    ) -> Self {
        Self {
            up,
            down,
            inter,
            relay_of,
        }
    }
}

/// One-way latency `i -> relay(i) -> relay(j) -> j` (ms).
pub fn pair_latency(table: &FlowTable, i: NodeId, j: NodeId) -> Result<f64, MetricsError> {
    if i == j {
        return Err(MetricsError::SameUser);
    }
    let missing = MetricsError::MissingFlow(i, j);
    let (ri, rj) = match (table.relay_of.get(&i), table.relay_of.get(&j)) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(missing),
    };
    let up = table.up.get(&i).ok_or(missing.clone())?;
    let down = table.down.get(&j).ok_or(missing.clone())?;
    let mid = if ri == rj {
        0.0
    } else {
        *table.inter.get(&(ri, rj)).ok_or(missing)?
    };
    Ok(up + mid + down)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyMatrix {
    pub session_id: u32,
    /// Feasible unordered pairs `(i, j)` with `i < j`.
    pub entries: BTreeMap<(NodeId, NodeId), f64>,
    /// Mean entry involving each user, for users with at least one entry.
    pub per_user_mean: BTreeMap<NodeId, f64>,
    /// Mean over entries; `NaN` when there are none.
    pub session_mean: f64,
    pub infeasible_pairs: usize,
}

impl LatencyMatrix {
    pub fn from_entries(
        session_id: u32,
        entries: BTreeMap<(NodeId, NodeId), f64>,
        infeasible_pairs: usize,
    ) -> Self {
        let mut sums: BTreeMap<NodeId, (f64, usize)> = BTreeMap::new();
        for (&(i, j), &v) in &entries {
            for u in [i, j] {
                let e = sums.entry(u).or_default();
                e.0 += v;
                e.1 += 1;
            }
        }
        let per_user_mean = sums
            .into_iter()
            .map(|(u, (s, n))| (u, s / n as f64))
            .collect();
        let session_mean = if entries.is_empty() {
            f64::NAN
        } else {
            entries.values().sum::<f64>() / entries.len() as f64
        };
        Self {
            session_id,
            entries,
            per_user_mean,
            session_mean,
            infeasible_pairs,
        }
    }

    /// Mean absolute deviation of the per-user means around the session mean.
    pub fn dispersion(&self) -> f64 {
        let p = self.per_user_mean.len() as f64;
        self.per_user_mean
            .values()
            .map(|t| (self.session_mean - t).abs())
            .sum::<f64>()
            / p
    }
}

/// Latency matrix of a session's members from its flow table. Pairs missing
/// a leg in either direction are counted as infeasible.
pub fn latency_matrix(session_id: u32, members: &[NodeId], table: &FlowTable) -> LatencyMatrix {
    let mut ids = members.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut entries = BTreeMap::new();
    let mut infeasible = 0;
    for (k, &i) in ids.iter().enumerate() {
        for &j in &ids[k + 1..] {
            match (pair_latency(table, i, j), pair_latency(table, j, i)) {
                (Ok(a), Ok(b)) => {
                    entries.insert((i, j), (a + b) / 2.0);
                }
                _ => infeasible += 1,
            }
        }
    }
    LatencyMatrix::from_entries(session_id, entries, infeasible)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub session_id: u32,
    pub alpha: f64,
    pub value: f64,
}

/// `t_ave + alpha / P * sum_i |t_ave - t_i|` over users with a per-user mean.
pub fn session_objective(
    matrix: &LatencyMatrix,
    alpha: f64,
) -> Result<ObjectiveValue, MetricsError> {
    if matrix.per_user_mean.len() < 2 {
        return Err(MetricsError::TooFewUsers);
    }
    Ok(ObjectiveValue {
        session_id: matrix.session_id,
        alpha,
        value: matrix.session_mean + alpha * matrix.dispersion(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
}

/// Quantile by linear interpolation between order statistics (R type 7).
/// `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn distribution_stats(samples: &[f64]) -> Result<DistributionStats, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let (q1, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75));
    Ok(DistributionStats {
        count: s.len(),
        mean: s.iter().sum::<f64>() / s.len() as f64,
        min: s[0],
        q1,
        median: quantile_sorted(&s, 0.5),
        q3,
        max: s[s.len() - 1],
        iqr: q3 - q1,
    })
}

/// Sorted `(value, cumulative fraction)` pairs.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect()
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = alloc::vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either series is constant.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / libm::sqrt(vx * vy)
    }
}
