//! Ingress relay selection: Top-k candidates around each region's centroid,
//! scored by mean latency plus an alpha-weighted mean absolute deviation,
//! with a distance/new-attendee handover rule across slots.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::constellation::SatelliteState;
use crate::flow::min_hop_latencies;
use crate::geo::{great_circle_km, GroundPoint, Vec3};
use crate::region::Region;
use crate::sessions::User;
use crate::topology::{NetworkGraph, NodeId};
use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionParams {
    pub k: usize,
    /// Handover distance threshold (km).
    pub delta_km: f64,
    pub alpha: f64,
    pub slot_duration_s: f64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            k: 5,
            delta_km: 1000.0,
            alpha: 5.0,
            slot_duration_s: 15.0,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::Invalid("k must be at least 1"));
        }
        if !(self.delta_km > 0.0) {
            return Err(ConfigError::Invalid("delta must be positive"));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(ConfigError::Invalid(
                "alpha must be finite and non-negative",
            ));
        }
        if !(self.slot_duration_s > 0.0) {
            return Err(ConfigError::Invalid("slot duration must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayAssignment {
    pub session_id: u32,
    pub region_id: u32,
    pub relay: NodeId,
    pub slot_index: u32,
    pub previous_relay: Option<NodeId>,
    pub handover: bool,
    /// Centroid of the region this slot; used to match regions across slots.
    pub centroid: GroundPoint,
    /// Score of `relay` for the current members (ms).
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
pub enum SelectionError {
    #[error("session {session_id} region {region_id}: no candidate relay reaches the region")]
    NoFeasibleRelay { session_id: u32, region_id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("member positions cancel out; centroid undefined")]
pub struct AntipodalDegenerate;

/// Normalized mean of the members' unit vectors, projected to the surface.
pub fn try_centroid(members: &[User]) -> Result<GroundPoint, AntipodalDegenerate> {
    if let [only] = members {
        return Ok(GroundPoint {
            altitude: 0.0,
            ..only.location
        });
    }
    let sum = members.iter().fold(Vec3::ZERO, |acc, u| {
        acc + GroundPoint {
            altitude: 0.0,
            ..u.location
        }
        .to_ecef()
        .normalized()
    });
    let mean = sum * (1.0 / members.len().max(1) as f64);
    if mean.norm() < 1e-9 {
        return Err(AntipodalDegenerate);
    }
    Ok(GroundPoint::from_direction(mean))
}

/// [`try_centroid`], falling back to the first member's location.
/// `members` must be nonempty.
pub fn region_centroid(members: &[User]) -> GroundPoint {
    try_centroid(members).unwrap_or_else(|_| GroundPoint {
        altitude: 0.0,
        ..members[0].location
    })
}

/// The `k` satellites nearest (straight-line) to `centroid`, nearest first,
/// ties by ascending id.
pub fn top_k_candidates(centroid: &GroundPoint, sats: &[SatelliteState], k: usize) -> Vec<NodeId> {
    let c = centroid.to_ecef();
    let mut ranked: Vec<(f64, u32)> = sats
        .iter()
        .map(|s| (s.position.distance(c), s.sat_id))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked
        .into_iter()
        .take(k)
        .map(|(_, id)| NodeId::sat(id))
        .collect()
}

/// `mean(t) + alpha * mean(|t - mean(t)|)` for a nonempty sample.
pub fn weighted_dispersion_score(latencies: &[f64], alpha: f64) -> f64 {
    let n = latencies.len() as f64;
    let mean = latencies.iter().sum::<f64>() / n;
    let mad = latencies.iter().map(|t| (t - mean).abs()).sum::<f64>() / n;
    mean + alpha * mad
}

/// Score of candidate relay `cu` for `members`: per member, the lowest-latency
/// min-hop path latency to `cu`, combined by [`weighted_dispersion_score`].
///
/// Members with no link at all this slot are left out; they cannot be served
/// by any candidate. Returns `f64::INFINITY` if some other member cannot reach
/// `cu`, or if no member is connected.
pub fn score_candidate(cu: NodeId, members: &[User], graph: &NetworkGraph, alpha: f64) -> f64 {
    let Some(src) = graph.node_index(cu) else {
        return f64::INFINITY;
    };
    let tree = min_hop_latencies(graph, src);
    score_from_tree(&tree, members, graph, alpha)
}

fn score_from_tree(
    tree: &[Option<(u32, f64)>],
    members: &[User],
    graph: &NetworkGraph,
    alpha: f64,
) -> f64 {
    let mut lat = Vec::with_capacity(members.len());
    for u in members {
        let Some(idx) = graph.node_index(u.id) else {
            continue;
        };
        if graph.neighbors(idx).is_empty() {
            continue;
        }
        match tree[idx] {
            Some((_, t)) => lat.push(t),
            None => return f64::INFINITY,
        }
    }
    if lat.is_empty() {
        return f64::INFINITY;
    }
    weighted_dispersion_score(&lat, alpha)
}

/// Lowest-scoring candidate, ties by ascending id. `None` if all are infinite.
pub fn best_candidate(
    candidates: &[NodeId],
    members: &[User],
    graph: &NetworkGraph,
    alpha: f64,
) -> Option<(NodeId, f64)> {
    let mut best: Option<(NodeId, f64)> = None;
    for &cu in candidates {
        let s = score_candidate(cu, members, graph, alpha);
        if !s.is_finite() {
            continue;
        }
        best = match best {
            Some((b, bs)) if bs < s || (bs == s && b < cu) => Some((b, bs)),
            _ => Some((cu, s)),
        };
    }
    best
}

/// Per-slot inputs that do not depend on the region.
#[derive(Debug, Clone, Copy)]
pub struct SlotContext<'a> {
    pub slot_index: u32,
    /// Simulation time at the start of the slot (s).
    pub time_s: f64,
    pub graph: &'a NetworkGraph,
    pub sats: &'a [SatelliteState],
    /// Matching radius for carrying a region's relay over from the last slot.
    pub match_radius_km: f64,
}

fn sat_position(sats: &[SatelliteState], id: NodeId) -> Option<Vec3> {
    let s = sats.get(id.index as usize).filter(|s| s.sat_id == id.index);
    s.or_else(|| sats.iter().find(|s| s.sat_id == id.index))
        .map(|s| s.position)
}

/// Chooses a relay for every region of one session. `regions` must all
/// belong to one session; `prev` may contain assignments of any session.
///
/// Each current region is matched (one-to-one, in region order) to the
/// unclaimed previous assignment of the same session whose centroid is
/// nearest, if within `match_radius_km`. A matched region keeps its previous
/// relay when that relay still reaches the region, lies closer than `delta`
/// to the new ideal, and nobody joined during the last slot.
pub fn select_relays(
    regions: &[Region],
    ctx: &SlotContext<'_>,
    params: &SelectionParams,
    prev: &[RelayAssignment],
) -> Vec<Result<RelayAssignment, SelectionError>> {
    let mut ordered: Vec<&Region> = regions.iter().collect();
    ordered.sort_by_key(|r| r.region_id);
    let mut claimed = alloc::vec![false; prev.len()];
    let joined_after = ctx.time_s - params.slot_duration_s;

    ordered
        .into_iter()
        .map(|region| {
            let centroid = region_centroid(&region.members);
            let matched = prev
                .iter()
                .enumerate()
                .filter(|(i, p)| !claimed[*i] && p.session_id == region.session_id)
                .map(|(i, p)| (i, great_circle_km(&p.centroid, &centroid)))
                .filter(|(_, d)| *d <= ctx.match_radius_km)
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i);
            if let Some(i) = matched {
                claimed[i] = true;
            }
            let previous = matched.map(|i| &prev[i]);

            let candidates = top_k_candidates(&centroid, ctx.sats, params.k);
            let no_relay = SelectionError::NoFeasibleRelay {
                session_id: region.session_id,
                region_id: region.region_id,
            };
            let (ideal, ideal_score) =
                best_candidate(&candidates, &region.members, ctx.graph, params.alpha)
                    .ok_or(no_relay)?;

            let new_attendee = region.members.iter().any(|u| u.join_time > joined_after);
            let kept = previous.and_then(|p| {
                if new_attendee {
                    return None;
                }
                let drift =
                    sat_position(ctx.sats, p.relay)?.distance(sat_position(ctx.sats, ideal)?);
                if drift >= params.delta_km {
                    return None;
                }
                let score = score_candidate(p.relay, &region.members, ctx.graph, params.alpha);
                score.is_finite().then_some((p.relay, score))
            });

            let (relay, score, handover) = match kept {
                Some((r, s)) => (r, s, false),
                None => (ideal, ideal_score, true),
            };
            Ok(RelayAssignment {
                session_id: region.session_id,
                region_id: region.region_id,
                relay,
                slot_index: ctx.slot_index,
                previous_relay: previous.map(|p| p.relay),
                handover,
                centroid,
                score,
            })
        })
        .collect()
}
