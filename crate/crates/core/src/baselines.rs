//! Comparison schemes.
//!
//! * Single control unit: one satellite per session, chosen from the Top-k
//!   around the whole-session centroid with the same score as regional
//!   selection, every member wired to it.
//! * Terrestrial cloud relays: one ground site per session chosen from
//!   history-ranked candidates, with a fiber latency model.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::constellation::SatelliteState;
use crate::flow::{wire_session, RelayGroup, SessionWiring};
use crate::geo::{great_circle_km, GroundPoint, SPEED_OF_LIGHT_KM_S};
use crate::metrics::LatencyMatrix;
use crate::relay::{
    best_candidate, region_centroid, top_k_candidates, RelayAssignment, SelectionError,
    SelectionParams,
};
use crate::sessions::{Session, User};
use crate::topology::{NetworkGraph, NodeId};
use crate::ConfigError;

/// Picks one relay for the whole session and wires every member to it.
/// The graph is only modified when a relay is found.
pub fn spacertc_select(
    session: &Session,
    graph: &mut NetworkGraph,
    sats: &[SatelliteState],
    params: &SelectionParams,
    slot_index: u32,
    path_cap: usize,
) -> Result<(RelayAssignment, SessionWiring), SelectionError> {
    let centroid = region_centroid(&session.members);
    let candidates = top_k_candidates(&centroid, sats, params.k);
    let (relay, score) = best_candidate(&candidates, &session.members, graph, params.alpha).ok_or(
        SelectionError::NoFeasibleRelay {
            session_id: session.session_id,
            region_id: 0,
        },
    )?;
    let group = RelayGroup {
        region_id: 0,
        relay: Some(relay),
        members: session.members.clone(),
    };
    let wiring = wire_session(graph, &[group], path_cap);
    let assignment = RelayAssignment {
        session_id: session.session_id,
        region_id: 0,
        relay,
        slot_index,
        previous_relay: None,
        handover: true,
        centroid,
        score,
    };
    Ok((assignment, wiring))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViaParams {
    pub k: usize,
    /// Ratio of fiber route length to great-circle distance.
    pub path_stretch: f64,
    /// Signal speed in fiber as a fraction of c.
    pub fiber_speed_factor: f64,
    /// Weight kept by the old history value on each update.
    pub smoothing: f64,
}

impl Default for ViaParams {
    fn default() -> Self {
        Self {
            k: 5,
            path_stretch: 1.3,
            fiber_speed_factor: 0.7,
            smoothing: 0.5,
        }
    }
}

impl ViaParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::Invalid("via k must be at least 1"));
        }
        if !(self.path_stretch >= 1.0)
            || !(self.fiber_speed_factor > 0.0 && self.fiber_speed_factor <= 1.0)
        {
            return Err(ConfigError::Invalid(
                "fiber stretch must be >= 1 and speed factor in (0, 1]",
            ));
        }
        if !(0.0..1.0).contains(&self.smoothing) {
            return Err(ConfigError::Invalid("smoothing must lie in [0, 1)"));
        }
        Ok(())
    }

    /// One-way fiber latency for a great-circle distance (ms).
    pub fn fiber_latency_ms(&self, great_circle_km: f64) -> f64 {
        great_circle_km * self.path_stretch / (self.fiber_speed_factor * SPEED_OF_LIGHT_KM_S)
            * 1000.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudSite {
    pub site_id: u32,
    pub location: GroundPoint,
    /// Smoothed measured mean latency per session (ms).
    #[serde(default)]
    pub history: BTreeMap<u32, f64>,
}

impl CloudSite {
    pub fn from_locations(locations: &[GroundPoint]) -> Vec<CloudSite> {
        locations
            .iter()
            .enumerate()
            .map(|(i, &location)| CloudSite {
                site_id: i as u32,
                location,
                history: BTreeMap::new(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViaSelection {
    pub site_id: u32,
    pub candidates: Vec<u32>,
    pub measured_ms: f64,
    pub matrix: LatencyMatrix,
}

/// Pair latencies through a ground site: fiber from `i` to the site and from
/// the site to `j`. Symmetric, so each entry is the one-way value.
pub fn via_latency_matrix(
    session_id: u32,
    members: &[User],
    site: &GroundPoint,
    params: &ViaParams,
) -> LatencyMatrix {
    let mut sorted: Vec<&User> = members.iter().collect();
    sorted.sort_by_key(|u| u.id);
    let legs: Vec<(NodeId, f64)> = sorted
        .iter()
        .map(|u| {
            (
                u.id,
                params.fiber_latency_ms(great_circle_km(&u.location, site)),
            )
        })
        .collect();
    let mut entries = BTreeMap::new();
    for (k, (i, li)) in legs.iter().enumerate() {
        for (j, lj) in &legs[k + 1..] {
            entries.insert((*i, *j), li + lj);
        }
    }
    LatencyMatrix::from_entries(session_id, entries, 0)
}

fn measured_latency(
    session: &Session,
    site: &GroundPoint,
    params: &ViaParams,
) -> (f64, LatencyMatrix) {
    let m = via_latency_matrix(session.session_id, &session.members, site, params);
    let v = if m.entries.is_empty() {
        let n = session.members.len().max(1) as f64;
        session
            .members
            .iter()
            .map(|u| params.fiber_latency_ms(great_circle_km(&u.location, site)))
            .sum::<f64>()
            / n
    } else {
        m.session_mean
    };
    (v, m)
}

/// Candidate sites are the `k` with the best smoothed history for this
/// session, topped up by proximity to the session centroid. The candidate
/// with the lowest measured mean pair latency is selected, and every
/// candidate's history is updated with its measurement.
///
/// Returns `None` only if `sites` or `session.members` is empty.
pub fn via_select(
    session: &Session,
    sites: &mut [CloudSite],
    params: &ViaParams,
) -> Option<ViaSelection> {
    if sites.is_empty() || session.members.is_empty() {
        return None;
    }
    let sid = session.session_id;
    let centroid = region_centroid(&session.members);

    let mut ranked: Vec<(f64, u32, usize)> = sites
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.history.get(&sid).map(|h| (*h, s.site_id, i)))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut candidates: Vec<usize> = ranked
        .into_iter()
        .take(params.k)
        .map(|(_, _, i)| i)
        .collect();
    if candidates.len() < params.k {
        let mut near: Vec<(f64, u32, usize)> = sites
            .iter()
            .enumerate()
            .filter(|(i, _)| !candidates.contains(i))
            .map(|(i, s)| (great_circle_km(&s.location, &centroid), s.site_id, i))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        candidates.extend(
            near.into_iter()
                .take(params.k - candidates.len())
                .map(|(_, _, i)| i),
        );
    }

    let mut best: Option<(usize, f64, LatencyMatrix)> = None;
    for &i in &candidates {
        let (v, m) = measured_latency(session, &sites[i].location, params);
        let h = sites[i].history.entry(sid).or_insert(v);
        *h = params.smoothing * *h + (1.0 - params.smoothing) * v;
        let better = match &best {
            None => true,
            Some((b, bv, _)) => v < *bv || (v == *bv && sites[i].site_id < sites[*b].site_id),
        };
        if better {
            best = Some((i, v, m));
        }
    }
    let (i, measured_ms, matrix) = best?;
    Some(ViaSelection {
        site_id: sites[i].site_id,
        candidates: candidates.iter().map(|&c| sites[c].site_id).collect(),
        measured_ms,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(i: u32, lat: f64, lon: f64) -> User {
        User {
            id: NodeId::user(i),
            location: GroundPoint::new(lat, lon),
            up_bw: 3.0,
            down_bw: 2.0,
            join_time: 0.0,
            session_id: 1,
        }
    }

    #[test]
    fn fiber_thousand_km() {
        let v = ViaParams::default().fiber_latency_ms(1000.0);
        assert!((v - 6.195).abs() < 1e-3, "{v}");
    }

    #[test]
    fn one_site() {
        let mut sites = CloudSite::from_locations(&[GroundPoint::new(50.0, 8.0)]);
        let s = Session {
            session_id: 1,
            members: alloc::vec![user(0, 40.0, -74.0), user(1, 35.0, 139.0)],
        };
        assert_eq!(
            via_select(&s, &mut sites, &ViaParams::default())
                .unwrap()
                .site_id,
            0
        );
        assert!(via_select(&s, &mut [], &ViaParams::default()).is_none());
    }

    #[test]
    fn history_fixed_point() {
        let mut sites = CloudSite::from_locations(&crate::population::default_cloud_sites());
        let s = Session {
            session_id: 1,
            members: alloc::vec![user(0, 48.8, 2.3), user(1, 52.5, 13.4), user(2, 41.9, 12.5)],
        };
        let first = via_select(&s, &mut sites, &ViaParams::default()).unwrap();
        let snapshot: Vec<_> = sites.iter().map(|s| s.history.get(&1).copied()).collect();
        for _ in 0..5 {
            let again = via_select(&s, &mut sites, &ViaParams::default()).unwrap();
            assert_eq!(again.site_id, first.site_id);
            assert_eq!(again.candidates, first.candidates);
        }
        let after: Vec<_> = sites.iter().map(|s| s.history.get(&1).copied()).collect();
        assert_eq!(snapshot, after);
    }
}
