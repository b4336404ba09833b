//! Min-hop path enumeration and activated-link-reusing flow allocation.
//!
//! Only satellites forward traffic: a user node may appear as a path
//! endpoint but never as an intermediate hop.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sessions::User;
use crate::topology::{FlowDirection, FlowRecord, LinkId, NetworkGraph, NodeId};

/// Default cap on enumerated equal-hop paths.
pub const DEFAULT_PATH_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum FlowError {
    #[error("endpoints must differ")]
    SameEndpoint,
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("no path between the endpoints")]
    NoPath,
    #[error("every min-hop path violates capacity or the ISL budget")]
    NoFeasiblePath,
    #[error("bandwidth must be positive")]
    InvalidBandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCandidate {
    pub links: Vec<LinkId>,
    pub nodes: Vec<NodeId>,
    pub hop_count: usize,
    pub activated_num: usize,
}

/// Hop distance from `src` to every node, expanding only through `src`
/// itself and satellites. Unreached nodes are `None`.
pub fn hop_distances(graph: &NetworkGraph, src: usize) -> Vec<Option<u32>> {
    let mut dist = alloc::vec![None; graph.node_count()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        if v != src && !graph.node(v).is_satellite() {
            continue;
        }
        let d = dist[v].unwrap_or(0);
        for &(n, _) in graph.neighbors(v) {
            if dist[n].is_none() {
                dist[n] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Per-node `(hops, latency_ms)` of the min-hop path from `src` with the
/// lowest propagation latency. Reservations are ignored.
pub fn min_hop_latencies(graph: &NetworkGraph, src: usize) -> Vec<Option<(u32, f64)>> {
    let mut best: Vec<Option<(u32, f64)>> = alloc::vec![None; graph.node_count()];
    best[src] = Some((0, 0.0));
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        if v != src && !graph.node(v).is_satellite() {
            continue;
        }
        let (hops, lat) = best[v].expect("queued nodes are labeled");
        for &(n, link) in graph.neighbors(v) {
            let cand = lat + graph.link(link).latency_ms;
            match &mut best[n] {
                slot @ None => {
                    *slot = Some((hops + 1, cand));
                    queue.push_back(n);
                }
                Some((h, l)) if *h == hops + 1 && cand < *l => *l = cand,
                _ => {}
            }
        }
    }
    best
}

/// All simple paths from `i` to `j` with the minimum hop count, expanded in
/// ascending node order and truncated after `cap` paths.
pub fn min_hop_paths(
    graph: &NetworkGraph,
    i: NodeId,
    j: NodeId,
    cap: usize,
) -> Result<Vec<PathCandidate>, FlowError> {
    if i == j {
        return Err(FlowError::SameEndpoint);
    }
    let src = graph.node_index(i).ok_or(FlowError::UnknownNode(i))?;
    let dst = graph.node_index(j).ok_or(FlowError::UnknownNode(j))?;
    let to_dst = hop_distances(graph, dst);
    if to_dst[src].is_none() {
        return Err(FlowError::NoPath);
    }

    struct Walk<'a> {
        graph: &'a NetworkGraph,
        to_dst: &'a [Option<u32>],
        dst: usize,
        cap: usize,
        nodes: Vec<usize>,
        links: Vec<LinkId>,
        out: Vec<PathCandidate>,
    }

    impl Walk<'_> {
        fn extend(&mut self, v: usize) {
            if self.out.len() >= self.cap {
                return;
            }
            if v == self.dst {
                let links = self.links.clone();
                let activated_num = links
                    .iter()
                    .filter(|l| self.graph.link(**l).activated)
                    .count();
                self.out.push(PathCandidate {
                    hop_count: links.len(),
                    nodes: self.nodes.iter().map(|&n| self.graph.node(n)).collect(),
                    links,
                    activated_num,
                });
                return;
            }
            let want = self.to_dst[v].expect("on a shortest path") - 1;
            for &(n, link) in self.graph.neighbors(v) {
                if self.to_dst[n] != Some(want)
                    || (n != self.dst && !self.graph.node(n).is_satellite())
                {
                    continue;
                }
                self.nodes.push(n);
                self.links.push(link);
                self.extend(n);
                self.nodes.pop();
                self.links.pop();
            }
        }
    }

    let mut walk = Walk {
        graph,
        to_dst: &to_dst,
        dst,
        cap,
        nodes: alloc::vec![src],
        links: Vec::new(),
        out: Vec::new(),
    };
    walk.extend(src);
    Ok(walk.out)
}

/// Reserves `bandwidth` from `i` to `j` on the feasible min-hop path that
/// reuses the most activated links. Ties go to the earliest enumerated path.
/// The graph is only modified on success.
pub fn allocate(
    graph: &mut NetworkGraph,
    i: NodeId,
    j: NodeId,
    bandwidth: f64,
    direction: FlowDirection,
    cap: usize,
) -> Result<FlowRecord, FlowError> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(FlowError::InvalidBandwidth);
    }
    let candidates = min_hop_paths(graph, i, j, cap)?;
    let mut best: Option<&PathCandidate> = None;
    for p in &candidates {
        if graph.check_reserve(&p.links, bandwidth).is_err() {
            continue;
        }
        if best.is_none_or(|b| p.activated_num > b.activated_num) {
            best = Some(p);
        }
    }
    let best = best.ok_or(FlowError::NoFeasiblePath)?;
    graph
        .reserve(&best.links, bandwidth)
        .map_err(|_| FlowError::NoFeasiblePath)?;
    let latency_ms = best.links.iter().map(|l| graph.link(*l).latency_ms).sum();
    Ok(FlowRecord {
        src: i,
        dst: j,
        path: best.links.clone(),
        bandwidth,
        direction,
        latency_ms,
    })
}

/// Traffic a region forwards to another region's relay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterRegionDemand {
    pub src_region: u32,
    pub dst_region: u32,
    pub bandwidth: f64,
}

/// Users served by one relay satellite.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayGroup {
    pub region_id: u32,
    /// `None` when no feasible relay was found; members are left unwired.
    pub relay: Option<NodeId>,
    pub members: Vec<User>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationFailure {
    pub src: NodeId,
    pub dst: NodeId,
    pub direction: FlowDirection,
    pub bandwidth: f64,
    pub error: FlowError,
}

/// Flows and failures for one session in one slot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionWiring {
    pub flows: Vec<FlowRecord>,
    pub failures: Vec<AllocationFailure>,
    /// Relay serving each member whose group had one.
    pub relay_of: BTreeMap<NodeId, NodeId>,
}

/// Aggregate upstream of `src` forwarded to every other region, capped at
/// the ISL capacity.
pub fn inter_region_demands(groups: &[RelayGroup], isl_capacity: f64) -> Vec<InterRegionDemand> {
    let mut out = Vec::new();
    for a in groups {
        let total: f64 = a.members.iter().map(|u| u.up_bw).sum();
        for b in groups {
            if a.region_id != b.region_id {
                out.push(InterRegionDemand {
                    src_region: a.region_id,
                    dst_region: b.region_id,
                    bandwidth: total.min(isl_capacity),
                });
            }
        }
    }
    out
}

/// Wires every member to its relay (upstream then downstream) and every
/// ordered pair of distinct relays. Groups are processed in `region_id`
/// order, members in id order. Regions sharing one relay satellite need no
/// inter-relay flow. Failures are collected and allocation continues.
pub fn wire_session(graph: &mut NetworkGraph, groups: &[RelayGroup], cap: usize) -> SessionWiring {
    let mut groups: Vec<&RelayGroup> = groups.iter().collect();
    groups.sort_by_key(|g| g.region_id);
    let mut wiring = SessionWiring::default();

    let attempt =
        |graph: &mut NetworkGraph, wiring: &mut SessionWiring, src, dst, bw, direction| {
            match allocate(graph, src, dst, bw, direction, cap) {
                Ok(f) => wiring.flows.push(f),
                Err(error) => wiring.failures.push(AllocationFailure {
                    src,
                    dst,
                    direction,
                    bandwidth: bw,
                    error,
                }),
            }
        };

    for g in &groups {
        let Some(relay) = g.relay else { continue };
        let mut members: Vec<&User> = g.members.iter().collect();
        members.sort_by_key(|u| u.id);
        for u in members {
            wiring.relay_of.insert(u.id, relay);
            attempt(
                graph,
                &mut wiring,
                u.id,
                relay,
                u.up_bw,
                FlowDirection::Upstream,
            );
            attempt(
                graph,
                &mut wiring,
                relay,
                u.id,
                u.down_bw,
                FlowDirection::Downstream,
            );
        }
    }

    let owned: Vec<RelayGroup> = groups.iter().map(|g| (*g).clone()).collect();
    let relay_of_region: BTreeMap<u32, Option<NodeId>> =
        owned.iter().map(|g| (g.region_id, g.relay)).collect();
    for d in inter_region_demands(&owned, graph.params().isl_capacity_mbps) {
        let (Some(a), Some(b)) = (
            relay_of_region[&d.src_region],
            relay_of_region[&d.dst_region],
        ) else {
            continue;
        };
        if a == b {
            continue;
        }
        attempt(
            graph,
            &mut wiring,
            a,
            b,
            d.bandwidth,
            FlowDirection::InterRelay,
        );
    }
    wiring
}
