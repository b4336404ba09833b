//! Per-slot network graph over satellites and users.
//!
//! Nodes are stored densely in ascending [`NodeId`] order (satellites first),
//! so iterating neighbor lists in index order is iterating them in id order.
//! Links are undirected; both directions draw on one residual pool.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::constellation::{
    isl_visible, propagation_latency_ms, usl_visible, SatelliteState, ShellConfig,
};
use crate::geo::{GroundPoint, Vec3};
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Satellite,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: u32,
}

impl NodeId {
    pub const fn sat(index: u32) -> Self {
        Self {
            kind: NodeKind::Satellite,
            index,
        }
    }

    pub const fn user(index: u32) -> Self {
        Self {
            kind: NodeKind::User,
            index,
        }
    }

    pub fn is_satellite(&self) -> bool {
        self.kind == NodeKind::Satellite
    }

    pub fn is_user(&self) -> bool {
        self.kind == NodeKind::User
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Satellite => write!(f, "s{}", self.index),
            NodeKind::User => write!(f, "u{}", self.index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkKind {
    Isl,
    Usl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId(pub u32);

/// State of one undirected link. `a < b` always holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
    pub latency_ms: f64,
    pub capacity: f64,
    pub remaining: f64,
    pub activated: bool,
}

impl LinkState {
    pub fn other(&self, n: NodeId) -> Option<NodeId> {
        if n == self.a {
            Some(self.b)
        } else if n == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphParams {
    /// Maximum activated ISLs per satellite.
    pub lambda: u32,
    pub isl_capacity_mbps: f64,
    pub usl_capacity_mbps: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            lambda: 4,
            isl_capacity_mbps: 10_000.0,
            usl_capacity_mbps: 5.0,
        }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lambda == 0 {
            return Err(ConfigError::Invalid("lambda must be at least 1"));
        }
        if !(self.isl_capacity_mbps > 0.0 && self.usl_capacity_mbps > 0.0) {
            return Err(ConfigError::Invalid("link capacities must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowDirection {
    Upstream,
    Downstream,
    InterRelay,
}

/// An allocated path between two endpoints carrying `bandwidth` Mbps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub src: NodeId,
    pub dst: NodeId,
    pub path: Vec<LinkId>,
    pub bandwidth: f64,
    pub direction: FlowDirection,
    /// Sum of link latencies along `path` when allocated.
    pub latency_ms: f64,
}

impl FlowRecord {
    /// Node sequence from `src` to `dst`, or `None` if the links do not chain.
    pub fn nodes(&self, graph: &NetworkGraph) -> Option<Vec<NodeId>> {
        let mut out = Vec::with_capacity(self.path.len() + 1);
        let mut cur = self.src;
        out.push(cur);
        for &l in &self.path {
            cur = graph.try_link(l)?.other(cur)?;
            out.push(cur);
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("link {0:?} lacks residual bandwidth")]
    CapacityExceeded(LinkId),
    #[error("activating the path would exceed the ISL budget of {0}")]
    IslBudgetExceeded(NodeId),
    #[error("link {0:?} is not part of this graph")]
    UnknownLink(LinkId),
}

#[derive(Debug, Clone)]
pub struct NetworkGraph {
    params: GraphParams,
    nodes: Vec<NodeId>,
    positions: Vec<Vec3>,
    index: BTreeMap<NodeId, usize>,
    adjacency: Vec<Vec<(usize, LinkId)>>,
    links: Vec<LinkState>,
    pair_index: BTreeMap<(NodeId, NodeId), LinkId>,
    /// Activated-ISL count per satellite, indexed like `nodes`.
    isl_active: Vec<u32>,
}

impl NetworkGraph {
    /// Empty graph over the given nodes (sorted and deduplicated by id).
    pub fn with_nodes(mut nodes: Vec<(NodeId, Vec3)>, params: GraphParams) -> Self {
        nodes.sort_by_key(|(id, _)| *id);
        nodes.dedup_by_key(|(id, _)| *id);
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (*id, i))
            .collect();
        let n = nodes.len();
        Self {
            params,
            positions: nodes.iter().map(|(_, p)| *p).collect(),
            nodes: nodes.into_iter().map(|(id, _)| id).collect(),
            index,
            adjacency: alloc::vec![Vec::new(); n],
            links: Vec::new(),
            pair_index: BTreeMap::new(),
            isl_active: alloc::vec![0; n],
        }
    }

    /// Adds an undirected link with full capacity and latency from the
    /// endpoint positions. Returns the existing id if the pair is linked.
    ///
    /// Panics if either endpoint is not a node or `a == b`.
    pub fn add_link(&mut self, a: NodeId, b: NodeId, kind: LinkKind) -> LinkId {
        assert_ne!(a, b, "self links are not allowed");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if let Some(&id) = self.pair_index.get(&(a, b)) {
            return id;
        }
        let (ia, ib) = (self.index[&a], self.index[&b]);
        let capacity = match kind {
            LinkKind::Isl => self.params.isl_capacity_mbps,
            LinkKind::Usl => self.params.usl_capacity_mbps,
        };
        let id = LinkId(self.links.len() as u32);
        self.links.push(LinkState {
            a,
            b,
            kind,
            latency_ms: propagation_latency_ms(self.positions[ia], self.positions[ib]),
            capacity,
            remaining: capacity,
            activated: false,
        });
        self.pair_index.insert((a, b), id);
        for (from, to) in [(ia, ib), (ib, ia)] {
            let adj = &mut self.adjacency[from];
            let pos = adj.partition_point(|&(n, _)| n < to);
            adj.insert(pos, (to, id));
        }
        id
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, idx: usize) -> NodeId {
        self.nodes[idx]
    }

    pub fn position(&self, id: NodeId) -> Option<Vec3> {
        self.node_index(id).map(|i| self.positions[i])
    }

    /// Neighbors of the node at dense index `idx`, ascending by id.
    pub fn neighbors(&self, idx: usize) -> &[(usize, LinkId)] {
        &self.adjacency[idx]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.node_index(id).map_or(0, |i| self.adjacency[i].len())
    }

    pub fn links(&self) -> &[LinkState] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &LinkState {
        &self.links[id.0 as usize]
    }

    pub fn try_link(&self, id: LinkId) -> Option<&LinkState> {
        self.links.get(id.0 as usize)
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.pair_index.get(&key).copied()
    }

    /// Number of activated ISLs at a satellite.
    pub fn active_isls(&self, sat: NodeId) -> u32 {
        self.node_index(sat).map_or(0, |i| self.isl_active[i])
    }

    /// Checks whether `bandwidth` can be reserved along `path` without
    /// changing anything.
    pub fn check_reserve(&self, path: &[LinkId], bandwidth: f64) -> Result<(), TopologyError> {
        let mut extra: BTreeMap<usize, u32> = BTreeMap::new();
        for &id in path {
            let link = self.try_link(id).ok_or(TopologyError::UnknownLink(id))?;
            if link.remaining < bandwidth {
                return Err(TopologyError::CapacityExceeded(id));
            }
            if link.kind == LinkKind::Isl && !link.activated {
                for end in [link.a, link.b] {
                    let i = self.index[&end];
                    let count = extra.entry(i).or_insert(0);
                    *count += 1;
                    if self.isl_active[i] + *count > self.params.lambda {
                        return Err(TopologyError::IslBudgetExceeded(end));
                    }
                }
            }
        }
        Ok(())
    }

    /// Activates every link on `path` and draws `bandwidth` from each.
    /// On error nothing is modified.
    pub fn reserve(&mut self, path: &[LinkId], bandwidth: f64) -> Result<(), TopologyError> {
        self.check_reserve(path, bandwidth)?;
        for &id in path {
            let link = &mut self.links[id.0 as usize];
            if !link.activated {
                link.activated = true;
                if link.kind == LinkKind::Isl {
                    let (a, b) = (link.a, link.b);
                    self.isl_active[self.index[&a]] += 1;
                    self.isl_active[self.index[&b]] += 1;
                }
            }
            let link = &mut self.links[id.0 as usize];
            link.remaining = (link.remaining - bandwidth).max(0.0);
        }
        Ok(())
    }

    /// Deactivates all links and restores full capacity.
    pub fn clear_reservations(&mut self) {
        for link in &mut self.links {
            link.activated = false;
            link.remaining = link.capacity;
        }
        self.isl_active.iter_mut().for_each(|c| *c = 0);
    }

    /// Plain-text listing: one `node` line per node with its neighbors, then
    /// one `link` line per link with its ledger state.
    pub fn write_dump<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        writeln!(
            w,
            "# nodes={} links={} lambda={}",
            self.nodes.len(),
            self.links.len(),
            self.params.lambda
        )?;
        for (i, id) in self.nodes.iter().enumerate() {
            write!(w, "node {id} isl_active={} adj=", self.isl_active[i])?;
            for (k, (n, _)) in self.adjacency[i].iter().enumerate() {
                if k > 0 {
                    w.write_char(',')?;
                }
                write!(w, "{}", self.nodes[*n])?;
            }
            w.write_char('\n')?;
        }
        for (i, l) in self.links.iter().enumerate() {
            writeln!(
                w,
                "link {i} {} {} {:?} latency_ms={:.6} capacity={} remaining={} activated={}",
                l.a, l.b, l.kind, l.latency_ms, l.capacity, l.remaining, l.activated as u8
            )?;
        }
        Ok(())
    }
}

/// Builds the slot graph: satellites, users, +Grid ISLs that clear the Earth
/// and USLs above the elevation mask. All links start deactivated.
pub fn build_graph(
    sats: &[SatelliteState],
    users: &[(NodeId, GroundPoint)],
    params: &GraphParams,
    shell: &ShellConfig,
) -> NetworkGraph {
    let nodes = sats
        .iter()
        .map(|s| (NodeId::sat(s.sat_id), s.position))
        .chain(users.iter().map(|(id, p)| (*id, p.to_ecef())))
        .collect();
    let mut g = NetworkGraph::with_nodes(nodes, params.clone());
    let by_id: BTreeMap<u32, &SatelliteState> = sats.iter().map(|s| (s.sat_id, s)).collect();
    for s in sats {
        for nb in shell.grid_neighbors(s.sat_id) {
            if nb <= s.sat_id {
                continue;
            }
            if let Some(other) = by_id.get(&nb) {
                if isl_visible(s, other, shell) {
                    g.add_link(NodeId::sat(s.sat_id), NodeId::sat(nb), LinkKind::Isl);
                }
            }
        }
    }
    for (uid, loc) in users {
        for s in sats {
            if usl_visible(loc, s) {
                g.add_link(*uid, NodeId::sat(s.sat_id), LinkKind::Usl);
            }
        }
    }
    g
}

/// One broken constraint found by [`audit_constraints`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// More activated ISLs at a satellite than the budget allows.
    IslBudget {
        satellite: NodeId,
        active: u32,
        lambda: u32,
    },
    /// A flow uses a link that does not exist in the slot graph.
    NotVisible { flow: usize, link: LinkId },
    /// A flow uses a link that is not activated.
    NotActivated { flow: usize, link: LinkId },
    /// The flow's links do not form a simple src-to-dst path.
    Conservation { flow: usize },
    /// Total bandwidth of the flows crossing a link exceeds its capacity.
    Capacity {
        link: LinkId,
        reserved: f64,
        capacity: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack for the per-link capacity sum, absorbing float rounding.
const CAPACITY_EPS: f64 = 1e-9;

/// Checks the ISL budget, visibility/activation, flow conservation and
/// capacity constraints. The ISL count is recomputed from link states.
pub fn audit_constraints(graph: &NetworkGraph, flows: &[FlowRecord]) -> ConstraintReport {
    let mut violations = Vec::new();

    let mut isl_count: BTreeMap<NodeId, u32> = BTreeMap::new();
    for l in graph.links() {
        if l.kind == LinkKind::Isl && l.activated {
            *isl_count.entry(l.a).or_default() += 1;
            *isl_count.entry(l.b).or_default() += 1;
        }
    }
    let lambda = graph.params().lambda;
    for (&satellite, &active) in &isl_count {
        if active > lambda {
            violations.push(Violation::IslBudget {
                satellite,
                active,
                lambda,
            });
        }
    }

    let mut reserved: BTreeMap<LinkId, f64> = BTreeMap::new();
    for (fi, flow) in flows.iter().enumerate() {
        let mut broken = false;
        let mut cur = flow.src;
        let mut seen = alloc::vec![cur];
        for &id in &flow.path {
            let Some(link) = graph.try_link(id) else {
                violations.push(Violation::NotVisible { flow: fi, link: id });
                broken = true;
                continue;
            };
            if !link.activated {
                violations.push(Violation::NotActivated { flow: fi, link: id });
            }
            *reserved.entry(id).or_default() += flow.bandwidth;
            if broken {
                continue;
            }
            match link.other(cur) {
                Some(next) if !seen.contains(&next) => {
                    seen.push(next);
                    cur = next;
                }
                _ => broken = true,
            }
        }
        if broken || cur != flow.dst || flow.src == flow.dst {
            violations.push(Violation::Conservation { flow: fi });
        }
    }

    for (link, total) in reserved {
        let capacity = graph.link(link).capacity;
        if total > capacity * (1.0 + CAPACITY_EPS) {
            violations.push(Violation::Capacity {
                link,
                reserved: total,
                capacity,
            });
        }
    }

    ConstraintReport { violations }
}
