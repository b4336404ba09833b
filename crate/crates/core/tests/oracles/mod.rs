//! Brute-force reference implementations for tiny instances.
//!
//! Nothing here calls into the routing, scoring or metrics code of the crate.
//! The oracles read only the raw link list of a [`NetworkGraph`] and redo
//! every computation from scratch.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spacemeta_core::constellation::SatelliteState;
use spacemeta_core::geo::GroundPoint;
use spacemeta_core::sessions::User;
use spacemeta_core::topology::{LinkId, LinkKind};
use spacemeta_core::{GraphParams, NetworkGraph, NodeId, Vec3};

pub const MAX_NODES: usize = 12;

/// A path as its node sequence and its link sequence.
pub type NodePath = (Vec<NodeId>, Vec<LinkId>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    InstanceTooLarge(usize),
}

/// Adjacency rebuilt from the link list: `(neighbor, link)` per node id.
fn adjacency(graph: &NetworkGraph) -> Vec<(NodeId, Vec<(NodeId, LinkId)>)> {
    let mut ids: Vec<NodeId> = graph.nodes().to_vec();
    ids.sort();
    let mut adj: Vec<(NodeId, Vec<(NodeId, LinkId)>)> =
        ids.into_iter().map(|n| (n, Vec::new())).collect();
    for (k, l) in graph.links().iter().enumerate() {
        let id = LinkId(k as u32);
        for (from, to) in [(l.a, l.b), (l.b, l.a)] {
            let slot = adj
                .iter_mut()
                .find(|(n, _)| *n == from)
                .expect("endpoint is a node");
            slot.1.push((to, id));
        }
    }
    for (_, v) in &mut adj {
        v.sort();
    }
    adj
}

fn neighbors_of(adj: &[(NodeId, Vec<(NodeId, LinkId)>)], n: NodeId) -> &[(NodeId, LinkId)] {
    adj.iter()
        .find(|(m, _)| *m == n)
        .map(|(_, v)| v.as_slice())
        .unwrap_or(&[])
}

/// Every simple path from `i` to `j` whose interior nodes are satellites.
/// Each path is `(nodes, links)`.
pub fn all_simple_paths(
    graph: &NetworkGraph,
    i: NodeId,
    j: NodeId,
) -> Result<Vec<NodePath>, OracleError> {
    if graph.node_count() > MAX_NODES {
        return Err(OracleError::InstanceTooLarge(graph.node_count()));
    }
    let adj = adjacency(graph);
    let mut out = Vec::new();
    let mut nodes = vec![i];
    let mut links = Vec::new();
    fn dfs(
        adj: &[(NodeId, Vec<(NodeId, LinkId)>)],
        j: NodeId,
        nodes: &mut Vec<NodeId>,
        links: &mut Vec<LinkId>,
        out: &mut Vec<NodePath>,
    ) {
        let here = *nodes.last().unwrap();
        if here == j {
            out.push((nodes.clone(), links.clone()));
            return;
        }
        if nodes.len() > 1 && here.is_user() {
            return;
        }
        for &(n, l) in neighbors_of(adj, here) {
            if nodes.contains(&n) {
                continue;
            }
            nodes.push(n);
            links.push(l);
            dfs(adj, j, nodes, links, out);
            nodes.pop();
            links.pop();
        }
    }
    if i != j {
        dfs(&adj, j, &mut nodes, &mut links, &mut out);
    }
    Ok(out)
}

/// All min-hop simple paths, sorted by their node-id sequence.
pub fn oracle_paths(
    graph: &NetworkGraph,
    i: NodeId,
    j: NodeId,
) -> Result<Vec<NodePath>, OracleError> {
    let all = all_simple_paths(graph, i, j)?;
    let Some(min) = all.iter().map(|(_, l)| l.len()).min() else {
        return Ok(Vec::new());
    };
    let mut keep: Vec<_> = all.into_iter().filter(|(_, l)| l.len() == min).collect();
    keep.sort();
    Ok(keep)
}

fn active_isl_count(graph: &NetworkGraph, sat: NodeId) -> u32 {
    graph
        .links()
        .iter()
        .filter(|l| l.kind == LinkKind::Isl && l.activated && (l.a == sat || l.b == sat))
        .count() as u32
}

/// Whether `bandwidth` fits on every link of `links` and the newly activated
/// ISLs keep each satellite within its budget.
pub fn oracle_feasible(graph: &NetworkGraph, links: &[LinkId], bandwidth: f64) -> bool {
    let lambda = graph.params().lambda;
    let mut fresh: Vec<NodeId> = Vec::new();
    for &l in links {
        let s = &graph.links()[l.0 as usize];
        if s.remaining < bandwidth {
            return false;
        }
        if s.kind == LinkKind::Isl && !s.activated {
            fresh.push(s.a);
            fresh.push(s.b);
        }
    }
    fresh.iter().all(|&n| {
        active_isl_count(graph, n) + fresh.iter().filter(|&&m| m == n).count() as u32 <= lambda
    })
}

/// The path `allocate` should pick: among feasible min-hop paths, most
/// activated links, earliest in node-sequence order on ties.
pub fn oracle_allocation(
    graph: &NetworkGraph,
    i: NodeId,
    j: NodeId,
    bandwidth: f64,
) -> Result<Option<Vec<LinkId>>, OracleError> {
    let paths = oracle_paths(graph, i, j)?;
    let mut best: Option<(usize, Vec<LinkId>)> = None;
    for (_, links) in paths {
        if !oracle_feasible(graph, &links, bandwidth) {
            continue;
        }
        let act = links
            .iter()
            .filter(|l| graph.links()[l.0 as usize].activated)
            .count();
        if best.as_ref().is_none_or(|(b, _)| act > *b) {
            best = Some((act, links));
        }
    }
    Ok(best.map(|(_, l)| l))
}

fn path_latency(graph: &NetworkGraph, links: &[LinkId]) -> f64 {
    links
        .iter()
        .fold(0.0, |acc, l| acc + graph.links()[l.0 as usize].latency_ms)
}

/// Latency of the fastest min-hop path from `from` to `to`, or `None`.
pub fn oracle_probe(
    graph: &NetworkGraph,
    from: NodeId,
    to: NodeId,
) -> Result<Option<f64>, OracleError> {
    let paths = oracle_paths(graph, from, to)?;
    Ok(paths
        .iter()
        .map(|(_, l)| path_latency(graph, l))
        .min_by(f64::total_cmp))
}

/// `mean + alpha * mean absolute deviation` written out term by term.
pub fn oracle_weighted_score(t: &[f64], alpha: f64) -> f64 {
    let mut sum = 0.0;
    for x in t {
        sum += x;
    }
    let avg = sum / t.len() as f64;
    let mut dev = 0.0;
    for x in t {
        dev += if *x > avg { x - avg } else { avg - x };
    }
    avg + alpha * dev / t.len() as f64
}

/// Score of `sat` for `members`; members with no links are ignored.
pub fn oracle_score(
    graph: &NetworkGraph,
    sat: NodeId,
    members: &[User],
    alpha: f64,
) -> Result<f64, OracleError> {
    let mut t = Vec::new();
    for u in members {
        let linked = graph.links().iter().any(|l| l.a == u.id || l.b == u.id);
        if !linked {
            continue;
        }
        match oracle_probe(graph, sat, u.id)? {
            Some(x) => t.push(x),
            None => return Ok(f64::INFINITY),
        }
    }
    if t.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok(oracle_weighted_score(&t, alpha))
}

/// Exhaustive relay search over every satellite in the graph. Returns the
/// winner with its score and the runner-up score.
pub fn oracle_relay(
    graph: &NetworkGraph,
    members: &[User],
    alpha: f64,
) -> Result<Option<(NodeId, f64, f64)>, OracleError> {
    if graph.node_count() > MAX_NODES {
        return Err(OracleError::InstanceTooLarge(graph.node_count()));
    }
    let mut scored: Vec<(f64, NodeId)> = Vec::new();
    for &n in graph.nodes() {
        if n.is_satellite() {
            let s = oracle_score(graph, n, members, alpha)?;
            if s.is_finite() {
                scored.push((s, n));
            }
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored
        .first()
        .map(|&(s, n)| (n, s, scored.get(1).map_or(f64::INFINITY, |r| r.0))))
}

/// Session objective from a full matrix of directed one-way latencies
/// `d[i][j]`: mean over unordered pairs of the direction average, plus
/// `alpha` times the mean absolute gap between each user's mean and that.
pub fn oracle_objective(d: &[Vec<f64>], alpha: f64) -> f64 {
    let n = d.len();
    let sym = |i: usize, j: usize| 0.5 * (d[i][j] + d[j][i]);
    let mut total = 0.0;
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += sym(i, j);
            pairs += 1.0;
        }
    }
    let t_ave = total / pairs;
    let mut gap = 0.0;
    for i in 0..n {
        let t_i: f64 = (0..n).filter(|&j| j != i).map(|j| sym(i, j)).sum::<f64>() / (n - 1) as f64;
        gap += (t_ave - t_i).abs();
    }
    t_ave + alpha * gap / n as f64
}

/// A random graph of at most [`MAX_NODES`] nodes with some links already
/// carrying traffic.
pub struct TinyInstance {
    pub graph: NetworkGraph,
    pub sats: Vec<SatelliteState>,
    pub users: Vec<User>,
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let lat: f64 = rng.gen_range(-60.0..60.0);
    let lon: f64 = rng.gen_range(-30.0..30.0);
    GroundPoint::new(lat, lon).to_ecef()
}

impl TinyInstance {
    pub fn random(seed: u64) -> TinyInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_sats = rng.gen_range(2..=7usize);
        let n_users = rng.gen_range(1..=(MAX_NODES - n_sats).min(5));
        let params = GraphParams {
            lambda: rng.gen_range(1..=4),
            isl_capacity_mbps: rng.gen_range(4.0..12.0f64).round(),
            usl_capacity_mbps: 5.0,
        };
        let sats: Vec<SatelliteState> = (0..n_sats as u32)
            .map(|i| {
                let d = random_direction(&mut rng);
                SatelliteState {
                    sat_id: i,
                    orbit_index: 0,
                    slot_index: i,
                    position: d * (6921.0 / d.norm()),
                    time: 0.0,
                }
            })
            .collect();
        let users: Vec<User> = (0..n_users as u32)
            .map(|i| {
                let lat: f64 = rng.gen_range(-60.0..60.0);
                let lon: f64 = rng.gen_range(-30.0..30.0);
                User {
                    id: NodeId::user(i),
                    location: GroundPoint::new(lat, lon),
                    up_bw: rng.gen_range(2.0..4.0),
                    down_bw: 1.0,
                    join_time: 0.0,
                    session_id: rng.gen_range(0..2),
                }
            })
            .collect();
        let mut nodes: Vec<(NodeId, Vec3)> = sats
            .iter()
            .map(|s| (NodeId::sat(s.sat_id), s.position))
            .collect();
        nodes.extend(users.iter().map(|u| (u.id, u.location.to_ecef())));
        let mut graph = NetworkGraph::with_nodes(nodes, params);
        let p_isl = rng.gen_range(0.3..0.8);
        for a in 0..n_sats as u32 {
            for b in a + 1..n_sats as u32 {
                if rng.gen_bool(p_isl) {
                    graph.add_link(NodeId::sat(a), NodeId::sat(b), LinkKind::Isl);
                }
            }
        }
        for u in &users {
            for s in 0..n_sats as u32 {
                if rng.gen_bool(0.4) {
                    graph.add_link(u.id, NodeId::sat(s), LinkKind::Usl);
                }
            }
        }
        let mut inst = TinyInstance { graph, sats, users };
        inst.preload(&mut rng);
        inst
    }

    /// Reserves a few random oracle paths so that some links are activated
    /// and partially used.
    fn preload(&mut self, rng: &mut ChaCha8Rng) {
        let ids: Vec<NodeId> = self.graph.nodes().to_vec();
        for _ in 0..rng.gen_range(0..4) {
            let a = ids[rng.gen_range(0..ids.len())];
            let b = ids[rng.gen_range(0..ids.len())];
            let Ok(paths) = all_simple_paths(&self.graph, a, b) else {
                continue;
            };
            if paths.is_empty() {
                continue;
            }
            let (_, links) = &paths[rng.gen_range(0..paths.len())];
            let bw = rng.gen_range(0.5..3.0);
            let _ = self.graph.reserve(links, bw);
        }
    }

    pub fn random_pair(&self, salt: u64) -> (NodeId, NodeId) {
        let mut rng = ChaCha8Rng::seed_from_u64(salt);
        let ids = self.graph.nodes();
        let a = ids[rng.gen_range(0..ids.len())];
        let mut b = ids[rng.gen_range(0..ids.len())];
        if a == b {
            b = ids[(ids.iter().position(|&x| x == a).unwrap() + 1) % ids.len()];
        }
        (a, b)
    }
}

/// Outcome of running an equivalence sweep.
#[derive(Debug, Default)]
pub struct Sweep {
    pub instances: usize,
    pub checks: usize,
    pub mismatches: Vec<String>,
}

/// Compares `min_hop_paths` and `allocate` with the oracles on `n` random
/// tiny instances.
pub fn allocation_sweep(n: usize) -> Sweep {
    use spacemeta_core::flow::{allocate, min_hop_paths, FlowError};
    use spacemeta_core::topology::FlowDirection;

    let mut sweep = Sweep::default();
    for seed in 0..n as u64 {
        let inst = TinyInstance::random(seed);
        sweep.instances += 1;
        for salt in 0..6u64 {
            let (i, j) = inst.random_pair(seed * 1000 + salt);
            let bw = [0.5, 2.0, 3.5, 5.0][(salt % 4) as usize];
            let want = oracle_paths(&inst.graph, i, j).expect("tiny");
            let got = min_hop_paths(&inst.graph, i, j, usize::MAX);
            sweep.checks += 1;
            match got {
                Ok(paths) => {
                    let got: Vec<NodePath> =
                        paths.into_iter().map(|p| (p.nodes, p.links)).collect();
                    if got != want {
                        sweep.mismatches.push(format!(
                            "seed {seed}: paths {i}->{j} differ: {got:?} vs {want:?}"
                        ));
                    }
                }
                Err(FlowError::NoPath) if want.is_empty() => {}
                Err(e) => sweep.mismatches.push(format!(
                    "seed {seed}: paths {i}->{j} error {e:?}, oracle has {}",
                    want.len()
                )),
            }

            let want = oracle_allocation(&inst.graph, i, j, bw).expect("tiny");
            let mut g = inst.graph.clone();
            let got = allocate(&mut g, i, j, bw, FlowDirection::Upstream, usize::MAX)
                .ok()
                .map(|f| f.path);
            sweep.checks += 1;
            if got != want {
                sweep.mismatches.push(format!(
                    "seed {seed}: allocate {i}->{j} bw {bw}: {got:?} vs {want:?}"
                ));
            }
            if got.is_none() && g.links() != inst.graph.links() {
                sweep
                    .mismatches
                    .push(format!("seed {seed}: failed allocation modified the graph"));
            }
        }
    }
    sweep
}

/// Compares `select_relays` with `k` equal to the number of satellites against
/// the exhaustive relay search on `n` random tiny instances.
pub fn relay_sweep(n: usize, alpha: f64) -> Sweep {
    use spacemeta_core::region::Region;
    use spacemeta_core::relay::{select_relays, SelectionParams, SlotContext};

    let mut sweep = Sweep::default();
    for seed in 0..n as u64 {
        let inst = TinyInstance::random(10_000 + seed);
        sweep.instances += 1;
        let params = SelectionParams {
            k: inst.sats.len(),
            alpha,
            ..SelectionParams::default()
        };
        let ctx = SlotContext {
            slot_index: 0,
            time_s: 100.0,
            graph: &inst.graph,
            sats: &inst.sats,
            match_radius_km: 1000.0,
        };
        for session in 0..2u32 {
            let members: Vec<User> = inst
                .users
                .iter()
                .filter(|u| u.session_id == session)
                .cloned()
                .collect();
            if members.is_empty() {
                continue;
            }
            sweep.checks += 1;
            let region = Region {
                region_id: 0,
                session_id: session,
                members: members.clone(),
            };
            let got = select_relays(&[region], &ctx, &params, &[]).remove(0);
            let want = oracle_relay(&inst.graph, &members, alpha).expect("tiny");
            match (got, want) {
                (Err(_), None) => {}
                (Ok(a), Some((best, score, runner_up))) => {
                    let near_tie = runner_up - score <= 1e-9;
                    let got_score =
                        oracle_score(&inst.graph, a.relay, &members, alpha).expect("tiny");
                    let ok = if near_tie {
                        (got_score - score).abs() <= 1e-9
                    } else {
                        a.relay == best
                    };
                    if !ok || (a.score - score).abs() > 1e-9 {
                        sweep.mismatches.push(format!(
                            "seed {seed} session {session}: picked {} ({}) vs oracle {best} ({score})",
                            a.relay, a.score
                        ));
                    }
                }
                (got, want) => sweep.mismatches.push(format!(
                    "seed {seed} session {session}: {got:?} vs {want:?}"
                )),
            }
        }
    }
    sweep
}
