//! The per-seed slot loop: propagate, build the slot graph, divide regions,
//! pick relays (or run a comparison scheme), wire flows, audit, measure.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spacemeta_core::baselines::{spacertc_select, via_select, CloudSite};
use spacemeta_core::flow::{wire_session, AllocationFailure, RelayGroup, SessionWiring};
use spacemeta_core::metrics::{
    distribution_stats, latency_matrix, session_objective, DistributionStats, FlowTable,
    LatencyMatrix,
};
use spacemeta_core::population::{default_cloud_sites, PopulationModel};
use spacemeta_core::region::divide;
use spacemeta_core::relay::{select_relays, RelayAssignment, SelectionError, SlotContext};
use spacemeta_core::sessions::{generate_users, roster_at, Session};
use spacemeta_core::topology::{
    audit_constraints, build_graph, FlowDirection, FlowRecord, NetworkGraph, Violation,
};
use spacemeta_core::{propagate, NodeId};

use crate::scenario::{Scenario, Scheme};
use crate::HarnessError;

/// One measured unordered user pair in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub slot: u32,
    pub session: u32,
    pub user_i: u32,
    pub user_j: u32,
    pub latency_ms: f64,
}

impl PairSample {
    pub fn key(&self) -> (u32, u32, u32, u32) {
        (self.slot, self.session, self.user_i, self.user_j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverRecord {
    pub slot: u32,
    pub session: u32,
    pub region: u32,
    pub relay: String,
    pub previous_relay: Option<String>,
    pub handover: bool,
    pub score_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub slot: u32,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureRecord {
    NoFeasibleRelay {
        slot: u32,
        session: u32,
        region: u32,
    },
    Allocation {
        slot: u32,
        session: u32,
        failure: AllocationFailure,
    },
}

/// Per-session objective terms for one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSlotMetric {
    pub slot: u32,
    pub session: u32,
    pub users: usize,
    pub mean_ms: f64,
    pub dispersion_ms: f64,
    pub objective_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub slot: u32,
    pub session: u32,
    pub direction: FlowDirection,
    pub src: String,
    pub dst: String,
    pub bandwidth_mbps: f64,
    pub latency_ms: f64,
    pub path: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dump_flows: bool,
    pub dump_graph_slots: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub scheme: Scheme,
    pub seed: u64,
    pub slots: u32,
    pub pair_samples: usize,
    pub stats: Option<DistributionStats>,
    pub infeasible_pairs: usize,
    pub allocation_failures: usize,
    pub relay_failures: usize,
    pub handovers: usize,
    pub audit_violations: usize,
    pub mean_dispersion_ms: Option<f64>,
    pub mean_objective_ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub scheme: Scheme,
    pub seed: u64,
    pub slots: u32,
    pub pairs: Vec<PairSample>,
    pub infeasible_pairs: usize,
    pub handovers: Vec<HandoverRecord>,
    pub audits: Vec<AuditRecord>,
    pub failures: Vec<FailureRecord>,
    pub session_metrics: Vec<SessionSlotMetric>,
    pub flows: Vec<FlowRow>,
    pub graph_dumps: Vec<(u32, String)>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl SeedRun {
    pub fn latencies(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.latency_ms).collect()
    }

    pub fn mean_dispersion(&self) -> Option<f64> {
        mean(self.session_metrics.iter().map(|m| m.dispersion_ms))
    }

    pub fn summary(&self) -> SeedSummary {
        SeedSummary {
            scheme: self.scheme,
            seed: self.seed,
            slots: self.slots,
            pair_samples: self.pairs.len(),
            stats: distribution_stats(&self.latencies()).ok(),
            infeasible_pairs: self.infeasible_pairs,
            allocation_failures: self
                .failures
                .iter()
                .filter(|f| matches!(f, FailureRecord::Allocation { .. }))
                .count(),
            relay_failures: self
                .failures
                .iter()
                .filter(|f| matches!(f, FailureRecord::NoFeasibleRelay { .. }))
                .count(),
            handovers: self.handovers.iter().filter(|h| h.handover).count(),
            audit_violations: self.audits.len(),
            mean_dispersion_ms: self.mean_dispersion(),
            mean_objective_ms: mean(self.session_metrics.iter().map(|m| m.objective_ms)),
        }
    }
}

struct SlotState {
    slot: u32,
    run: SeedRun,
    alpha: f64,
}

impl SlotState {
    fn record_matrix(&mut self, matrix: &LatencyMatrix) {
        self.run.infeasible_pairs += matrix.infeasible_pairs;
        for (&(i, j), &latency_ms) in &matrix.entries {
            self.run.pairs.push(PairSample {
                slot: self.slot,
                session: matrix.session_id,
                user_i: i.index,
                user_j: j.index,
                latency_ms,
            });
        }
        if let Ok(obj) = session_objective(matrix, self.alpha) {
            self.run.session_metrics.push(SessionSlotMetric {
                slot: self.slot,
                session: matrix.session_id,
                users: matrix.per_user_mean.len(),
                mean_ms: matrix.session_mean,
                dispersion_ms: matrix.dispersion(),
                objective_ms: obj.value,
            });
        }
    }

    fn record_wiring(
        &mut self,
        session: &Session,
        wiring: &SessionWiring,
        graph: &NetworkGraph,
        dump_flows: bool,
    ) {
        for failure in &wiring.failures {
            self.run.failures.push(FailureRecord::Allocation {
                slot: self.slot,
                session: session.session_id,
                failure: failure.clone(),
            });
        }
        if dump_flows {
            for f in &wiring.flows {
                self.run
                    .flows
                    .push(flow_row(self.slot, session.session_id, f, graph));
            }
        }
        let members: Vec<NodeId> = session.members.iter().map(|u| u.id).collect();
        let table = FlowTable::new(&wiring.flows, &wiring.relay_of);
        self.record_matrix(&latency_matrix(session.session_id, &members, &table));
    }

    fn record_assignment(&mut self, a: &RelayAssignment) {
        self.run.handovers.push(HandoverRecord {
            slot: a.slot_index,
            session: a.session_id,
            region: a.region_id,
            relay: a.relay.to_string(),
            previous_relay: a.previous_relay.map(|r| r.to_string()),
            handover: a.handover,
            score_ms: a.score,
        });
    }
}

fn flow_row(slot: u32, session: u32, f: &FlowRecord, graph: &NetworkGraph) -> FlowRow {
    let path = f
        .nodes(graph)
        .map(|ns| {
            ns.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(">")
        })
        .unwrap_or_default();
    FlowRow {
        slot,
        session,
        direction: f.direction,
        src: f.src.to_string(),
        dst: f.dst.to_string(),
        bandwidth_mbps: f.bandwidth,
        latency_ms: f.latency_ms,
        path,
    }
}

/// Runs every slot of one seed. Nothing is written to disk.
pub fn run_seed(
    scenario: &Scenario,
    seed: u64,
    opts: &RunOptions,
) -> Result<SeedRun, HarnessError> {
    scenario.validate()?;
    let users = generate_users(
        scenario.traffic.n_users,
        &PopulationModel::bundled(),
        &scenario.session_policy(),
        seed,
    )
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let slots = scenario.num_slots();
    let dt = scenario.selection.slot_duration_s;
    let mut state = SlotState {
        slot: 0,
        alpha: scenario.selection.alpha,
        run: SeedRun {
            scheme: scenario.scheme,
            seed,
            slots,
            pairs: Vec::new(),
            infeasible_pairs: 0,
            handovers: Vec::new(),
            audits: Vec::new(),
            failures: Vec::new(),
            session_metrics: Vec::new(),
            flows: Vec::new(),
            graph_dumps: Vec::new(),
        },
    };
    let mut sites = CloudSite::from_locations(&default_cloud_sites());
    let mut prev: Vec<RelayAssignment> = Vec::new();

    for slot in 0..slots {
        state.slot = slot;
        let t = slot as f64 * dt;
        let roster = roster_at(&users, t);
        debug!("seed {seed} slot {slot}: {} sessions", roster.len());

        if scenario.scheme == Scheme::Via {
            for session in &roster {
                if let Some(sel) = via_select(session, &mut sites, &scenario.via) {
                    state.record_matrix(&sel.matrix);
                }
            }
            continue;
        }

        let sats = propagate(&scenario.shell, t);
        let joined: Vec<(NodeId, _)> = roster
            .iter()
            .flat_map(|s| s.members.iter().map(|u| (u.id, u.location)))
            .collect();
        let mut graph = build_graph(&sats, &joined, &scenario.graph, &scenario.shell);
        let mut slot_flows: Vec<FlowRecord> = Vec::new();

        match scenario.scheme {
            Scheme::Spacemeta => {
                type Selected = (
                    Vec<spacemeta_core::region::Region>,
                    Vec<Result<RelayAssignment, SelectionError>>,
                );
                let selections: Vec<Selected> = {
                    let ctx = SlotContext {
                        slot_index: slot,
                        time_s: t,
                        graph: &graph,
                        sats: &sats,
                        match_radius_km: scenario.regions.d_max,
                    };
                    roster
                        .par_iter()
                        .map(|session| {
                            let regions = divide(session, &scenario.regions);
                            let results = select_relays(&regions, &ctx, &scenario.selection, &prev);
                            (regions, results)
                        })
                        .collect()
                };
                let mut next_prev = Vec::new();
                for (session, (regions, results)) in roster.iter().zip(selections) {
                    let mut groups = Vec::with_capacity(regions.len());
                    for (region, result) in regions.into_iter().zip(results) {
                        let relay = match result {
                            Ok(a) => {
                                state.record_assignment(&a);
                                let r = a.relay;
                                next_prev.push(a);
                                Some(r)
                            }
                            Err(SelectionError::NoFeasibleRelay {
                                session_id,
                                region_id,
                            }) => {
                                state.run.failures.push(FailureRecord::NoFeasibleRelay {
                                    slot,
                                    session: session_id,
                                    region: region_id,
                                });
                                None
                            }
                        };
                        groups.push(RelayGroup {
                            region_id: region.region_id,
                            relay,
                            members: region.members,
                        });
                    }
                    let wiring = wire_session(&mut graph, &groups, scenario.routing.path_cap);
                    state.record_wiring(session, &wiring, &graph, opts.dump_flows);
                    slot_flows.extend(wiring.flows);
                }
                prev = next_prev;
            }
            Scheme::Spacertc => {
                for session in &roster {
                    match spacertc_select(
                        session,
                        &mut graph,
                        &sats,
                        &scenario.selection,
                        slot,
                        scenario.routing.path_cap,
                    ) {
                        Ok((a, wiring)) => {
                            state.record_assignment(&a);
                            state.record_wiring(session, &wiring, &graph, opts.dump_flows);
                            slot_flows.extend(wiring.flows);
                        }
                        Err(_) => {
                            state.run.failures.push(FailureRecord::NoFeasibleRelay {
                                slot,
                                session: session.session_id,
                                region: 0,
                            });
                            state.record_wiring(session, &SessionWiring::default(), &graph, false);
                        }
                    }
                }
            }
            Scheme::Via => unreachable!(),
        }

        for violation in audit_constraints(&graph, &slot_flows).violations {
            state.run.audits.push(AuditRecord { slot, violation });
        }
        if opts.dump_graph_slots.contains(&slot) {
            let mut text = String::new();
            graph.write_dump(&mut text).expect("string write");
            state.run.graph_dumps.push((slot, text));
        }
    }
    Ok(state.run)
}

/// Runs every seed of the scenario in parallel, in seed order.
pub fn run_all(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<SeedRun>, HarnessError> {
    scenario.validate()?;
    scenario
        .seeds
        .par_iter()
        .map(|&seed| run_seed(scenario, seed, opts))
        .collect()
}
