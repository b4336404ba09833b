mod oracles;

use std::collections::BTreeMap;

use oracles::TinyInstance;
use proptest::prelude::*;
use spacemeta_core::constellation::{elevation_deg, propagate, ShellConfig};
use spacemeta_core::flow::allocate;
use spacemeta_core::geo::{great_circle_km, GroundPoint};
use spacemeta_core::metrics::{distribution_stats, session_objective, LatencyMatrix};
use spacemeta_core::region::{divide, RegionParams};
use spacemeta_core::relay::{
    select_relays, weighted_dispersion_score, SelectionParams, SlotContext,
};
use spacemeta_core::sessions::{Session, User};
use spacemeta_core::topology::{build_graph, FlowDirection, LinkId};
use spacemeta_core::{propagation_latency_ms, GraphParams, NodeId, Vec3};

fn user(i: u32, lat: f64, lon: f64) -> User {
    User {
        id: NodeId::user(i),
        location: GroundPoint::new(lat, lon),
        up_bw: 3.0,
        down_bw: 2.0,
        join_time: 0.0,
        session_id: 0,
    }
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-8000.0..8000.0f64, -8000.0..8000.0f64, -8000.0..8000.0f64)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn small_shell() -> impl Strategy<Value = ShellConfig> {
    (1u32..9, 1u32..12, 300.0..1200.0f64, 0.0..98.0f64, 0u32..4)
        .prop_filter_map("valid shell", |(p, s, h, i, f)| {
            ShellConfig::new(p, s, h, i, f % p.max(1)).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reservations_match_flow_ledger(seed in any::<u64>(), pairs in prop::collection::vec((any::<u64>(), 0.5..4.0f64), 1..12)) {
        let inst = TinyInstance::random(seed);
        let mut g = inst.graph.clone();
        let before: Vec<f64> = g.links().iter().map(|l| l.remaining).collect();
        let mut ledger: BTreeMap<LinkId, f64> = BTreeMap::new();
        for (salt, bw) in pairs {
            let (i, j) = inst.random_pair(salt);
            if let Ok(f) = allocate(&mut g, i, j, bw, FlowDirection::Upstream, 64) {
                for l in f.path {
                    *ledger.entry(l).or_default() += bw;
                }
            }
        }
        for (k, l) in g.links().iter().enumerate() {
            let used = before[k] - l.remaining;
            let expected = ledger.get(&LinkId(k as u32)).copied().unwrap_or(0.0);
            prop_assert!((used - expected).abs() < 1e-9, "link {k}: used {used}, ledger {expected}");
            prop_assert!(l.remaining >= 0.0);
        }
    }

    #[test]
    fn failed_reservation_changes_nothing(seed in any::<u64>(), salt in any::<u64>(), bw in 0.5..20.0f64) {
        let inst = TinyInstance::random(seed);
        let (i, j) = inst.random_pair(salt);
        let mut g = inst.graph.clone();
        if allocate(&mut g, i, j, bw, FlowDirection::Upstream, 64).is_err() {
            prop_assert_eq!(g.links(), inst.graph.links());
            for &n in g.nodes() {
                prop_assert_eq!(g.active_isls(n), inst.graph.active_isls(n));
            }
        }
        let all: Vec<LinkId> = (0..g.links().len() as u32).map(LinkId).collect();
        let snapshot = g.clone();
        if g.reserve(&all, bw).is_err() {
            prop_assert_eq!(g.links(), snapshot.links());
        }
    }

    #[test]
    fn propagation_latency_is_symmetric(p in vec3(), q in vec3()) {
        prop_assert_eq!(propagation_latency_ms(p, q), propagation_latency_ms(q, p));
        prop_assert!(propagation_latency_ms(p, q) >= 0.0);
    }

    #[test]
    fn iqr_shift_and_scale(xs in prop::collection::vec(-1e3..1e3f64, 1..60), a in 0.01..100.0f64, b in -1e3..1e3f64) {
        let base = distribution_stats(&xs).unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let st = distribution_stats(&moved).unwrap();
        prop_assert!((st.iqr - a * base.iqr).abs() <= 1e-7 * (1.0 + a * base.iqr.abs()));
        prop_assert!((st.mean - (a * base.mean + b)).abs() <= 1e-7 * (1.0 + st.mean.abs()));
    }

    #[test]
    fn objective_grows_with_alpha(vals in prop::collection::vec(0.0..200.0f64, 3..15), a1 in 0.0..30.0f64, a2 in 0.0..30.0f64) {
        let n = (1..8).find(|n| n * (n - 1) / 2 >= vals.len()).unwrap();
        let mut entries = BTreeMap::new();
        let mut k = 0;
        'outer: for i in 0..n as u32 {
            for j in i + 1..n as u32 {
                if k == vals.len() { break 'outer; }
                entries.insert((NodeId::user(i), NodeId::user(j)), vals[k]);
                k += 1;
            }
        }
        let m = LatencyMatrix::from_entries(0, entries, 0);
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let vlo = session_objective(&m, lo).unwrap().value;
        let vhi = session_objective(&m, hi).unwrap().value;
        prop_assert!(vlo <= vhi + 1e-12);
        prop_assert!(m.dispersion() >= 0.0);
    }

    #[test]
    fn grid_neighbours_are_few_and_mutual(shell in small_shell()) {
        let mut ordered_pairs = 0usize;
        for id in 0..shell.num_satellites() {
            let nb = shell.grid_neighbors(id);
            prop_assert!(nb.len() <= 4);
            prop_assert!(!nb.contains(&id));
            for &m in &nb {
                prop_assert!(shell.grid_neighbors(m).contains(&id));
            }
            ordered_pairs += nb.len();
        }
        prop_assert_eq!(ordered_pairs % 2, 0);
    }

    #[test]
    fn propagation_is_deterministic(shell in small_shell(), t in 0.0..86_400.0f64) {
        let a = propagate(&shell, t);
        let b = propagate(&shell, t);
        prop_assert_eq!(&a, &b);
        for s in &a {
            prop_assert!((s.position.norm() - shell.orbit_radius_km()).abs() < 1e-6);
        }
    }

    #[test]
    fn elevation_falls_with_ground_distance(lat in -70.0..70.0f64, lon in -179.0..179.0f64, d1 in 0.0..15.0f64, d2 in 0.0..15.0f64, h in 300.0..1500.0f64) {
        let u = GroundPoint::new(lat, lon);
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let above = |off: f64| GroundPoint::new(lat + off, lon).to_ecef() * ((6371.0 + h) / 6371.0);
        prop_assert!(elevation_deg(&u, above(near)) >= elevation_deg(&u, above(far)) - 1e-9);
    }

    #[test]
    fn regions_partition_the_session(
        pts in prop::collection::vec((-60.0..60.0f64, -20.0..20.0f64), 1..40),
        n_max in 1usize..10,
        d_max in 100.0..3000.0f64,
    ) {
        let members: Vec<User> = pts.iter().enumerate().map(|(i, &(la, lo))| user(i as u32, la, lo)).collect();
        let session = Session { session_id: 0, members: members.clone() };
        let regions = divide(&session, &RegionParams { n_max, d_max });
        let mut seen: Vec<NodeId> = regions.iter().flat_map(|r| r.members.iter().map(|u| u.id)).collect();
        seen.sort();
        let mut all: Vec<NodeId> = members.iter().map(|u| u.id).collect();
        all.sort();
        prop_assert_eq!(seen, all);
        for (k, r) in regions.iter().enumerate() {
            prop_assert_eq!(r.region_id as usize, k);
            prop_assert!(!r.members.is_empty() && r.members.len() <= n_max);
            for a in &r.members {
                for b in &r.members {
                    prop_assert!(great_circle_km(&a.location, &b.location) <= d_max);
                }
            }
        }
    }

    #[test]
    fn argmin_ignores_latency_units(cands in prop::collection::vec(prop::collection::vec(1.0..300.0f64, 1..6), 1..6), c in 0.001..1000.0f64, alpha in 0.0..20.0f64) {
        let argmin = |scale: f64| {
            let scores: Vec<f64> = cands.iter().map(|v| {
                let v: Vec<f64> = v.iter().map(|x| x * scale).collect();
                weighted_dispersion_score(&v, alpha)
            }).collect();
            let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            (scores, best)
        };
        let (s1, b1) = argmin(1.0);
        let (s2, b2) = argmin(c);
        for (x, y) in s1.iter().zip(&s2) {
            prop_assert!((x * c - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
        for k in 0..s1.len() {
            let clearly_best = s1.iter().enumerate().all(|(m, v)| m == k || *v > s1[k] * (1.0 + 1e-9));
            if clearly_best {
                prop_assert_eq!(s1[k], b1);
                prop_assert_eq!(s2[k], b2);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wider_handover_threshold_never_adds_handovers(
        lat in -50.0..50.0f64,
        lon in -180.0..180.0f64,
        t in 0.0..5000.0f64,
        d1 in 0.0..3000.0f64,
        d2 in 0.0..3000.0f64,
    ) {
        let shell = ShellConfig::new(12, 24, 550.0, 53.0, 1).unwrap();
        let members: Vec<User> = (0..3).map(|i| user(i, lat + 0.5 * i as f64, lon)).collect();
        let session = Session { session_id: 0, members };
        let regions = divide(&session, &RegionParams::default());
        let at = |time: f64| {
            let sats = propagate(&shell, time);
            let nodes: Vec<(NodeId, GroundPoint)> = session.members.iter().map(|u| (u.id, u.location)).collect();
            let graph = build_graph(&sats, &nodes, &GraphParams::default(), &shell);
            (sats, graph)
        };
        let (s0, g0) = at(t);
        let ctx0 = SlotContext { slot_index: 0, time_s: t, graph: &g0, sats: &s0, match_radius_km: 1000.0 };
        let first: Vec<_> = select_relays(&regions, &ctx0, &SelectionParams::default(), &[]).into_iter().filter_map(Result::ok).collect();
        let (s1, g1) = at(t + 15.0);
        let ctx1 = SlotContext { slot_index: 1, time_s: t + 15.0, graph: &g1, sats: &s1, match_radius_km: 1000.0 };
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let run = |delta_km: f64| -> Vec<bool> {
            let p = SelectionParams { delta_km, ..SelectionParams::default() };
            select_relays(&regions, &ctx1, &p, &first).into_iter().map(|r| r.map_or(true, |a| a.handover)).collect()
        };
        for (narrow, wide) in run(lo).into_iter().zip(run(hi)) {
            prop_assert!(narrow || !wide, "kept at delta {lo} but handed over at {hi}");
        }
    }
}
