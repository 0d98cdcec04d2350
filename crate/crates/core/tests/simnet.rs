use lpr_core::analytic::{mean_latency, mean_traffic, pareto_front, Grouping};
use lpr_core::simnet::*;

/// Seven nodes around a concave void: the source's only neighbours lie
/// farther from the destination than the source itself.
fn void_fixture() -> Topology {
    let pts = [
        (0.0, 0.0),   // 0 source, bottom of the cup
        (-1.2, -0.3), // 1 left lip
        (1.2, -0.3),  // 2 right lip, dead end
        (-2.2, 0.7),  // 3
        (-1.8, 2.0),  // 4
        (-0.8, 2.8),  // 5
        (0.0, 3.0),   // 6 destination
    ];
    let pts = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
    Topology::from_positions(pts, 1.5, 4.0).unwrap()
}

#[test]
fn void_fixture_needs_perimeter() {
    let t = void_fixture();
    assert!(t.is_connected() && t.is_planar_connected());
    let d = t.position(6);
    let here = t.position(0).dist(d);
    assert!(t.neighbors(0).iter().all(|&n| t.position(n).dist(d) > here));

    let r = Gpsr::new(&t).route_to_node(0, 6);
    assert!(r.delivered(), "{r:?}");
    assert_eq!(r.path, vec![0, 1, 3, 4, 5, 6]);
    assert_eq!(r.modes[0], Mode::Perimeter);
    assert_eq!(*r.modes.last().unwrap(), Mode::Greedy);
}

fn check_route_invariants(t: &Topology, r: &Route, target: Point) {
    for (i, mode) in r.modes.iter().enumerate() {
        let (a, b) = (r.path[i], r.path[i + 1]);
        assert!(t.neighbors(a).contains(&b));
        match mode {
            Mode::Greedy => assert!(t.position(b).dist(target) < t.position(a).dist(target)),
            Mode::Perimeter => assert!(t.planar_neighbors(a).contains(&b)),
        }
    }
}

#[test]
fn delivers_between_all_pairs_on_small_connected_graphs() {
    let mut tested = 0;
    for seed in 0..400u64 {
        let n = 10 + (seed % 21) as usize;
        let degree = 4.0 + (seed % 7) as f64;
        let t = build_topology(n, 1.0, range_for_degree(n, 1.0, degree), seed).unwrap();
        if !(t.is_connected() && t.is_planar_connected()) {
            continue;
        }
        tested += 1;
        let g = Gpsr::new(&t).with_ttl(10 * n as u32);
        for s in 0..n {
            for d in 0..n {
                let r = g.route_to_node(s, d);
                assert!(r.delivered(), "seed {seed}: {s}->{d} {:?}", r.status);
                check_route_invariants(&t, &r, t.position(d));
            }
        }
    }
    assert!(tested > 150, "only {tested} connected topologies");
}

#[test]
fn delivers_on_sampled_larger_graphs() {
    for seed in 0..20u64 {
        let n = 300;
        let t = build_topology(n, 1000.0, range_for_degree(n, 1000.0, 7.0), seed).unwrap();
        if !t.is_connected() {
            continue;
        }
        let g = Gpsr::new(&t).with_ttl(10 * n as u32);
        for i in 0..200 {
            let (s, d) = ((i * 7919) % n, (i * 104_729 + 13) % n);
            let r = g.route_to_node(s, d);
            assert!(r.delivered(), "seed {seed}: {s}->{d} {:?}", r.status);
            check_route_invariants(&t, &r, t.position(d));
        }
    }
}

#[test]
fn disconnected_pairs_fail_cleanly() {
    let pts = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.0, 1.0),
        Point::new(10.0, 10.0),
        Point::new(11.0, 10.0),
    ];
    let t = Topology::from_positions(pts, 1.5, 12.0).unwrap();
    assert!(!t.is_connected());
    let g = Gpsr::new(&t).with_ttl(50);
    for s in 0..3 {
        let r = g.route_to_node(s, 4);
        assert!(!r.delivered());
        assert!(r.hops() <= 50);
    }
}

#[test]
fn hop_count_respects_ttl() {
    let t = build_topology(200, 1000.0, range_for_degree(200, 1000.0, 4.0), 5).unwrap();
    let g = Gpsr::new(&t);
    for s in 0..50 {
        let r = g.route_to_node(s, 199 - s);
        assert!(r.hops() <= g.ttl());
    }
}

#[test]
fn square_gabriel_keeps_planar_edges() {
    let pts = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    let t = Topology::from_positions(pts, 2f64.sqrt() + 1e-9, 1.0).unwrap();
    let diagonals =
        t.planar_neighbors(0).contains(&2) as u8 + t.planar_neighbors(1).contains(&3) as u8;
    assert!(diagonals < 2);
}

#[test]
fn dense_topologies_usually_connected() {
    let n = 500;
    let r = range_for_degree(n, 1000.0, 16.0);
    let connected = (0..40)
        .filter(|&s| build_topology(n, 1000.0, r, s).unwrap().is_connected())
        .count();
    assert!(connected as f64 / 40.0 > 0.95, "{connected}/40");
}

#[test]
fn sparse_scenarios_redraw_or_fail() {
    let mut c = ScenarioConfig::default();
    c.topology.nodes = 100;
    c.topology.avg_degree = 0.5;
    assert!(matches!(
        World::build(&c),
        Err(lpr_core::Error::Config { field, .. }) if field == "topology.require_connected"
    ));
    c.topology.require_connected = false;
    let w = World::build(&c).unwrap();
    assert!(!w.topology.is_connected());
    assert_eq!(w.topology_seed, c.seeds.topology);
}

#[test]
fn transmissions_are_conserved() {
    let mut c = ScenarioConfig::default();
    c.topology.nodes = 200;
    c.topology.field_size = 700.0;
    c.topology.grid_cells = 7;
    c.traffic.users = 30;
    c.traffic.locations = 20;
    let world = World::build(&c).unwrap();
    let policy = c.delivery_policy();
    for trial in 0..300 {
        let d = world.draw(trial);
        let router = world.router();
        let cands = world.candidates(d.user, d.slot_of_week, 12);
        let out = lpr_deliver(
            &router,
            d.src,
            &cands,
            d.true_cell,
            &world.grouping,
            &policy,
        );
        assert_eq!(out.transmissions, router.transmissions());
        assert_eq!(
            out.transmissions,
            out.forward_transmissions + out.return_transmissions
        );
        if out.success {
            assert!(out.groups_tried as usize <= world.grouping.len());
        }
    }
}

#[test]
fn rank_one_target_has_unit_latency() {
    let mut c = ScenarioConfig::default();
    c.topology.nodes = 200;
    c.topology.field_size = 700.0;
    c.topology.grid_cells = 7;
    c.traffic.users = 30;
    c.traffic.locations = 20;
    c.traffic.floor = 0.0;
    c.strategy.grouping = GroupingSpec::Serial;
    let report = run_scenario(&c).unwrap();
    for t in report
        .trials
        .iter()
        .filter(|t| t.true_rank == Some(1) && t.success)
    {
        assert_eq!(t.latency_factor, 1.0);
    }
}

#[test]
fn parallel_grouping_has_unit_latency() {
    let mut c = ScenarioConfig::default();
    c.topology.nodes = 200;
    c.topology.field_size = 700.0;
    c.topology.grid_cells = 7;
    c.traffic.users = 30;
    c.traffic.locations = 20;
    c.traffic.trials = 300;
    c.strategy.grouping = GroupingSpec::Parallel;
    let report = run_scenario(&c).unwrap();
    assert!(report.trials.iter().all(|t| t.latency_factor == 1.0));
    assert!(report.trials.iter().all(|t| t.copies_sent == 12));
}

#[test]
fn metrics_are_deterministic() {
    let mut c = ScenarioConfig::default();
    c.topology.nodes = 150;
    c.topology.field_size = 600.0;
    c.topology.grid_cells = 6;
    c.traffic.trials = 400;
    c.traffic.users = 10;
    c.traffic.locations = 12;
    let a = run_scenario(&c).unwrap().metrics;
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_scenario(&c).unwrap().metrics);
    assert_eq!(a, b);
}

/// Mean latency and traffic factors of every front grouping over shared
/// trials, compared against the analytic values.
fn front_closure(k: u32, trials: u32) {
    let mut c = ScenarioConfig::default();
    c.traffic.floor = 0.0;
    c.strategy.k = k;
    c.traffic.users = 200;
    c.seeds.traffic = 40 + k as u64;
    let world = World::build(&c).unwrap();
    assert!(world.topology.is_connected());
    assert!(world.topology.mean_degree() > 12.0);
    let model = c.success_model();
    let front = pareto_front(k, &model).unwrap();
    let policy = c.delivery_policy();
    let groupings: Vec<Grouping> = front.iter().map(|p| p.grouping.clone()).collect();

    use rayon::prelude::*;
    let sums = (0..trials)
        .into_par_iter()
        .map(|i| {
            let d = world.draw(i);
            let router = world.router();
            let truth = world.cell_position(d.true_cell);
            let oracle = oracle_deliver(&router, d.src, truth, &policy);
            let cands = world.candidates(d.user, d.slot_of_week, k as usize);
            let per: Vec<(f64, f64)> = groupings
                .iter()
                .map(|g| {
                    let o = lpr_deliver(&router, d.src, &cands, d.true_cell, g, &policy);
                    (o.latency_factor, o.transmissions as f64)
                })
                .collect();
            (oracle.transmissions as f64, per)
        })
        .reduce(
            || (0.0, vec![(0.0, 0.0); groupings.len()]),
            |(oa, mut a), (ob, b)| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                (oa + ob, a)
            },
        );
    let (oracle_tx, per) = sums;
    for (g, (lat, tx)) in groupings.iter().zip(per) {
        let l = lat / trials as f64;
        let t = tx / oracle_tx;
        let (la, ta) = (mean_latency(g, &model), mean_traffic(g, &model));
        assert!((l - la).abs() <= 0.05 * la, "k={k} {g}: L {l} vs {la}");
        assert!((t - ta).abs() <= 0.05 * ta, "k={k} {g}: T {t} vs {ta}");
    }
}

#[test]
fn front_k5_matches_analytics() {
    front_closure(5, 10_000);
}

#[test]
fn front_k12_matches_analytics() {
    front_closure(12, 10_000);
}
