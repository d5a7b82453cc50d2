mod common;

use std::collections::BTreeMap;

use common::{floyd_warshall, weight_matrix};
use proptest::prelude::*;
use smartfog::centrality::{betweenness, CentralityMode};
use smartfog::clustering::{cluster_functional_areas, FunctionalArea};
use smartfog::decision::{select_gateways, AreaType, Gateway, GatewayAssignment};
use smartfog::overlay::{build_overlay, DeviceId, FogOverlay, OverlayParams};
use smartfog::simulation::{
    generate_sensors, place_edge_ward, run, Mode, Placement, Sensor, SensorId, SimulationReport, Simulator, Strategy,
    TupleKind, WorkloadSpec,
};

fn plan(overlay: &FogOverlay, seed: u64) -> (GatewayAssignment, Vec<FunctionalArea>) {
    let centrality = betweenness(overlay, CentralityMode::WeightedByLatency).unwrap();
    let areas = [AreaType::ComputeOptimized, AreaType::MemoryOptimized];
    let assignment = select_gateways(overlay, &areas, &centrality).unwrap();
    let functional = cluster_functional_areas(overlay, &assignment, 2, None, seed).unwrap();
    (assignment, functional)
}

fn short() -> WorkloadSpec {
    WorkloadSpec { horizon_ms: 120_000.0, spa_period_ms: Some(10_000.0), pc_period_ms: Some(20_000.0), ..Default::default() }
}

#[test]
fn compute_area_of_one_device_takes_all_spa_traffic() {
    let overlay = build_overlay(10, 2, &OverlayParams::default()).unwrap();
    let assignment = GatewayAssignment {
        gateways: vec![Gateway { device: DeviceId(0), area_type: AreaType::ComputeOptimized }],
    };
    let areas = vec![FunctionalArea {
        owner_gateway: DeviceId(0),
        area_type: AreaType::ComputeOptimized,
        members: vec![DeviceId(7)],
        cluster_label: 0,
    }];
    let sensors = generate_sensors(&overlay, &WorkloadSpec::default(), 2).unwrap();
    let placement =
        place_edge_ward(&overlay, &sensors, &Strategy::SmartFog { assignment: &assignment, areas: &areas }, 2).unwrap();
    assert!(placement.edge_modules.values().all(|&d| d == DeviceId(7)));
    // no memory area: PC falls back to any area, routed via its owner
    assert!(placement.pc_modules.values().all(|&d| d == DeviceId(7)));
    assert_eq!(placement.cloud_route, BTreeMap::from([(DeviceId(7), DeviceId(0))]));
}

#[test]
fn smartfog_attachment_is_nearest_and_beats_random() {
    for seed in 0..10 {
        let overlay = build_overlay(20, seed, &OverlayParams::default()).unwrap();
        let (assignment, areas) = plan(&overlay, seed);
        let sensors = generate_sensors(&overlay, &WorkloadSpec::default(), seed).unwrap();
        let smart = place_edge_ward(&overlay, &sensors, &Strategy::SmartFog { assignment: &assignment, areas: &areas }, seed)
            .unwrap();
        let random = place_edge_ward(&overlay, &sensors, &Strategy::Unoptimized, seed).unwrap();

        let d = floyd_warshall(&weight_matrix(&overlay, false));
        let idx = |id: DeviceId| overlay.index_of(id).unwrap();
        let compute: Vec<DeviceId> = areas
            .iter()
            .filter(|a| a.area_type == AreaType::ComputeOptimized)
            .flat_map(|a| a.members.clone())
            .collect();
        let mut smart_total = 0.0;
        let mut random_total = 0.0;
        for s in &sensors {
            let home = idx(s.home);
            let best = compute.iter().map(|&m| d[home][idx(m)]).fold(f64::INFINITY, f64::min);
            let chosen = d[home][idx(smart.edge_modules[&s.id])];
            assert!((chosen - best).abs() <= 1e-9);
            smart_total += chosen;
            random_total += d[home][idx(random.edge_modules[&s.id])];
        }
        assert!(smart_total <= random_total, "seed {seed}");
        for (device, gateway) in &smart.cloud_route {
            assert!(assignment.contains(*gateway), "{device} routes via a non-gateway");
        }
        let attached: Vec<DeviceId> = overlay.cloud_attached().map(|(id, _)| id).collect();
        assert!(random.cloud_route.values().all(|f| attached.contains(f)));
    }
}

fn check_report(report: &SimulationReport) {
    for c in [report.spa, report.pc] {
        assert_eq!(c.emitted, c.completed + c.dropped + c.in_flight);
    }
    assert!(report.spa_delays_ms.iter().chain(&report.pc_delays_ms).all(|&d| d > 0.0));
    assert!(report.network_load_bytes >= report.completed() * 100);
    // each completed SPA loop crosses at least 2 hops each way
    assert!(report.network_load_bytes >= report.spa.completed * 2 * 100);
}

#[test]
fn full_runs_satisfy_report_invariants() {
    for seed in 0..5 {
        let overlay = build_overlay(20, seed, &OverlayParams::default()).unwrap();
        let (assignment, areas) = plan(&overlay, seed);
        for strategy in [Strategy::SmartFog { assignment: &assignment, areas: &areas }, Strategy::Unoptimized] {
            let report = run(&overlay, &strategy, &short(), seed).unwrap();
            assert!(report.spa.completed > 0 && report.pc.completed > 0);
            assert_eq!(report.mode, strategy.mode());
            check_report(&report);
            let again = run(&overlay, &strategy, &short(), seed).unwrap();
            assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
        }
    }
}

fn doubled(overlay: &FogOverlay) -> FogOverlay {
    FogOverlay::new(
        overlay.devices().to_vec(),
        overlay.links().map(|(a, b, w)| (a, b, 2.0 * w)).collect::<Vec<_>>(),
        overlay.cloud_attached().map(|(c, w)| (c, 2.0 * w)).collect::<Vec<_>>(),
    )
    .unwrap()
}

#[test]
fn doubling_latencies_never_shortens_a_single_sensor_loop() {
    for seed in 0..10 {
        let overlay = build_overlay(15, seed, &OverlayParams::default()).unwrap();
        let workload = WorkloadSpec { sensors: Some(1), spa_period_ms: Some(3_000.0), pc_period_ms: Some(4_000.0), ..short() };
        let sensors = generate_sensors(&overlay, &workload, seed).unwrap();
        let placement = place_edge_ward(&overlay, &sensors, &Strategy::Unoptimized, seed).unwrap();
        let slow_sensors: Vec<Sensor> =
            sensors.iter().map(|s| Sensor { access_latency_ms: 2.0 * s.access_latency_ms, ..s.clone() }).collect();
        let slow_overlay = doubled(&overlay);
        let simulate = |o: &FogOverlay, s: &[Sensor]| {
            let mut sim = Simulator::new(o, s, &placement, &workload, Mode::UnoptimizedFog, seed).unwrap();
            sim.schedule_emissions();
            sim.run()
        };
        let fast = simulate(&overlay, &sensors);
        let slow = simulate(&slow_overlay, &slow_sensors);
        for (a, b) in fast.spa_delays_ms.iter().zip(&slow.spa_delays_ms) {
            assert!(b >= a);
        }
        for (a, b) in fast.pc_delays_ms.iter().zip(&slow.pc_delays_ms) {
            assert!(b >= a);
        }
    }
}

#[test]
fn unplaced_sensor_is_dropped_not_lost() {
    let overlay = build_overlay(5, 1, &OverlayParams::default()).unwrap();
    let sensors = vec![
        Sensor { id: SensorId(0), home: DeviceId(0), access_latency_ms: 1.0 },
        Sensor { id: SensorId(1), home: DeviceId(1), access_latency_ms: 1.0 },
    ];
    let mut placement = Placement::uniform(&sensors[..1], DeviceId(2), DeviceId(2));
    placement.pc_modules.clear();
    let workload = WorkloadSpec { warmup_ms: 0.0, ..WorkloadSpec::default() };
    let mut sim = Simulator::new(&overlay, &sensors, &placement, &workload, Mode::SmartFog, 0).unwrap();
    sim.inject(0, TupleKind::Spa, 2000.0, 0.0).unwrap();
    sim.inject(0, TupleKind::Pc, 40_000.0, 0.0).unwrap();
    sim.inject(1, TupleKind::Spa, 2000.0, 0.0).unwrap();
    assert!(sim.inject(2, TupleKind::Spa, 2000.0, 0.0).is_err());
    let report = sim.run();
    assert_eq!((report.spa.emitted, report.spa.completed, report.spa.dropped), (2, 1, 1));
    assert_eq!((report.pc.emitted, report.pc.dropped), (1, 1));
    check_report(&report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conservation_under_random_workloads(
        seed in any::<u64>(),
        n in 2usize..12,
        sensors in 0usize..20,
        spa in 500.0f64..20_000.0,
        pc in 500.0f64..20_000.0,
        horizon in 1_000.0f64..60_000.0,
    ) {
        let overlay = build_overlay(n, seed, &OverlayParams::default()).unwrap();
        let workload = WorkloadSpec {
            sensors: Some(sensors),
            spa_period_ms: Some(spa),
            pc_period_ms: Some(pc),
            horizon_ms: horizon,
            warmup_ms: 0.0,
            ..Default::default()
        };
        let report = run(&overlay, &Strategy::Unoptimized, &workload, seed).unwrap();
        for c in [report.spa, report.pc] {
            prop_assert_eq!(c.emitted, c.completed + c.dropped + c.in_flight);
        }
        prop_assert_eq!(report.spa_delays_ms.len() as u64, report.spa.completed);
        prop_assert!(report.network_load_bytes >= report.completed() * 100);
    }
}
