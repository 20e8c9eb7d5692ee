//! Acceptance gate: the ten checks the project must pass end to end.
//!
//! Each test prints exactly one `PASS`/`FAIL` line (visible with
//! `--nocapture`); cargo's own per-test status mirrors it.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::Instant;

use approx::assert_relative_eq;
use wsnsim_core::{
    assign_members, deploy, elect_heads, epoch_length, exact_tour, plan_tour, recharge_cluster,
    split_stream, validate_config, HarvestParams, NodeState, PhaseEvent, Point, RandomSource,
    SimConfig, Simulation,
};

fn gate(name: &str, body: impl FnOnce() + UnwindSafe) {
    let outcome = catch_unwind(body);
    match outcome {
        Ok(()) => println!("{name}: PASS"),
        Err(payload) => {
            println!("{name}: FAIL");
            resume_unwind(payload);
        }
    }
}

fn preset(name: &str) -> SimConfig {
    SimConfig::preset(name).expect("known preset")
}

fn run_alive_series(config: SimConfig, rounds: u32) -> Vec<u32> {
    let mut config = config;
    config.total_rounds = rounds;
    let mut sim = Simulation::new(validate_config(config).expect("valid config"));
    for _ in 0..rounds {
        sim.step().expect("step");
    }
    sim.into_metrics().iter().map(|m| m.alive_count).collect()
}

#[test]
fn acceptance_01_per_round_energy_conservation() {
    gate("01 per-round energy conservation", || {
        let started = Instant::now();
        let mut sim = Simulation::new(validate_config(preset("n50")).expect("valid config"));
        let mut before = sim.total_energy();
        for _ in 0..50 {
            let report = sim.step().expect("step");
            let after = sim.total_energy();
            let lhs = after - before;
            let rhs = report.delivered - report.consumed;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-9, epsilon = 1e-12);
            before = after;
        }
        assert!(
            started.elapsed().as_secs_f64() < 1.0,
            "50-round n50 run took {:?}",
            started.elapsed()
        );
    });
}

#[test]
fn acceptance_02_identical_runs_produce_identical_csv() {
    gate("02 byte-identical CSV on repeat runs", || {
        let produce = || {
            let series = wsnsim_core::run(validate_config(preset("n150")).expect("valid config"))
                .expect("run");
            wsnsim_core::io::csv_string(&series)
        };
        let first = produce();
        let second = produce();
        assert_eq!(first.into_bytes(), second.into_bytes());
    });
}

#[test]
fn acceptance_03_baseline_dies_while_charged_network_survives() {
    // Defaults keep every node alive for thousands of rounds, so the horizon
    // is stretched far enough for the uncharged network to fully deplete.
    gate("03 baseline death vs sustained operation", || {
        const HORIZON: u32 = 12_000;
        let mut baseline_cfg = preset("n50");
        baseline_cfg.harvester_enabled = false;
        let baseline = run_alive_series(baseline_cfg, HORIZON);
        let charged = run_alive_series(preset("n50"), HORIZON);

        assert!(
            baseline.windows(2).all(|w| w[1] <= w[0]),
            "alive count rose without a charger"
        );
        let baseline_final = *baseline.last().expect("rows");
        let charged_final = *charged.last().expect("rows");
        assert!(
            baseline_final < charged_final,
            "baseline ended at {baseline_final}, charged at {charged_final}"
        );
        assert!(charged_final > 0, "charged network died out");
    });
}

#[test]
fn acceptance_04_alive_count_dips_then_recovers() {
    gate("04 dip-and-recover with revival", || {
        const HORIZON: u32 = 4_000;
        let config = preset("n50");
        let node_count = config.node_count;
        let alive = run_alive_series(config, HORIZON);
        let dip = alive.iter().position(|&a| a < node_count);
        let Some(r1) = dip else {
            panic!("no node ever died within {HORIZON} rounds");
        };
        let recovered = alive[r1 + 1..].iter().any(|&a| a > alive[r1]);
        assert!(
            recovered,
            "alive count never rose above {} after round {r1}",
            alive[r1]
        );
    });
}

#[test]
fn acceptance_05_recharge_gain_matches_inverse_square_law() {
    gate("05 recharge gain oracle", || {
        let params = HarvestParams::default();
        let mut rng = split_stream(7, "gain-oracle");
        for _ in 0..1_000 {
            let e_c = rng.next_f64() * 1.9;
            let e_h = 1e-3 + rng.next_f64() * 10.0;
            let d = params.d_min + rng.next_f64() * 100.0;
            let mut nodes = vec![NodeState::new(0, Point { x: d, y: 0.0 }, e_c)];
            let head_position = Point { x: 0.0, y: 0.0 };
            let stored = recharge_cluster(
                &mut nodes,
                &[0],
                head_position,
                e_h,
                &params,
                f64::INFINITY,
                0.0,
            );
            let expected = e_h / (d * d);
            assert_relative_eq!(stored, expected, max_relative = 1e-12);
            assert_relative_eq!(
                nodes[0].energy() - e_c,
                expected,
                max_relative = 1e-12,
                epsilon = 1e-15
            );

            // Same triple against a tight capacity: never overfull.
            let capacity = e_c.max(1e-6);
            let mut clamped = vec![NodeState::new(0, Point { x: d, y: 0.0 }, e_c)];
            recharge_cluster(
                &mut clamped,
                &[0],
                head_position,
                e_h,
                &params,
                capacity,
                0.0,
            );
            assert!(clamped[0].energy() <= capacity);
        }
    });
}

#[test]
fn acceptance_06_planned_tours_stay_near_optimal() {
    gate("06 tour quality against the exact solver", || {
        let started = Instant::now();
        let depot = Point { x: -10.0, y: 50.0 };
        let mut rng = split_stream(13, "tour-instances");
        for instance in 0..100u32 {
            let count = 3 + (instance % 6) as usize;
            let heads: Vec<(u32, Point)> = (0..count as u32)
                .map(|id| {
                    (
                        id,
                        Point {
                            x: rng.next_f64() * 100.0,
                            y: rng.next_f64() * 100.0,
                        },
                    )
                })
                .collect();
            let planned = plan_tour(&heads, depot);
            let optimal = exact_tour(&heads, depot).expect("within exact solver bound");
            let greedy = wsnsim_core::harvester::nearest_neighbor_length(&heads, depot);
            assert!(
                planned.total_length >= optimal.total_length - 1e-9,
                "instance {instance}: planned {} beat optimal {}",
                planned.total_length,
                optimal.total_length
            );
            assert!(
                planned.total_length <= optimal.total_length * 1.2,
                "instance {instance}: ratio {}",
                planned.total_length / optimal.total_length
            );
            assert!(
                planned.total_length <= greedy + 1e-9,
                "instance {instance}: 2-opt made the greedy tour longer"
            );
        }
        assert!(
            started.elapsed().as_secs_f64() < 10.0,
            "100 instances took {:?}",
            started.elapsed()
        );
    });
}

#[test]
fn acceptance_07_election_rate_and_rotation() {
    gate("07 election rate and rotation", || {
        const ROUNDS: u32 = 2_000;
        let p = 0.05;
        let epoch = epoch_length(p);
        let mut nodes: Vec<NodeState> = (0..100)
            .map(|id| {
                NodeState::new(
                    id,
                    Point {
                        x: id as f64,
                        y: 0.0,
                    },
                    2.0,
                )
            })
            .collect();
        let mut rng = split_stream(42, "election-stats");
        let mut head_rounds: u64 = 0;
        let mut last_served: BTreeMap<u32, u32> = BTreeMap::new();
        for round in 0..ROUNDS {
            for node in &mut nodes {
                node.rounds_since_ch = node.rounds_since_ch.saturating_add(1);
            }
            let heads = elect_heads(&nodes, round, p, &mut rng).expect("alive nodes");
            head_rounds += heads.len() as u64;
            for &head in &heads {
                if let Some(previous) = last_served.insert(head, round) {
                    assert!(
                        round - previous >= epoch,
                        "node {head} served at {previous} and again at {round}"
                    );
                }
                nodes[head as usize].rounds_since_ch = 0;
            }
        }
        let mean = head_rounds as f64 / ROUNDS as f64;
        assert!(
            (4.0..=6.0).contains(&mean),
            "mean heads per round was {mean}"
        );
    });
}

#[test]
fn acceptance_08_data_counter_matches_phase_log() {
    gate("08 data accounting against the phase log", || {
        let config = SimConfig {
            node_count: 10,
            total_rounds: 30,
            ..SimConfig::default()
        };
        let packet_bits = config.packet_bits as u64;
        let mut sim = Simulation::new(validate_config(config).expect("valid config"));
        let mut prev_data = 0u64;
        for _ in 0..30 {
            let report = sim.step().expect("step");
            let finished_uplinks = report
                .events
                .iter()
                .filter(|e| {
                    matches!(
                        e,
                        PhaseEvent::HeadBsTx {
                            completed: true,
                            ..
                        }
                    )
                })
                .count() as u64;
            let delta = report.metrics.data_received_cumulative - prev_data;
            assert_eq!(delta, packet_bits * finished_uplinks);
            prev_data = report.metrics.data_received_cumulative;
        }
    });
}

#[test]
fn acceptance_09_budget_rule_is_exact() {
    gate("09 budget rule and allocation totals", || {
        let config = preset("n50");
        let efficiency = config.harvest.transfer_efficiency;
        let capacity = config.harvest.harvester_capacity;
        let mut sim = Simulation::new(validate_config(config).expect("valid config"));
        let mut prev_consumed: Option<f64> = None;
        for _ in 0..50 {
            let report = sim.step().expect("step");
            match prev_consumed {
                None => assert_eq!(report.budget, 0.0),
                Some(consumed) => {
                    assert_eq!(report.budget, (efficiency * consumed).min(capacity));
                }
            }
            if report.budget > 0.0 && !report.allocations.is_empty() {
                let total: f64 = report.allocations.values().sum();
                assert_eq!(total, report.budget);
            }
            prev_consumed = Some(report.consumed);
        }
    });
}

#[test]
fn acceptance_10_largest_preset_runs_quickly() {
    gate("10 n150 runtime bound", || {
        let started = Instant::now();
        let series =
            wsnsim_core::run(validate_config(preset("n150")).expect("valid config")).expect("run");
        assert_eq!(series.len(), 50);
        assert!(
            started.elapsed().as_secs_f64() < 5.0,
            "n150 run took {:?}",
            started.elapsed()
        );
    });
}

// Sanity for the helpers above: deployment and assignment stay in bounds on
// every preset, so the gate runs cannot silently operate on degenerate input.
#[test]
fn acceptance_fixture_presets_deploy_in_bounds() {
    for name in SimConfig::PRESET_NAMES {
        let validated = validate_config(preset(name)).expect("valid config");
        let deployment = deploy(&validated);
        assert_eq!(deployment.nodes.len(), validated.node_count as usize);
        for node in &deployment.nodes {
            assert!((0.0..=validated.area_width).contains(&node.position.x));
            assert!((0.0..=validated.area_height).contains(&node.position.y));
        }
        let heads: Vec<u32> = vec![0, 1];
        let assignment = assign_members(&deployment.nodes, &heads, 0);
        assert_eq!(assignment.heads, heads);
    }
}
