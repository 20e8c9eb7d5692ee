//! Round loop. Each round runs a fixed phase sequence: election, member
//! assignment, data traffic, budget computation from the previous round's
//! ledger, tour planning, visits with recharge, then a metrics snapshot.
//! Equal config and seed give equal state, round after round.

use crate::config::{TourSolver, ValidatedConfig};
use crate::geom::{distance, Point};
use crate::harvester::{
    allocate_per_cluster, compute_budget, exact_tour, execute_visits, plan_tour, recharge_cluster,
    HarvesterState, Tour, TourError, VisitReport,
};
use crate::leach::{
    assign_members, elect_heads, elect_heads_fixed, ClusterAssignment, ElectionError,
};
use crate::metrics::RoundMetrics;
use crate::node::{NodeState, Role};
use crate::radio::{charge_round_logged, EnergyLedger, PhaseEvent};
use crate::rng::{split_stream, SeededStream};
use crate::topology::{deploy, Deployment};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Tour(#[from] TourError),
}

/// Everything that happened in one round, for callers that want more than
/// the metrics row.
#[derive(Debug, Clone)]
pub struct RoundReport {
    pub metrics: RoundMetrics,
    pub consumed: f64,
    pub emitted: f64,
    pub delivered: f64,
    pub budget: f64,
    pub allocations: BTreeMap<u32, f64>,
    pub assignment: Option<ClusterAssignment>,
    pub tour: Option<Tour>,
    pub visits: Option<VisitReport>,
    pub events: Vec<PhaseEvent>,
    /// True when no node was alive to elect; the round still emits a row.
    pub network_dead: bool,
}

pub struct Simulation {
    config: ValidatedConfig,
    nodes: Vec<NodeState>,
    harvester: HarvesterState,
    round: u32,
    prev_ledger: Option<EnergyLedger>,
    /// Forfeited allocations carried into the next budget (carry_over only).
    banked: f64,
    consumed_cumulative: f64,
    data_cumulative: u64,
    metrics: Vec<RoundMetrics>,
    election_rng: SeededStream,
}

impl Simulation {
    pub fn new(config: ValidatedConfig) -> Self {
        let Deployment {
            nodes,
            depot_position,
            ..
        } = deploy(&config);
        let election_rng = split_stream(config.rng_seed, "elect");
        Self {
            nodes,
            harvester: HarvesterState::new(depot_position),
            round: 0,
            prev_ledger: None,
            banked: 0.0,
            consumed_cumulative: 0.0,
            data_cumulative: 0,
            metrics: Vec::with_capacity(config.total_rounds as usize),
            election_rng,
            config,
        }
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn metrics(&self) -> &[RoundMetrics] {
        &self.metrics
    }

    pub fn into_metrics(self) -> Vec<RoundMetrics> {
        self.metrics
    }

    /// Sum of all node energies right now.
    pub fn total_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.energy()).sum()
    }

    /// Executes one round and appends its metrics row.
    pub fn step(&mut self) -> Result<RoundReport, SimError> {
        let round = self.round;

        // Phase 1: election. Staleness counters tick first so a node that
        // served at round r is eligible again exactly at round r + epoch.
        for node in &mut self.nodes {
            node.rounds_since_ch = node.rounds_since_ch.saturating_add(1);
        }
        let elected = if self.config.fixed_ch_count {
            elect_heads_fixed(&self.nodes, self.config.ch_probability)
        } else {
            elect_heads(
                &self.nodes,
                round,
                self.config.ch_probability,
                &mut self.election_rng,
            )
        };
        let heads = match elected {
            Ok(heads) => heads,
            Err(ElectionError::NoAliveNodes) => return Ok(self.flat_round()),
        };
        for node in &mut self.nodes {
            if heads.binary_search(&node.id).is_ok() {
                node.rounds_since_ch = 0;
                node.role = Role::ClusterHead;
            } else {
                node.role = if node.alive {
                    Role::Member
                } else {
                    Role::Unassigned
                };
            }
        }

        // Phase 2: clusters and TDMA slots.
        let assignment = assign_members(&self.nodes, &heads, round);

        // Phase 3: data traffic, debited in deterministic order.
        let (ledger, events) = charge_round_logged(&mut self.nodes, &assignment, &self.config);
        let consumed = ledger.network_total;
        let bs_completed = events
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
        self.data_cumulative += u64::from(self.config.packet_bits) * bs_completed;

        // Phases 4-7: the BS publishes the previous ledger, the charger
        // budgets, plans its trip, and recharges what fits the round.
        let mut budget = 0.0;
        let mut emitted = 0.0;
        let mut delivered = 0.0;
        let mut allocations = BTreeMap::new();
        let mut tour = None;
        let mut visits = None;
        if self.config.harvester_enabled {
            let base = compute_budget(
                self.prev_ledger.as_ref().map(|l| l.network_total),
                &self.config.harvest,
            );
            budget = if self.config.harvest.carry_over {
                (base + self.banked).min(self.config.harvest.harvester_capacity)
            } else {
                base
            };
            if budget > 0.0 {
                let prev = self
                    .prev_ledger
                    .as_ref()
                    .expect("positive budget implies a previous round");
                allocations = allocate_per_cluster(budget, prev, &assignment);

                let waypoints: Vec<(u32, Point)> = assignment
                    .heads
                    .iter()
                    .map(|&h| (h, self.nodes[h as usize].position))
                    .collect();
                let planned = match self.config.tour_solver {
                    TourSolver::Heuristic => plan_tour(&waypoints, self.harvester.depot),
                    TourSolver::Exact => exact_tour(&waypoints, self.harvester.depot)?,
                };
                let report = execute_visits(
                    &planned,
                    &allocations,
                    self.config.round_duration,
                    &self.config.harvest,
                );

                let attached = self.attach_unclustered(&assignment);
                for &head in &report.visited {
                    let e_h = allocations[&head];
                    let mut cluster = assignment.cluster_ids(head);
                    if let Some(extra) = attached.get(&head) {
                        cluster.extend_from_slice(extra);
                    }
                    let head_pos = self.nodes[head as usize].position;
                    delivered += recharge_cluster(
                        &mut self.nodes,
                        &cluster,
                        head_pos,
                        e_h,
                        &self.config.harvest,
                        self.config.battery_capacity,
                        self.config.radio.death_threshold,
                    );
                    emitted += e_h;
                }
                self.banked = if self.config.harvest.carry_over {
                    report.forfeited
                } else {
                    0.0
                };
                tour = Some(planned);
                visits = Some(report);
            }
        }
        self.harvester.budget = budget;
        self.harvester.position = self.harvester.depot;
        self.harvester.emitted_cumulative += emitted;
        self.harvester.delivered_cumulative += delivered;

        // Phase 8: snapshot.
        self.consumed_cumulative += consumed;
        let metrics = RoundMetrics {
            round_index: round,
            sim_time: (f64::from(round) + 1.0) * self.config.round_duration,
            alive_count: self.alive_count(),
            consumed_cumulative: self.consumed_cumulative,
            emitted_cumulative: self.harvester.emitted_cumulative,
            delivered_cumulative: self.harvester.delivered_cumulative,
            data_received_cumulative: self.data_cumulative,
            ch_count: heads.len() as u32,
            tour_length: tour.as_ref().map_or(0.0, |t| t.total_length),
            clusters_visited: visits.as_ref().map_or(0, |v| v.visited.len() as u32),
        };
        self.metrics.push(metrics);
        self.prev_ledger = Some(ledger);
        self.round += 1;

        Ok(RoundReport {
            metrics,
            consumed,
            emitted,
            delivered,
            budget,
            allocations,
            assignment: Some(assignment),
            tour,
            visits,
            events,
            network_dead: false,
        })
    }

    fn alive_count(&self) -> u32 {
        self.nodes.iter().filter(|n| n.alive).count() as u32
    }

    /// Nodes that were dead at assignment time belong to no cluster; for the
    /// recharge phase each one rides along with the nearest head (ties to the
    /// lower head id) so revival stays reachable.
    fn attach_unclustered(&self, assignment: &ClusterAssignment) -> BTreeMap<u32, Vec<u32>> {
        let mut attached: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for node in &self.nodes {
            if assignment.tdma.contains_key(&node.id) || assignment.members.contains_key(&node.id) {
                continue;
            }
            let &nearest = assignment
                .heads
                .iter()
                .min_by(|&&a, &&b| {
                    let da = distance(node.position, self.nodes[a as usize].position);
                    let db = distance(node.position, self.nodes[b as usize].position);
                    da.partial_cmp(&db).expect("finite distances")
                })
                .expect("heads non-empty");
            attached.entry(nearest).or_default().push(node.id);
        }
        attached
    }

    /// Round with nothing alive: cumulative totals hold, the loop goes on.
    fn flat_round(&mut self) -> RoundReport {
        let round = self.round;
        let metrics = RoundMetrics {
            round_index: round,
            sim_time: (f64::from(round) + 1.0) * self.config.round_duration,
            alive_count: 0,
            consumed_cumulative: self.consumed_cumulative,
            emitted_cumulative: self.harvester.emitted_cumulative,
            delivered_cumulative: self.harvester.delivered_cumulative,
            data_received_cumulative: self.data_cumulative,
            ch_count: 0,
            tour_length: 0.0,
            clusters_visited: 0,
        };
        self.metrics.push(metrics);
        self.prev_ledger = Some(EnergyLedger::default());
        self.round += 1;
        RoundReport {
            metrics,
            consumed: 0.0,
            emitted: 0.0,
            delivered: 0.0,
            budget: 0.0,
            allocations: BTreeMap::new(),
            assignment: None,
            tour: None,
            visits: None,
            events: Vec::new(),
            network_dead: true,
        }
    }
}

/// Runs a full scenario and returns its metrics series.
pub fn run(config: ValidatedConfig) -> Result<Vec<RoundMetrics>, SimError> {
    let mut sim = Simulation::new(config);
    for _ in 0..sim.config.total_rounds {
        sim.step()?;
    }
    Ok(sim.into_metrics())
}
