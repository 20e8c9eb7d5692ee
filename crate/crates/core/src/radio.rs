//! First-order radio energy model and the per-round energy accounting pass.
//!
//! Transmit cost switches from the free-space d^2 amplifier law to the
//! multipath d^4 law at the crossover distance. The round pass debits members
//! first, then heads, then idle/sleep, so mid-round deaths are deterministic;
//! a node that cannot pay an action in full drains to zero, dies, and the
//! action does not complete.

use crate::config::{RadioParams, ValidatedConfig};
use crate::geom::distance;
use crate::leach::ClusterAssignment;
use crate::node::{NodeState, Role};
use std::collections::BTreeMap;

/// Fraction of the round occupied by the member TDMA data sub-phase; each
/// member is awake for its 1/(cluster size) slice of it.
pub const DATA_SUBPHASE_FRACTION: f64 = 0.5;

/// Joules drained this round, per node / network-wide / per cluster (keyed by
/// head id, head plus its members). Records energy actually removed, never
/// more than a node held.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub per_node: BTreeMap<u32, f64>,
    pub network_total: f64,
    pub per_cluster: BTreeMap<u32, f64>,
}

impl EnergyLedger {
    pub fn consumed_of(&self, id: u32) -> f64 {
        self.per_node.get(&id).copied().unwrap_or(0.0)
    }
}

/// One radio action attempted during the data round. `completed` is false
/// when the node ran out of energy paying for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseEvent {
    MemberTx {
        member: u32,
        head: u32,
        completed: bool,
    },
    HeadRx {
        head: u32,
        member: u32,
        completed: bool,
    },
    HeadAggregate {
        head: u32,
        signals: u32,
        completed: bool,
    },
    HeadBsTx {
        head: u32,
        completed: bool,
    },
}

/// Energy to transmit `bits` over distance `d`.
pub fn tx_energy(bits: u32, d: f64, radio: &RadioParams) -> f64 {
    let b = bits as f64;
    let amp = if d < radio.crossover_distance() {
        radio.eps_fs * b * d.powi(2)
    } else {
        radio.eps_mp * b * d.powi(4)
    };
    radio.e_elec * b + amp
}

/// Energy to receive `bits`.
pub fn rx_energy(bits: u32, radio: &RadioParams) -> f64 {
    radio.e_elec * bits as f64
}

/// Energy to aggregate `n_signals` packets of `bits` each.
pub fn aggregate_energy(bits: u32, n_signals: u32, radio: &RadioParams) -> f64 {
    radio.e_aggregate * bits as f64 * n_signals as f64
}

/// Per-round listen/sleep/sample cost. Heads listen for the whole round;
/// members listen for their active fraction and sleep for the rest. Every
/// alive node pays one sample.
pub fn idle_sleep_energy(
    role: Role,
    round_duration: f64,
    active_fraction: f64,
    radio: &RadioParams,
) -> f64 {
    debug_assert!((0.0..=1.0).contains(&active_fraction));
    let listen_sleep = match role {
        Role::ClusterHead => radio.p_listen * round_duration,
        Role::Member | Role::Unassigned => {
            radio.p_listen * round_duration * active_fraction
                + radio.p_sleep * round_duration * (1.0 - active_fraction)
        }
    };
    listen_sleep + radio.e_sample
}

/// Debits `amount` (clamped to what the node holds) and reports whether the
/// node could pay in full.
fn debit(ledger: &mut EnergyLedger, node: &mut NodeState, amount: f64, threshold: f64) -> bool {
    let completed = node.can_pay(amount);
    let drained = node.drain(amount, threshold);
    *ledger.per_node.get_mut(&node.id).expect("ledger prefilled") += drained;
    completed
}

/// Runs the data round: member sample + transmit, head receive + aggregate +
/// base-station transmit, then idle/sleep per role. Returns the round ledger.
pub fn charge_round(
    nodes: &mut [NodeState],
    assignment: &ClusterAssignment,
    config: &ValidatedConfig,
) -> EnergyLedger {
    run_data_round(nodes, assignment, config, &mut None)
}

/// Same as [`charge_round`] but also returns the radio actions attempted, in
/// execution order, for independent recounts of the data path.
pub fn charge_round_logged(
    nodes: &mut [NodeState],
    assignment: &ClusterAssignment,
    config: &ValidatedConfig,
) -> (EnergyLedger, Vec<PhaseEvent>) {
    let mut events = Some(Vec::new());
    let ledger = run_data_round(nodes, assignment, config, &mut events);
    (ledger, events.unwrap())
}

fn run_data_round(
    nodes: &mut [NodeState],
    assignment: &ClusterAssignment,
    config: &ValidatedConfig,
    events: &mut Option<Vec<PhaseEvent>>,
) -> EnergyLedger {
    let radio = config.radio;
    let threshold = radio.death_threshold;
    let bits = config.packet_bits;
    let duration = config.round_duration;
    let bs = config.bs_position();

    let mut ledger = EnergyLedger {
        per_node: nodes.iter().map(|n| (n.id, 0.0)).collect(),
        network_total: 0.0,
        per_cluster: BTreeMap::new(),
    };
    let push = |events: &mut Option<Vec<PhaseEvent>>, e: PhaseEvent| {
        if let Some(log) = events {
            log.push(e);
        }
    };

    // Phase 1: members sample and transmit to their head in TDMA order.
    let mut arrived: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&head, slots) in &assignment.tdma {
        let head_pos = nodes[head as usize].position;
        for &m in slots {
            let member = &mut nodes[m as usize];
            if !member.alive {
                continue;
            }
            if !debit(&mut ledger, member, radio.e_sample, threshold) {
                continue; // died sampling; nothing to send
            }
            let cost = tx_energy(bits, distance(member.position, head_pos), &radio);
            let completed = debit(&mut ledger, member, cost, threshold);
            push(
                events,
                PhaseEvent::MemberTx {
                    member: m,
                    head,
                    completed,
                },
            );
            if completed {
                arrived.entry(head).or_default().push(m);
            }
        }
    }

    // Phase 2: heads receive, aggregate (own signal included), and forward
    // one packet to the base station. A head that dies mid-phase loses the
    // rest of its cluster's traffic.
    for &head in &assignment.heads {
        let arrived = arrived.remove(&head).unwrap_or_default();
        let head_node = &mut nodes[head as usize];
        if !head_node.alive {
            continue;
        }
        let mut received = 0u32;
        for &m in &arrived {
            let completed = debit(&mut ledger, head_node, rx_energy(bits, &radio), threshold);
            push(
                events,
                PhaseEvent::HeadRx {
                    head,
                    member: m,
                    completed,
                },
            );
            if !completed {
                break;
            }
            received += 1;
        }
        if !head_node.alive {
            continue;
        }
        let signals = received + 1;
        let agg = aggregate_energy(bits, signals, &radio);
        let completed = debit(&mut ledger, head_node, agg, threshold);
        push(
            events,
            PhaseEvent::HeadAggregate {
                head,
                signals,
                completed,
            },
        );
        if !head_node.alive || !completed {
            continue;
        }
        let cost = tx_energy(bits, distance(head_node.position, bs), &radio);
        let completed = debit(&mut ledger, head_node, cost, threshold);
        push(events, PhaseEvent::HeadBsTx { head, completed });
    }

    // Phase 3: idle/sleep. Heads pay full-round listening plus their sample;
    // members already paid their sample in phase 1.
    for (&head, slots) in &assignment.tdma {
        let head_node = &mut nodes[head as usize];
        if head_node.alive {
            let cost = radio.p_listen * duration + radio.e_sample;
            debit(&mut ledger, head_node, cost, threshold);
        }
        if slots.is_empty() {
            continue;
        }
        let af = DATA_SUBPHASE_FRACTION / slots.len() as f64;
        let cost = radio.p_listen * duration * af + radio.p_sleep * duration * (1.0 - af);
        for &m in slots {
            let member = &mut nodes[m as usize];
            if member.alive {
                debit(&mut ledger, member, cost, threshold);
            }
        }
    }

    for (&head, slots) in &assignment.tdma {
        let cluster: f64 = std::iter::once(head)
            .chain(slots.iter().copied())
            .map(|id| ledger.consumed_of(id))
            .sum();
        ledger.per_cluster.insert(head, cluster);
    }
    ledger.network_total = ledger.per_node.values().sum();
    ledger
}
