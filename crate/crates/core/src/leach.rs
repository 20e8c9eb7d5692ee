//! Cluster-head election and member assignment.
//!
//! The election follows the rotating-threshold scheme: a node that served as
//! head within the last ceil(1/p) rounds sits out; the rest self-elect with
//! probability p / (1 - p * (round mod ceil(1/p))). Members join the nearest
//! head and transmit in ascending-id TDMA order.

use crate::geom::distance;
use crate::node::NodeState;
use crate::rng::RandomSource;
use std::collections::BTreeMap;
use thiserror::Error;

/// One round's clustering: who leads, who follows whom, and in what order
/// members get their transmit slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub round_index: u32,
    /// Head ids, ascending.
    pub heads: Vec<u32>,
    /// Member id -> head id, alive non-heads only.
    pub members: BTreeMap<u32, u32>,
    /// Head id -> member ids in slot order (ascending id).
    pub tdma: BTreeMap<u32, Vec<u32>>,
}

impl ClusterAssignment {
    /// Head followed by its members in TDMA order; empty for an unknown head.
    pub fn cluster_ids(&self, head: u32) -> Vec<u32> {
        let mut ids = vec![head];
        if let Some(members) = self.tdma.get(&head) {
            ids.extend_from_slice(members);
        }
        ids
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ElectionError {
    #[error("no alive nodes to elect from")]
    NoAliveNodes,
}

/// Rounds a node must wait between head terms: ceil(1/p).
pub fn epoch_length(p: f64) -> u32 {
    (1.0 / p).ceil() as u32
}

/// Election threshold at `round`: p / (1 - p * (round mod ceil(1/p))),
/// capped at 1.
pub fn election_threshold(p: f64, round: u32) -> f64 {
    let pos = (round % epoch_length(p)) as f64;
    let denom = 1.0 - p * pos;
    if denom <= 0.0 {
        1.0
    } else {
        (p / denom).min(1.0)
    }
}

fn max_energy_node<'a, I>(candidates: I) -> Option<u32>
where
    I: Iterator<Item = &'a NodeState>,
{
    // Strict > keeps the lowest id among equal energies.
    let mut best: Option<&NodeState> = None;
    for node in candidates {
        match best {
            Some(b) if node.energy() <= b.energy() => {}
            _ => best = Some(node),
        }
    }
    best.map(|n| n.id)
}

/// Draws this round's cluster heads.
///
/// Nodes are considered in ascending id order, one draw per eligible alive
/// node (eligible: has not served within the last epoch). If no head comes
/// out of the draw, the max-energy eligible node is forced (ties broken by
/// lowest id); if every alive node is mid-epoch, the max-energy alive node
/// serves again.
pub fn elect_heads(
    nodes: &[NodeState],
    round: u32,
    p: f64,
    rng: &mut dyn RandomSource,
) -> Result<Vec<u32>, ElectionError> {
    if !nodes.iter().any(|n| n.alive) {
        return Err(ElectionError::NoAliveNodes);
    }
    let epoch = epoch_length(p);
    let threshold = election_threshold(p, round);

    let mut heads: Vec<u32> = Vec::new();
    for node in nodes.iter().filter(|n| n.alive) {
        if node.rounds_since_ch >= epoch && rng.next_f64() < threshold {
            heads.push(node.id);
        }
    }
    if heads.is_empty() {
        let eligible = max_energy_node(
            nodes
                .iter()
                .filter(|n| n.alive && n.rounds_since_ch >= epoch),
        );
        let forced = eligible
            .or_else(|| max_energy_node(nodes.iter().filter(|n| n.alive)))
            .expect("alive node exists");
        heads.push(forced);
    }
    heads.sort_unstable();
    Ok(heads)
}

/// Deterministic election used by the fixed-count mode: exactly
/// min(ceil(p * node_count), alive) heads, picked least-recently-served
/// (ties broken by lowest id).
pub fn elect_heads_fixed(nodes: &[NodeState], p: f64) -> Result<Vec<u32>, ElectionError> {
    let alive: Vec<&NodeState> = nodes.iter().filter(|n| n.alive).collect();
    if alive.is_empty() {
        return Err(ElectionError::NoAliveNodes);
    }
    let target = (p * nodes.len() as f64).ceil() as usize;
    let k = target.clamp(1, alive.len());

    let mut ranked: Vec<&&NodeState> = alive.iter().collect();
    // Stable sort on descending staleness keeps ascending id among ties.
    ranked.sort_by_key(|n| std::cmp::Reverse(n.rounds_since_ch));
    let mut heads: Vec<u32> = ranked[..k].iter().map(|n| n.id).collect();
    heads.sort_unstable();
    Ok(heads)
}

/// Joins every alive non-head to its nearest head (ties broken by lower head
/// id) and lays out TDMA slots in ascending member id.
///
/// Node ids index the slice: nodes[i].id == i. Heads must be sorted ascending.
pub fn assign_members(nodes: &[NodeState], heads: &[u32], round_index: u32) -> ClusterAssignment {
    debug_assert!(heads.windows(2).all(|w| w[0] < w[1]));
    let mut tdma: BTreeMap<u32, Vec<u32>> = heads.iter().map(|&h| (h, Vec::new())).collect();
    let head_nodes: Vec<&NodeState> = heads
        .iter()
        .map(|&h| {
            debug_assert_eq!(nodes[h as usize].id, h);
            &nodes[h as usize]
        })
        .collect();

    let mut members: BTreeMap<u32, u32> = BTreeMap::new();
    let is_head = |id: u32| heads.binary_search(&id).is_ok();
    for node in nodes.iter().filter(|n| n.alive && !is_head(n.id)) {
        let mut best_head = head_nodes[0];
        let mut best_d = distance(node.position, best_head.position);
        for head in &head_nodes[1..] {
            let d = distance(node.position, head.position);
            // Strict < keeps the lowest head id among equidistant heads
            // because heads are scanned in ascending id order.
            if d < best_d {
                best_d = d;
                best_head = head;
            }
        }
        members.insert(node.id, best_head.id);
        tdma.get_mut(&best_head.id)
            .expect("head present")
            .push(node.id);
    }
    // Ascending insertion order already yields ascending slots; keep the sort
    // as a guard against future reordering of the scan.
    for slots in tdma.values_mut() {
        slots.sort_unstable();
    }
    ClusterAssignment {
        round_index,
        heads: heads.to_vec(),
        members,
        tdma,
    }
}
