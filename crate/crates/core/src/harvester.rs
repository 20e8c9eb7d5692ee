//! Mobile RF charger: per-round budget, cluster allocations, the round trip
//! over cluster heads, and the distance-attenuated recharge itself.
//!
//! The charger is a broadcast source. Parking e joules at a head charges every
//! cluster node by e / max(d, d_min)^2 simultaneously, and the budget is
//! debited by e, not by the sum of gains. Emitted and delivered energy are
//! tracked separately.

use crate::config::HarvestParams;
use crate::geom::{distance, Point};
use crate::leach::ClusterAssignment;
use crate::node::NodeState;
use crate::radio::EnergyLedger;
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest waypoint count the exhaustive solver accepts.
pub const EXACT_TOUR_MAX: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TourError {
    #[error("exact tour solver supports at most {EXACT_TOUR_MAX} waypoints, got {0}")]
    TooManyWaypoints(usize),
}

/// Charger state across rounds. `budget` is this round's energy to hand out.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvesterState {
    pub budget: f64,
    pub position: Point,
    pub depot: Point,
    pub emitted_cumulative: f64,
    pub delivered_cumulative: f64,
}

impl HarvesterState {
    pub fn new(depot: Point) -> Self {
        Self {
            budget: 0.0,
            position: depot,
            depot,
            emitted_cumulative: 0.0,
            delivered_cumulative: 0.0,
        }
    }
}

/// Closed round trip depot -> heads -> depot.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub waypoints: Vec<(u32, Point)>,
    pub total_length: f64,
    pub start: Point,
}

/// Tour execution summary: which stops fit the time budget, which did not,
/// and the full round-trip time including the return leg.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitReport {
    pub visited: Vec<u32>,
    pub skipped: Vec<u32>,
    pub total_time: f64,
    pub forfeited: f64,
}

/// Round budget: the previous round's network consumption scaled by the
/// transfer efficiency, capped at the harvester capacity. No previous round
/// means no budget.
pub fn compute_budget(prev_network_total: Option<f64>, params: &HarvestParams) -> f64 {
    match prev_network_total {
        None => 0.0,
        Some(total) => (params.transfer_efficiency * total).min(params.harvester_capacity),
    }
}

/// Splits `budget` over the current clusters in proportion to what each
/// cluster's nodes consumed in the previous round. The final entry absorbs
/// the remainder so the allocations sum to `budget` exactly; clusters with no
/// recorded consumption anywhere fall back to an equal split.
pub fn allocate_per_cluster(
    budget: f64,
    prev_ledger: &EnergyLedger,
    assignment: &ClusterAssignment,
) -> BTreeMap<u32, f64> {
    let mut raw: BTreeMap<u32, f64> = BTreeMap::new();
    for (&head, slots) in &assignment.tdma {
        let cluster_prev: f64 = std::iter::once(head)
            .chain(slots.iter().copied())
            .map(|id| prev_ledger.consumed_of(id))
            .sum();
        raw.insert(head, cluster_prev);
    }
    let k = raw.len();
    if k == 0 || budget <= 0.0 {
        return raw.keys().map(|&h| (h, 0.0)).collect();
    }
    let total: f64 = raw.values().sum();

    let heads: Vec<u32> = raw.keys().copied().collect();
    let mut amounts: Vec<f64> = raw
        .values()
        .take(k - 1)
        .map(|&r| {
            if total > 0.0 {
                budget * (r / total)
            } else {
                budget / k as f64
            }
        })
        .collect();
    let last = seal_allocations(budget, &mut amounts);
    amounts.push(last);
    heads.into_iter().zip(amounts).collect()
}

/// Final allocation such that the in-order float sum over all allocations
/// lands on `budget` bit-exactly. When every candidate puts the sum on a
/// rounding tie that skips `budget`, shifts the penultimate allocation by an
/// ulp or two to break the tie and refits.
fn seal_allocations(budget: f64, amounts: &mut [f64]) -> f64 {
    let prefix = |xs: &[f64]| xs.iter().fold(0.0, |s, a| s + a);
    let mut last = fit_remainder(budget, prefix(amounts));
    if amounts.is_empty() || prefix(amounts) + last == budget {
        return last;
    }
    let original = *amounts.last().expect("non-empty");
    for steps in [1i32, -1, 2, -2, 3, -3] {
        let mut nudged = original;
        for _ in 0..steps.abs() {
            nudged = if steps > 0 {
                nudged.next_up()
            } else {
                nudged.next_down()
            };
        }
        if nudged < 0.0 {
            continue;
        }
        *amounts.last_mut().expect("non-empty") = nudged;
        last = fit_remainder(budget, prefix(amounts));
        if prefix(amounts) + last == budget {
            return last;
        }
    }
    *amounts.last_mut().expect("non-empty") = original;
    fit_remainder(budget, prefix(amounts))
}

/// Remainder for the final allocation such that `assigned + remainder`
/// evaluates to `budget` bit-exactly. The naive `budget - assigned` can land
/// one ulp off after the final addition rounds; feed the residual back, then
/// walk single ulps if the feedback oscillates on a rounding tie.
fn fit_remainder(budget: f64, assigned: f64) -> f64 {
    let mut last = (budget - assigned).max(0.0);
    for _ in 0..32 {
        let err = (assigned + last) - budget;
        if err == 0.0 {
            return last;
        }
        let corrected = last - err;
        if corrected == last || corrected < 0.0 {
            break;
        }
        last = corrected;
    }
    let mut best = last;
    let mut best_err = ((assigned + last) - budget).abs();
    for _ in 0..64 {
        let step = if assigned + last > budget {
            last.next_down()
        } else {
            last.next_up()
        };
        if step < 0.0 {
            break;
        }
        last = step;
        let err = ((assigned + last) - budget).abs();
        if err == 0.0 {
            return last;
        }
        if err < best_err {
            best = last;
            best_err = err;
        }
    }
    best
}

fn closed_length(depot: Point, order: &[(u32, Point)]) -> f64 {
    let Some(first) = order.first() else {
        return 0.0;
    };
    let mut len = distance(depot, first.1);
    for pair in order.windows(2) {
        len += distance(pair[0].1, pair[1].1);
    }
    len + distance(order.last().expect("non-empty").1, depot)
}

/// Nearest-neighbor construction; ties go to the lower head id.
fn nearest_neighbor_order(heads: &[(u32, Point)], depot: Point) -> Vec<(u32, Point)> {
    let mut remaining: Vec<(u32, Point)> = heads.to_vec();
    remaining.sort_by_key(|&(id, _)| id);
    let mut order = Vec::with_capacity(remaining.len());
    let mut current = depot;
    while !remaining.is_empty() {
        let mut best = 0;
        for i in 1..remaining.len() {
            // Strict < keeps the lowest id among equidistant candidates.
            if distance(current, remaining[i].1) < distance(current, remaining[best].1) {
                best = i;
            }
        }
        let next = remaining.remove(best);
        current = next.1;
        order.push(next);
    }
    order
}

/// Best-improvement 2-opt: repeatedly reverse the segment whose endpoints'
/// reconnection shortens the closed tour the most, until no swap improves by
/// more than 1e-9 m.
fn two_opt(depot: Point, order: &mut [(u32, Point)]) {
    let k = order.len();
    loop {
        let mut best_delta = -1e-9;
        let mut best: Option<(usize, usize)> = None;
        for i in 0..k {
            let prev = if i == 0 { depot } else { order[i - 1].1 };
            for j in i + 1..k {
                let next = if j == k - 1 { depot } else { order[j + 1].1 };
                let delta = distance(prev, order[j].1) + distance(order[i].1, next)
                    - distance(prev, order[i].1)
                    - distance(order[j].1, next);
                if delta < best_delta {
                    best_delta = delta;
                    best = Some((i, j));
                }
            }
        }
        match best {
            Some((i, j)) => order[i..=j].reverse(),
            None => return,
        }
    }
}

/// Plans the charger's closed tour: nearest-neighbor then 2-opt.
pub fn plan_tour(heads: &[(u32, Point)], depot: Point) -> Tour {
    let mut order = nearest_neighbor_order(heads, depot);
    two_opt(depot, &mut order);
    Tour {
        total_length: closed_length(depot, &order),
        waypoints: order,
        start: depot,
    }
}

/// Length of the nearest-neighbor construction alone, for comparing against
/// the improved tour.
pub fn nearest_neighbor_length(heads: &[(u32, Point)], depot: Point) -> f64 {
    closed_length(depot, &nearest_neighbor_order(heads, depot))
}

/// Optimal closed tour over at most [`EXACT_TOUR_MAX`] heads, by dynamic
/// programming over visited subsets.
pub fn exact_tour(heads: &[(u32, Point)], depot: Point) -> Result<Tour, TourError> {
    let n = heads.len();
    if n > EXACT_TOUR_MAX {
        return Err(TourError::TooManyWaypoints(n));
    }
    let mut pts: Vec<(u32, Point)> = heads.to_vec();
    pts.sort_by_key(|&(id, _)| id);
    if n == 0 {
        return Ok(Tour {
            waypoints: Vec::new(),
            total_length: 0.0,
            start: depot,
        });
    }

    let from_depot: Vec<f64> = pts.iter().map(|p| distance(depot, p.1)).collect();
    let full = (1usize << n) - 1;
    let mut cost = vec![vec![f64::INFINITY; n]; 1 << n];
    let mut parent = vec![vec![usize::MAX; n]; 1 << n];
    for (i, &d) in from_depot.iter().enumerate() {
        cost[1 << i][i] = d;
    }
    for mask in 1..=full {
        for last in 0..n {
            if mask & (1 << last) == 0 || !cost[mask][last].is_finite() {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let extended = mask | (1 << next);
                let c = cost[mask][last] + distance(pts[last].1, pts[next].1);
                if c < cost[extended][next] {
                    cost[extended][next] = c;
                    parent[extended][next] = last;
                }
            }
        }
    }

    let (best_last, best_total) = (0..n)
        .map(|i| (i, cost[full][i] + from_depot[i]))
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite costs"))
        .expect("n >= 1");

    let mut rev = Vec::with_capacity(n);
    let mut mask = full;
    let mut cur = best_last;
    loop {
        rev.push(cur);
        let p = parent[mask][cur];
        mask &= !(1 << cur);
        if mask == 0 {
            break;
        }
        cur = p;
    }
    rev.reverse();

    Ok(Tour {
        waypoints: rev.into_iter().map(|i| pts[i]).collect(),
        total_length: best_total,
        start: depot,
    })
}

/// Parks the charger at `head_position` and radiates `e_h_cluster` joules:
/// node i gains e_h_cluster / max(d_i, d_min)^2, clamped by its battery.
/// Returns the energy actually stored across the cluster.
pub fn recharge_cluster(
    nodes: &mut [NodeState],
    cluster_ids: &[u32],
    head_position: Point,
    e_h_cluster: f64,
    params: &HarvestParams,
    battery_capacity: f64,
    death_threshold: f64,
) -> f64 {
    debug_assert!(e_h_cluster >= 0.0);
    let mut delivered = 0.0;
    for &id in cluster_ids {
        let node = &mut nodes[id as usize];
        let d = distance(node.position, head_position).max(params.d_min);
        let gain = e_h_cluster / (d * d);
        delivered += node.credit(
            gain,
            battery_capacity,
            death_threshold,
            params.allow_revival,
        );
    }
    delivered
}

/// Walks the tour within `time_budget` seconds. Each stop costs its leg's
/// travel time plus the dwell time; a stop that would overrun is skipped (its
/// allocation forfeited) and the charger carries on to the next one. The
/// return leg is not charged against the budget but is part of the reported
/// round-trip time.
pub fn execute_visits(
    tour: &Tour,
    allocations: &BTreeMap<u32, f64>,
    time_budget: f64,
    params: &HarvestParams,
) -> VisitReport {
    let mut visited = Vec::new();
    let mut skipped = Vec::new();
    let mut forfeited = 0.0;
    let mut elapsed = 0.0;
    let mut current = tour.start;
    for &(id, pos) in &tour.waypoints {
        let stop_cost = distance(current, pos) / params.harvester_speed + params.dwell_time;
        if elapsed + stop_cost <= time_budget {
            elapsed += stop_cost;
            current = pos;
            visited.push(id);
        } else {
            skipped.push(id);
            forfeited += allocations.get(&id).copied().unwrap_or(0.0);
        }
    }
    VisitReport {
        visited,
        skipped,
        total_time: elapsed + distance(current, tour.start) / params.harvester_speed,
        forfeited,
    }
}
