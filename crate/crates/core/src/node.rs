//! Per-node runtime state.
//!
//! Energy is private: every change goes through [`NodeState::drain`] or
//! [`NodeState::credit`], which keep the `alive` flag consistent with the
//! death threshold and report the amount actually moved.

use crate::geom::Point;
use serde::{Deserialize, Serialize};

/// Role a node plays in the current round. Dead nodes are unassigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    ClusterHead,
    Member,
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: u32,
    pub position: Point,
    energy: f64,
    pub alive: bool,
    pub role: Role,
    /// Rounds since this node last served as cluster head. Starts saturated
    /// so every node is eligible in round 0.
    pub rounds_since_ch: u32,
}

impl NodeState {
    pub fn new(id: u32, position: Point, energy: f64) -> Self {
        Self {
            id,
            position,
            energy,
            alive: energy > 0.0,
            role: Role::Unassigned,
            rounds_since_ch: u32::MAX,
        }
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Whether the node can pay `cost` in full before starting an action.
    pub fn can_pay(&self, cost: f64) -> bool {
        self.energy >= cost
    }

    /// Removes up to `amount` joules and returns what was actually drained.
    /// Energy never goes below zero; `alive` is refreshed against `threshold`.
    pub fn drain(&mut self, amount: f64, threshold: f64) -> f64 {
        debug_assert!(amount >= 0.0);
        let drained = amount.min(self.energy);
        self.energy -= drained;
        self.alive = self.energy > threshold;
        drained
    }

    /// Adds up to `gain` joules, clamping at `capacity`, and returns the
    /// amount actually stored. A dead node only accepts energy when
    /// `allow_revival` is set; otherwise the credit is refused so the
    /// alive flag stays consistent with the stored energy.
    pub fn credit(&mut self, gain: f64, capacity: f64, threshold: f64, allow_revival: bool) -> f64 {
        debug_assert!(gain >= 0.0);
        if !self.alive && !allow_revival {
            return 0.0;
        }
        let stored = gain.min(capacity - self.energy).max(0.0);
        // The min guards against the rounded sum overshooting by half an ulp.
        self.energy = (self.energy + stored).min(capacity);
        self.alive = self.energy > threshold;
        stored
    }
}
