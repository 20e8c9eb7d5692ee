//! Per-round output record, one row per completed round.

use serde::{Deserialize, Serialize};

/// Snapshot taken at the end of a round. Consumed/emitted/delivered/data
/// fields are cumulative since round 0; tour length and visit counts are this
/// round's. Emitted is what the charger radiated, delivered is what batteries
/// actually stored after attenuation and capacity clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round_index: u32,
    /// Seconds elapsed at round end: (round_index + 1) * round_duration.
    pub sim_time: f64,
    pub alive_count: u32,
    pub consumed_cumulative: f64,
    pub emitted_cumulative: f64,
    pub delivered_cumulative: f64,
    pub data_received_cumulative: u64,
    pub ch_count: u32,
    pub tour_length: f64,
    pub clusters_visited: u32,
}
