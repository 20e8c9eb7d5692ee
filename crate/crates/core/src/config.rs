//! Scenario configuration: every tunable of the simulation plus validation.
//!
//! A raw [`SimConfig`] can come from defaults, a preset, or a JSON file whose
//! keys mirror the field names. [`validate_config`] checks every invariant at
//! once and returns a [`ValidatedConfig`] that the rest of the crate accepts.

use crate::geom::Point;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// First-order radio model constants plus the idle/sleep/sampling costs.
///
/// Transmission pays a per-bit electronics cost and an amplifier cost that is
/// quadratic in distance below the crossover distance and quartic above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    /// Electronics cost per bit, transmit and receive (J/bit).
    pub e_elec: f64,
    /// Free-space amplifier coefficient (J/bit/m^2).
    pub eps_fs: f64,
    /// Multipath amplifier coefficient (J/bit/m^4).
    pub eps_mp: f64,
    /// Aggregation cost at the cluster head (J/bit/signal).
    pub e_aggregate: f64,
    /// Idle listening power (W).
    pub p_listen: f64,
    /// Sleep power (W).
    pub p_sleep: f64,
    /// Energy per sensing sample (J).
    pub e_sample: f64,
    /// Energy at or below which a node is not alive (J).
    pub death_threshold: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            e_aggregate: 5e-9,
            p_listen: 1e-5,
            p_sleep: 1e-7,
            e_sample: 1e-7,
            death_threshold: 0.0,
        }
    }
}

impl RadioParams {
    /// Distance at which the free-space and multipath amplifier laws agree.
    ///
    /// Infinite when `eps_mp == 0` (the free-space law then applies everywhere).
    pub fn crossover_distance(&self) -> f64 {
        if self.eps_mp > 0.0 {
            (self.eps_fs / self.eps_mp).sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Mobile charger parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestParams {
    /// Ratio of charger budget to previous-round network consumption, in (0,1].
    pub transfer_efficiency: f64,
    /// Clamp floor for the recharge-gain denominator (m).
    pub d_min: f64,
    /// Dwell time per cluster-head stop (s).
    pub dwell_time: f64,
    /// Charger travel speed (m/s).
    pub harvester_speed: f64,
    /// Maximum budget per round (J).
    pub harvester_capacity: f64,
    /// Whether recharging can return a dead node to service.
    pub allow_revival: bool,
    /// Bank skipped-stop allocations into the next round's budget instead of
    /// forfeiting them.
    pub carry_over: bool,
}

impl Default for HarvestParams {
    fn default() -> Self {
        Self {
            transfer_efficiency: 1.0,
            d_min: 1.0,
            dwell_time: 1.0,
            harvester_speed: 5.0,
            harvester_capacity: 100.0,
            allow_revival: true,
            carry_over: false,
        }
    }
}

/// Which tour planner the engine uses for the charger's round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TourSolver {
    /// Nearest-neighbor construction improved by 2-opt.
    #[default]
    Heuristic,
    /// Exhaustive optimum; only valid for at most [`crate::harvester::EXACT_TOUR_MAX`] heads.
    Exact,
}

/// Full scenario description. JSON configuration files mirror these field
/// names; missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub node_count: u32,
    /// Cluster-head election probability, in (0,1].
    pub ch_probability: f64,
    /// Starting energy per node (J).
    pub initial_energy: f64,
    /// Battery capacity per node (J); recharge clamps here.
    pub battery_capacity: f64,
    /// Duration of one round (s).
    pub round_duration: f64,
    pub total_rounds: u32,
    /// Bits per sensed report.
    pub packet_bits: u32,
    pub radio: RadioParams,
    pub harvest: HarvestParams,
    /// Base station position; `None` means the area center.
    pub bs_position: Option<Point>,
    /// Charger depot; `None` means 10 m left of the area at mid-height.
    /// Must lie outside the deployment rectangle.
    pub depot_position: Option<Point>,
    pub rng_seed: u64,
    pub harvester_enabled: bool,
    /// Elect exactly `ceil(ch_probability * node_count)` heads per round
    /// instead of running the probabilistic election.
    pub fixed_ch_count: bool,
    pub tour_solver: TourSolver,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            area_width: 100.0,
            area_height: 100.0,
            node_count: 50,
            ch_probability: 0.05,
            initial_energy: 2.0,
            battery_capacity: 2.0,
            round_duration: 20.0,
            total_rounds: 50,
            packet_bits: 2000,
            radio: RadioParams::default(),
            harvest: HarvestParams::default(),
            bs_position: None,
            depot_position: None,
            rng_seed: 42,
            harvester_enabled: true,
            fixed_ch_count: false,
            tour_solver: TourSolver::Heuristic,
        }
    }
}

impl SimConfig {
    /// Scenario presets `n50`, `n100`, `n150`: the defaults with the node
    /// count set.
    pub fn preset(name: &str) -> Option<SimConfig> {
        let node_count = match name {
            "n50" => 50,
            "n100" => 100,
            "n150" => 150,
            _ => return None,
        };
        Some(SimConfig {
            node_count,
            ..SimConfig::default()
        })
    }

    /// Names accepted by [`SimConfig::preset`].
    pub const PRESET_NAMES: [&'static str; 3] = ["n50", "n100", "n150"];
}

/// Raised when a configuration violates one or more invariants; the message
/// lists every violation, not just the first.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {}", violations.join("; "))]
    Invalid { violations: Vec<String> },
}

/// A configuration that passed validation, with the optional positions
/// resolved to concrete points.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: SimConfig,
    bs: Point,
    depot: Point,
}

impl ValidatedConfig {
    pub fn bs_position(&self) -> Point {
        self.bs
    }

    pub fn depot_position(&self) -> Point {
        self.depot
    }

    pub fn raw(&self) -> &SimConfig {
        &self.config
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = SimConfig;

    fn deref(&self) -> &SimConfig {
        &self.config
    }
}

fn check(violations: &mut Vec<String>, ok: bool, message: &str) {
    if !ok {
        violations.push(message.to_string());
    }
}

/// Checks every invariant of `config` and resolves defaults for the base
/// station and depot positions. All violations are reported together.
pub fn validate_config(config: SimConfig) -> Result<ValidatedConfig, ConfigError> {
    let mut violations = Vec::new();
    let v = &mut violations;

    check(
        v,
        config.area_width > 0.0 && config.area_width.is_finite(),
        "area_width must be > 0 and finite",
    );
    check(
        v,
        config.area_height > 0.0 && config.area_height.is_finite(),
        "area_height must be > 0 and finite",
    );
    check(v, config.node_count >= 1, "node_count must be >= 1");
    check(
        v,
        config.ch_probability > 0.0 && config.ch_probability <= 1.0,
        "ch_probability must be in (0, 1]",
    );
    check(v, config.initial_energy > 0.0, "initial_energy must be > 0");
    check(
        v,
        config.initial_energy <= config.battery_capacity,
        "initial_energy must be <= battery_capacity",
    );
    check(
        v,
        config.round_duration > 0.0 && config.round_duration.is_finite(),
        "round_duration must be > 0 and finite",
    );
    check(v, config.packet_bits > 0, "packet_bits must be > 0");

    let r = &config.radio;
    check(v, r.e_elec >= 0.0, "radio.e_elec must be >= 0");
    check(v, r.eps_fs >= 0.0, "radio.eps_fs must be >= 0");
    check(v, r.eps_mp >= 0.0, "radio.eps_mp must be >= 0");
    check(v, r.e_aggregate >= 0.0, "radio.e_aggregate must be >= 0");
    check(v, r.p_listen >= 0.0, "radio.p_listen must be >= 0");
    check(v, r.p_sleep >= 0.0, "radio.p_sleep must be >= 0");
    check(
        v,
        r.p_sleep <= r.p_listen,
        "radio.p_sleep must be <= radio.p_listen",
    );
    check(v, r.e_sample >= 0.0, "radio.e_sample must be >= 0");
    check(
        v,
        r.death_threshold >= 0.0,
        "radio.death_threshold must be >= 0",
    );
    check(
        v,
        r.eps_mp == 0.0 || r.eps_fs > 0.0,
        "radio.eps_fs must be > 0 when radio.eps_mp > 0 (crossover distance must be finite and positive)",
    );

    let h = &config.harvest;
    check(
        v,
        h.transfer_efficiency > 0.0 && h.transfer_efficiency <= 1.0,
        "harvest.transfer_efficiency must be in (0, 1]",
    );
    check(v, h.d_min > 0.0, "harvest.d_min must be > 0");
    check(v, h.dwell_time >= 0.0, "harvest.dwell_time must be >= 0");
    check(
        v,
        h.harvester_speed > 0.0,
        "harvest.harvester_speed must be > 0",
    );
    check(
        v,
        h.harvester_capacity > 0.0,
        "harvest.harvester_capacity must be > 0",
    );

    let bs = config.bs_position.unwrap_or(Point::new(
        config.area_width / 2.0,
        config.area_height / 2.0,
    ));
    let depot = config
        .depot_position
        .unwrap_or(Point::new(-10.0, config.area_height / 2.0));

    check(v, bs.is_finite(), "bs_position must be finite");
    check(v, depot.is_finite(), "depot_position must be finite");
    let depot_inside = depot.x >= 0.0
        && depot.x <= config.area_width
        && depot.y >= 0.0
        && depot.y <= config.area_height;
    check(
        v,
        !depot_inside || !depot.is_finite(),
        "depot_position must lie outside the deployment rectangle",
    );

    if violations.is_empty() {
        Ok(ValidatedConfig { config, bs, depot })
    } else {
        Err(ConfigError::Invalid { violations })
    }
}
