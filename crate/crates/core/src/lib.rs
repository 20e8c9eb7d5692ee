//! Deterministic round-based simulator of a clustered wireless sensor
//! network kept alive by a mobile RF charger.
//!
//! Each round the network elects cluster heads, members hand their readings
//! up over TDMA slots, heads aggregate and forward to the base station, and a
//! charger tours the cluster heads radiating energy budgeted from the
//! previous round's consumption. Every draw comes from seed-derived streams,
//! so equal configs produce byte-identical output.

pub mod config;
pub mod engine;
pub mod geom;
pub mod harvester;
pub mod io;
pub mod leach;
pub mod metrics;
pub mod node;
pub mod radio;
pub mod rng;
pub mod topology;

pub use config::{
    validate_config, ConfigError, HarvestParams, RadioParams, SimConfig, TourSolver,
    ValidatedConfig,
};
pub use engine::{run, RoundReport, SimError, Simulation};
pub use geom::{distance, Point};
pub use harvester::{
    allocate_per_cluster, compute_budget, exact_tour, execute_visits, plan_tour, recharge_cluster,
    HarvesterState, Tour, TourError, VisitReport, EXACT_TOUR_MAX,
};
pub use leach::{
    assign_members, elect_heads, elect_heads_fixed, epoch_length, ClusterAssignment, ElectionError,
};
pub use metrics::RoundMetrics;
pub use node::{NodeState, Role};
pub use radio::{
    aggregate_energy, charge_round, charge_round_logged, idle_sleep_energy, rx_energy, tx_energy,
    EnergyLedger, PhaseEvent,
};
pub use rng::{split_stream, RandomSource};
pub use topology::{deploy, Deployment};
