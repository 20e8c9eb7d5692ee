//! Node deployment: uniform i.i.d. positions over the deployment rectangle,
//! drawn from the seed-derived "deploy" stream so runs are reproducible.

use crate::config::ValidatedConfig;
use crate::geom::Point;
use crate::node::NodeState;
use crate::rng::{split_stream, RandomSource};

/// Immutable placement for a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub nodes: Vec<NodeState>,
    pub bs_position: Point,
    pub depot_position: Point,
}

/// Places `node_count` nodes uniformly over the rectangle, each with the
/// configured initial energy. Same config, same placement, bit for bit.
pub fn deploy(config: &ValidatedConfig) -> Deployment {
    let mut stream = split_stream(config.rng_seed, "deploy");
    let nodes = (0..config.node_count)
        .map(|id| {
            let x = stream.next_f64() * config.area_width;
            let y = stream.next_f64() * config.area_height;
            NodeState::new(id, Point::new(x, y), config.initial_energy)
        })
        .collect();
    Deployment {
        nodes,
        bs_position: config.bs_position(),
        depot_position: config.depot_position(),
    }
}
