//! Fixtures shared by the benchmarks.

use leewave_core::{Atmosphere, Config, GridSpec, Node, PhysicalPoint};

/// Reference atmosphere and its default random nodes.
pub fn reference() -> (Atmosphere, Vec<Node>) {
    let atm = Config::default().atmosphere().expect("reference config is valid");
    let nodes = GridSpec::default_random(leewave_core::DEFAULT_SEED)
        .nodes(atm.flow())
        .expect("reference grid is admissible");
    (atm, nodes)
}

/// Physical positions of the nodes, paired with their times.
pub fn positions(atm: &Atmosphere, nodes: &[Node]) -> Vec<(PhysicalPoint, f64)> {
    nodes
        .iter()
        .map(|n| (atm.flow().flow_map(&n.label, n.t).expect("admissible node"), n.t))
        .collect()
}
