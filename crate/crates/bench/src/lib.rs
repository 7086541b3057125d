//! Shared fixtures for the criterion benches.

use chainswap::pulse::Window;
use chainswap::{GeneratorSpec, Scenario};

/// The non-identical chain at its default drive and bath.
pub fn scenario() -> Scenario {
    Scenario::nonidentical_default()
}

/// Generator spec of the first evolution window of the transport protocol.
pub fn first_window() -> (GeneratorSpec, f64) {
    let s = scenario();
    let protocol = s.protocol().expect("default protocol builds");
    s.windows(&protocol)
        .expect("default protocol compiles")
        .into_iter()
        .find_map(|w| match w {
            Window::Evolve { spec, duration } => Some((spec, duration)),
            Window::Instant { .. } => None,
        })
        .expect("protocol has an evolution window")
}
