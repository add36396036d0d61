//! Deterministic inputs shared by the benchmarks.

use ordrecon_core::enumerate::DEFAULT_CAP;
use ordrecon_core::{enumerate, Poset, UniverseFilter};

/// Every `step`-th connected poset of size `n`, in certificate order.
pub fn sample(n: usize, step: usize) -> Vec<Poset> {
    enumerate(n, UniverseFilter::Connected, DEFAULT_CAP)
        .expect("sample sizes are within the enumeration cap")
        .certs
        .iter()
        .step_by(step.max(1))
        .map(|c| c.to_poset())
        .collect()
}
