//! Benchmark fixtures: seeded instances of increasing size.

use focs_core::{generate_instance, ChargingProblem, GeneratorConfig};

pub const SIZES: [usize; 4] = [10, 25, 50, 100];

/// Seeded instance with `jobs` jobs on a 2-hour-per-job scale horizon.
pub fn fixture(jobs: usize, seed: u64) -> ChargingProblem {
    let config = GeneratorConfig {
        jobs,
        horizon: (jobs as u32).max(8) * 2,
        max_power: 4,
        energy_denominator: 2,
        allow_zero: false,
    };
    ChargingProblem::new(generate_instance(&config, seed)).expect("generated instances are valid")
}
