//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, Job, JobId};
use crate::rational::{q, ratio};

/// Knobs for [`generate_instance`]. Times are integers in `[0, horizon]`;
/// maximum powers are integers in `[1, max_power]`; energies are multiples of
/// `1 / energy_denominator` no larger than `p_max * (d - a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub jobs: usize,
    pub horizon: u32,
    pub max_power: u32,
    pub energy_denominator: u32,
    /// Allow jobs with zero energy.
    pub allow_zero: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            jobs: 10,
            horizon: 24,
            max_power: 4,
            energy_denominator: 1,
            allow_zero: false,
        }
    }
}

/// Feasible instance drawn from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn generate_instance(config: &GeneratorConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(config, &mut rng)
}

pub fn generate_with(config: &GeneratorConfig, rng: &mut impl Rng) -> Instance {
    assert!(config.jobs > 0, "at least one job");
    assert!(config.horizon > 0 && config.max_power > 0 && config.energy_denominator > 0);
    let h = config.horizon as i64;
    let den = config.energy_denominator as i64;
    let jobs = (0..config.jobs)
        .map(|k| {
            let a = rng.random_range(0..h);
            let d = rng.random_range(a + 1..=h);
            let p = rng.random_range(1..=config.max_power as i64);
            let steps = p * (d - a) * den;
            let lo = if config.allow_zero { 0 } else { 1 };
            let e = rng.random_range(lo..=steps);
            Job::new(JobId(format!("ev{}", k + 1)), q(a), q(d), ratio(e, den), q(p))
        })
        .collect();
    Instance::new(jobs).expect("generated jobs are well formed")
}
