#![allow(dead_code)]

use focs_core::{q, ratio, ChargingProblem, Instance, Job, Q, Schedule};
use rand::Rng;

pub fn problem(jobs: &[(i64, i64, i64, i64)]) -> ChargingProblem {
    ChargingProblem::new(
        Instance::new(
            jobs.iter()
                .enumerate()
                .map(|(k, &(a, d, e, p))| Job::new(format!("j{}", k + 1).as_str(), q(a), q(d), q(e), q(p)))
                .collect(),
        )
        .unwrap(),
    )
    .unwrap()
}

pub fn limited_pair() -> ChargingProblem {
    problem(&[(0, 2, 2, 1), (1, 2, 2, 2)])
}

pub fn nested_pair() -> ChargingProblem {
    problem(&[(0, 3, 2, 2), (1, 2, 2, 2)])
}

pub fn qs(values: &[(i64, i64)]) -> Vec<Q> {
    values.iter().map(|&(n, d)| ratio(n, d)).collect()
}

/// Instance with integer times in `[0, horizon]`, integer `p_max` in
/// `[1, max_power]` and energies on the `1/den` grid.
pub fn random_problem(rng: &mut impl Rng, jobs: usize, horizon: i64, max_power: i64, den: i64) -> ChargingProblem {
    let jobs = (0..jobs)
        .map(|k| {
            let a = rng.random_range(0..horizon);
            let d = rng.random_range(a + 1..=horizon);
            let p = rng.random_range(1..=max_power);
            let e = rng.random_range(0..=p * (d - a) * den);
            Job::new(format!("j{}", k + 1).as_str(), q(a), q(d), ratio(e, den), q(p))
        })
        .collect();
    ChargingProblem::new(Instance::new(jobs).unwrap()).unwrap()
}

/// Arbitrary schedule within the per-interval limits (not necessarily
/// complete); boundary values 0 and the limit are drawn often.
pub fn random_schedule(rng: &mut impl Rng, problem: &ChargingProblem) -> Schedule {
    Schedule::from_fn(problem, |j, i| {
        let limit = problem.energy_limit(j, i).unwrap().clone();
        match rng.random_range(0..4) {
            0 => q(0),
            1 => limit,
            _ => limit * ratio(rng.random_range(1..8), 8),
        }
    })
    .unwrap()
}

pub fn on_grid(value: &Q, step: &Q) -> bool {
    (value / step).is_integer()
}
