//! Brute-force ground truth for small instances.
//!
//! Enumerates every schedule whose entries are multiples of a grid step,
//! keeps the feasible ones and returns one with the smallest objective. It
//! shares no code with the flow-based scheduler.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::partition::ChargingProblem;
use crate::rational::{format_rational, pow, Q};
use crate::schedule::{Objective, PowerProfile, Schedule};

/// Enumeration refuses beyond this many candidate schedules.
pub const MAX_CANDIDATES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("grid step must be positive, got {0}")]
    BadStep(String),
    #[error("{count} candidate schedules exceed the enumeration limit of {limit}")]
    TooLarge { count: String, limit: u64 },
    #[error("no grid schedule meets every demand")]
    NoGridSchedule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub schedule: Schedule,
    pub profile: PowerProfile,
    pub objective: Q,
    pub candidates: u64,
    /// Upper bound on `objective - true optimum` for grid-aligned data.
    pub gap_bound: Q,
    /// Demands or limits that had to be snapped to the grid.
    pub warnings: Vec<String>,
}

/// Exhaustive grid search for a minimum-objective schedule.
///
/// Demands not on the `step` grid are rounded to the nearest multiple (and
/// clipped to what the grid limits allow); per-interval limits are rounded
/// down. Each adjustment is reported in [`OracleSolution::warnings`], and the
/// returned schedule then solves the rounded instance, not the original.
pub fn oracle_solve(
    problem: &ChargingProblem,
    objective: &Objective,
    step: &Q,
) -> Result<OracleSolution, OracleError> {
    if *step <= Q::zero() {
        return Err(OracleError::BadStep(format_rational(step)));
    }
    let n = problem.num_jobs();
    let m = problem.num_intervals();
    let partition = problem.partition();
    let mut warnings = Vec::new();

    // Units of `step` per job and per (job, interval).
    let mut limits: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut demands: Vec<u64> = Vec::with_capacity(n);
    for (j, job) in problem.jobs().iter().enumerate() {
        let caps: Vec<u64> = partition
            .intervals_of(j)
            .map(|i| {
                let units = problem.energy_limit(j, i).unwrap() / step;
                if !units.is_integer() {
                    warnings.push(format!(
                        "job {}: limit in interval {} rounded down to the grid",
                        job.id,
                        i + 1
                    ));
                }
                units.floor().to_integer().to_u64().unwrap_or(u64::MAX)
            })
            .collect();
        let units = &job.energy / step;
        let mut demand = units.round().to_integer().to_u64().unwrap_or(u64::MAX);
        if !units.is_integer() {
            warnings.push(format!("job {}: demand rounded to the grid", job.id));
        }
        let reachable: u64 = caps.iter().sum();
        if demand > reachable {
            warnings.push(format!("job {}: demand clipped to grid capacity", job.id));
            demand = reachable;
        }
        demands.push(demand);
        limits.push(caps);
    }

    let counts: Vec<BigInt> = demands
        .iter()
        .zip(&limits)
        .map(|(&d, caps)| count_compositions(d, caps))
        .collect();
    let total: BigInt = counts.iter().product();
    if total > BigInt::from(MAX_CANDIDATES) {
        return Err(OracleError::TooLarge {
            count: total.to_string(),
            limit: MAX_CANDIDATES,
        });
    }
    let candidates = total.to_u64().unwrap_or(0);
    if candidates == 0 {
        return Err(OracleError::NoGridSchedule);
    }

    let options: Vec<Vec<Vec<u64>>> = demands
        .iter()
        .zip(&limits)
        .map(|(&d, caps)| compositions(d, caps))
        .collect();

    // objective = step^alpha * sum_i k_i^alpha / |I_i|^(alpha - 1), k_i in units
    let alpha = objective.alpha();
    let weights: Vec<Q> = partition
        .lengths()
        .iter()
        .map(|len| Q::one() / pow(len, alpha - 1))
        .collect();
    let max_units: Vec<u64> = (0..m)
        .map(|i| {
            partition
                .jobs_in(i)
                .iter()
                .map(|&j| limits[j][i - partition.intervals_of(j).start].min(demands[j]))
                .sum()
        })
        .collect();
    let scorer = Scorer::new(&weights, &max_units, alpha);

    let mut search = Search {
        options: &options,
        starts: (0..n).map(|j| partition.intervals_of(j).start).collect(),
        loads: vec![0u64; m],
        choice: vec![0usize; n],
        best: None,
        scorer: &scorer,
    };
    search.descend(0);
    let (_, best_choice) = search.best.expect("at least one candidate");

    let schedule = Schedule::from_entries(
        problem,
        (0..n).flat_map(|j| {
            let start = partition.intervals_of(j).start;
            options[j][best_choice[j]]
                .iter()
                .enumerate()
                .map(move |(k, &u)| (j, start + k, Q::from_integer(u.into()) * step))
                .collect::<Vec<_>>()
        }),
    )
    .expect("grid schedules respect limits");
    let profile = schedule.profile(partition);
    let value = objective
        .value(&profile, partition)
        .expect("profile matches partition");

    let a = Q::from_integer(alpha.into());
    let gap_bound = (0..m).fold(Q::zero(), |acc, i| {
        let top = Q::from_integer(max_units[i].into()) * step + step;
        acc + &a * pow(&top, alpha - 1) * step * &weights[i]
    });

    Ok(OracleSolution {
        schedule,
        profile,
        objective: value,
        candidates,
        gap_bound,
        warnings,
    })
}

/// Ways to write `total` as an ordered sum bounded slot-wise by `caps`.
fn count_compositions(total: u64, caps: &[u64]) -> BigInt {
    let mut ways = vec![BigInt::zero(); total as usize + 1];
    ways[0] = BigInt::one();
    for &cap in caps {
        let mut next = vec![BigInt::zero(); ways.len()];
        for (t, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for x in 0..=cap.min(total - t as u64) {
                next[t + x as usize] += w;
            }
        }
        ways = next;
    }
    ways[total as usize].clone()
}

fn compositions(total: u64, caps: &[u64]) -> Vec<Vec<u64>> {
    fn go(rest: u64, caps: &[u64], prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        match caps.split_first() {
            None => {
                if rest == 0 {
                    out.push(prefix.clone());
                }
            }
            Some((&cap, tail)) => {
                let tail_room: u64 = tail.iter().sum();
                let low = rest.saturating_sub(tail_room);
                for x in low..=cap.min(rest) {
                    prefix.push(x);
                    go(rest - x, tail, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(total, caps, &mut Vec::new(), &mut out);
    out
}

/// Objective in grid units, integer-scaled when it fits in `i128`.
enum Scorer {
    Int { weights: Vec<i128>, alpha: u32 },
    Exact { weights: Vec<Q>, alpha: u32 },
}

#[derive(Clone, PartialEq, PartialOrd)]
enum Score {
    Int(i128),
    Exact(Q),
}

impl Scorer {
    fn new(weights: &[Q], max_units: &[u64], alpha: u32) -> Scorer {
        let lcm = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Option<Vec<i128>> = weights
            .iter()
            .map(|w| (w * Q::from_integer(lcm.clone())).to_integer().to_i128())
            .collect();
        if let Some(scaled) = scaled {
            let bound = scaled.iter().zip(max_units).try_fold(0i128, |acc, (&w, &k)| {
                (k as i128)
                    .checked_pow(alpha)
                    .and_then(|p| p.checked_mul(w))
                    .and_then(|t| acc.checked_add(t))
            });
            if bound.is_some() {
                return Scorer::Int {
                    weights: scaled,
                    alpha,
                };
            }
        }
        Scorer::Exact {
            weights: weights.to_vec(),
            alpha,
        }
    }

    fn score(&self, loads: &[u64]) -> Score {
        match self {
            Scorer::Int { weights, alpha } => Score::Int(
                loads
                    .iter()
                    .zip(weights)
                    .map(|(&k, &w)| (k as i128).pow(*alpha) * w)
                    .sum(),
            ),
            Scorer::Exact { weights, alpha } => Score::Exact(
                loads
                    .iter()
                    .zip(weights)
                    .fold(Q::zero(), |acc, (&k, w)| {
                        acc + pow(&Q::from_integer(k.into()), *alpha) * w
                    }),
            ),
        }
    }
}

struct Search<'a> {
    options: &'a [Vec<Vec<u64>>],
    starts: Vec<usize>,
    loads: Vec<u64>,
    choice: Vec<usize>,
    best: Option<(Score, Vec<usize>)>,
    scorer: &'a Scorer,
}

impl Search<'_> {
    fn descend(&mut self, job: usize) {
        if job == self.options.len() {
            let score = self.scorer.score(&self.loads);
            if self.best.as_ref().is_none_or(|(b, _)| score < *b) {
                self.best = Some((score, self.choice.clone()));
            }
            return;
        }
        let start = self.starts[job];
        for (k, option) in self.options[job].iter().enumerate() {
            for (offset, &u) in option.iter().enumerate() {
                self.loads[start + offset] += u;
            }
            self.choice[job] = k;
            self.descend(job + 1);
            for (offset, &u) in option.iter().enumerate() {
                self.loads[start + offset] -= u;
            }
        }
    }
}
