//! Per-interval energy assignments, aggregated power profiles, objectives.

use num_traits::{Signed, Zero};

use crate::instance::JobId;
use crate::partition::{AtomicPartition, ChargingProblem};
use crate::rational::{format_rational, pow, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("job {job} is not available in interval {interval}")]
    NotAvailable { job: JobId, interval: usize },
    #[error("job {job}, interval {interval}: negative energy {energy}")]
    Negative {
        job: JobId,
        interval: usize,
        energy: String,
    },
    #[error("job {job}, interval {interval}: energy {energy} exceeds limit {limit}")]
    AboveLimit {
        job: JobId,
        interval: usize,
        energy: String,
        limit: String,
    },
    #[error("job {job} receives {delivered} but requires {required}")]
    Incomplete {
        job: JobId,
        delivered: String,
        required: String,
    },
    #[error("schedule has {found} jobs, instance has {expected}")]
    JobCount { expected: usize, found: usize },
}

/// Energy `e[i][j]` charged to each job in each interval of its availability.
///
/// Construction enforces non-negativity and the per-interval limit
/// `p_max * |I_i|`. Meeting each job's demand is a separate property
/// ([`Schedule::is_complete`]): a *partial* schedule may under-deliver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    starts: Vec<usize>,
    energy: Vec<Vec<Q>>,
    num_intervals: usize,
}

impl Schedule {
    pub fn zero(problem: &ChargingProblem) -> Self {
        let partition = problem.partition();
        Schedule {
            starts: (0..problem.num_jobs())
                .map(|j| partition.intervals_of(j).start)
                .collect(),
            energy: (0..problem.num_jobs())
                .map(|j| vec![Q::zero(); partition.intervals_of(j).len()])
                .collect(),
            num_intervals: partition.len(),
        }
    }

    /// Builds a schedule from `(job, interval, energy)` triples; absent pairs are zero.
    pub fn from_entries(
        problem: &ChargingProblem,
        entries: impl IntoIterator<Item = (usize, usize, Q)>,
    ) -> Result<Self, ScheduleError> {
        let mut schedule = Schedule::zero(problem);
        for (job, interval, energy) in entries {
            if !problem.partition().is_available(job, interval) {
                return Err(ScheduleError::NotAvailable {
                    job: problem.jobs()[job].id.clone(),
                    interval,
                });
            }
            *schedule.slot_mut(job, interval) = energy;
        }
        schedule.validate(problem)?;
        Ok(schedule)
    }

    /// Builds a schedule by evaluating `energy(job, interval)` on every available pair.
    pub fn from_fn(
        problem: &ChargingProblem,
        mut energy: impl FnMut(usize, usize) -> Q,
    ) -> Result<Self, ScheduleError> {
        let mut schedule = Schedule::zero(problem);
        for j in 0..problem.num_jobs() {
            for i in problem.partition().intervals_of(j) {
                *schedule.slot_mut(j, i) = energy(j, i);
            }
        }
        schedule.validate(problem)?;
        Ok(schedule)
    }

    fn slot_mut(&mut self, job: usize, interval: usize) -> &mut Q {
        &mut self.energy[job][interval - self.starts[job]]
    }

    pub(crate) fn add(&mut self, job: usize, interval: usize, amount: &Q) {
        *self.slot_mut(job, interval) += amount;
    }

    /// Checks (non-negativity) and (per-interval limit) against `problem`.
    pub fn validate(&self, problem: &ChargingProblem) -> Result<(), ScheduleError> {
        if self.energy.len() != problem.num_jobs() {
            return Err(ScheduleError::JobCount {
                expected: problem.num_jobs(),
                found: self.energy.len(),
            });
        }
        for (j, job) in problem.jobs().iter().enumerate() {
            for (i, e) in self.row(j) {
                if e.is_negative() {
                    return Err(ScheduleError::Negative {
                        job: job.id.clone(),
                        interval: i,
                        energy: format_rational(e),
                    });
                }
                let limit = problem.energy_limit(j, i).expect("row covers availability");
                if e > limit {
                    return Err(ScheduleError::AboveLimit {
                        job: job.id.clone(),
                        interval: i,
                        energy: format_rational(e),
                        limit: format_rational(limit),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_jobs(&self) -> usize {
        self.energy.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.num_intervals
    }

    /// Energy of `job` in `interval`; `None` if the job is unavailable there.
    pub fn get(&self, job: usize, interval: usize) -> Option<&Q> {
        let start = self.starts[job];
        interval
            .checked_sub(start)
            .and_then(|offset| self.energy[job].get(offset))
    }

    /// `(interval, energy)` over the job's availability range.
    pub fn row(&self, job: usize) -> impl Iterator<Item = (usize, &Q)> + '_ {
        let start = self.starts[job];
        self.energy[job]
            .iter()
            .enumerate()
            .map(move |(k, e)| (start + k, e))
    }

    pub fn job_total(&self, job: usize) -> Q {
        self.energy[job].iter().fold(Q::zero(), |acc, e| acc + e)
    }

    pub fn interval_energy(&self, interval: usize) -> Q {
        (0..self.energy.len())
            .filter_map(|j| self.get(j, interval))
            .fold(Q::zero(), |acc, e| acc + e)
    }

    /// Every job receives exactly its demand.
    pub fn is_complete(&self, problem: &ChargingProblem) -> bool {
        self.check_complete(problem).is_ok()
    }

    pub fn check_complete(&self, problem: &ChargingProblem) -> Result<(), ScheduleError> {
        for (j, job) in problem.jobs().iter().enumerate() {
            let delivered = self.job_total(j);
            if delivered != job.energy {
                return Err(ScheduleError::Incomplete {
                    job: job.id.clone(),
                    delivered: format_rational(&delivered),
                    required: format_rational(&job.energy),
                });
            }
        }
        Ok(())
    }

    pub fn profile(&self, partition: &AtomicPartition) -> PowerProfile {
        aggregate_power(self, partition)
    }
}

/// Average aggregated power per atomic interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PowerProfile {
    pub powers: Vec<Q>,
}

impl PowerProfile {
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn power(&self, interval: usize) -> &Q {
        &self.powers[interval]
    }

    /// `sum_i p_i * |I_i|`, the energy the profile delivers.
    pub fn energy(&self, partition: &AtomicPartition) -> Q {
        self.powers
            .iter()
            .zip(partition.lengths())
            .fold(Q::zero(), |acc, (p, len)| acc + p * len)
    }
}

/// `p_i = (sum_j e[i][j]) / |I_i|`.
pub fn aggregate_power(schedule: &Schedule, partition: &AtomicPartition) -> PowerProfile {
    PowerProfile {
        powers: (0..partition.len())
            .map(|i| schedule.interval_energy(i) / partition.length(i))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("exponent must be an integer greater than 1, got {0}")]
    BadExponent(u32),
    #[error("profile has {found} intervals, partition has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Time-weighted power sum `F(p) = sum_i |I_i| * p_i^alpha` for an integer `alpha > 1`.
///
/// Strictly convex and increasing on `p >= 0`, so it belongs to the class the
/// scheduler is optimal for; `alpha = 2` is the squared l2 norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Objective {
    alpha: u32,
}

impl Objective {
    pub fn power(alpha: u32) -> Result<Self, ObjectiveError> {
        if alpha < 2 {
            return Err(ObjectiveError::BadExponent(alpha));
        }
        Ok(Objective { alpha })
    }

    pub fn squared() -> Self {
        Objective { alpha: 2 }
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn value(
        &self,
        profile: &PowerProfile,
        partition: &AtomicPartition,
    ) -> Result<Q, ObjectiveError> {
        if profile.len() != partition.len() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: partition.len(),
                found: profile.len(),
            });
        }
        Ok(profile
            .powers
            .iter()
            .zip(partition.lengths())
            .fold(Q::zero(), |acc, (p, len)| acc + len * pow(p, self.alpha)))
    }

    /// `dF/de[i][j]` for any job available in an interval at power `p`: `alpha * p^(alpha-1)`.
    pub fn marginal(&self, power: &Q) -> Q {
        Q::from_integer(self.alpha.into()) * pow(power, self.alpha - 1)
    }
}

/// Convenience wrapper for [`Objective::value`].
pub fn objective_value(
    profile: &PowerProfile,
    partition: &AtomicPartition,
    objective: &Objective,
) -> Result<Q, ObjectiveError> {
    objective.value(profile, partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, Job};
    use crate::rational::{q, ratio};

    fn nested_pair() -> ChargingProblem {
        ChargingProblem::new(
            Instance::new(vec![
                Job::new("1", q(0), q(3), q(2), q(2)),
                Job::new("2", q(1), q(2), q(2), q(2)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn limited_pair() -> ChargingProblem {
        ChargingProblem::new(
            Instance::new(vec![
                Job::new("1", q(0), q(2), q(2), q(1)),
                Job::new("2", q(1), q(2), q(2), q(2)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn powers(values: &[i64]) -> PowerProfile {
        PowerProfile {
            powers: values.iter().map(|&v| q(v)).collect(),
        }
    }

    #[test]
    fn aggregate_nested_pair_optimal() {
        let p = nested_pair();
        let s = Schedule::from_entries(&p, [(0, 0, q(1)), (0, 2, q(1)), (1, 1, q(2))]).unwrap();
        assert!(s.is_complete(&p));
        assert_eq!(s.profile(p.partition()), powers(&[1, 2, 1]));
    }

    #[test]
    fn aggregate_limited_pair_optimal() {
        let p = limited_pair();
        let s = Schedule::from_entries(&p, [(0, 0, q(1)), (0, 1, q(1)), (1, 1, q(2))]).unwrap();
        assert_eq!(s.profile(p.partition()), powers(&[1, 3]));
    }

    #[test]
    fn zero_schedule_is_flat_zero() {
        let p = nested_pair();
        let s = Schedule::zero(&p);
        assert_eq!(s.profile(p.partition()), powers(&[0, 0, 0]));
        assert!(!s.is_complete(&p));
    }

    #[test]
    fn objective_examples() {
        let p = nested_pair();
        let f = Objective::squared();
        assert_eq!(f.value(&powers(&[1, 2, 1]), p.partition()).unwrap(), q(6));
        assert_eq!(f.value(&powers(&[2, 2, 0]), p.partition()).unwrap(), q(8));
        assert_eq!(f.value(&powers(&[0, 0, 0]), p.partition()).unwrap(), q(0));
        assert!(f.value(&powers(&[1, 2]), p.partition()).is_err());
        assert!(Objective::power(1).is_err());
    }

    #[test]
    fn objective_weights_by_length() {
        let p = ChargingProblem::new(
            Instance::new(vec![Job::new("a", q(0), ratio(1, 2), q(1), q(4))]).unwrap(),
        )
        .unwrap();
        // |I| * p^3 = 1/2 * 2^3
        let f = Objective::power(3).unwrap();
        assert_eq!(f.value(&powers(&[2]), p.partition()).unwrap(), q(4));
        assert_eq!(f.marginal(&q(2)), q(12));
    }

    #[test]
    fn construction_enforces_limits() {
        let p = limited_pair();
        assert!(matches!(
            Schedule::from_entries(&p, [(1, 0, q(1))]),
            Err(ScheduleError::NotAvailable { .. })
        ));
        assert!(matches!(
            Schedule::from_entries(&p, [(0, 0, q(2))]),
            Err(ScheduleError::AboveLimit { .. })
        ));
        assert!(matches!(
            Schedule::from_entries(&p, [(0, 0, q(-1))]),
            Err(ScheduleError::Negative { .. })
        ));
    }
}
