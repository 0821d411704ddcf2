//! Charging jobs and fleet instances.

use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{Exact, Q};

/// Opaque vehicle / job identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JobId(pub String);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for JobId {
    fn from(value: &str) -> Self {
        JobId(value.to_string())
    }
}

/// A pending charging session: available on `[arrival, departure]`, needs
/// `energy`, and never draws more than `p_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    pub arrival: Q,
    pub departure: Q,
    pub energy: Q,
    pub p_max: Q,
}

impl Job {
    pub fn new(id: impl Into<JobId>, arrival: Q, departure: Q, energy: Q, p_max: Q) -> Self {
        Job {
            id: id.into(),
            arrival,
            departure,
            energy,
            p_max,
        }
    }

    pub fn window(&self) -> Q {
        &self.departure - &self.arrival
    }

    /// Most energy the job can take over its whole window.
    pub fn capacity(&self) -> Q {
        &self.p_max * self.window()
    }

    pub fn is_feasible(&self) -> bool {
        self.energy <= self.capacity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("instance has no jobs")]
    Empty,
    #[error("duplicate job id {0}")]
    DuplicateId(JobId),
    #[error("job {id}: arrival {arrival} is not before departure {departure}")]
    EmptyWindow {
        id: JobId,
        arrival: String,
        departure: String,
    },
    #[error("job {id}: negative energy {energy}")]
    NegativeEnergy { id: JobId, energy: String },
    #[error("job {id}: power limit {p_max} must be positive")]
    NonPositivePower { id: JobId, p_max: String },
}

/// A validated, non-empty fleet of jobs with unique ids.
///
/// Job-level feasibility (`energy <= p_max * window`) is *not* enforced here;
/// see [`Instance::is_feasible`] and [`Instance::infeasible_jobs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    jobs: Vec<Job>,
}

impl Instance {
    pub fn new(jobs: Vec<Job>) -> Result<Self, InstanceError> {
        if jobs.is_empty() {
            return Err(InstanceError::Empty);
        }
        let mut seen = HashSet::with_capacity(jobs.len());
        for job in &jobs {
            if !seen.insert(&job.id) {
                return Err(InstanceError::DuplicateId(job.id.clone()));
            }
            if job.arrival >= job.departure {
                return Err(InstanceError::EmptyWindow {
                    id: job.id.clone(),
                    arrival: Exact(&job.arrival).to_string(),
                    departure: Exact(&job.departure).to_string(),
                });
            }
            if job.energy.is_negative() {
                return Err(InstanceError::NegativeEnergy {
                    id: job.id.clone(),
                    energy: Exact(&job.energy).to_string(),
                });
            }
            if !job.p_max.is_positive() {
                return Err(InstanceError::NonPositivePower {
                    id: job.id.clone(),
                    p_max: Exact(&job.p_max).to_string(),
                });
            }
        }
        Ok(Instance { jobs })
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job_index(&self, id: &JobId) -> Option<usize> {
        self.jobs.iter().position(|j| &j.id == id)
    }

    pub fn total_energy(&self) -> Q {
        self.jobs.iter().fold(Q::zero(), |acc, j| acc + &j.energy)
    }

    /// True iff every job fits its energy into its window at full power.
    pub fn is_feasible(&self) -> bool {
        self.jobs.iter().all(Job::is_feasible)
    }

    pub fn infeasible_jobs(&self) -> Vec<&Job> {
        self.jobs.iter().filter(|j| !j.is_feasible()).collect()
    }

    /// Same jobs in a different order; `order[k]` is the old index of new job `k`.
    pub fn permuted(&self, order: &[usize]) -> Instance {
        assert_eq!(order.len(), self.jobs.len(), "permutation length");
        Instance {
            jobs: order.iter().map(|&k| self.jobs[k].clone()).collect(),
        }
    }
}

/// Predicate form of [`Instance::is_feasible`].
pub fn check_feasibility(instance: &Instance) -> bool {
    instance.is_feasible()
}
