//! Atomic intervals induced by arrival and departure breakpoints.

use std::ops::Range;

use num_traits::Zero;

use crate::instance::{Instance, InstanceError, Job};
use crate::rational::Q;

/// The horizon cut at every distinct arrival/departure time.
///
/// Interval `i` (0-based) is `[breakpoints[i], breakpoints[i + 1]]`. A job is
/// available on an interval iff the interval lies inside its window, so each
/// job's availability is a contiguous index range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicPartition {
    breakpoints: Vec<Q>,
    lengths: Vec<Q>,
    jobs_in: Vec<Vec<usize>>,
    intervals_of: Vec<Range<usize>>,
}

impl AtomicPartition {
    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    /// Number of atomic intervals (`m`).
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn start(&self, interval: usize) -> &Q {
        &self.breakpoints[interval]
    }

    pub fn end(&self, interval: usize) -> &Q {
        &self.breakpoints[interval + 1]
    }

    pub fn length(&self, interval: usize) -> &Q {
        &self.lengths[interval]
    }

    pub fn lengths(&self) -> &[Q] {
        &self.lengths
    }

    /// Jobs available in `interval`, ascending.
    pub fn jobs_in(&self, interval: usize) -> &[usize] {
        &self.jobs_in[interval]
    }

    /// Intervals where `job` is available.
    pub fn intervals_of(&self, job: usize) -> Range<usize> {
        self.intervals_of[job].clone()
    }

    pub fn is_available(&self, job: usize, interval: usize) -> bool {
        self.intervals_of[job].contains(&interval)
    }

    /// Combined length of a set of intervals.
    pub fn total_length<'a>(&self, intervals: impl IntoIterator<Item = &'a usize>) -> Q {
        intervals
            .into_iter()
            .fold(Q::zero(), |acc, &i| acc + &self.lengths[i])
    }

    /// Index of the interval `[start, end]`, if it is one of ours.
    pub fn find(&self, start: &Q, end: &Q) -> Option<usize> {
        let i = self.breakpoints.binary_search(start).ok()?;
        (i + 1 < self.breakpoints.len() && &self.breakpoints[i + 1] == end).then_some(i)
    }
}

/// Cuts the horizon of `instance` into atomic intervals.
pub fn build_partition(instance: &Instance) -> Result<AtomicPartition, InstanceError> {
    build_partition_for(instance.jobs())
}

pub(crate) fn build_partition_for(jobs: &[Job]) -> Result<AtomicPartition, InstanceError> {
    if jobs.is_empty() {
        return Err(InstanceError::Empty);
    }
    for job in jobs {
        if job.arrival >= job.departure {
            return Err(InstanceError::EmptyWindow {
                id: job.id.clone(),
                arrival: crate::rational::format_rational(&job.arrival),
                departure: crate::rational::format_rational(&job.departure),
            });
        }
    }

    let mut breakpoints: Vec<Q> = jobs
        .iter()
        .flat_map(|j| [j.arrival.clone(), j.departure.clone()])
        .collect();
    breakpoints.sort();
    breakpoints.dedup();

    let lengths: Vec<Q> = breakpoints.windows(2).map(|w| &w[1] - &w[0]).collect();
    let mut jobs_in = vec![Vec::new(); lengths.len()];
    let intervals_of = jobs
        .iter()
        .enumerate()
        .map(|(j, job)| {
            // Both ends are breakpoints, so the lookups cannot miss.
            let first = breakpoints.binary_search(&job.arrival).unwrap();
            let last = breakpoints.binary_search(&job.departure).unwrap();
            for slot in &mut jobs_in[first..last] {
                slot.push(j);
            }
            first..last
        })
        .collect();

    Ok(AtomicPartition {
        breakpoints,
        lengths,
        jobs_in,
        intervals_of,
    })
}

/// An instance bundled with its partition; the unit most operations work on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargingProblem {
    instance: Instance,
    partition: AtomicPartition,
    // e^max per job, per interval of its availability range
    energy_limits: Vec<Vec<Q>>,
}

impl ChargingProblem {
    pub fn new(instance: Instance) -> Result<Self, InstanceError> {
        let partition = build_partition(&instance)?;
        let energy_limits = instance
            .jobs()
            .iter()
            .enumerate()
            .map(|(j, job)| {
                partition
                    .intervals_of(j)
                    .map(|i| &job.p_max * partition.length(i))
                    .collect()
            })
            .collect();
        Ok(ChargingProblem {
            instance,
            partition,
            energy_limits,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn partition(&self) -> &AtomicPartition {
        &self.partition
    }

    pub fn jobs(&self) -> &[Job] {
        self.instance.jobs()
    }

    pub fn num_jobs(&self) -> usize {
        self.instance.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.partition.len()
    }

    /// `p_max(job) * |interval|`, or `None` when the job is unavailable there.
    pub fn energy_limit(&self, job: usize, interval: usize) -> Option<&Q> {
        let range = self.partition.intervals_of(job);
        range
            .contains(&interval)
            .then(|| &self.energy_limits[job][interval - range.start])
    }
}
