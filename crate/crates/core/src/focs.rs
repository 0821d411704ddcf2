//! The flow-based offline charging scheduler.
//!
//! Each *round* finds the set of intervals that carry the highest aggregated
//! power in every optimal schedule (the critical set), fixes the schedule on
//! them, and removes them from the network. Within a round, sink capacities
//! start at the flattest conceivable profile over the active intervals and are
//! raised proportionally to interval length until the maximum flow meets the
//! remaining demand. Intervals that can still absorb flow in some maximum
//! flow are *parked*: they drop out of the active set and keep the sink
//! capacity they had when parked.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::flow::{self, build_network, max_flow, EdgeRef, Flow, FlowError, FlowNetwork};
use crate::instance::JobId;
use crate::partition::{AtomicPartition, ChargingProblem};
use crate::rational::{format_rational, Q};
use crate::schedule::{PowerProfile, Schedule};

/// Sink capacity per interval; intervals without a sink edge are absent.
pub type SinkCaps = BTreeMap<usize, Q>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FocsError {
    #[error("job {job} needs {energy} but can take at most {capacity}")]
    Infeasible {
        job: JobId,
        energy: String,
        capacity: String,
    },
    #[error("round {round}: {demand} energy left but no active interval")]
    NoActiveIntervals { round: usize, demand: String },
    #[error("round {round}, iteration {iteration}: flow short of demand and nothing parked")]
    NoProgress { round: usize, iteration: usize },
    #[error("round {round}: demand met but every active interval was parked")]
    NoCriticalInterval { round: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Options for [`run_focs_with`].
#[derive(Debug, Clone, Default)]
pub struct FocsOptions {
    /// Keep per-iteration records and each round's network and flow.
    pub trace: bool,
    /// Order in which the flow solver visits jobs (default ascending).
    pub job_order: Option<Vec<usize>>,
    /// Order of each job's interval edges for the flow solver (default ascending).
    pub interval_order: Option<Vec<usize>>,
}

/// One `(round, iteration)` step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub round: usize,
    pub iteration: usize,
    /// Sink capacities used in this iteration (active and parked intervals).
    pub sink_caps: SinkCaps,
    pub flow_value: Q,
    /// Remaining demand of the round, `sum_j c(s, j)`.
    pub demand: Q,
    /// Intervals parked in this iteration.
    pub newly_parked: BTreeSet<usize>,
    /// All intervals parked so far in this round.
    pub parked: BTreeSet<usize>,
    /// Active intervals after parking.
    pub active: BTreeSet<usize>,
}

/// The round's final network and flow, kept when tracing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundDetail {
    pub network: FlowNetwork,
    pub flow: Flow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub iterations: usize,
    pub demand: Q,
    pub critical: BTreeSet<usize>,
    pub parked: BTreeSet<usize>,
    /// Energy each job receives inside this round's critical intervals.
    pub critical_loads: Vec<Q>,
    /// Common aggregated power of the critical intervals.
    pub power: Q,
    pub detail: Option<RoundDetail>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocsResult {
    pub schedule: Schedule,
    pub profile: PowerProfile,
    /// Network with `c(s, j) = e_j` and sink capacities equal to the final
    /// interval loads; [`FocsResult::flow`] is a maximum flow on it.
    pub network: FlowNetwork,
    /// Sum of the restricted round flows.
    pub flow: Flow,
    pub rounds: Vec<RoundRecord>,
    /// 1-based round in which each interval became critical.
    pub ranks: Vec<usize>,
    /// Per-iteration records; empty unless tracing was requested.
    pub trace: Vec<IterationRecord>,
}

impl FocsResult {
    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn total_iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.iterations).sum()
    }

    pub fn critical_sets(&self) -> impl Iterator<Item = &BTreeSet<usize>> {
        self.rounds.iter().map(|r| &r.critical)
    }
}

/// Round in which `interval` became critical (1-based).
pub fn rank(result: &FocsResult, interval: usize) -> usize {
    result.ranks[interval]
}

/// `g(i) = demand * |I_i| / L(active)` on the active intervals.
pub fn initial_sink_caps(
    demand: &Q,
    active: &BTreeSet<usize>,
    partition: &AtomicPartition,
) -> Result<SinkCaps, FocsError> {
    if active.is_empty() {
        if demand.is_zero() {
            return Ok(SinkCaps::new());
        }
        return Err(FocsError::NoActiveIntervals {
            round: 0,
            demand: format_rational(demand),
        });
    }
    let total = partition.total_length(active);
    Ok(active
        .iter()
        .map(|&i| (i, demand * partition.length(i) / &total))
        .collect())
}

/// Raises active capacities by `deficit * |I_i| / L(active)`; others keep theirs.
pub fn update_sink_caps(
    caps: &SinkCaps,
    deficit: &Q,
    active: &BTreeSet<usize>,
    partition: &AtomicPartition,
) -> Result<SinkCaps, FocsError> {
    if active.is_empty() {
        if deficit.is_positive() {
            return Err(FocsError::NoActiveIntervals {
                round: 0,
                demand: format_rational(deficit),
            });
        }
        return Ok(caps.clone());
    }
    let total = partition.total_length(active);
    let mut next = caps.clone();
    for &i in active {
        let raise = deficit * partition.length(i) / &total;
        *next.entry(i).or_insert_with(Q::zero) += raise;
    }
    Ok(next)
}

/// Result of one round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    /// Network with the sink capacities of the final iteration.
    pub network: FlowNetwork,
    /// Maximum flow meeting the round's full demand.
    pub flow: Flow,
    pub critical: BTreeSet<usize>,
    pub parked: BTreeSet<usize>,
    pub iterations: Vec<IterationRecord>,
}

/// Raises sink capacities on `active` until the maximum flow meets
/// `sum_j c(s, j)`, parking subcritical intervals along the way.
///
/// `network` must have a sink edge for every active interval; their capacities
/// are overwritten.
pub fn run_round(
    problem: &ChargingProblem,
    mut network: FlowNetwork,
    active: &BTreeSet<usize>,
    round: usize,
) -> Result<RoundOutcome, FocsError> {
    let partition = problem.partition();
    let demand = network.total_source_cap();
    let mut active = active.clone();
    let mut parked = BTreeSet::new();
    let mut caps = initial_sink_caps(&demand, &active, partition).map_err(|e| match e {
        FocsError::NoActiveIntervals { demand, .. } => FocsError::NoActiveIntervals { round, demand },
        other => other,
    })?;
    let mut iterations = Vec::new();

    for iteration in 1.. {
        for &i in &active {
            network.set_sink_cap(i, caps[&i].clone())?;
        }
        let flow = max_flow(&network);
        let newly_parked = flow::subcritical_intervals(&network, &flow, &active);
        for i in &newly_parked {
            active.remove(i);
            parked.insert(*i);
        }
        iterations.push(IterationRecord {
            round,
            iteration,
            sink_caps: (0..network.num_intervals())
                .filter_map(|i| network.sink_cap(i).map(|c| (i, c.clone())))
                .collect(),
            flow_value: flow.value.clone(),
            demand: demand.clone(),
            newly_parked: newly_parked.clone(),
            parked: parked.clone(),
            active: active.clone(),
        });

        if flow.value == demand {
            if active.is_empty() {
                return Err(FocsError::NoCriticalInterval { round });
            }
            return Ok(RoundOutcome {
                network,
                flow,
                critical: active,
                parked,
                iterations,
            });
        }
        if newly_parked.is_empty() {
            return Err(FocsError::NoProgress { round, iteration });
        }
        let deficit = &demand - &flow.value;
        caps = update_sink_caps(&caps, &deficit, &active, partition).map_err(|_| {
            FocsError::NoActiveIntervals {
                round,
                demand: format_rational(&deficit),
            }
        })?;
    }
    unreachable!("loop only exits by return")
}

/// The part of `flow` passing through `critical` intervals, back-propagated
/// to the source edges.
pub fn restrict_flow(network: &FlowNetwork, flow: &Flow, critical: &BTreeSet<usize>) -> Flow {
    let mut restricted = Flow::zero(network);
    for (k, e) in network.assign_edges().iter().enumerate() {
        if critical.contains(&e.interval) {
            restricted.assign[k] = flow.assign[k].clone();
            restricted.source[e.job] += &flow.assign[k];
        }
    }
    for &i in critical {
        restricted.sink[i] = flow.sink[i].clone();
    }
    restricted.value = restricted.source.iter().fold(Q::zero(), |acc, x| acc + x);
    restricted
}

/// Subtracts the restricted flow from the capacities and removes the
/// critical intervals (sink edges and job edges) from the network.
pub fn reduce_network(
    network: &FlowNetwork,
    restricted: &Flow,
    critical: &BTreeSet<usize>,
) -> Result<FlowNetwork, FocsError> {
    let mut next = network.clone();
    for j in 0..network.num_jobs() {
        let cap = &network.source_caps()[j] - &restricted.source[j];
        if cap.is_negative() {
            return Err(FlowError::NegativeCapacity {
                edge: EdgeRef::Source(j),
                value: format_rational(&cap),
            }
            .into());
        }
        next.set_source_cap(j, cap)?;
    }
    for (k, e) in network.assign_edges().iter().enumerate() {
        if critical.contains(&e.interval) && restricted.assign[k] > e.cap {
            return Err(FlowError::NegativeCapacity {
                edge: EdgeRef::Assign {
                    job: e.job,
                    interval: e.interval,
                },
                value: format_rational(&(&e.cap - &restricted.assign[k])),
            }
            .into());
        }
    }
    for &i in critical {
        next.remove_interval(i);
    }
    Ok(next)
}

/// Computes an optimal schedule for every increasing, convex, differentiable
/// objective of the aggregated power profile.
pub fn run_focs(problem: &ChargingProblem) -> Result<FocsResult, FocsError> {
    run_focs_with(problem, &FocsOptions::default())
}

pub fn run_focs_with(
    problem: &ChargingProblem,
    options: &FocsOptions,
) -> Result<FocsResult, FocsError> {
    if let Some(job) = problem.instance().infeasible_jobs().first() {
        return Err(FocsError::Infeasible {
            job: job.id.clone(),
            energy: format_rational(&job.energy),
            capacity: format_rational(&job.capacity()),
        });
    }

    let n = problem.num_jobs();
    let m = problem.num_intervals();
    let partition = problem.partition();
    let all: BTreeSet<usize> = (0..m).collect();
    let demands: Vec<Q> = problem.jobs().iter().map(|j| j.energy.clone()).collect();

    let mut network = build_network(problem, demands.clone(), &vec![Q::zero(); m], &all)?;
    if options.job_order.is_some() || options.interval_order.is_some() {
        let jobs: Vec<usize> = options.job_order.clone().unwrap_or_else(|| (0..n).collect());
        let intervals: Vec<usize> = options
            .interval_order
            .clone()
            .unwrap_or_else(|| (0..m).collect());
        network = network.reordered(&jobs, &intervals);
    }

    let mut schedule = Schedule::zero(problem);
    let mut ranks = vec![0usize; m];
    let mut rounds = Vec::new();
    let mut trace = Vec::new();
    let mut active = all;

    let mut round = 0;
    while !active.is_empty() {
        round += 1;
        let demand = network.total_source_cap();
        let outcome = run_round(problem, network.clone(), &active, round)?;
        let restricted = restrict_flow(&outcome.network, &outcome.flow, &outcome.critical);

        for (k, e) in outcome.network.assign_edges().iter().enumerate() {
            if outcome.critical.contains(&e.interval) {
                schedule.add(e.job, e.interval, &restricted.assign[k]);
            }
        }
        for &i in &outcome.critical {
            ranks[i] = round;
        }
        let first = *outcome.critical.iter().next().expect("non-empty critical set");
        let power = &outcome.flow.sink[first] / partition.length(first);

        network = reduce_network(&outcome.network, &restricted, &outcome.critical)?;
        active = &active - &outcome.critical;

        rounds.push(RoundRecord {
            round,
            iterations: outcome.iterations.len(),
            demand,
            critical: outcome.critical.clone(),
            parked: outcome.parked.clone(),
            critical_loads: restricted.source.clone(),
            power,
            detail: options.trace.then(|| RoundDetail {
                network: outcome.network.clone(),
                flow: outcome.flow.clone(),
            }),
        });
        if options.trace {
            trace.extend(outcome.iterations);
        }
    }

    let profile = schedule.profile(partition);
    let loads: Vec<Q> = (0..m).map(|i| schedule.interval_energy(i)).collect();
    let full = build_network(problem, demands, &loads, &(0..m).collect())?;
    let flow = Flow::from_schedule(&full, &schedule);

    Ok(FocsResult {
        schedule,
        profile,
        network: full,
        flow,
        rounds,
        ranks,
        trace,
    })
}
