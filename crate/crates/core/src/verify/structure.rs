//! Work transfer between intervals and the structural properties of a
//! scheduler run (rank monotonicity, isolation of critical sets).

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::flow::{
    build_network, residual_interval_hops, residual_interval_reachability, Flow, FlowNetwork,
    IntervalRelation,
};
use crate::focs::{FocsResult, RoundRecord};
use crate::partition::ChargingProblem;
use crate::rational::Q;
use crate::schedule::Schedule;

/// Some job available in both intervals charges in `from` and is below its
/// limit in `to`, so it could move energy from `from` to `to`.
pub fn work_transferable(problem: &ChargingProblem, schedule: &Schedule, from: usize, to: usize) -> bool {
    if from == to {
        return false;
    }
    let partition = problem.partition();
    partition.jobs_in(from).iter().any(|&j| {
        partition.is_available(j, to)
            && schedule.get(j, from).is_some_and(Signed::is_positive)
            && schedule.get(j, to) < problem.energy_limit(j, to)
    })
}

/// Transitive closure of [`work_transferable`] (Floyd-Warshall on the
/// definition-level relation), without self pairs.
pub fn work_transferable_closure(problem: &ChargingProblem, schedule: &Schedule) -> IntervalRelation {
    let m = problem.num_intervals();
    let mut reach: Vec<Vec<bool>> = (0..m)
        .map(|a| (0..m).map(|b| work_transferable(problem, schedule, a, b)).collect())
        .collect();
    for k in 0..m {
        for a in 0..m {
            if !reach[a][k] {
                continue;
            }
            for b in 0..m {
                if reach[k][b] {
                    reach[a][b] = true;
                }
            }
        }
    }
    IntervalRelation::from_sets(
        reach
            .into_iter()
            .enumerate()
            .map(|(a, row)| {
                row.into_iter()
                    .enumerate()
                    .filter(|&(b, r)| r && b != a)
                    .map(|(b, _)| b)
                    .collect()
            })
            .collect(),
    )
}

/// The network a schedule lives in: `c(s, j)` is the job's delivered energy,
/// sink capacities are the interval loads, so the schedule's own flow is
/// feasible (and maximum) on it.
pub fn schedule_network(problem: &ChargingProblem, schedule: &Schedule) -> (FlowNetwork, Flow) {
    let m = problem.num_intervals();
    let sources = (0..problem.num_jobs()).map(|j| schedule.job_total(j)).collect();
    let loads: Vec<Q> = (0..m).map(|i| schedule.interval_energy(i)).collect();
    let network = build_network(problem, sources, &loads, &(0..m).collect())
        .expect("schedule-derived capacities are non-negative");
    let flow = Flow::from_schedule(&network, schedule);
    (network, flow)
}

/// Definition-level work transfer agrees with residual-graph reachability,
/// both for single hops and for the closure, on every interval pair.
pub fn check_transfer_equivalence(problem: &ChargingProblem, schedule: &Schedule) -> bool {
    let (network, flow) = schedule_network(problem, schedule);
    let hops = residual_interval_hops(&network, &flow);
    let closure = residual_interval_reachability(&network, &flow);
    let defined = work_transferable_closure(problem, schedule);
    let m = problem.num_intervals();
    (0..m).all(|a| {
        (0..m).all(|b| {
            hops.contains(a, b) == work_transferable(problem, schedule, a, b)
                && closure.contains(a, b) == defined.contains(a, b)
        })
    })
}

/// Every interval of an earlier round carries strictly more power than every
/// interval of a later round.
pub fn check_monotonicity(result: &FocsResult) -> bool {
    let p = &result.profile.powers;
    let m = p.len();
    (0..m).all(|a| {
        (0..m).all(|b| result.ranks[a] >= result.ranks[b] || p[a] > p[b])
    })
}

/// No critical interval reaches an interval parked in the same round, in the
/// residual graph of the round's final flow.
pub fn check_isolation(
    network: &FlowNetwork,
    round_flow: &Flow,
    critical: &BTreeSet<usize>,
    parked: &BTreeSet<usize>,
) -> bool {
    let reach = residual_interval_reachability(network, round_flow);
    critical
        .iter()
        .all(|&c| reach.reachable_from(c).is_disjoint(parked))
}

/// [`check_isolation`] for every round of a traced run; `None` when the run
/// did not keep round details.
pub fn check_isolation_all(result: &FocsResult) -> Option<bool> {
    result
        .rounds
        .iter()
        .map(|r: &RoundRecord| {
            r.detail
                .as_ref()
                .map(|d| check_isolation(&d.network, &d.flow, &r.critical, &r.parked))
        })
        .try_fold(true, |acc, ok| ok.map(|ok| acc && ok))
}

/// Energy conservation between profile and demands for a complete schedule.
pub fn delivered_matches_demand(problem: &ChargingProblem, schedule: &Schedule) -> bool {
    let profile = schedule.profile(problem.partition());
    profile.energy(problem.partition()) == problem.instance().total_energy()
        && (0..problem.num_jobs()).all(|j| schedule.job_total(j) == problem.jobs()[j].energy)
}

/// Checks the three schedule constraints exactly: demand met with equality,
/// non-negativity, per-interval limits.
pub fn check_constraints(problem: &ChargingProblem, schedule: &Schedule) -> bool {
    schedule.validate(problem).is_ok()
        && schedule.is_complete(problem)
        && (0..problem.num_jobs()).all(|j| {
            schedule
                .row(j)
                .all(|(i, e)| !e.is_negative() && e <= problem.energy_limit(j, i).unwrap())
        })
        && (0..problem.num_jobs()).all(|j| {
            (0..problem.num_intervals())
                .filter(|i| !problem.partition().is_available(j, *i))
                .all(|i| schedule.get(j, i).is_none_or(Zero::is_zero))
        })
}
