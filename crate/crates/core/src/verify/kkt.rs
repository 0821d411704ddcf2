//! Per-job power-ordering optimality conditions.
//!
//! For every job, split its available intervals into idle (`e = 0`), partial
//! (`0 < e < e^max`) and full (`e = e^max`). A complete schedule is optimal
//! for every strictly convex increasing objective iff, for every job:
//!
//! * KKT1: all partial intervals share one aggregated power;
//! * KKT2: every idle interval has power at least that of every charging
//!   (partial or full) interval;
//! * KKT3: every full interval has power at most that of every partial one.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::instance::JobId;
use crate::partition::ChargingProblem;
use crate::rational::Q;
use crate::schedule::{PowerProfile, Schedule, ScheduleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KktCondition {
    Kkt1,
    Kkt2,
    Kkt3,
}

impl KktCondition {
    pub fn label(&self) -> &'static str {
        match self {
            KktCondition::Kkt1 => "KKT1",
            KktCondition::Kkt2 => "KKT2",
            KktCondition::Kkt3 => "KKT3",
        }
    }
}

/// The three-way split of one job's availability.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JobClasses {
    pub idle: BTreeSet<usize>,
    pub partial: BTreeSet<usize>,
    pub full: BTreeSet<usize>,
}

impl JobClasses {
    pub fn charging(&self) -> impl Iterator<Item = usize> + '_ {
        self.partial.iter().chain(self.full.iter()).copied()
    }
}

/// One failed comparison: `power[first]` should relate to `power[second]`
/// as the condition demands, and misses by `magnitude`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktViolation {
    pub condition: KktCondition,
    pub job: JobId,
    pub job_index: usize,
    pub first: usize,
    pub second: usize,
    pub first_power: Q,
    pub second_power: Q,
    pub magnitude: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktReport {
    pub classes: Vec<JobClasses>,
    pub profile: PowerProfile,
    pub violations: Vec<KktViolation>,
}

impl KktReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passed_condition(&self, condition: KktCondition) -> bool {
        self.violations.iter().all(|v| v.condition != condition)
    }
}

/// Comparison mode. `tolerance: None` is exact; `Some(t)` compares with a
/// relative slack of `t * max(|a|, |b|, 1)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KktOptions {
    pub tolerance: Option<Q>,
}

impl KktOptions {
    pub fn exact() -> Self {
        KktOptions { tolerance: None }
    }

    pub fn relative(tolerance: Q) -> Self {
        KktOptions {
            tolerance: Some(tolerance),
        }
    }

    fn slack(&self, a: &Q, b: &Q) -> Q {
        match &self.tolerance {
            None => Q::zero(),
            Some(t) => {
                let one = Q::from_integer(1.into());
                let scale = a.abs().max(b.abs()).max(one);
                t * scale
            }
        }
    }

    pub(crate) fn le(&self, a: &Q, b: &Q) -> bool {
        a <= &(b + self.slack(a, b))
    }

    pub(crate) fn eq(&self, a: &Q, b: &Q) -> bool {
        (a - b).abs() <= self.slack(a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KktError {
    #[error("schedule is not complete: {0}")]
    Incomplete(ScheduleError),
}

/// Splits each job's availability into idle / partial / full intervals.
pub fn classify(problem: &ChargingProblem, schedule: &Schedule, options: &KktOptions) -> Vec<JobClasses> {
    (0..problem.num_jobs())
        .map(|j| {
            let mut classes = JobClasses::default();
            for (i, e) in schedule.row(j) {
                let limit = problem.energy_limit(j, i).expect("row covers availability");
                if options.eq(e, &Q::zero()) {
                    classes.idle.insert(i);
                } else if options.eq(e, limit) {
                    classes.full.insert(i);
                } else {
                    classes.partial.insert(i);
                }
            }
            classes
        })
        .collect()
}

pub(crate) fn check_complete(
    problem: &ChargingProblem,
    schedule: &Schedule,
    options: &KktOptions,
) -> Result<(), KktError> {
    match options.tolerance {
        None => schedule.check_complete(problem).map_err(KktError::Incomplete),
        Some(_) => {
            for (j, job) in problem.jobs().iter().enumerate() {
                let delivered = schedule.job_total(j);
                if !options.eq(&delivered, &job.energy) {
                    return Err(KktError::Incomplete(ScheduleError::Incomplete {
                        job: job.id.clone(),
                        delivered: crate::rational::format_rational(&delivered),
                        required: crate::rational::format_rational(&job.energy),
                    }));
                }
            }
            Ok(())
        }
    }
}

/// Exact KKT check of a complete schedule.
pub fn check_kkt(problem: &ChargingProblem, schedule: &Schedule) -> Result<KktReport, KktError> {
    check_kkt_with(problem, schedule, &KktOptions::exact())
}

pub fn check_kkt_with(
    problem: &ChargingProblem,
    schedule: &Schedule,
    options: &KktOptions,
) -> Result<KktReport, KktError> {
    check_complete(problem, schedule, options)?;
    let profile = schedule.profile(problem.partition());
    let classes = classify(problem, schedule, options);
    let p = &profile.powers;

    let mut violations = Vec::new();
    for (j, class) in classes.iter().enumerate() {
        let mut push = |condition, first: usize, second: usize| {
            violations.push(KktViolation {
                condition,
                job: problem.jobs()[j].id.clone(),
                job_index: j,
                first,
                second,
                first_power: p[first].clone(),
                second_power: p[second].clone(),
                magnitude: (&p[first] - &p[second]).abs(),
            });
        };

        if let Some(&anchor) = class.partial.iter().next() {
            for &i in class.partial.iter().skip(1) {
                if !options.eq(&p[i], &p[anchor]) {
                    push(KktCondition::Kkt1, anchor, i);
                }
            }
        }
        for &z in &class.idle {
            for c in class.charging() {
                if !options.le(&p[c], &p[z]) {
                    push(KktCondition::Kkt2, z, c);
                }
            }
        }
        for &full in &class.full {
            for &part in &class.partial {
                if !options.le(&p[full], &p[part]) {
                    push(KktCondition::Kkt3, full, part);
                }
            }
        }
    }

    Ok(KktReport {
        classes,
        profile,
        violations,
    })
}
