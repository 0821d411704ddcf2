//! Dual certificates for the charging program.
//!
//! Multipliers: `delta_j` for the demand constraint of job `j`, `gamma[i][j]`
//! for `e[i][j] >= 0` and `zeta[i][j]` for `e[i][j] <= e^max[i][j]`.
//! Stationarity per variable reads `dF/de[i][j] - delta_j - gamma + zeta = 0`.

use num_traits::{Signed, Zero};

use super::kkt::{check_complete, classify, KktError, KktOptions};
use crate::instance::JobId;
use crate::partition::ChargingProblem;
use crate::rational::Q;
use crate::schedule::{Objective, Schedule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualEntry {
    pub job: usize,
    pub interval: usize,
    /// `dF/de[i][j]` at the schedule's profile.
    pub marginal: Q,
    pub gamma: Q,
    pub zeta: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub delta: Vec<Q>,
    pub entries: Vec<DualEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualViolation {
    NegativeDelta { job: JobId, value: Q },
    NegativeGamma { job: JobId, interval: usize, value: Q },
    NegativeZeta { job: JobId, interval: usize, value: Q },
    Stationarity { job: JobId, interval: usize, residual: Q },
    Slackness { job: JobId, interval: Option<usize>, product: Q },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DualError {
    #[error(transparent)]
    Kkt(#[from] KktError),
    #[error("no valid dual certificate: {} violation(s)", violations.len())]
    Invalid {
        certificate: DualCertificate,
        violations: Vec<DualViolation>,
    },
}

/// Reconstructs multipliers from a complete schedule.
///
/// `delta_j` comes from any partial interval of `j`; with none, it is the
/// largest marginal over `j`'s full intervals (zero if `j` never charges).
/// `gamma` is `marginal - delta` on idle intervals, `zeta` is `delta - marginal`
/// on full ones, both zero elsewhere. The result is checked with
/// [`validate_certificate`]; a failed check is returned as
/// [`DualError::Invalid`] with the offending components.
pub fn recover_duals(
    problem: &ChargingProblem,
    schedule: &Schedule,
    objective: &Objective,
) -> Result<DualCertificate, DualError> {
    let exact = KktOptions::exact();
    check_complete(problem, schedule, &exact)?;
    let profile = schedule.profile(problem.partition());
    let marginals: Vec<Q> = profile.powers.iter().map(|p| objective.marginal(p)).collect();
    let classes = classify(problem, schedule, &exact);

    let delta: Vec<Q> = classes
        .iter()
        .map(|c| match c.partial.iter().next() {
            Some(&i) => marginals[i].clone(),
            None => c
                .full
                .iter()
                .map(|&i| &marginals[i])
                .max()
                .cloned()
                .unwrap_or_else(Q::zero),
        })
        .collect();

    let mut entries = Vec::new();
    for (j, c) in classes.iter().enumerate() {
        for (i, _) in schedule.row(j) {
            let marginal = marginals[i].clone();
            let (gamma, zeta) = if c.idle.contains(&i) {
                (&marginal - &delta[j], Q::zero())
            } else if c.full.contains(&i) {
                (Q::zero(), &delta[j] - &marginal)
            } else {
                (Q::zero(), Q::zero())
            };
            entries.push(DualEntry {
                job: j,
                interval: i,
                marginal,
                gamma,
                zeta,
            });
        }
    }

    let certificate = DualCertificate { delta, entries };
    let violations = validate_certificate(problem, schedule, objective, &certificate);
    if violations.is_empty() {
        Ok(certificate)
    } else {
        Err(DualError::Invalid {
            certificate,
            violations,
        })
    }
}

/// Checks sign constraints, complementary slackness and stationarity of a
/// certificate against a schedule, recomputing every marginal.
pub fn validate_certificate(
    problem: &ChargingProblem,
    schedule: &Schedule,
    objective: &Objective,
    certificate: &DualCertificate,
) -> Vec<DualViolation> {
    let profile = schedule.profile(problem.partition());
    let mut out = Vec::new();
    let id = |j: usize| problem.jobs()[j].id.clone();

    for (j, d) in certificate.delta.iter().enumerate() {
        if d.is_negative() {
            out.push(DualViolation::NegativeDelta {
                job: id(j),
                value: d.clone(),
            });
        }
        let slack = schedule.job_total(j) - &problem.jobs()[j].energy;
        let product = d * slack;
        if !product.is_zero() {
            out.push(DualViolation::Slackness {
                job: id(j),
                interval: None,
                product,
            });
        }
    }

    let mut covered = 0usize;
    for entry in &certificate.entries {
        let (j, i) = (entry.job, entry.interval);
        let Some(e) = schedule.get(j, i) else {
            out.push(DualViolation::Stationarity {
                job: id(j),
                interval: i,
                residual: entry.marginal.clone(),
            });
            continue;
        };
        covered += 1;
        let limit = problem.energy_limit(j, i).expect("scheduled pair is available");
        if entry.gamma.is_negative() {
            out.push(DualViolation::NegativeGamma {
                job: id(j),
                interval: i,
                value: entry.gamma.clone(),
            });
        }
        if entry.zeta.is_negative() {
            out.push(DualViolation::NegativeZeta {
                job: id(j),
                interval: i,
                value: entry.zeta.clone(),
            });
        }
        let g_slack = &entry.gamma * e;
        if !g_slack.is_zero() {
            out.push(DualViolation::Slackness {
                job: id(j),
                interval: Some(i),
                product: g_slack,
            });
        }
        let z_slack = &entry.zeta * (limit - e);
        if !z_slack.is_zero() {
            out.push(DualViolation::Slackness {
                job: id(j),
                interval: Some(i),
                product: z_slack,
            });
        }
        let marginal = objective.marginal(profile.power(i));
        let residual = marginal - &certificate.delta[j] - &entry.gamma + &entry.zeta;
        if !residual.is_zero() {
            out.push(DualViolation::Stationarity {
                job: id(j),
                interval: i,
                residual,
            });
        }
    }
    let expected: usize = (0..problem.num_jobs())
        .map(|j| problem.partition().intervals_of(j).len())
        .sum();
    if covered != expected {
        out.push(DualViolation::Stationarity {
            job: JobId("*".into()),
            interval: usize::MAX,
            residual: Q::from_integer((expected as i64 - covered as i64).into()),
        });
    }
    out
}
