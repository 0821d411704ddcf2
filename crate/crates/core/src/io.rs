//! File formats.
//!
//! * Instance (JSON): `{"jobs":[{"id":"ev1","arrival":"0","departure":"3","energy":"2","p_max":"2"}]}`.
//!   Every number is a string holding a decimal or `num/den` literal; bare
//!   JSON numbers are rejected.
//! * Schedule (CSV): `interval_start,interval_end,job_id,energy`.
//! * Profile (CSV): `interval_start,interval_end,power`.
//! * Trace (JSON lines): one object per iteration and one per round.
//!
//! Emitted numbers use [`format_rational`]: exact decimals when the expansion
//! terminates, `num/den` otherwise.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::focs::{FocsResult, IterationRecord, RoundRecord};
use crate::instance::{Instance, InstanceError, Job, JobId};
use crate::partition::ChargingProblem;
use crate::rational::{format_rational, parse_rational, ParseRationalError, Q};
use crate::schedule::{PowerProfile, Schedule, ScheduleError};
use crate::verify::{DualCertificate, DualError, DualViolation, KktReport};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("field {field}: {source}")]
    Number {
        field: String,
        source: ParseRationalError,
    },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("row {row}: unknown job {job}")]
    UnknownJob { row: usize, job: String },
    #[error("row {row}: [{start}, {end}] is not an atomic interval of the instance")]
    UnknownInterval {
        row: usize,
        start: String,
        end: String,
    },
    #[error("row {row}: duplicate entry for job {job}")]
    Duplicate { row: usize, job: String },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRecord {
    id: String,
    arrival: String,
    departure: String,
    energy: String,
    p_max: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    jobs: Vec<JobRecord>,
}

fn number(field: String, literal: &str) -> Result<Q, FormatError> {
    parse_rational(literal).map_err(|source| FormatError::Number { field, source })
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let record: InstanceRecord = serde_json::from_str(text)?;
    let jobs = record
        .jobs
        .into_iter()
        .map(|r| {
            let at = |name: &str| format!("{}.{}", r.id, name);
            Ok(Job::new(
                JobId(r.id.clone()),
                number(at("arrival"), &r.arrival)?,
                number(at("departure"), &r.departure)?,
                number(at("energy"), &r.energy)?,
                number(at("p_max"), &r.p_max)?,
            ))
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(Instance::new(jobs)?)
}

pub fn read_instance(mut reader: impl Read) -> Result<Instance, FormatError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_instance(&text)
}

pub fn instance_to_json(instance: &Instance) -> String {
    let record = InstanceRecord {
        jobs: instance
            .jobs()
            .iter()
            .map(|j| JobRecord {
                id: j.id.0.clone(),
                arrival: format_rational(&j.arrival),
                departure: format_rational(&j.departure),
                energy: format_rational(&j.energy),
                p_max: format_rational(&j.p_max),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("plain strings serialize");
    text.push('\n');
    text
}

/// Writes one row per available `(interval, job)` pair, intervals ascending.
pub fn write_schedule_csv(
    problem: &ChargingProblem,
    schedule: &Schedule,
    writer: impl Write,
) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["interval_start", "interval_end", "job_id", "energy"])?;
    let partition = problem.partition();
    for i in 0..partition.len() {
        for &j in partition.jobs_in(i) {
            let e = schedule.get(j, i).expect("job available");
            out.write_record([
                format_rational(partition.start(i)),
                format_rational(partition.end(i)),
                problem.jobs()[j].id.0.clone(),
                format_rational(e),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ScheduleRow {
    interval_start: String,
    interval_end: String,
    job_id: String,
    energy: String,
}

/// Raw `(job, interval, energy)` entries of a schedule file, checked against
/// the instance's jobs and intervals but not yet against energy limits.
pub fn read_schedule_entries(
    problem: &ChargingProblem,
    reader: impl Read,
) -> Result<Vec<(usize, usize, Q)>, FormatError> {
    let mut input = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut seen = BTreeMap::new();
    let mut entries = Vec::new();
    for (k, row) in input.deserialize::<ScheduleRow>().enumerate() {
        let row = row?;
        let line = k + 2;
        let start = number(format!("row {line} interval_start"), &row.interval_start)?;
        let end = number(format!("row {line} interval_end"), &row.interval_end)?;
        let energy = number(format!("row {line} energy"), &row.energy)?;
        let job = problem
            .instance()
            .job_index(&JobId(row.job_id.clone()))
            .ok_or_else(|| FormatError::UnknownJob {
                row: line,
                job: row.job_id.clone(),
            })?;
        let interval = problem
            .partition()
            .find(&start, &end)
            .ok_or_else(|| FormatError::UnknownInterval {
                row: line,
                start: row.interval_start.clone(),
                end: row.interval_end.clone(),
            })?;
        if seen.insert((job, interval), ()).is_some() {
            return Err(FormatError::Duplicate {
                row: line,
                job: row.job_id,
            });
        }
        entries.push((job, interval, energy));
    }
    Ok(entries)
}

/// Reads and validates a schedule file (availability, sign, limits).
pub fn read_schedule_csv(problem: &ChargingProblem, reader: impl Read) -> Result<Schedule, FormatError> {
    let entries = read_schedule_entries(problem, reader)?;
    Ok(Schedule::from_entries(problem, entries)?)
}

pub fn write_profile_csv(
    problem: &ChargingProblem,
    profile: &PowerProfile,
    writer: impl Write,
) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["interval_start", "interval_end", "power"])?;
    let partition = problem.partition();
    for (i, p) in profile.powers.iter().enumerate() {
        out.write_record([
            format_rational(partition.start(i)),
            format_rational(partition.end(i)),
            format_rational(p),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn q_str(value: &Q) -> Value {
    Value::String(format_rational(value))
}

fn one_based(set: impl IntoIterator<Item = usize>) -> Value {
    Value::Array(set.into_iter().map(|i| json!(i + 1)).collect())
}

/// Iteration record: `g` maps 1-based interval index to sink capacity.
pub fn iteration_json(record: &IterationRecord) -> Value {
    let g: serde_json::Map<String, Value> = record
        .sink_caps
        .iter()
        .map(|(i, c)| ((i + 1).to_string(), q_str(c)))
        .collect();
    json!({
        "kind": "iteration",
        "round": record.round,
        "iteration": record.iteration,
        "g": g,
        "flow_value": q_str(&record.flow_value),
        "demand": q_str(&record.demand),
        "parked": one_based(record.parked.iter().copied()),
        "critical": Value::Null,
    })
}

/// Round record with the critical set, per-job critical loads and the
/// round's contribution to the power profile.
pub fn round_json(problem: &ChargingProblem, record: &RoundRecord) -> Value {
    let loads: serde_json::Map<String, Value> = record
        .critical_loads
        .iter()
        .enumerate()
        .map(|(j, l)| (problem.jobs()[j].id.0.clone(), q_str(l)))
        .collect();
    let partition = problem.partition();
    let profile: Vec<Value> = record
        .critical
        .iter()
        .map(|&i| {
            json!({
                "interval": i + 1,
                "start": q_str(partition.start(i)),
                "end": q_str(partition.end(i)),
                "power": q_str(&record.power),
            })
        })
        .collect();
    json!({
        "kind": "round",
        "round": record.round,
        "iteration": record.iterations,
        "flow_value": q_str(&record.demand),
        "parked": one_based(record.parked.iter().copied()),
        "critical": one_based(record.critical.iter().copied()),
        "critical_loads": loads,
        "power": q_str(&record.power),
        "profile": profile,
    })
}

/// Iteration records of each round followed by that round's record.
pub fn write_trace(
    problem: &ChargingProblem,
    result: &FocsResult,
    mut writer: impl Write,
) -> Result<(), FormatError> {
    for round in &result.rounds {
        for it in result.trace.iter().filter(|t| t.round == round.round) {
            writeln!(writer, "{}", iteration_json(it))?;
        }
        writeln!(writer, "{}", round_json(problem, round))?;
    }
    Ok(())
}

pub fn summary_json(problem: &ChargingProblem, result: &FocsResult, objective: Option<(u32, &Q)>) -> Value {
    let partition = problem.partition();
    let intervals: Vec<Value> = (0..partition.len())
        .map(|i| {
            json!({
                "interval": i + 1,
                "start": q_str(partition.start(i)),
                "end": q_str(partition.end(i)),
                "power": q_str(result.profile.power(i)),
                "rank": result.ranks[i],
            })
        })
        .collect();
    let mut summary = json!({
        "jobs": problem.num_jobs(),
        "intervals": partition.len(),
        "rounds": result.num_rounds(),
        "iterations": result.rounds.iter().map(|r| r.iterations).collect::<Vec<_>>(),
        "profile": intervals,
    });
    if let Some((alpha, value)) = objective {
        summary["alpha"] = json!(alpha);
        summary["objective"] = q_str(value);
    }
    summary
}

fn violation_json(v: &DualViolation) -> Value {
    match v {
        DualViolation::NegativeDelta { job, value } => {
            json!({"kind": "negative_delta", "job": job.0, "value": q_str(value)})
        }
        DualViolation::NegativeGamma { job, interval, value } => {
            json!({"kind": "negative_gamma", "job": job.0, "interval": interval + 1, "value": q_str(value)})
        }
        DualViolation::NegativeZeta { job, interval, value } => {
            json!({"kind": "negative_zeta", "job": job.0, "interval": interval + 1, "value": q_str(value)})
        }
        DualViolation::Stationarity { job, interval, residual } => {
            json!({"kind": "stationarity", "job": job.0, "interval": interval.wrapping_add(1), "residual": q_str(residual)})
        }
        DualViolation::Slackness { job, interval, product } => {
            json!({"kind": "slackness", "job": job.0, "interval": interval.map(|i| i + 1), "product": q_str(product)})
        }
    }
}

/// Machine-readable verification report.
pub fn kkt_report_json(
    problem: &ChargingProblem,
    report: &KktReport,
    duals: &Result<DualCertificate, DualError>,
) -> Value {
    use crate::verify::KktCondition::*;
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "condition": v.condition.label(),
                "job": v.job.0,
                "intervals": [v.first + 1, v.second + 1],
                "powers": [q_str(&v.first_power), q_str(&v.second_power)],
                "magnitude": q_str(&v.magnitude),
            })
        })
        .collect();
    let conditions = json!({
        "KKT1": report.passed_condition(Kkt1),
        "KKT2": report.passed_condition(Kkt2),
        "KKT3": report.passed_condition(Kkt3),
    });
    let duals = match duals {
        Ok(cert) => json!({
            "valid": true,
            "delta": cert.delta.iter().enumerate()
                .map(|(j, d)| (problem.jobs()[j].id.0.clone(), q_str(d)))
                .collect::<serde_json::Map<_, _>>(),
            "entries": cert.entries.iter().map(|e| json!({
                "job": problem.jobs()[e.job].id.0,
                "interval": e.interval + 1,
                "marginal": q_str(&e.marginal),
                "gamma": q_str(&e.gamma),
                "zeta": q_str(&e.zeta),
            })).collect::<Vec<_>>(),
        }),
        Err(DualError::Invalid { violations, .. }) => json!({
            "valid": false,
            "violations": violations.iter().map(violation_json).collect::<Vec<_>>(),
        }),
        Err(e @ DualError::Kkt(_)) => json!({
            "valid": false,
            "error": e.to_string(),
        }),
    };
    json!({
        "pass": report.passed(),
        "conditions": conditions,
        "violations": violations,
        "profile": report.profile.powers.iter().map(q_str).collect::<Vec<_>>(),
        "duals": duals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focs::{run_focs_with, FocsOptions};
    use crate::rational::{q, ratio};

    const NESTED_PAIR: &str = r#"{"jobs":[
        {"id":"ev1","arrival":"0","departure":"3","energy":"2","p_max":"2"},
        {"id":"ev2","arrival":"1","departure":"2","energy":"2","p_max":"2"}]}"#;

    #[test]
    fn instance_json_roundtrip() {
        let inst = parse_instance(NESTED_PAIR).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.jobs()[1].departure, q(2));
        assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn numbers_must_be_strings() {
        let bad = r#"{"jobs":[{"id":"a","arrival":0,"departure":"1","energy":"1","p_max":"1"}]}"#;
        assert!(matches!(parse_instance(bad), Err(FormatError::Json(_))));
        let bad = r#"{"jobs":[{"id":"a","arrival":"1e0","departure":"2","energy":"1","p_max":"1"}]}"#;
        assert!(matches!(parse_instance(bad), Err(FormatError::Number { .. })));
        let bad = r#"{"jobs":[{"id":"a","arrival":"1","departure":"1","energy":"1","p_max":"1"}]}"#;
        assert!(matches!(parse_instance(bad), Err(FormatError::Instance(_))));
    }

    #[test]
    fn schedule_csv_roundtrip() {
        let problem = ChargingProblem::new(parse_instance(NESTED_PAIR).unwrap()).unwrap();
        let s = Schedule::from_entries(&problem, [(0, 0, ratio(1, 3)), (0, 2, ratio(5, 3)), (1, 1, q(2))]).unwrap();
        let mut buf = Vec::new();
        write_schedule_csv(&problem, &s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("interval_start,interval_end,job_id,energy\n"));
        assert!(text.contains("0,1,ev1,1/3\n"));
        assert_eq!(read_schedule_csv(&problem, buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn schedule_csv_errors() {
        let problem = ChargingProblem::new(parse_instance(NESTED_PAIR).unwrap()).unwrap();
        let header = "interval_start,interval_end,job_id,energy\n";
        let read = |body: &str| read_schedule_csv(&problem, format!("{header}{body}").as_bytes());
        assert!(matches!(read("0,1,ev9,1\n"), Err(FormatError::UnknownJob { .. })));
        assert!(matches!(read("0,2,ev1,1\n"), Err(FormatError::UnknownInterval { .. })));
        assert!(matches!(read("0,1,ev1,1\n0,1,ev1,1\n"), Err(FormatError::Duplicate { .. })));
        assert!(matches!(read("0,1,ev1,3\n"), Err(FormatError::Schedule(ScheduleError::AboveLimit { .. }))));
        assert!(matches!(read("0,1,ev2,1\n"), Err(FormatError::Schedule(ScheduleError::NotAvailable { .. }))));
    }

    #[test]
    fn profile_csv_rows() {
        let problem = ChargingProblem::new(parse_instance(NESTED_PAIR).unwrap()).unwrap();
        let profile = PowerProfile {
            powers: vec![q(1), q(2), q(1)],
        };
        let mut buf = Vec::new();
        write_profile_csv(&problem, &profile, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "interval_start,interval_end,power\n0,1,1\n1,2,2\n2,3,1\n"
        );
    }

    #[test]
    fn trace_lines() {
        let problem = ChargingProblem::new(parse_instance(NESTED_PAIR).unwrap()).unwrap();
        let result = run_focs_with(&problem, &FocsOptions { trace: true, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_trace(&problem, &result, &mut buf).unwrap();
        let lines: Vec<Value> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0]["g"]["1"], "4/3");
        assert_eq!(lines[0]["flow_value"], "10/3");
        assert_eq!(lines[0]["parked"], json!([1, 3]));
        assert_eq!(lines[1]["g"]["2"], "2");
        assert_eq!(lines[2]["kind"], "round");
        assert_eq!(lines[2]["critical"], json!([2]));
        assert_eq!(lines[2]["critical_loads"]["ev2"], "2");
        assert_eq!(lines[4]["critical"], json!([1, 3]));
        for line in &lines {
            for key in ["round", "iteration", "g", "flow_value", "parked", "critical"] {
                assert!(line.get(key).is_some() || key == "g", "{key} missing in {line}");
            }
        }
    }
}
