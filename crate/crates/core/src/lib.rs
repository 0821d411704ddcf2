//! Offline charging schedules that minimize the peak-penalizing objective
//! `sum |I| * p(I)^alpha`, computed exactly with rational arithmetic by
//! repeated maximum flows.
//!
//! ```
//! use focs_core::{parse_instance, run_focs, ChargingProblem, Objective};
//!
//! let instance = parse_instance(r#"{"jobs":[
//!     {"id":"a","arrival":"0","departure":"3","energy":"2","p_max":"2"},
//!     {"id":"b","arrival":"1","departure":"2","energy":"2","p_max":"2"}]}"#).unwrap();
//! let problem = ChargingProblem::new(instance).unwrap();
//! let result = run_focs(&problem).unwrap();
//! let powers: Vec<String> = result.profile.powers.iter().map(focs_core::format_rational).collect();
//! assert_eq!(powers, ["1", "2", "1"]);
//! let value = Objective::squared().value(&result.profile, problem.partition()).unwrap();
//! assert_eq!(value, focs_core::q(6));
//! ```

pub mod flow;
pub mod focs;
pub mod generate;
pub mod instance;
pub mod io;
pub mod partition;
pub mod rational;
pub mod schedule;
pub mod verify;

pub use flow::{
    build_network, is_saturated, max_flow, residual_interval_hops, residual_interval_reachability,
    subcritical_intervals, EdgeRef, Flow, FlowError, FlowNetwork, IntervalRelation,
};
pub use focs::{
    rank, run_focs, run_focs_with, FocsError, FocsOptions, FocsResult, IterationRecord, RoundRecord,
};
pub use generate::{generate_instance, GeneratorConfig};
pub use instance::{check_feasibility, Instance, InstanceError, Job, JobId};
pub use io::{parse_instance, read_instance, read_schedule_csv, FormatError};
pub use partition::{build_partition, AtomicPartition, ChargingProblem};
pub use rational::{format_rational, parse_rational, q, ratio, Exact, ParseRationalError, Q};
pub use schedule::{
    aggregate_power, objective_value, Objective, ObjectiveError, PowerProfile, Schedule,
    ScheduleError,
};
