//! Optimality certification independent of the scheduler: KKT conditions,
//! dual certificates, work transferability, structural checks and a
//! brute-force oracle.

pub mod duals;
pub mod kkt;
pub mod oracle;
pub mod structure;

pub use duals::{recover_duals, validate_certificate, DualCertificate, DualEntry, DualError, DualViolation};
pub use kkt::{check_kkt, check_kkt_with, JobClasses, KktCondition, KktError, KktOptions, KktReport, KktViolation};
pub use oracle::{oracle_solve, OracleError, OracleSolution, MAX_CANDIDATES};
pub use structure::{
    check_constraints, check_isolation, check_isolation_all, check_transfer_equivalence,
    check_monotonicity, schedule_network, work_transferable, work_transferable_closure,
};
