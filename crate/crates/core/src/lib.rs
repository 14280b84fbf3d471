//! Phase-estimation figures of merit for a Mach-Zehnder interferometer fed
//! by a squeezed single photon or squeezed vacuum on one port and a
//! coherent state on the other.
//!
//! Two independent computational routes are provided:
//!
//! * [`moment_engine`]: closed-form single-mode moments pushed through the
//!   network by exact operator substitution (the production path);
//! * [`fock_oracle`]: brute force on truncated photon-number spaces, used to
//!   validate the analytic path and to compute photocount statistics.
//!
//! [`metrology`] builds quantum Fisher information, sensitivity, classical
//! Fisher information, crossover thresholds and asymptotic checks on top of
//! both; [`sweep`] and [`verify`] drive parameter scans and the acceptance
//! checks used by the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fock_oracle;
pub mod interferometer;
pub mod metrology;
pub mod moment_engine;
pub mod network;
pub mod roots;
pub mod sweep;
pub mod verify;

pub use error::{MetroError, Result};
pub use fock_oracle::{Seed, Truncation};
pub use interferometer::{Family, SourceConfig, WorkingPoint};
pub use metrology::{MetricRecord, SensitivityRecord};
pub use network::NetworkUnitary;
