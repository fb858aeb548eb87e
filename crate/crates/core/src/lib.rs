//! Simulation and verification of a (3,3) threshold quantum secret-sharing
//! scheme built on the 5-qubit code.
//!
//! Layers, bottom up:
//!
//! - [`qcore`]: dense states, operators, partial traces and distances on at
//!   most 8 qubits. Qubit 0 is the most significant bit.
//! - [`gates`]: named gates, the controlled-XZ decomposition and Bell-state
//!   measurement.
//! - [`channels`]: Kraus channels, Choi matrices and linear-inversion process
//!   tomography.
//! - [`code5`]: the 5-qubit code, erasure, Knill–Laflamme checks and
//!   constructive erasure recovery.
//! - [`qss`]: encoding a secret into three shares, recovery, entangled
//!   sharing and confidentiality.
//! - [`shots`]: seeded counting statistics and the count-based estimators.
//! - [`harness`]: the report-producing experiment runner behind the `qss`
//!   binary.
//!
//! ```
//! use qss::qss::{derive_recovery_table, encode_secret, recover, Secret};
//!
//! let table = derive_recovery_table().unwrap();
//! let secret = Secret::named("L").unwrap();
//! let report = recover(&encode_secret(&secret), &table, 0.0).unwrap();
//! assert!((report.fidelity - 1.0).abs() < 1e-10);
//! ```

pub mod channels;
pub mod code5;
pub mod error;
pub mod gates;
pub mod harness;
pub mod qcore;
pub mod qss;
pub mod shots;

pub use error::{Error, Result};
pub use qcore::{DensityMatrix, Operator, PureState};
