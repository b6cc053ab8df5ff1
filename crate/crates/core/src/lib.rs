//! Compiler from logical quantum circuits to trapped-ion pulse schedules.
//!
//! The machine executes two native operations: a single-qubit rotation
//! `R(theta, phi)` about an equatorial axis, and the two-qubit Ising-type
//! interaction `XX(chi)` whose sign is fixed per ion pair. This crate lowers
//! circuits over a conventional gate set (Hadamard, phase gates, controlled
//! powers of Pauli operators, Toffoli, ...) into schedules of those pulses,
//! optimizing duration or accumulated error, and verifies the result against
//! the input unitary.

pub mod angle;
pub mod bench;
pub mod cost;
pub mod gatelib;
pub mod ir;
pub mod linalg;
pub mod mapper;
pub mod optimizer;
pub mod pipeline;
pub mod report;
pub mod text;
