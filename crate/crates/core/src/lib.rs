//! Simulator of universal gate-based quantum computers.
//!
//! Three interchangeable back ends share one circuit representation:
//!
//! * [`statevector`]: exact `2^N` double-precision amplitudes, in-place
//!   strided gate kernels.
//! * [`codec`]: two bytes per amplitude through an adaptively grown value
//!   table, an eighth of the exact memory footprint.
//! * [`pathsum`]: cuts CZ gates between qubit partitions and sums products of
//!   small subcircuit amplitudes over all `2^S` cut assignments.
//!
//! [`distributed`] spreads an exact state over `2^r` ranks that talk through a
//! message transport. Qubit 0 is the least-significant bit of every basis
//! index throughout the crate.

pub mod bits;
pub mod circuit;
pub mod codec;
pub mod distributed;
mod error;
pub mod pathsum;
pub mod rng;
pub mod statevector;

pub use bits::BitString;
pub use circuit::{Circuit, Gate, GateKind};
pub use codec::{encode_state, run_circuit_encoded, EncodedState};
pub use error::SimError;
pub use statevector::{memory_bytes, run_circuit, Axis, StateVector};
