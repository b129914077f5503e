//! Simulation and exact analysis of two decoherence-free-subspace QKD
//! protocols: one over a collective-dephasing channel, one over a
//! collective-rotation channel.
//!
//! Each key bit travels as a quartet of photons holding two identical Bell
//! pairs; which photons are paired (neighbouring or crossing) is the
//! preparation basis. Bob decodes with single-photon measurements in one fixed
//! basis, so no transmission is lost to basis mismatch.
//!
//! - [`statevector`]: dense simulator for up to five qubits.
//! - [`noise`]: collective dephasing and rotation channels.
//! - [`codewords`]: the eight codewords, decoding and check predicates.
//! - [`protocol`]: Alice/Bob session pipeline.
//! - [`adversary`]: intercept-resend, Bell and parity-ancilla attacks.
//! - [`oracle`]: exact error rates by branch enumeration, plus Monte Carlo.

pub mod adversary;
pub mod codewords;
pub mod error;
pub mod noise;
pub mod oracle;
pub mod protocol;
pub mod statevector;

pub use adversary::{Attack, AttackKind, CnotPair, Eavesdropper, EveNote, EveRecord, EveSummary};
pub use codewords::{build_codeword, decode_key, LogicalState, SpatialBasis, Variant};
pub use error::{QkdError, Result};
pub use noise::NoisePolicy;
pub use oracle::{analyze, exact_error_rates, mc_error_rates, AttackReport, ErrorRates, McRates};
pub use protocol::{run_session, SessionConfig, SessionResult};
pub use statevector::{Amplitude, BellOutcome, MeasBasis, StateVector};
