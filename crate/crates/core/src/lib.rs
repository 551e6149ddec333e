//! Throughput, delay and capacity analysis of a CSMA/CA wireless LAN whose
//! receiver can decode up to `M` simultaneous transmissions, together with a
//! slotted simulator for cross-checking the analytic results.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: scenario, timing and backoff parameters.
//! - [`analytic`]: slot probabilities, throughput and operating points.
//! - [`delay`]: access-delay transforms, moments and the vacation queue.
//! - [`capacity`]: stability boundaries, scenario classes and backoff-factor
//!   optimisation.
//! - [`sim`]: the discrete-event simulator.

pub mod analytic;
pub mod capacity;
pub mod delay;
pub mod error;
pub mod model;
pub mod numeric;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
pub use model::{
    make_slot_timing, make_slot_timing_with_propagation, AccessModel, MacParams, Scenario,
    SlotKind, SlotTiming, TimingComponents,
};
