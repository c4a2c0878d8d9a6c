//! Secure transmission over a buffer-aided relay powered by harvested RF
//! energy, with self-energy recycling through the relay's loopback channel.
//!
//! The crate has two halves that check each other:
//!
//! * a slotted Monte Carlo simulator ([`engine`]) driving the per-slot
//!   decision rules of [`protocol`] over Rayleigh block fading
//!   ([`channel`]) and a finite battery ([`energy`]);
//! * the closed-form queueing and secrecy-outage results in [`analysis`].
//!
//! [`config`] and [`report`] hold the plain-text config format and the CSV
//! and manifest writers used by the `relay-secrecy` binary.

pub mod analysis;
pub mod channel;
pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod params;
pub mod protocol;
pub mod report;
pub mod validation;

pub use error::{Error, Result};
pub use params::SystemParams;
