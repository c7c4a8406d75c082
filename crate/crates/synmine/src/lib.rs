//! Discovery of frequent synchronous patterns in multi-source event streams.
//!
//! A synchronous pattern is a set of event types (e.g. neurons) that all
//! fire within a bounded span of ticks. The crate provides:
//!
//! * a data model for timestamped, type-tagged event streams with text-file
//!   ingestion and time discretization ([`events`]);
//! * a single-pass counter of greedy non-overlapped pattern occurrences
//!   under an expiry constraint, and a level-wise miner that grows
//!   candidates only from frequent smaller patterns ([`counting`],
//!   [`mining`]);
//! * analytic significance under an independence null — occurrence
//!   probability, expected count and variance of the counting model, and a
//!   distribution-free Chebyshev count threshold ([`significance`]);
//! * a Bernoulli spike-train simulator with embedded ground-truth patterns
//!   ([`simulate`]);
//! * an all-occurrence counting baseline with jitter-surrogate significance
//!   ([`baseline`]) and a benchmark harness comparing the two approaches
//!   ([`bench`]).

pub mod baseline;
pub mod bench;
pub mod counting;
pub mod episode;
pub mod error;
pub mod events;
pub mod mining;
pub mod significance;
pub mod simulate;

pub use counting::{count_nonoverlapped, count_single, SpanPolicy};
pub use episode::Episode;
pub use error::{Error, Result};
pub use events::{
    estimate_rate, mean_rate, parse_spike_file, parse_spike_text, split_trials, Event,
    EventSequence, EventTypeId,
};
pub use mining::{generate_candidates, mine, FrequencyThreshold, MinedEpisode, MiningConfig};
pub use simulate::{embed_truth, generate, SimConfig};
