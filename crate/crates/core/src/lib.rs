//! Exponential forgetting of tag interest.
//!
//! A user's interest `x` in a web object decays as `x(t) = x0 exp(-m t)`
//! under the tedium coefficient `m > 0`. This crate evaluates and integrates
//! those dynamics ([`decay`]), ingests tagging-event logs ([`ingest`]),
//! estimates `x0` and `m` from binned usage ([`estimate`]), compares
//! decay-weighted tag profiles ([`matching`]) and simulates cohorts whose
//! tagging intensity follows the decay law ([`simulate`]).
//!
//! All times are seconds and all rates are per second unless a unit is named.

pub mod decay;
pub mod error;
pub mod estimate;
pub mod ingest;
pub mod matching;
pub mod simulate;
pub mod time;

#[cfg(feature = "cli")]
pub mod cli;

pub use decay::{decay_curve, evaluate_interest, forgetfulness_rate, half_life, integrate_euler, DecayParams};
pub use error::{Error, Result};
pub use estimate::{fit_loglinear, fit_nonlinear, goodness_of_fit, FitMethod, FitResult};
pub use ingest::{bin_usage, parse_events, retag_intervals, EventFormat, Scope, TaggingEvent, UsageSeries};
pub use matching::{build_profile, drift, similarity, TagProfile};
pub use simulate::{simulate_cohort, simulate_user, CohortSpec, GroundTruth};
pub use time::{Duration, TimeInstant, TimeUnit};
