//! Synthetic tagging corpora driven by exponentially decaying interest.
//!
//! Each user emits events from an inhomogeneous Poisson process with rate
//! `lambda0 * x0 * exp(-m t)`, sampled by thinning against the initial rate.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). User `i` of a
//! cohort draws from the generator seeded with the cohort seed on stream
//! `i + 1`, so users are independent of each other and of generation order.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decay::DecayParams;
use crate::error::{Error, Result};
use crate::ingest::TaggingEvent;
use crate::time::{Duration, TimeInstant};

pub const DEFAULT_OBJECT_ID: &str = "text-1";
pub const DEFAULT_ONTOLOGY_ID: &str = "cohort";

/// Identity of a simulated user's stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLabels {
    pub user_id: String,
    pub object_id: String,
    pub ontology_id: String,
    /// Time zero of the process.
    pub origin: TimeInstant,
}

/// Simulates one user's events on `(0, horizon)`. Rates are per second.
pub fn simulate_user<R: Rng + ?Sized>(
    params: &DecayParams,
    lambda0: f64,
    horizon: Duration,
    tags: &[String],
    labels: &StreamLabels,
    rng: &mut R,
) -> Result<Vec<TaggingEvent>> {
    if tags.is_empty() {
        return Err(Error::Argument("tag vocabulary is empty".into()));
    }
    if !(lambda0.is_finite() && lambda0 > 0.0) {
        return Err(Error::Argument(format!("lambda0 must be positive (got {lambda0})")));
    }
    let horizon = horizon.as_secs();
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Argument(format!("horizon must be positive (got {horizon} s)")));
    }
    let peak = lambda0 * params.x0();
    let mut events = Vec::new();
    if peak == 0.0 {
        return Ok(events);
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / peak;
        if t >= horizon {
            break;
        }
        let accept: f64 = rng.random();
        if t > 0.0 && accept < (-params.m() * t).exp() {
            let tag = &tags[rng.random_range(0..tags.len())];
            events.push(TaggingEvent {
                timestamp: labels.origin + Duration::from_secs(t),
                user_id: labels.user_id.clone(),
                object_id: labels.object_id.clone(),
                tag: tag.clone(),
                ontology_id: labels.ontology_id.clone(),
            });
        }
    }
    Ok(events)
}

/// Expected event count of one user over the horizon,
/// `lambda0 x0 (1 - exp(-m T)) / m`.
pub fn expected_event_count(params: &DecayParams, lambda0: f64, horizon: Duration) -> f64 {
    let m = params.m();
    lambda0 * params.x0() * -(-m * horizon.as_secs()).exp_m1() / m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_users: usize,
    pub horizon: Duration,
    /// Events per second at interest 1.
    pub lambda0: f64,
    pub x0_range: (f64, f64),
    /// Per second.
    pub m_range: (f64, f64),
    pub tags_per_user: usize,
    /// Size of the shared pool user vocabularies are drawn from.
    pub tag_pool: usize,
    pub seed: u64,
    pub object_id: String,
    pub ontology_id: String,
    pub origin: TimeInstant,
}

impl CohortSpec {
    /// Twenty users over 150 days with rates given per day.
    pub fn reference(seed: u64) -> Self {
        let per_day = 1.0 / crate::time::SECONDS_PER_DAY;
        CohortSpec {
            n_users: 20,
            horizon: Duration::from_days(150.0),
            lambda0: 10.0 * per_day,
            x0_range: (1.0, 5.0),
            m_range: (0.02 * per_day, 0.1 * per_day),
            tags_per_user: 5,
            tag_pool: 20,
            seed,
            object_id: DEFAULT_OBJECT_ID.to_string(),
            ontology_id: DEFAULT_ONTOLOGY_ID.to_string(),
            origin: TimeInstant::from_epoch_secs(1_704_067_200.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Argument(msg));
        if self.n_users == 0 {
            return bad("cohort needs at least one user".into());
        }
        if !(self.horizon.as_secs().is_finite() && self.horizon.as_secs() > 0.0) {
            return bad(format!("horizon must be positive (got {})", self.horizon));
        }
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return bad(format!("lambda0 must be positive (got {})", self.lambda0));
        }
        let (xa, xb) = self.x0_range;
        if !(xa.is_finite() && xb.is_finite() && 0.0 <= xa && xa <= xb) {
            return bad(format!("x0 range must satisfy 0 <= a <= b (got {xa}:{xb})"));
        }
        let (ma, mb) = self.m_range;
        if !(ma.is_finite() && mb.is_finite() && 0.0 < ma && ma <= mb) {
            return bad(format!("m range must satisfy 0 < a <= b (got {ma}:{mb})"));
        }
        if self.tags_per_user == 0 || self.tags_per_user > self.tag_pool {
            return bad(format!("tags per user must be in 1..={} (got {})", self.tag_pool, self.tags_per_user));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTruth {
    pub x0: f64,
    /// Per second.
    pub m: f64,
    pub tags: Vec<String>,
}

/// True parameters of every simulated user, keyed by user id.
pub type GroundTruth = BTreeMap<String, UserTruth>;

pub fn user_id(index: usize) -> String {
    format!("u{:02}", index + 1)
}

pub fn pool_tag(k: usize) -> String {
    format!("tag{k:02}")
}

/// Generator for user `index` of a cohort seeded with `seed`.
pub fn user_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Draws a user's parameters and vocabulary from the cohort ranges.
pub fn sample_user<R: Rng + ?Sized>(spec: &CohortSpec, rng: &mut R) -> Result<UserTruth> {
    let x0 = uniform(rng, spec.x0_range);
    let m = uniform(rng, spec.m_range);
    DecayParams::new(x0, m)?;
    let mut picks = index::sample(rng, spec.tag_pool, spec.tags_per_user).into_vec();
    picks.sort_unstable();
    Ok(UserTruth { x0, m, tags: picks.into_iter().map(pool_tag).collect() })
}

/// Simulates a cohort; events are merged in timestamp order with ties kept in
/// user order.
pub fn simulate_cohort(spec: &CohortSpec) -> Result<(Vec<TaggingEvent>, GroundTruth)> {
    spec.validate()?;
    let mut truth = GroundTruth::new();
    let mut events = Vec::new();
    for i in 0..spec.n_users {
        let mut rng = user_rng(spec.seed, i);
        let user = sample_user(spec, &mut rng)?;
        let labels = StreamLabels {
            user_id: user_id(i),
            object_id: spec.object_id.clone(),
            ontology_id: spec.ontology_id.clone(),
            origin: spec.origin,
        };
        let params = DecayParams::new(user.x0, user.m)?;
        events.extend(simulate_user(&params, spec.lambda0, spec.horizon, &user.tags, &labels, &mut rng)?);
        truth.insert(labels.user_id, user);
    }
    events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok((events, truth))
}
