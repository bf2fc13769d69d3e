//! Decay-weighted tag profiles and profile similarity.
//!
//! A profile weights each tag by the sum of `exp(-m * age)` over the user's
//! events carrying it. Profiles are compared by cosine similarity, which is
//! invariant to the uniform rescaling that pure decay applies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decay::check_rate;
use crate::error::{Error, Result};
use crate::ingest::TaggingEvent;
use crate::time::TimeInstant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagProfile {
    pub user_id: String,
    pub reference_time: TimeInstant,
    /// Strictly positive, finite weights; zero-weight tags are absent.
    pub weights: BTreeMap<String, f64>,
}

impl TagProfile {
    /// Builds a profile from explicit weights, dropping zeros.
    pub fn from_weights(
        user_id: impl Into<String>,
        reference_time: TimeInstant,
        weights: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (tag, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Argument(format!("invalid weight {w} for tag {tag:?}")));
            }
            if w > 0.0 {
                map.insert(tag, w);
            }
        }
        Ok(TagProfile { user_id: user_id.into(), reference_time, weights: map })
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, tag: &str) -> f64 {
        self.weights.get(tag).copied().unwrap_or(0.0)
    }
}

/// Profile of `user` at `at` with tedium coefficient `m` (per second).
///
/// Every event of `user` must be at or before `at`.
pub fn build_profile(events: &[TaggingEvent], user: &str, m: f64, at: TimeInstant) -> Result<TagProfile> {
    check_rate(m)?;
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for ev in events.iter().filter(|ev| ev.user_id == user) {
        if ev.timestamp > at {
            return Err(Error::TemporalOrder { event: ev.timestamp.to_string(), at: at.to_string() });
        }
        let age = (at - ev.timestamp).as_secs();
        *weights.entry(ev.tag.clone()).or_default() += (-m * age).exp();
    }
    weights.retain(|_, w| *w > 0.0);
    Ok(TagProfile { user_id: user.to_string(), reference_time: at, weights })
}

/// Cosine similarity of two profiles over the union of their tags, in
/// `[0, 1]`. Zero if either profile is empty.
///
/// The dot product is accumulated in tag order, so the result is exactly
/// symmetric.
pub fn similarity(a: &TagProfile, b: &TagProfile) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let dot: f64 = a.weights.iter().filter_map(|(tag, wa)| b.weights.get(tag).map(|wb| wa * wb)).sum();
    let norm_a: f64 = a.weights.values().map(|w| w * w).sum::<f64>().sqrt();
    let norm_b: f64 = b.weights.values().map(|w| w * w).sum::<f64>().sqrt();
    let denom = norm_a * norm_b;
    if denom.is_nan() || denom <= 0.0 {
        return 0.0;
    }
    (dot / denom).clamp(0.0, 1.0)
}

/// One minus the similarity between the user's profiles at `t1` and `t2`.
/// Each profile sees only the events at or before its own instant.
pub fn drift(events: &[TaggingEvent], user: &str, m: f64, t1: TimeInstant, t2: TimeInstant) -> Result<f64> {
    if t1.partial_cmp(&t2) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Argument(format!("drift needs t1 < t2 (got {t1} and {t2})")));
    }
    check_rate(m)?;
    let before = |t: TimeInstant| -> Vec<TaggingEvent> {
        events.iter().filter(|ev| ev.user_id == user && ev.timestamp <= t).cloned().collect()
    };
    let p1 = build_profile(&before(t1), user, m, t1)?;
    let p2 = build_profile(&before(t2), user, m, t2)?;
    Ok(1.0 - similarity(&p1, &p2))
}
