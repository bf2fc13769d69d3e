//! Time instants and durations in seconds, with parsing of ISO-8601
//! timestamps and suffixed durations (`90s`, `12h`, `3d`, `1w`).

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_WEEK: f64 = 604_800.0;

/// Elapsed time in seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Duration(f64);

impl Duration {
    pub const ZERO: Duration = Duration(0.0);

    pub const fn from_secs(seconds: f64) -> Self {
        Duration(seconds)
    }

    pub fn from_hours(hours: f64) -> Self {
        Duration(hours * SECONDS_PER_HOUR)
    }

    pub fn from_days(days: f64) -> Self {
        Duration(days * SECONDS_PER_DAY)
    }

    pub fn from_weeks(weeks: f64) -> Self {
        Duration(weeks * SECONDS_PER_WEEK)
    }

    pub const fn as_secs(self) -> f64 {
        self.0
    }

    pub fn as_days(self) -> f64 {
        self.0 / SECONDS_PER_DAY
    }

    pub fn as_weeks(self) -> f64 {
        self.0 / SECONDS_PER_WEEK
    }

    pub fn in_unit(self, unit: TimeUnit) -> f64 {
        self.0 / unit.seconds()
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

/// Accepts a bare number of seconds or a number followed by one of
/// `s`, `h`, `d`, `w` (long forms such as `days` are also accepted).
impl FromStr for Duration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let number = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
        let suffix = &s[number.len()..];
        let value: f64 = number.trim().parse().map_err(|_| Error::Argument(format!("invalid duration {s:?}")))?;
        let unit = if suffix.is_empty() { TimeUnit::Second } else { suffix.parse()? };
        if !value.is_finite() {
            return Err(Error::Argument(format!("invalid duration {s:?}")));
        }
        Ok(Duration(value * unit.seconds()))
    }
}

/// Display and input unit for times and rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "h")]
    Hour,
    #[serde(rename = "d")]
    Day,
    #[serde(rename = "w")]
    Week,
}

impl TimeUnit {
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Second => 1.0,
            TimeUnit::Hour => SECONDS_PER_HOUR,
            TimeUnit::Day => SECONDS_PER_DAY,
            TimeUnit::Week => SECONDS_PER_WEEK,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TimeUnit::Second => "s",
            TimeUnit::Hour => "h",
            TimeUnit::Day => "d",
            TimeUnit::Week => "w",
        }
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "s" | "sec" | "secs" | "second" | "seconds" => Ok(TimeUnit::Second),
            "h" | "hour" | "hours" => Ok(TimeUnit::Hour),
            "d" | "day" | "days" => Ok(TimeUnit::Day),
            "w" | "week" | "weeks" => Ok(TimeUnit::Week),
            other => Err(Error::Argument(format!("unknown time unit {other:?}"))),
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Parses a rate such as `0.5`, `10/d` or `0.1/day`, returning events (or
/// interest) per second. A bare number is taken in `default_unit`.
pub fn parse_rate(s: &str, default_unit: TimeUnit) -> Result<f64> {
    let (number, unit) = match s.split_once('/') {
        Some((n, u)) => (n, u.parse()?),
        None => (s, default_unit),
    };
    let value: f64 = number.trim().parse().map_err(|_| Error::Argument(format!("invalid rate {s:?}")))?;
    if !value.is_finite() {
        return Err(Error::Argument(format!("invalid rate {s:?}")));
    }
    Ok(value / unit.seconds())
}

/// A point in time, as seconds since the Unix epoch.
///
/// Serialized as an RFC 3339 UTC timestamp rounded to the microsecond, which
/// is below half an ulp of an epoch-scale `f64`, so parse and format are
/// mutually inverse on parsed values.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimeInstant(f64);

impl TimeInstant {
    pub const fn from_epoch_secs(seconds: f64) -> Self {
        TimeInstant(seconds)
    }

    pub const fn epoch_secs(self) -> f64 {
        self.0
    }

    /// Parses an RFC 3339 timestamp with an explicit offset.
    pub fn parse_rfc3339(s: &str) -> Result<Self> {
        let dt = DateTime::parse_from_rfc3339(s.trim()).map_err(|_| Error::Timestamp(s.to_string()))?;
        Ok(Self::from_datetime(&dt.with_timezone(&Utc)))
    }

    /// Like [`TimeInstant::parse_rfc3339`], but also accepts a bare
    /// `YYYY-MM-DD` date meaning midnight UTC.
    pub fn parse_lenient(s: &str) -> Result<Self> {
        if let Ok(t) = Self::parse_rfc3339(s) {
            return Ok(t);
        }
        let date = NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|_| Error::Timestamp(s.to_string()))?;
        let dt = Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"));
        Ok(Self::from_datetime(&dt))
    }

    fn from_datetime(dt: &DateTime<Utc>) -> Self {
        TimeInstant(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_micros()) * 1e-6)
    }

    pub fn to_rfc3339(self) -> String {
        let micros = (self.0 * 1e6).round() as i64;
        match DateTime::<Utc>::from_timestamp_micros(micros) {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            None => format!("{}", self.0),
        }
    }

    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add<Duration> for TimeInstant {
    type Output = TimeInstant;
    fn add(self, rhs: Duration) -> TimeInstant {
        TimeInstant(self.0 + rhs.0)
    }
}

impl Sub for TimeInstant {
    type Output = Duration;
    fn sub(self, rhs: TimeInstant) -> Duration {
        Duration(self.0 - rhs.0)
    }
}

impl fmt::Display for TimeInstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl Serialize for TimeInstant {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for TimeInstant {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        TimeInstant::parse_rfc3339(&s).map_err(serde::de::Error::custom)
    }
}
