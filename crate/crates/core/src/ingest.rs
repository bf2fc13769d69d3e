//! Tagging-event logs: CSV/JSONL parsing and writing, usage binning and
//! retag-interval extraction.
//!
//! CSV columns are `timestamp,user_id,object_id,tag,ontology_id`; the header
//! row is optional and the ontology column may be omitted. JSONL lines are
//! objects with those same field names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Duration, TimeInstant};

/// Ontology assigned to events that do not name one.
pub const UNASSIGNED_ONTOLOGY: &str = "_none";

pub const CSV_HEADER: [&str; 5] = ["timestamp", "user_id", "object_id", "tag", "ontology_id"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggingEvent {
    pub timestamp: TimeInstant,
    pub user_id: String,
    pub object_id: String,
    pub tag: String,
    #[serde(default = "unassigned")]
    pub ontology_id: String,
}

fn unassigned() -> String {
    UNASSIGNED_ONTOLOGY.to_string()
}

impl TaggingEvent {
    /// Builds a validated event; an empty or missing ontology maps to
    /// [`UNASSIGNED_ONTOLOGY`] and the tag is trimmed.
    pub fn new(
        timestamp: TimeInstant,
        user_id: impl Into<String>,
        object_id: impl Into<String>,
        tag: &str,
        ontology_id: Option<&str>,
    ) -> Result<Self> {
        let tag = tag.trim();
        if tag.is_empty() {
            return Err(Error::Argument("tag is empty".into()));
        }
        let ontology_id = match ontology_id.map(str::trim) {
            Some(o) if !o.is_empty() => o.to_string(),
            _ => unassigned(),
        };
        Ok(TaggingEvent {
            timestamp,
            user_id: user_id.into(),
            object_id: object_id.into(),
            tag: tag.to_string(),
            ontology_id,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Csv,
    Jsonl,
}

impl EventFormat {
    /// `.jsonl` / `.ndjson` paths are JSONL, everything else CSV.
    pub fn from_path(path: &str) -> Self {
        let lower = path.to_ascii_lowercase();
        if lower.ends_with(".jsonl") || lower.ends_with(".ndjson") {
            EventFormat::Jsonl
        } else {
            EventFormat::Csv
        }
    }
}

impl FromStr for EventFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(EventFormat::Csv),
            "jsonl" | "ndjson" => Ok(EventFormat::Jsonl),
            other => Err(Error::Argument(format!("unknown event format {other:?}"))),
        }
    }
}

/// A skipped input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedEvents {
    pub events: Vec<TaggingEvent>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses an event stream. Malformed lines are skipped with a diagnostic; if
/// more than half of the data lines are malformed the whole input is
/// rejected.
pub fn parse_events<R: BufRead>(input: R, format: EventFormat) -> Result<ParsedEvents> {
    let parsed = match format {
        EventFormat::Csv => parse_csv(input)?,
        EventFormat::Jsonl => parse_jsonl(input)?,
    };
    let malformed = parsed.diagnostics.len();
    let total = malformed + parsed.events.len();
    if malformed * 2 > total {
        return Err(Error::CorpusRejected { malformed, total });
    }
    Ok(parsed)
}

fn parse_csv<R: BufRead>(input: R) -> Result<ParsedEvents> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut out = ParsedEvents::default();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => return Err(e.into()),
                _ => {
                    out.diagnostics.push(Diagnostic { line, reason: e.to_string() });
                    continue;
                }
            },
        }
        let line = record.position().map_or(line, |p| p.line());
        if std::mem::take(&mut first) && record.get(0).map(str::trim) == Some("timestamp") {
            continue;
        }
        match csv_event(&record) {
            Ok(ev) => out.events.push(ev),
            Err(reason) => out.diagnostics.push(Diagnostic { line, reason }),
        }
    }
    Ok(out)
}

fn csv_event(record: &csv::StringRecord) -> std::result::Result<TaggingEvent, String> {
    if record.len() != 4 && record.len() != 5 {
        return Err(format!("expected 4 or 5 fields, found {}", record.len()));
    }
    let ts = TimeInstant::parse_rfc3339(&record[0]).map_err(|_| format!("invalid timestamp {:?}", &record[0]))?;
    if record[3].trim().is_empty() {
        return Err("empty tag".into());
    }
    TaggingEvent::new(ts, &record[1], &record[2], &record[3], record.get(4)).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
struct RawEvent {
    timestamp: String,
    user_id: String,
    object_id: String,
    tag: String,
    #[serde(default)]
    ontology_id: Option<String>,
}

fn parse_jsonl<R: BufRead>(input: R) -> Result<ParsedEvents> {
    let mut out = ParsedEvents::default();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let number = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str::<RawEvent>(&line).map_err(|e| e.to_string()).and_then(|raw| {
            let ts = TimeInstant::parse_rfc3339(&raw.timestamp)
                .map_err(|_| format!("invalid timestamp {:?}", raw.timestamp))?;
            if raw.tag.trim().is_empty() {
                return Err("empty tag".to_string());
            }
            TaggingEvent::new(ts, raw.user_id, raw.object_id, &raw.tag, raw.ontology_id.as_deref())
                .map_err(|e| e.to_string())
        });
        match outcome {
            Ok(ev) => out.events.push(ev),
            Err(reason) => out.diagnostics.push(Diagnostic { line: number, reason }),
        }
    }
    Ok(out)
}

/// Writes events in the given format. CSV output carries a header row.
pub fn write_events<W: Write>(out: W, events: &[TaggingEvent], format: EventFormat) -> Result<()> {
    match format {
        EventFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            writer.write_record(CSV_HEADER)?;
            for ev in events {
                let ts = ev.timestamp.to_rfc3339();
                writer.write_record([ts.as_str(), &ev.user_id, &ev.object_id, &ev.tag, &ev.ontology_id])?;
            }
            writer.flush()?;
        }
        EventFormat::Jsonl => {
            let mut out = std::io::BufWriter::new(out);
            for ev in events {
                serde_json::to_writer(&mut out, ev)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// What a usage series counts: one tag, or every tag of one ontology.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Scope {
    Tag(String),
    Ontology(String),
}

impl Scope {
    pub fn matches(&self, ev: &TaggingEvent) -> bool {
        match self {
            Scope::Tag(t) => ev.tag == *t,
            Scope::Ontology(o) => ev.ontology_id == *o,
        }
    }
}

/// `ontology:<id>` selects an ontology; `tag:<name>` or a bare name selects
/// a tag.
impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (scope, id) = match s.split_once(':') {
            Some(("ontology", id)) => (Scope::Ontology(id.to_string()), id),
            Some(("tag", id)) => (Scope::Tag(id.to_string()), id),
            _ => (Scope::Tag(s.to_string()), s),
        };
        if id.trim().is_empty() {
            return Err(Error::Argument(format!("empty scope {s:?}")));
        }
        Ok(scope)
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Tag(t) => write!(f, "tag:{t}"),
            Scope::Ontology(o) => write!(f, "ontology:{o}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesOwner {
    pub user_id: String,
    pub scope: Scope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsagePoint {
    pub time: TimeInstant,
    pub intensity: f64,
}

/// Evenly spaced usage intensities for one (user, scope) pair. Fitting
/// measures elapsed time from `start`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UsageSeries {
    owner: SeriesOwner,
    start: TimeInstant,
    bin_width: Duration,
    points: Vec<UsagePoint>,
}

impl UsageSeries {
    /// Validates spacing (consecutive points exactly `bin_width` apart, up to
    /// rounding) and intensities (finite, non-negative).
    pub fn new(owner: SeriesOwner, start: TimeInstant, bin_width: Duration, points: Vec<UsagePoint>) -> Result<Self> {
        let w = bin_width.as_secs();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Argument(format!("bin width must be positive (got {bin_width})")));
        }
        for p in &points {
            if !(p.intensity.is_finite() && p.intensity >= 0.0) {
                return Err(Error::Argument(format!("invalid intensity {}", p.intensity)));
            }
            if !p.time.epoch_secs().is_finite() {
                return Err(Error::Argument("non-finite point time".into()));
            }
        }
        for pair in points.windows(2) {
            let gap = (pair[1].time - pair[0].time).as_secs();
            let tol = 1e-9 * w.max(pair[1].time.epoch_secs().abs() * 1e-6);
            if (gap - w).abs() > tol {
                return Err(Error::Argument(format!(
                    "points must be spaced exactly one bin width ({w} s) apart, found {gap} s"
                )));
            }
        }
        Ok(UsageSeries { owner, start, bin_width, points })
    }

    /// Intensities sampled at `origin + k * bin_width`, `k = 0, 1, ...`, with
    /// elapsed time measured from `origin`.
    pub fn sampled(owner: SeriesOwner, origin: TimeInstant, bin_width: Duration, values: &[f64]) -> Result<Self> {
        let w = bin_width.as_secs();
        let points = values
            .iter()
            .enumerate()
            .map(|(k, &intensity)| UsagePoint {
                time: TimeInstant::from_epoch_secs(origin.epoch_secs() + k as f64 * w),
                intensity,
            })
            .collect();
        Self::new(owner, origin, bin_width, points)
    }

    pub fn owner(&self) -> &SeriesOwner {
        &self.owner
    }

    pub fn start(&self) -> TimeInstant {
        self.start
    }

    pub fn bin_width(&self) -> Duration {
        self.bin_width
    }

    pub fn points(&self) -> &[UsagePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.intensity).sum()
    }

    /// Elapsed seconds from `start` for each point.
    pub fn elapsed(&self) -> Vec<f64> {
        self.points.iter().map(|p| (p.time - self.start).as_secs()).collect()
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.intensity).collect()
    }

    /// Copy with every intensity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let points = self.points.iter().map(|p| UsagePoint { time: p.time, intensity: p.intensity * factor }).collect();
        Self::new(self.owner.clone(), self.start, self.bin_width, points)
    }

    /// Copy with every point moved by `shift`, keeping `start`.
    pub fn shifted(&self, shift: Duration) -> Result<Self> {
        let points = self.points.iter().map(|p| UsagePoint { time: p.time + shift, intensity: p.intensity }).collect();
        Self::new(self.owner.clone(), self.start, self.bin_width, points)
    }
}

/// Counts `user`'s events matching `scope` in bins `[start + k w, start +
/// (k+1) w)` covering `[start, end)`. Points sit at bin midpoints; empty bins
/// are kept as zeros and events at or after `end` are excluded. When the span
/// is not a whole number of bins the last bin is partial.
pub fn bin_usage(
    events: &[TaggingEvent],
    user: &str,
    scope: &Scope,
    bin_width: Duration,
    start: TimeInstant,
    end: TimeInstant,
) -> Result<UsageSeries> {
    let w = bin_width.as_secs();
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Argument(format!("bin width must be positive (got {bin_width})")));
    }
    if end <= start {
        return Err(Error::Argument(format!("span end {end} must be after start {start}")));
    }
    let span = (end - start).as_secs();
    let n_bins = ((span / w).ceil() as usize).max(1);
    let mut counts = vec![0u64; n_bins];
    for ev in events {
        if ev.user_id != user || !scope.matches(ev) || ev.timestamp < start || ev.timestamp >= end {
            continue;
        }
        let offset = (ev.timestamp - start).as_secs();
        let k = ((offset / w).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let points = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| UsagePoint {
            time: TimeInstant::from_epoch_secs(start.epoch_secs() + (k as f64 + 0.5) * w),
            intensity: c as f64,
        })
        .collect();
    UsageSeries::new(SeriesOwner { user_id: user.to_string(), scope: scope.clone() }, start, bin_width, points)
}

/// Time between two successive, differing tag-set assignments by one user to
/// one object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetagInterval {
    pub user_id: String,
    pub object_id: String,
    pub from: TimeInstant,
    pub to: TimeInstant,
    pub gap: Duration,
}

/// Groups each (user, object) history into snapshots (all tags placed at
/// one timestamp) and emits an interval between consecutive snapshots whose
/// tag sets differ. Output is sorted by user, then time, then object, and
/// does not depend on input order.
pub fn retag_intervals(events: &[TaggingEvent]) -> Vec<RetagInterval> {
    let mut histories: BTreeMap<(&str, &str), Vec<(TimeInstant, &str)>> = BTreeMap::new();
    for ev in events {
        histories
            .entry((ev.user_id.as_str(), ev.object_id.as_str()))
            .or_default()
            .push((ev.timestamp, ev.tag.as_str()));
    }

    let mut out = Vec::new();
    for ((user, object), mut history) in histories {
        history.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let mut previous: Option<(TimeInstant, BTreeSet<&str>)> = None;
        for group in history.chunk_by(|a, b| a.0 == b.0) {
            let at = group[0].0;
            let tags: BTreeSet<&str> = group.iter().map(|&(_, tag)| tag).collect();
            if let Some((from, prev_tags)) = &previous {
                if *prev_tags != tags {
                    out.push(RetagInterval {
                        user_id: user.to_string(),
                        object_id: object.to_string(),
                        from: *from,
                        to: at,
                        gap: at - *from,
                    });
                }
            }
            previous = Some((at, tags));
        }
    }
    out.sort_by(|a, b| {
        a.user_id.cmp(&b.user_id).then_with(|| a.to.total_cmp(&b.to)).then_with(|| a.object_id.cmp(&b.object_id))
    });
    out
}

/// Writes intervals as CSV `user_id,object_id,gap_seconds`.
pub fn write_intervals<W: Write>(out: W, intervals: &[RetagInterval]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["user_id", "object_id", "gap_seconds"])?;
    for iv in intervals {
        writer.write_record([&iv.user_id, &iv.object_id, &iv.gap.as_secs().to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
