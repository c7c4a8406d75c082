//! Timestamped event streams on a discretized time axis.
//!
//! Raw recordings arrive as `(timestamp, source id)` pairs with timestamps in
//! seconds. Ingestion quantizes each timestamp to an integer tick of width
//! `delta_t` seconds and keeps the stream sorted by `(tick, type id)`. The
//! resulting [`EventSequence`] is immutable and cheap to share across
//! workers.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Identifier of an event source (e.g. one neuron). Ids are dense `0..M-1`
/// within a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventTypeId(pub u32);

impl EventTypeId {
    /// Spreadsheet-style label: `0 -> "A"`, `25 -> "Z"`, `26 -> "AA"`, ...
    pub fn label(self) -> String {
        let mut n = u64::from(self.0) + 1;
        let mut buf = Vec::new();
        while n > 0 {
            n -= 1;
            buf.push(b'A' + (n % 26) as u8);
            n /= 26;
        }
        buf.reverse();
        String::from_utf8(buf).expect("labels are ASCII")
    }

    /// Parses either a letter label (`"A"`, `"af"`) or a bare integer id.
    pub fn parse_label(s: &str) -> Option<EventTypeId> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if s.bytes().all(|b| b.is_ascii_digit()) {
            return s.parse::<u32>().ok().map(EventTypeId);
        }
        let mut n: u64 = 0;
        for b in s.bytes() {
            let b = b.to_ascii_uppercase();
            if !b.is_ascii_uppercase() {
                return None;
            }
            n = n * 26 + u64::from(b - b'A') + 1;
            if n > u64::from(u32::MAX) {
                return None;
            }
        }
        Some(EventTypeId((n - 1) as u32))
    }
}

impl fmt::Display for EventTypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One event: a type tag and a tick index (units of `delta_t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub etype: EventTypeId,
    pub tick: u64,
}

/// Quantizes a non-negative time in seconds to a tick index.
///
/// Binning rounds down; the small epsilon absorbs floating-point noise when a
/// timestamp sits exactly on a bin boundary (e.g. serialized bin starts).
pub fn tick_of_time(time_s: f64, delta_t: f64) -> u64 {
    let ratio = time_s / delta_t;
    (ratio + ratio.abs() * 1e-12 + 1e-9).floor() as u64
}

/// An immutable, sorted event stream with its time metadata.
///
/// Invariants: events are sorted by tick (ties broken by type id), every tick
/// is `<= length_ticks`, and every type id is `< num_types`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    events: Vec<Event>,
    delta_t: f64,
    length_ticks: u64,
    num_types: u32,
}

impl EventSequence {
    /// Builds a sequence, sorting the events and deriving missing metadata.
    ///
    /// `length_ticks` defaults to the maximum tick present and `num_types` to
    /// the maximum type id plus one. Explicit values may only extend the
    /// derived ones; an event beyond them is rejected.
    pub fn new(
        mut events: Vec<Event>,
        delta_t: f64,
        length_ticks: Option<u64>,
        num_types: Option<u32>,
    ) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "delta_t must be positive and finite, got {delta_t}"
            )));
        }
        events.sort_by_key(|e| (e.tick, e.etype.0));
        let max_tick = events.last().map(|e| e.tick).unwrap_or(0);
        let length_ticks = length_ticks.unwrap_or(max_tick);
        if max_tick > length_ticks {
            return Err(Error::InvalidConfig(format!(
                "event at tick {max_tick} exceeds declared length {length_ticks}"
            )));
        }
        let derived_types = events.iter().map(|e| e.etype.0 + 1).max().unwrap_or(0);
        let num_types = num_types.unwrap_or(derived_types);
        if derived_types > num_types {
            return Err(Error::InvalidConfig(format!(
                "event type id {} exceeds declared type count {num_types}",
                derived_types - 1
            )));
        }
        Ok(EventSequence {
            events,
            delta_t,
            length_ticks,
            num_types,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// Stream length in ticks. Events may sit on tick `length_ticks` itself.
    pub fn length_ticks(&self) -> u64 {
        self.length_ticks
    }

    /// Number of event sources `M`; type ids run `0..M`.
    pub fn num_types(&self) -> u32 {
        self.num_types
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.length_ticks as f64 * self.delta_t
    }

    /// Number of events carrying the given type.
    pub fn count_of_type(&self, etype: EventTypeId) -> usize {
        self.events.iter().filter(|e| e.etype == etype).count()
    }

    /// Event ticks grouped per type id, each list sorted ascending.
    pub fn ticks_by_type(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.num_types as usize];
        for e in &self.events {
            out[e.etype.0 as usize].push(e.tick);
        }
        out
    }

    pub fn from_path(path: impl AsRef<Path>, delta_t: f64) -> Result<Self> {
        let file = File::open(path)?;
        parse_spike_file(BufReader::new(file), delta_t)
    }

    /// Writes the stream in the same text format accepted by the parser.
    pub fn write_spike_file(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# duration_s={}", self.duration_secs())?;
        writeln!(w, "# length_ticks={}", self.length_ticks)?;
        writeln!(w, "# num_types={}", self.num_types)?;
        for e in &self.events {
            writeln!(w, "{}\t{}", e.tick as f64 * self.delta_t, e.etype.0)?;
        }
        Ok(())
    }

    pub fn to_spike_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_spike_file(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("spike text is ASCII")
    }
}

/// Parses a spike file: one `timestamp<TAB or comma>type_id` record per line,
/// timestamps in seconds. `#`-prefixed lines are comments; the headers
/// `# duration_s=<float>`, `# length_ticks=<int>` and `# num_types=<int>` fix
/// the stream metadata (`length_ticks` wins over `duration_s`).
///
/// Records need not be time-ordered; the stream is re-sorted. Malformed
/// lines, negative timestamps and negative ids are rejected with the
/// offending line number.
pub fn parse_spike_file(reader: impl BufRead, delta_t: f64) -> Result<EventSequence> {
    if !(delta_t.is_finite() && delta_t > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "delta_t must be positive and finite, got {delta_t}"
        )));
    }
    let mut events = Vec::new();
    let mut duration_s: Option<f64> = None;
    let mut length_ticks: Option<u64> = None;
    let mut num_types: Option<u32> = None;
    // Line carrying the latest event, for the "beyond declared duration" error.
    let mut max_tick: Option<(u64, usize)> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("duration_s=") {
                duration_s = Some(v.trim().parse::<f64>().map_err(|_| {
                    Error::parse(lineno, format!("bad duration_s value {v:?}"))
                })?);
            } else if let Some(v) = rest.strip_prefix("length_ticks=") {
                length_ticks = Some(v.trim().parse::<u64>().map_err(|_| {
                    Error::parse(lineno, format!("bad length_ticks value {v:?}"))
                })?);
            } else if let Some(v) = rest.strip_prefix("num_types=") {
                num_types = Some(v.trim().parse::<u32>().map_err(|_| {
                    Error::parse(lineno, format!("bad num_types value {v:?}"))
                })?);
            }
            continue;
        }
        let mut fields = line.split(|c| c == '\t' || c == ',');
        let (ts, id) = match (fields.next(), fields.next(), fields.next()) {
            (Some(ts), Some(id), None) => (ts.trim(), id.trim()),
            _ => {
                return Err(Error::parse(
                    lineno,
                    format!("expected `timestamp<TAB or comma>event_id`, got {line:?}"),
                ))
            }
        };
        let ts: f64 = ts
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad timestamp {ts:?}")))?;
        if !ts.is_finite() || ts < 0.0 {
            return Err(Error::parse(
                lineno,
                format!("timestamp must be finite and non-negative, got {ts}"),
            ));
        }
        let id: u32 = id
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad event id {id:?}")))?;
        let tick = tick_of_time(ts, delta_t);
        if max_tick.map_or(true, |(t, _)| tick > t) {
            max_tick = Some((tick, lineno));
        }
        events.push(Event {
            etype: EventTypeId(id),
            tick,
        });
    }

    let declared = length_ticks.or_else(|| duration_s.map(|d| tick_of_time(d, delta_t)));
    if let (Some(declared), Some((tick, lineno))) = (declared, max_tick) {
        if tick > declared {
            return Err(Error::parse(
                lineno,
                format!("event at tick {tick} lies beyond the declared duration ({declared} ticks)"),
            ));
        }
    }
    let derived_types = events.iter().map(|e| e.etype.0 + 1).max().unwrap_or(0);
    let num_types = num_types.map(|n| n.max(derived_types));
    EventSequence::new(events, delta_t, declared, num_types)
}

/// Parses spike records from an in-memory string.
pub fn parse_spike_text(text: &str, delta_t: f64) -> Result<EventSequence> {
    parse_spike_file(text.as_bytes(), delta_t)
}

/// Average firing rate of one source in Hz: events of that type divided by
/// the stream duration.
pub fn estimate_rate(seq: &EventSequence, etype: EventTypeId) -> Result<f64> {
    if seq.length_ticks() == 0 {
        return Err(Error::UndefinedRate);
    }
    Ok(seq.count_of_type(etype) as f64 / seq.duration_secs())
}

/// Mean firing rate across all sources in Hz.
pub fn mean_rate(seq: &EventSequence) -> Result<f64> {
    if seq.length_ticks() == 0 || seq.num_types() == 0 {
        return Err(Error::UndefinedRate);
    }
    Ok(seq.len() as f64 / (seq.num_types() as f64 * seq.duration_secs()))
}

/// Splits a stream into `n_trials` contiguous segments of equal tick length,
/// re-basing ticks to zero; the last segment absorbs any remainder ticks.
pub fn split_trials(seq: &EventSequence, n_trials: usize) -> Result<Vec<EventSequence>> {
    if n_trials == 0 {
        return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
    }
    let total = seq.length_ticks();
    if (n_trials as u64) > total {
        return Err(Error::InvalidConfig(format!(
            "cannot split {total} ticks into {n_trials} trials"
        )));
    }
    let seg = total / n_trials as u64;
    let mut buckets: Vec<Vec<Event>> = vec![Vec::new(); n_trials];
    for e in seq.events() {
        let idx = ((e.tick / seg) as usize).min(n_trials - 1);
        buckets[idx].push(Event {
            etype: e.etype,
            tick: e.tick - seg * idx as u64,
        });
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(i, events)| {
            let len = if i == n_trials - 1 {
                total - seg * (n_trials as u64 - 1)
            } else {
                seg
            };
            EventSequence::new(events, seq.delta_t(), Some(len), Some(seq.num_types()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The running 11-event example stream used across the crate's tests:
    /// ticks at 1 s resolution, five types A..E.
    pub(crate) fn example_sequence() -> EventSequence {
        let raw = [
            (0u32, 1u64),
            (1, 3),
            (3, 5),
            (0, 5),
            (2, 6),
            (0, 10),
            (4, 15),
            (1, 15),
            (1, 17),
            (2, 18),
            (2, 19),
        ];
        let events = raw
            .iter()
            .map(|&(id, tick)| Event {
                etype: EventTypeId(id),
                tick,
            })
            .collect();
        EventSequence::new(events, 1.0, None, None).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for id in [0u32, 1, 25, 26, 27, 51, 52, 701, 702, 18277, 18278] {
            let label = EventTypeId(id).label();
            assert_eq!(EventTypeId::parse_label(&label), Some(EventTypeId(id)));
        }
        assert_eq!(EventTypeId(0).label(), "A");
        assert_eq!(EventTypeId(25).label(), "Z");
        assert_eq!(EventTypeId(26).label(), "AA");
        assert_eq!(EventTypeId::parse_label("7"), Some(EventTypeId(7)));
        assert_eq!(EventTypeId::parse_label("b"), Some(EventTypeId(1)));
        assert_eq!(EventTypeId::parse_label(""), None);
        assert_eq!(EventTypeId::parse_label("A1"), None);
    }

    #[test]
    fn parse_quantizes_with_floor() {
        let seq = parse_spike_text("0.001,0\n0.003,1\n0.006,2\n", 0.001).unwrap();
        let ticks: Vec<_> = seq.events().iter().map(|e| (e.etype.0, e.tick)).collect();
        assert_eq!(ticks, vec![(0, 1), (1, 3), (2, 6)]);

        let seq = parse_spike_text("0.0051,0\n", 0.001).unwrap();
        assert_eq!(seq.events()[0].tick, 5);
    }

    #[test]
    fn parse_example_stream_metadata() {
        let text = "1,0\n3,1\n5,3\n5,0\n6,2\n10,0\n15,4\n15,1\n17,1\n18,2\n19,2\n";
        let seq = parse_spike_text(text, 1.0).unwrap();
        assert_eq!(seq.len(), 11);
        assert_eq!(seq.length_ticks(), 19);
        assert_eq!(seq.num_types(), 5);
        assert_eq!(seq, example_sequence());
    }

    #[test]
    fn parse_accepts_tabs_comments_and_unordered_records() {
        let text = "# recorded on rig 3\n0.5\t1\n0.25,0\n\n# duration_s=2.0\n";
        let seq = parse_spike_text(text, 0.25).unwrap();
        assert_eq!(seq.length_ticks(), 8);
        let ticks: Vec<_> = seq.events().iter().map(|e| (e.etype.0, e.tick)).collect();
        assert_eq!(ticks, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_rejects_bad_lines_with_line_numbers() {
        let err = parse_spike_text("0.1,0\nnot-a-record\n", 1.0).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_spike_text("-0.5,0\n", 1.0).is_err());
        assert!(parse_spike_text("0.5,-1\n", 1.0).is_err());
        assert!(parse_spike_text("0.5,0,9\n", 1.0).is_err());
        // event beyond a declared duration
        assert!(parse_spike_text("# duration_s=1\n5.0,0\n", 1.0).is_err());
    }

    #[test]
    fn serialize_parse_round_trips() {
        let seq = example_sequence();
        let text = seq.to_spike_text();
        let again = parse_spike_text(&text, seq.delta_t()).unwrap();
        assert_eq!(seq, again);
    }

    #[test]
    fn rate_estimation() {
        let events: Vec<Event> = (0..250)
            .map(|i| Event {
                etype: EventTypeId(0),
                tick: i * 200,
            })
            .collect();
        let seq = EventSequence::new(events, 0.001, Some(50_000), Some(1)).unwrap();
        assert!((estimate_rate(&seq, EventTypeId(0)).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(estimate_rate(&seq, EventTypeId(7)).unwrap(), 0.0);

        let empty = EventSequence::new(Vec::new(), 1.0, None, None).unwrap();
        assert!(matches!(
            estimate_rate(&empty, EventTypeId(0)),
            Err(Error::UndefinedRate)
        ));

        let events: Vec<Event> = (0..500)
            .map(|i| Event {
                etype: EventTypeId(0),
                tick: i * 100,
            })
            .collect();
        let seq = EventSequence::new(events, 0.001, Some(50_000), Some(1)).unwrap();
        assert!((estimate_rate(&seq, EventTypeId(0)).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn split_trials_lengths() {
        let seq = EventSequence::new(Vec::new(), 1.0, Some(100), Some(2)).unwrap();
        let parts = split_trials(&seq, 20).unwrap();
        assert_eq!(parts.len(), 20);
        assert!(parts.iter().all(|p| p.length_ticks() == 5));

        let seq = EventSequence::new(Vec::new(), 1.0, Some(103), Some(2)).unwrap();
        let parts = split_trials(&seq, 20).unwrap();
        assert!(parts[..19].iter().all(|p| p.length_ticks() == 5));
        assert_eq!(parts[19].length_ticks(), 8);

        let seq = EventSequence::new(Vec::new(), 0.001, Some(50_000), Some(2)).unwrap();
        let parts = split_trials(&seq, 20).unwrap();
        assert!(parts.iter().all(|p| p.length_ticks() == 2500));

        assert!(split_trials(&seq, 0).is_err());
        let tiny = EventSequence::new(Vec::new(), 1.0, Some(3), Some(1)).unwrap();
        assert!(split_trials(&tiny, 5).is_err());
    }

    #[test]
    fn split_trials_partitions_events_and_rebases() {
        let seq = example_sequence();
        let parts = split_trials(&seq, 4).unwrap();
        let total: usize = parts.iter().map(EventSequence::len).sum();
        assert_eq!(total, seq.len());
        // weighted mean of per-trial rates equals the whole-stream rate
        for id in 0..seq.num_types() {
            let whole = estimate_rate(&seq, EventTypeId(id)).unwrap();
            let weighted: f64 = parts
                .iter()
                .map(|p| {
                    estimate_rate(p, EventTypeId(id)).unwrap() * p.duration_secs()
                })
                .sum::<f64>()
                / seq.duration_secs();
            assert!((whole - weighted).abs() < 1e-12);
        }
        // seg = 19/4 = 4, so segment 0 covers ticks [0, 4): events at 1 and 3
        assert_eq!(parts[0].len(), 2);
        assert!(parts[0].events().iter().all(|e| e.tick < 4));
    }
}
