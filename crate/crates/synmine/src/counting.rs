//! Non-overlapped occurrence counting under an expiry constraint.
//!
//! A whole set of same-size candidate episodes is counted in one sequential
//! pass over the event stream. Each candidate keeps the latest occurrence
//! tick of every constituent type; once all constituents have been seen, the
//! span of those latest ticks is checked against the expiry. On success the
//! counter increments and all constituents are marked unseen again, so no
//! event ever participates in two counted occurrences of the same episode.
//! On failure the state is left in place: later events keep refreshing the
//! latest ticks and the check re-runs after every update, which finds the
//! earliest valid occurrence under the greedy left-to-right semantics.

use std::collections::HashMap;

use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::events::{EventSequence, EventTypeId};

/// How the occurrence span is compared against the expiry `T`.
///
/// `Inclusive` accepts spans equal to the expiry (`span <= T`), which treats
/// an occurrence stretched across `T + 1` ticks as still synchronous.
/// `Strict` demands `span < T` and matches the window assumed by the
/// analytic significance model, where an occurrence fits inside `T` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanPolicy {
    #[default]
    Inclusive,
    Strict,
}

impl SpanPolicy {
    #[inline]
    fn accepts(self, span: u64, expiry: u64) -> bool {
        match self {
            SpanPolicy::Inclusive => span <= expiry,
            SpanPolicy::Strict => span < expiry,
        }
    }
}

/// Per-episode scan state: the latest tick of each constituent (slot order
/// mirrors the episode's canonical type order) and the running count.
#[derive(Debug, Clone)]
pub struct CountingState {
    latest: Vec<Option<u64>>,
    seen: usize,
    count: u64,
}

impl CountingState {
    fn new(size: usize) -> Self {
        CountingState {
            latest: vec![None; size],
            seen: 0,
            count: 0,
        }
    }

    /// Registers an event on `slot` at `tick`; ticks must arrive
    /// non-decreasing. Returns true when an occurrence completed.
    #[inline]
    fn update(&mut self, slot: usize, tick: u64, expiry: u64, policy: SpanPolicy) -> bool {
        if self.latest[slot].is_none() {
            self.seen += 1;
        }
        self.latest[slot] = Some(tick);
        if self.seen < self.latest.len() {
            return false;
        }
        // All constituents seen; the current tick is the maximum.
        let min = self
            .latest
            .iter()
            .map(|t| t.expect("all slots seen"))
            .min()
            .expect("episodes are non-empty");
        if policy.accepts(tick - min, expiry) {
            self.count += 1;
            self.latest.fill(None);
            self.seen = 0;
            true
        } else {
            false
        }
    }
}

/// Dispatch table from type id to the `(state, slot)` pairs it feeds.
fn build_dispatch(candidates: &[&Episode]) -> Vec<Vec<(u32, u32)>> {
    let max_type = candidates
        .iter()
        .flat_map(|e| e.types())
        .map(|t| t.0)
        .max()
        .map_or(0, |m| m as usize + 1);
    let mut dispatch: Vec<Vec<(u32, u32)>> = vec![Vec::new(); max_type];
    for (si, ep) in candidates.iter().enumerate() {
        for (slot, t) in ep.types().iter().enumerate() {
            dispatch[t.0 as usize].push((si as u32, slot as u32));
        }
    }
    dispatch
}

/// Counts the non-overlapped occurrences of every candidate episode in one
/// pass over `seq`. All candidates must share the same size; the expiry must
/// be at least one tick.
pub fn count_nonoverlapped(
    seq: &EventSequence,
    candidates: &[Episode],
    expiry: u64,
    policy: SpanPolicy,
) -> Result<HashMap<Episode, u64>> {
    if expiry == 0 {
        return Err(Error::ContractViolation("expiry must be >= 1 tick".into()));
    }
    let Some(first) = candidates.first() else {
        return Ok(HashMap::new());
    };
    let size = first.size();
    if candidates.iter().any(|c| c.size() != size) {
        return Err(Error::ContractViolation(
            "candidate episodes must all have the same size".into(),
        ));
    }

    // Deduplicate so repeated candidates share one state.
    let mut unique: Vec<&Episode> = Vec::with_capacity(candidates.len());
    let mut index: HashMap<&Episode, usize> = HashMap::with_capacity(candidates.len());
    for c in candidates {
        index.entry(c).or_insert_with(|| {
            unique.push(c);
            unique.len() - 1
        });
    }

    let dispatch = build_dispatch(&unique);
    let mut states: Vec<CountingState> = unique.iter().map(|e| CountingState::new(e.size())).collect();

    for event in seq.events() {
        let Some(targets) = dispatch.get(event.etype.0 as usize) else {
            continue;
        };
        for &(si, slot) in targets {
            states[si as usize].update(slot as usize, event.tick, expiry, policy);
        }
    }

    Ok(unique
        .into_iter()
        .zip(states)
        .map(|(e, s)| (e.clone(), s.count))
        .collect())
}

/// Counts a single episode; convenience wrapper over [`count_nonoverlapped`].
pub fn count_single(
    seq: &EventSequence,
    episode: &Episode,
    expiry: u64,
    policy: SpanPolicy,
) -> Result<u64> {
    let counts = count_nonoverlapped(seq, std::slice::from_ref(episode), expiry, policy)?;
    Ok(counts[episode])
}

/// Like [`count_single`] but also reports, for each counted occurrence, the
/// `(type, tick)` pairs that completed it. Useful for certifying that the
/// counted occurrences never share an event.
pub fn count_with_occurrences(
    seq: &EventSequence,
    episode: &Episode,
    expiry: u64,
    policy: SpanPolicy,
) -> Result<(u64, Vec<Vec<(EventTypeId, u64)>>)> {
    if expiry == 0 {
        return Err(Error::ContractViolation("expiry must be >= 1 tick".into()));
    }
    let mut state = CountingState::new(episode.size());
    let mut occurrences = Vec::new();
    for event in seq.events() {
        let Ok(slot) = episode.types().binary_search(&event.etype) else {
            continue;
        };
        // Snapshot before `update` resets the state.
        let snapshot: Vec<Option<u64>> = {
            let mut s = state.latest.clone();
            s[slot] = Some(event.tick);
            s
        };
        if state.update(slot, event.tick, expiry, policy) {
            occurrences.push(
                episode
                    .types()
                    .iter()
                    .zip(snapshot)
                    .map(|(t, tick)| (*t, tick.expect("complete occurrence")))
                    .collect(),
            );
        }
    }
    Ok((state.count, occurrences))
}
