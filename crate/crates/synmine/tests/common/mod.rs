//! Shared test oracles.
//!
//! These are deliberately plain re-implementations, independent of the
//! library's dispatch machinery: a per-episode greedy scan over a hash map,
//! and a literal cross-product tuple count. They exist so the production
//! counters can be checked against something written a different way.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synmine::{Episode, Event, EventSequence, EventTypeId, SpanPolicy};

/// Greedy left-to-right non-overlapped scan of a single episode: remember
/// the latest tick per constituent, check the span whenever all are present,
/// count and forget everything on success.
pub fn greedy_oracle(
    seq: &EventSequence,
    episode: &Episode,
    expiry: u64,
    policy: SpanPolicy,
) -> u64 {
    let want: Vec<u32> = episode.types().iter().map(|t| t.0).collect();
    let mut latest: HashMap<u32, u64> = HashMap::new();
    let mut count = 0;
    for e in seq.events() {
        if !want.contains(&e.etype.0) {
            continue;
        }
        latest.insert(e.etype.0, e.tick);
        if want.iter().all(|t| latest.contains_key(t)) {
            let lo = want.iter().map(|t| latest[t]).min().unwrap();
            let hi = want.iter().map(|t| latest[t]).max().unwrap();
            let ok = match policy {
                SpanPolicy::Inclusive => hi - lo <= expiry,
                SpanPolicy::Strict => hi - lo < expiry,
            };
            if ok {
                count += 1;
                latest.clear();
            }
        }
    }
    count
}

/// Literal cross-product count: every tuple of one event per constituent
/// type whose tick span is at most `expiry`.
pub fn crossproduct_all_occurrences(seq: &EventSequence, episode: &Episode, expiry: u64) -> u64 {
    let pools: Vec<Vec<u64>> = episode
        .types()
        .iter()
        .map(|t| {
            seq.events()
                .iter()
                .filter(|e| e.etype == *t)
                .map(|e| e.tick)
                .collect()
        })
        .collect();

    fn recurse(pools: &[Vec<u64>], depth: usize, lo: u64, hi: u64, expiry: u64) -> u64 {
        if depth == pools.len() {
            return 1;
        }
        let mut total = 0;
        for &tick in &pools[depth] {
            let lo = lo.min(tick);
            let hi = hi.max(tick);
            if hi - lo <= expiry {
                total += recurse(pools, depth + 1, lo, hi, expiry);
            }
        }
        total
    }

    let mut total = 0;
    for &tick in &pools[0] {
        total += recurse(&pools, 1, tick, tick, expiry);
    }
    total
}

/// Random event stream: roughly `density * length` events over `num_types`
/// sources at uniform ticks.
pub fn random_sequence(
    rng: &mut ChaCha8Rng,
    length_ticks: u64,
    num_types: u32,
    density: f64,
) -> EventSequence {
    let n = (density * length_ticks as f64).round() as usize;
    let events: Vec<Event> = (0..n)
        .map(|_| Event {
            etype: EventTypeId(rng.random_range(0..num_types)),
            tick: rng.random_range(0..length_ticks.max(1)),
        })
        .collect();
    EventSequence::new(events, 1.0, Some(length_ticks), Some(num_types)).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All non-empty subsets of `0..m` up to `max_size`, as episodes.
pub fn all_episodes(m: u32, max_size: usize) -> Vec<Episode> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let ids: Vec<u32> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if ids.len() <= max_size {
            out.push(Episode::from_ids(&ids).unwrap());
        }
    }
    out
}
