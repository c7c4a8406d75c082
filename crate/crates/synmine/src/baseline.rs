//! All-occurrence counting baseline with jitter-surrogate significance.
//!
//! Where the level-wise miner counts greedy non-overlapped occurrences of a
//! candidate set, this baseline counts *every* tuple of events (one per
//! constituent type) whose tick span fits the expiry, for every pattern that
//! occurs at least once in the data. Significance is assessed empirically:
//! each trial is jittered into surrogate copies that destroy cross-source
//! timing structure while preserving per-source spike counts, and a pattern
//! is significant when its observed count exceeds the empirical quantile of
//! the surrogate counts.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::events::{Event, EventSequence, EventTypeId};

/// Default cap on distinct types per enumeration window.
pub const DEFAULT_WINDOW_CAP: usize = 25;

/// Surrogate-test configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    /// Surrogate copies per trial.
    pub n_surrogates: usize,
    /// Jitter half-window in ticks; each spike shifts by a uniform offset in
    /// `[-jitter, +jitter]`. Should exceed the synchrony span under test.
    pub jitter: u64,
    /// Number of trials a long recording is split into.
    pub n_trials: usize,
    /// Significance level of the empirical test.
    pub alpha: f64,
    pub seed: u64,
}

impl SurrogateConfig {
    /// Defaults mirroring common practice: 25 surrogates over 20 trials at
    /// alpha 0.05, with the jitter window set to twice the expiry.
    pub fn for_expiry(expiry: u64) -> Self {
        SurrogateConfig {
            n_surrogates: 25,
            jitter: 2 * expiry,
            n_trials: 20,
            alpha: 0.05,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_surrogates == 0 {
            return Err(Error::InvalidConfig("n_surrogates must be >= 1".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-type sorted tick lists for fast range counting on one sequence.
#[derive(Debug, Clone)]
pub struct OccurrenceIndex {
    ticks_by_type: Vec<Vec<u64>>,
}

impl OccurrenceIndex {
    pub fn new(seq: &EventSequence) -> Self {
        OccurrenceIndex {
            ticks_by_type: seq.ticks_by_type(),
        }
    }

    fn ticks(&self, etype: EventTypeId) -> &[u64] {
        self.ticks_by_type
            .get(etype.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Events of `etype` with tick in `[lo, hi]`.
    fn count_in(&self, etype: EventTypeId, lo: u64, hi: u64) -> u128 {
        let ticks = self.ticks(etype);
        let a = ticks.partition_point(|&t| t < lo);
        let b = ticks.partition_point(|&t| t <= hi);
        (b - a) as u128
    }

    /// Number of tuples (one event per constituent type) whose tick span is
    /// at most `expiry`. Every tuple is counted at its minimum tick: tuples
    /// fully inside `[m, m + expiry]` minus those fully inside
    /// `[m + 1, m + expiry]`.
    pub fn count_all_occurrences(&self, pattern: &Episode, expiry: u64) -> u64 {
        let mut anchors: Vec<u64> = pattern
            .types()
            .iter()
            .flat_map(|t| self.ticks(*t).iter().copied())
            .collect();
        anchors.sort_unstable();
        anchors.dedup();

        let mut total: u128 = 0;
        for &m in &anchors {
            let hi = m.saturating_add(expiry);
            let mut including = 1u128;
            let mut excluding = 1u128;
            for &t in pattern.types() {
                including = including.saturating_mul(self.count_in(t, m, hi));
                if including == 0 {
                    excluding = 0;
                    break;
                }
                excluding = excluding.saturating_mul(self.count_in(t, m + 1, hi));
            }
            total += including - excluding;
        }
        u64::try_from(total).unwrap_or(u64::MAX)
    }
}

/// Counts every tuple of events matching `pattern` with span at most
/// `expiry` (an expiry of zero admits only same-tick tuples).
pub fn count_all_occurrences(seq: &EventSequence, pattern: &Episode, expiry: u64) -> u64 {
    OccurrenceIndex::new(seq).count_all_occurrences(pattern, expiry)
}

/// Every episode of size `1..=max_size` that occurs at least once with span
/// at most `expiry`.
///
/// Scans a window of width `expiry` from each event tick and emits the
/// subsets of the distinct types present. `window_cap` guards against the
/// exponential blow-up: a window with more than `window_cap` distinct types
/// aborts when `max_size` does not bound the subsets drawn from it.
pub fn enumerate_patterns(
    seq: &EventSequence,
    expiry: u64,
    max_size: usize,
    window_cap: usize,
) -> Result<BTreeSet<Episode>> {
    if max_size == 0 {
        return Err(Error::InvalidConfig("max_size must be >= 1".into()));
    }
    let events = seq.events();
    let mut out = BTreeSet::new();
    let mut counts = vec![0usize; seq.num_types() as usize];
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut i = 0usize;
    while i < events.len() {
        let m = events[i].tick;
        // advance the window to [m, m + expiry]
        while hi < events.len() && events[hi].tick <= m.saturating_add(expiry) {
            counts[events[hi].etype.0 as usize] += 1;
            hi += 1;
        }
        while events[lo].tick < m {
            counts[events[lo].etype.0 as usize] -= 1;
            lo += 1;
        }
        let distinct: Vec<EventTypeId> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(id, _)| EventTypeId(id as u32))
            .collect();
        if distinct.len() > window_cap && max_size > window_cap {
            return Err(Error::ExplosionGuard {
                tick: m,
                distinct: distinct.len(),
                cap: window_cap,
            });
        }
        emit_subsets(&distinct, max_size, &mut out);
        // skip the remaining events on this tick
        while i < events.len() && events[i].tick == m {
            i += 1;
        }
    }
    Ok(out)
}

fn emit_subsets(types: &[EventTypeId], max_size: usize, out: &mut BTreeSet<Episode>) {
    let mut current: Vec<EventTypeId> = Vec::with_capacity(max_size.min(types.len()));
    fn recurse(
        types: &[EventTypeId],
        from: usize,
        max_size: usize,
        current: &mut Vec<EventTypeId>,
        out: &mut BTreeSet<Episode>,
    ) {
        if !current.is_empty() {
            out.insert(Episode::new(current.iter().copied()).expect("distinct sorted types"));
        }
        if current.len() == max_size {
            return;
        }
        for i in from..types.len() {
            current.push(types[i]);
            recurse(types, i + 1, max_size, current, out);
            current.pop();
        }
    }
    recurse(types, 0, max_size, &mut current, out);
}

/// Independently shifts every event by a uniform tick offset in
/// `[-jitter, +jitter]`, clamped to the stream bounds. Per-type event counts
/// are preserved exactly; deterministic given the seed.
pub fn jitter_surrogate(seq: &EventSequence, jitter: u64, seed: u64) -> EventSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = jitter as i64;
    let last = seq.length_ticks() as i64;
    let events = seq
        .events()
        .iter()
        .map(|e| {
            let offset = rng.random_range(-j..=j);
            Event {
                etype: e.etype,
                tick: (e.tick as i64 + offset).clamp(0, last) as u64,
            }
        })
        .collect();
    EventSequence::new(
        events,
        seq.delta_t(),
        Some(seq.length_ticks()),
        Some(seq.num_types()),
    )
    .expect("jitter preserves stream bounds")
}

/// Outcome of the surrogate significance test for one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateOutcome {
    /// Mean all-occurrence count across trials.
    pub observed_mean: f64,
    /// Trial-mean counts of each surrogate replicate.
    pub surrogate_means: Vec<f64>,
    /// Empirical `(1 - alpha)` quantile of the surrogate means.
    pub quantile: f64,
    /// True when the observed mean strictly exceeds the quantile.
    pub significant: bool,
}

/// Pre-built surrogate replicates shared across many pattern tests.
pub struct SurrogatePool {
    trial_indexes: Vec<OccurrenceIndex>,
    /// `[replicate][trial]`
    surrogate_indexes: Vec<Vec<OccurrenceIndex>>,
    alpha: f64,
}

impl SurrogatePool {
    pub fn build(trials: &[EventSequence], config: &SurrogateConfig) -> Result<SurrogatePool> {
        config.validate()?;
        if trials.is_empty() {
            return Err(Error::InvalidConfig("no trials given".into()));
        }
        let trial_indexes = trials.iter().map(OccurrenceIndex::new).collect();
        let surrogate_indexes = (0..config.n_surrogates)
            .map(|r| {
                trials
                    .iter()
                    .enumerate()
                    .map(|(i, trial)| {
                        let seed = config
                            .seed
                            .wrapping_add(1_000_003u64.wrapping_mul(r as u64 + 1))
                            .wrapping_add(i as u64);
                        OccurrenceIndex::new(&jitter_surrogate(trial, config.jitter, seed))
                    })
                    .collect()
            })
            .collect();
        Ok(SurrogatePool {
            trial_indexes,
            surrogate_indexes,
            alpha: config.alpha,
        })
    }

    pub fn evaluate(&self, pattern: &Episode, expiry: u64) -> SurrogateOutcome {
        let mean = |indexes: &[OccurrenceIndex]| {
            indexes
                .iter()
                .map(|ix| ix.count_all_occurrences(pattern, expiry) as f64)
                .sum::<f64>()
                / indexes.len() as f64
        };
        let observed_mean = mean(&self.trial_indexes);
        let surrogate_means: Vec<f64> = self
            .surrogate_indexes
            .iter()
            .map(|replicate| mean(replicate))
            .collect();
        let mut sorted = surrogate_means.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        let idx = (((1.0 - self.alpha) * n as f64).ceil() as usize)
            .saturating_sub(1)
            .min(n - 1);
        let quantile = sorted[idx];
        SurrogateOutcome {
            observed_mean,
            surrogate_means,
            quantile,
            significant: observed_mean > quantile,
        }
    }
}

/// Tests one pattern: the observed statistic is the trial-mean count, and
/// significance requires it to strictly exceed the empirical `(1 - alpha)`
/// quantile of the surrogate trial-means.
pub fn surrogate_significance(
    trials: &[EventSequence],
    pattern: &Episode,
    expiry: u64,
    config: &SurrogateConfig,
) -> Result<SurrogateOutcome> {
    Ok(SurrogatePool::build(trials, config)?.evaluate(pattern, expiry))
}
