//! Level-wise discovery of frequent episodes.
//!
//! Level 1 counts every singleton. Each further level counts only candidates
//! joined from the frequent episodes one size below, so the combinatorial
//! space of large patterns is never enumerated. Thresholds are either fixed
//! or derived per level from the analytic significance model.

use std::collections::HashSet;

use crate::counting::{count_nonoverlapped, SpanPolicy};
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::events::{mean_rate, EventSequence, EventTypeId};
use crate::significance::auto_threshold_with_rate;

/// Minimum-count rule applied at each level.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyThreshold {
    /// The same fixed count at every level.
    Fixed(u64),
    /// Per-level count `ceil(F + k sqrt(V))` from the significance model
    /// with type-I error bound `epsilon`. `rate_hz` is the null firing rate;
    /// leave it `None` to estimate the mean rate from the data.
    Auto { epsilon: f64, rate_hz: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    /// Expiry span in ticks.
    pub expiry: u64,
    pub threshold: FrequencyThreshold,
    /// Optional cap on episode size.
    pub max_level: Option<usize>,
    pub span_policy: SpanPolicy,
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.expiry == 0 {
            return Err(Error::InvalidConfig("expiry must be >= 1 tick".into()));
        }
        match &self.threshold {
            FrequencyThreshold::Fixed(t) if *t == 0 => {
                Err(Error::InvalidConfig("fixed threshold must be >= 1".into()))
            }
            FrequencyThreshold::Auto { epsilon, .. }
                if !(*epsilon > 0.0 && *epsilon < 1.0) =>
            {
                Err(Error::InvalidConfig(format!(
                    "epsilon must lie in (0, 1), got {epsilon}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// A frequent episode together with its count and the threshold its level
/// was filtered with.
#[derive(Debug, Clone, PartialEq)]
pub struct MinedEpisode {
    pub episode: Episode,
    pub count: u64,
    pub threshold: u64,
}

/// Apriori join: two frequent size-`k` episodes sharing their first `k - 1`
/// types combine into a size-`k + 1` candidate, which is kept only if every
/// size-`k` sub-episode is itself frequent. All inputs must share one size;
/// the output is sorted and duplicate-free.
pub fn generate_candidates(frequent: &[Episode]) -> Vec<Episode> {
    let Some(first) = frequent.first() else {
        return Vec::new();
    };
    let k = first.size();
    debug_assert!(frequent.iter().all(|e| e.size() == k));

    let mut sorted: Vec<&Episode> = frequent.iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    let lookup: HashSet<&Episode> = sorted.iter().copied().collect();

    let mut out = Vec::new();
    // Canonical order groups episodes sharing a prefix contiguously.
    let mut start = 0;
    while start < sorted.len() {
        let prefix = &sorted[start].types()[..k - 1];
        let mut end = start + 1;
        while end < sorted.len() && &sorted[end].types()[..k - 1] == prefix {
            end += 1;
        }
        for i in start..end {
            for j in (i + 1)..end {
                let mut types: Vec<EventTypeId> = sorted[i].types().to_vec();
                types.push(*sorted[j].types().last().expect("episodes are non-empty"));
                let candidate = Episode::new(types).expect("join of canonical episodes");
                if candidate
                    .sub_episodes()
                    .iter()
                    .all(|sub| lookup.contains(sub))
                {
                    out.push(candidate);
                }
            }
        }
        start = end;
    }
    out.sort_unstable();
    out
}

/// Runs the level-wise mining loop and returns every frequent episode with
/// its count, ordered by level and then canonically within a level.
pub fn mine(seq: &EventSequence, config: &MiningConfig) -> Result<Vec<MinedEpisode>> {
    config.validate()?;
    if seq.length_ticks() == 0 || seq.num_types() == 0 {
        return Ok(Vec::new());
    }
    let threshold_for = build_threshold_fn(seq, config)?;
    mine_with(
        seq,
        config.expiry,
        config.span_policy,
        config.max_level,
        threshold_for,
    )
}

/// Mining loop over an arbitrary per-level threshold rule. A computed
/// threshold below 1 is applied as 1: an episode must occur to be reported.
pub fn mine_with(
    seq: &EventSequence,
    expiry: u64,
    span_policy: SpanPolicy,
    max_level: Option<usize>,
    mut threshold_for: impl FnMut(usize) -> Result<u64>,
) -> Result<Vec<MinedEpisode>> {
    let mut results = Vec::new();
    let mut candidates: Vec<Episode> = (0..seq.num_types())
        .map(|id| Episode::new([EventTypeId(id)]).expect("singletons are valid"))
        .collect();
    let mut level = 1usize;
    while !candidates.is_empty() && max_level.map_or(true, |cap| level <= cap) {
        let threshold = threshold_for(level)?.max(1);
        let counts = count_nonoverlapped(seq, &candidates, expiry, span_policy)?;
        let frequent: Vec<Episode> = candidates
            .into_iter()
            .filter(|c| counts[c] >= threshold)
            .collect();
        results.extend(frequent.iter().map(|e| MinedEpisode {
            episode: e.clone(),
            count: counts[e],
            threshold,
        }));
        candidates = generate_candidates(&frequent);
        level += 1;
    }
    Ok(results)
}

fn build_threshold_fn(
    seq: &EventSequence,
    config: &MiningConfig,
) -> Result<impl FnMut(usize) -> Result<u64>> {
    let rule = config.threshold.clone();
    let rate = match &rule {
        FrequencyThreshold::Auto { rate_hz, .. } => match rate_hz {
            Some(r) => Some(*r),
            None => Some(mean_rate(seq)?),
        },
        FrequencyThreshold::Fixed(_) => None,
    };
    let (length_ticks, expiry, delta_t) = (seq.length_ticks(), config.expiry, seq.delta_t());
    Ok(move |level: usize| match rule {
        FrequencyThreshold::Fixed(t) => Ok(t),
        FrequencyThreshold::Auto { epsilon, .. } => auto_threshold_with_rate(
            length_ticks,
            expiry,
            level,
            rate.expect("rate resolved for auto threshold"),
            delta_t,
            epsilon,
        ),
    })
}
