//! Cross-module integration tests: property checks of the counters against
//! independent oracles, and simulator-to-miner recovery runs.

mod common;

use common::{
    all_episodes, crossproduct_all_occurrences, greedy_oracle, random_sequence, seeded,
};
use proptest::prelude::*;
use rand::Rng;
use synmine::baseline::{count_all_occurrences, jitter_surrogate};
use synmine::counting::{count_nonoverlapped, count_single};
use synmine::events::parse_spike_text;
use synmine::mining::{mine, FrequencyThreshold, MiningConfig};
use synmine::significance::{expected_frequency, occurrence_prob, RateSpec, SignificanceParams};
use synmine::simulate::{generate, EmbedSpec, PatternField, SimConfig};
use synmine::{Episode, EventSequence, EventTypeId, SpanPolicy};

fn arb_events() -> impl Strategy<Value = Vec<(u32, u64)>> {
    prop::collection::vec((0u32..5, 0u64..120), 0..200)
}

fn arb_episode() -> impl Strategy<Value = Episode> {
    prop::sample::subsequence(vec![0u32, 1, 2, 3, 4], 1..=3)
        .prop_map(|ids| Episode::from_ids(&ids).unwrap())
}

fn build(events: Vec<(u32, u64)>) -> EventSequence {
    let events = events
        .into_iter()
        .map(|(id, tick)| synmine::Event {
            etype: EventTypeId(id),
            tick,
        })
        .collect();
    EventSequence::new(events, 1.0, Some(120), Some(5)).unwrap()
}

proptest! {
    #[test]
    fn counter_matches_greedy_oracle(
        events in arb_events(),
        episode in arb_episode(),
        expiry in 1u64..8,
        strict in any::<bool>(),
    ) {
        let seq = build(events);
        let policy = if strict { SpanPolicy::Strict } else { SpanPolicy::Inclusive };
        let got = count_single(&seq, &episode, expiry, policy).unwrap();
        let want = greedy_oracle(&seq, &episode, expiry, policy);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn multi_candidate_pass_equals_single_counts(
        events in arb_events(),
        expiry in 1u64..8,
    ) {
        let seq = build(events);
        for size in 1..=3usize {
            let candidates: Vec<Episode> = all_episodes(5, size)
                .into_iter()
                .filter(|e| e.size() == size)
                .collect();
            let joint =
                count_nonoverlapped(&seq, &candidates, expiry, SpanPolicy::Inclusive).unwrap();
            for ep in &candidates {
                let single = count_single(&seq, ep, expiry, SpanPolicy::Inclusive).unwrap();
                prop_assert_eq!(joint[ep], single);
            }
        }
    }

    #[test]
    fn all_occurrence_count_matches_cross_product(
        events in prop::collection::vec((0u32..5, 0u64..60), 0..60),
        episode in arb_episode(),
        expiry in 0u64..8,
    ) {
        let events = events
            .into_iter()
            .map(|(id, tick)| synmine::Event { etype: EventTypeId(id), tick })
            .collect();
        let seq = EventSequence::new(events, 1.0, Some(60), Some(5)).unwrap();
        let got = count_all_occurrences(&seq, &episode, expiry);
        let want = crossproduct_all_occurrences(&seq, &episode, expiry);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn all_occurrences_dominate_nonoverlapped(
        events in arb_events(),
        episode in arb_episode(),
        expiry in 1u64..8,
    ) {
        let seq = build(events);
        let all = count_all_occurrences(&seq, &episode, expiry);
        let non = count_single(&seq, &episode, expiry, SpanPolicy::Inclusive).unwrap();
        prop_assert!(all >= non);
    }

    #[test]
    fn spike_text_round_trips(events in prop::collection::vec((0u32..9, 0u64..1_000_000), 0..80)) {
        let events: Vec<synmine::Event> = events
            .into_iter()
            .map(|(id, tick)| synmine::Event { etype: EventTypeId(id), tick })
            .collect();
        for delta_t in [0.001, 0.25, 1.0] {
            let seq = EventSequence::new(events.clone(), delta_t, None, Some(9)).unwrap();
            let again = parse_spike_text(&seq.to_spike_text(), delta_t).unwrap();
            prop_assert_eq!(&seq, &again);
        }
    }

    #[test]
    fn jitter_preserves_per_type_counts(
        events in arb_events(),
        jitter in 0u64..20,
        seed in any::<u64>(),
    ) {
        let seq = build(events);
        let moved = jitter_surrogate(&seq, jitter, seed);
        for id in 0..5 {
            prop_assert_eq!(
                seq.count_of_type(EventTypeId(id)),
                moved.count_of_type(EventTypeId(id))
            );
        }
        prop_assert!(moved.events().iter().all(|e| e.tick <= seq.length_ticks()));
    }
}

#[test]
fn counting_is_deterministic() {
    let mut rng = seeded(42);
    let seq = random_sequence(&mut rng, 400, 5, 0.15);
    let candidates = all_episodes(5, 3)
        .into_iter()
        .filter(|e| e.size() == 2)
        .collect::<Vec<_>>();
    let a = count_nonoverlapped(&seq, &candidates, 5, SpanPolicy::Inclusive).unwrap();
    let b = count_nonoverlapped(&seq, &candidates, 5, SpanPolicy::Inclusive).unwrap();
    assert_eq!(a, b);
}

/// A 20-source stream with a 4-node pattern embedded 200 times: the miner
/// with the analytic threshold recovers the embedded episode.
#[test]
fn miner_recovers_embedded_pattern() {
    let anchors: Vec<u64> = {
        let mut rng = seeded(99);
        let mut a: Vec<u64> = (0..200).map(|_| rng.random_range(0..49_990)).collect();
        a.sort_unstable();
        a
    };
    let config = SimConfig {
        num_neurons: 20,
        length_ticks: 50_000,
        delta_t: 0.001,
        base_rate_hz: Some(5.0),
        base_rates_hz: None,
        phases: Vec::new(),
        embeddings: vec![EmbedSpec {
            pattern: PatternField::Ids(vec![2, 7, 11, 16]),
            jitter_span: 4,
            rate_hz: None,
            anchors: Some(anchors),
        }],
        connections: Vec::new(),
        seed: 2024,
    };
    let seq = generate(&config).unwrap();
    let mined = mine(
        &seq,
        &MiningConfig {
            expiry: 5,
            threshold: FrequencyThreshold::Auto {
                epsilon: 0.05,
                rate_hz: Some(5.0),
            },
            max_level: None,
            span_policy: SpanPolicy::Inclusive,
        },
    )
    .unwrap();
    let target = Episode::from_ids(&[2, 7, 11, 16]).unwrap();
    assert!(
        mined.iter().any(|m| m.episode == target),
        "embedded pattern missing from {} mined episodes",
        mined.len()
    );
}

/// Light version of the null-calibration link between the simulator and the
/// counting model: over independent seeds, the mean strict-span pair count
/// tracks the model's expected frequency.
#[test]
fn null_pair_count_tracks_model_mean() {
    let pair = Episode::from_ids(&[0, 1]).unwrap();
    let p = occurrence_prob(&SignificanceParams {
        length_ticks: 20_000,
        expiry: 5,
        episode_size: 2,
        rates: RateSpec::Shared(5.0),
        delta_t: 0.001,
        epsilon: 0.05,
    })
    .unwrap();
    let expected = expected_frequency(20_000, 5, p);

    let runs = 30;
    let counts: Vec<f64> = (0..runs)
        .map(|i| {
            let config = SimConfig {
                num_neurons: 3,
                length_ticks: 20_000,
                delta_t: 0.001,
                base_rate_hz: Some(5.0),
                base_rates_hz: None,
                phases: Vec::new(),
                embeddings: Vec::new(),
                connections: Vec::new(),
                seed: 7000 + i,
            };
            let seq = generate(&config).unwrap();
            count_single(&seq, &pair, 5, SpanPolicy::Strict).unwrap() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / runs as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (runs as f64 - 1.0);
    let se = (var / runs as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 4.0 * se.max(0.05),
        "mean {mean} vs model {expected} (se {se})"
    );
}
