//! Ground-truth stream generation.
//!
//! Each neuron fires independently per tick with probability
//! `rate * delta_t` (a discrete-time Bernoulli approximation of a Poisson
//! process, matching the model the significance machinery assumes). On top
//! of that background, optional delayed conditional connections let one
//! neuron's spike trigger another, and synchronous patterns can be embedded
//! at known anchor ticks with a bounded jitter. Generation is a pure
//! function of the configuration, including its seed.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::events::{Event, EventSequence, EventTypeId};

/// Synchronous pattern embedded into the stream. Every constituent of
/// `pattern` fires at a uniformly random tick in `[anchor, anchor +
/// jitter_span]` for each instance. Instances are placed either at explicit
/// `anchors` or by a per-tick Bernoulli schedule with `rate_hz` instances
/// per second (exactly one of the two must be given).
#[derive(Debug, Clone, Deserialize)]
pub struct EmbedSpec {
    pub pattern: PatternField,
    #[serde(default)]
    pub jitter_span: u64,
    #[serde(default)]
    pub rate_hz: Option<f64>,
    #[serde(default)]
    pub anchors: Option<Vec<u64>>,
}

/// Pattern written either as a label string (`"A,B,C"`) or a list of ids.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PatternField {
    Ids(Vec<u32>),
    Text(String),
}

impl PatternField {
    pub fn to_episode(&self) -> Result<Episode> {
        match self {
            PatternField::Ids(ids) => Episode::from_ids(ids),
            PatternField::Text(s) => s.parse(),
        }
    }
}

/// Directed conditional connection: when `source` fires at tick `t`,
/// `target` additionally fires at `t + delay_ticks` with probability `prob`.
#[derive(Debug, Clone, Deserialize)]
pub struct Connection {
    pub source: u32,
    pub target: u32,
    #[serde(default)]
    pub delay_ticks: u64,
    pub prob: f64,
}

/// Piecewise-constant rate override from `start_tick` onward; `rates_hz`
/// holds either one shared rate or one rate per neuron.
#[derive(Debug, Clone, Deserialize)]
pub struct RatePhase {
    pub start_tick: u64,
    pub rates_hz: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SimConfig {
    #[serde(alias = "neurons")]
    pub num_neurons: u32,
    pub length_ticks: u64,
    pub delta_t: f64,
    /// Uniform background rate in Hz, unless `base_rates_hz` gives one per
    /// neuron.
    #[serde(default)]
    pub base_rate_hz: Option<f64>,
    #[serde(default)]
    pub base_rates_hz: Option<Vec<f64>>,
    #[serde(default)]
    pub phases: Vec<RatePhase>,
    #[serde(default, alias = "embed")]
    pub embeddings: Vec<EmbedSpec>,
    #[serde(default, alias = "connection")]
    pub connections: Vec<Connection>,
    #[serde(default)]
    pub seed: u64,
}

// Disjoint deterministic RNG streams per purpose, derived from the seed.
const STREAM_BACKGROUND: u64 = 0;
const STREAM_EMBED_BASE: u64 = 1;

fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    // splitmix64 finalizer over seed and stream index
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<SimConfig> {
        let config: SimConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("bad simulation config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<SimConfig> {
        let mut text = String::new();
        BufReader::new(File::open(path)?).read_to_string(&mut text)?;
        SimConfig::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "delta_t must be positive and finite, got {}",
                self.delta_t
            )));
        }
        self.resolve_rates()?;
        for phase in &self.phases {
            self.check_rates(&phase.rates_hz)?;
            if phase.start_tick > self.length_ticks {
                return Err(Error::InvalidConfig(format!(
                    "phase start {} lies beyond the stream ({} ticks)",
                    phase.start_tick, self.length_ticks
                )));
            }
        }
        for c in &self.connections {
            if c.source >= self.num_neurons || c.target >= self.num_neurons {
                return Err(Error::InvalidConfig(format!(
                    "connection {} -> {} references a neuron outside 0..{}",
                    c.source, c.target, self.num_neurons
                )));
            }
            if !(0.0..=1.0).contains(&c.prob) {
                return Err(Error::InvalidConfig(format!(
                    "connection probability {} outside [0, 1]",
                    c.prob
                )));
            }
        }
        for (i, embed) in self.embeddings.iter().enumerate() {
            let pattern = embed.pattern.to_episode()?;
            if let Some(max) = pattern.types().last() {
                if max.0 >= self.num_neurons {
                    return Err(Error::InvalidConfig(format!(
                        "embedded pattern {pattern} references a neuron outside 0..{}",
                        self.num_neurons
                    )));
                }
            }
            match (&embed.rate_hz, &embed.anchors) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(Error::InvalidConfig(format!(
                        "embedding #{i}: give exactly one of rate_hz or anchors"
                    )));
                }
                (Some(rate), None) => {
                    let q = rate * self.delta_t;
                    if !(0.0..=1.0).contains(&q) {
                        return Err(Error::InvalidProbability(format!(
                            "embedding rate {rate} Hz at delta_t {} gives per-tick \
                             probability {q}",
                            self.delta_t
                        )));
                    }
                }
                (None, Some(anchors)) => {
                    if let Some(&a) = anchors.iter().find(|&&a| a >= self.length_ticks) {
                        return Err(Error::InvalidConfig(format!(
                            "embedding anchor {a} lies beyond the stream ({} ticks)",
                            self.length_ticks
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_rates(&self, rates: &[f64]) -> Result<()> {
        if rates.len() != 1 && rates.len() != self.num_neurons as usize {
            return Err(Error::InvalidConfig(format!(
                "expected 1 or {} rates, got {}",
                self.num_neurons,
                rates.len()
            )));
        }
        for &r in rates {
            let q = r * self.delta_t;
            if !(0.0..=1.0).contains(&q) || !q.is_finite() {
                return Err(Error::InvalidProbability(format!(
                    "rate {r} Hz at delta_t {} gives per-tick probability {q}",
                    self.delta_t
                )));
            }
        }
        Ok(())
    }

    /// Base per-neuron rates with the shared-rate shorthand expanded.
    fn resolve_rates(&self) -> Result<Vec<f64>> {
        let rates = match (&self.base_rate_hz, &self.base_rates_hz) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either base_rate_hz or base_rates_hz, not both".into(),
                ))
            }
            (Some(r), None) => vec![*r; self.num_neurons as usize],
            (None, Some(v)) => {
                self.check_rates(v)?;
                if v.len() == 1 {
                    vec![v[0]; self.num_neurons as usize]
                } else {
                    v.clone()
                }
            }
            (None, None) => vec![0.0; self.num_neurons as usize],
        };
        self.check_rates(&rates)?;
        Ok(rates)
    }

    /// Per-neuron firing probabilities for each phase, as
    /// `(start_tick, probs)` sorted by start tick with the base rates first.
    fn phase_probs(&self) -> Result<Vec<(u64, Vec<f64>)>> {
        let base = self.resolve_rates()?;
        let to_probs =
            |rates: &[f64]| -> Vec<f64> { rates.iter().map(|r| r * self.delta_t).collect() };
        let mut phases = vec![(0u64, to_probs(&base))];
        let mut extra: Vec<&RatePhase> = self.phases.iter().collect();
        extra.sort_by_key(|p| p.start_tick);
        for p in extra {
            let rates = if p.rates_hz.len() == 1 {
                vec![p.rates_hz[0]; self.num_neurons as usize]
            } else {
                p.rates_hz.clone()
            };
            phases.push((p.start_tick, to_probs(&rates)));
        }
        Ok(phases)
    }
}

/// Anchor ticks of one embedding, as a pure function of the configuration.
fn embedding_anchors(config: &SimConfig, index: usize) -> Result<Vec<u64>> {
    let embed = &config.embeddings[index];
    match (&embed.rate_hz, &embed.anchors) {
        (None, Some(anchors)) => {
            let mut a = anchors.clone();
            a.sort_unstable();
            Ok(a)
        }
        (Some(rate), None) => {
            let q = rate * config.delta_t;
            let mut rng = derived_rng(config.seed, STREAM_EMBED_BASE + 2 * index as u64);
            Ok((0..config.length_ticks)
                .filter(|_| rng.random_bool(q))
                .collect())
        }
        _ => Err(Error::InvalidConfig(
            "embedding needs exactly one of rate_hz or anchors".into(),
        )),
    }
}

/// The embedded patterns and their anchor ticks, exactly as [`generate`]
/// places them. Intended for scoring miners against the ground truth.
pub fn embed_truth(config: &SimConfig) -> Result<Vec<(Episode, Vec<u64>)>> {
    config.validate()?;
    config
        .embeddings
        .iter()
        .enumerate()
        .map(|(i, e)| Ok((e.pattern.to_episode()?, embedding_anchors(config, i)?)))
        .collect()
}

/// Generates the event stream described by `config`. Deterministic given the
/// seed: identical configurations produce identical streams.
pub fn generate(config: &SimConfig) -> Result<EventSequence> {
    config.validate()?;
    let m = config.num_neurons as usize;
    let phases = config.phase_probs()?;
    let mut events: Vec<Event> = Vec::new();

    let mut bg = derived_rng(config.seed, STREAM_BACKGROUND);
    let max_delay = config
        .connections
        .iter()
        .map(|c| c.delay_ticks)
        .max()
        .unwrap_or(0);
    // Ring buffer of recent fired-rows, only needed for connection lookback.
    let mut ring: Vec<Vec<bool>> = vec![vec![false; m]; max_delay as usize + 1];
    let mut phase_idx = 0usize;

    for t in 0..config.length_ticks {
        while phase_idx + 1 < phases.len() && phases[phase_idx + 1].0 <= t {
            phase_idx += 1;
        }
        let probs = &phases[phase_idx].1;
        let slot = (t % (max_delay + 1)) as usize;
        // Everything between writes to `ring[slot]` sees rows for t-1..t-max_delay.
        for j in 0..m {
            ring[slot][j] = probs[j] > 0.0 && bg.random_bool(probs[j]);
        }
        for c in &config.connections {
            if t >= c.delay_ticks {
                let src_slot = ((t - c.delay_ticks) % (max_delay + 1)) as usize;
                if ring[src_slot][c.source as usize]
                    && c.prob > 0.0
                    && bg.random_bool(c.prob)
                {
                    ring[slot][c.target as usize] = true;
                }
            }
        }
        for (j, fired) in ring[slot].iter().enumerate() {
            if *fired {
                events.push(Event {
                    etype: EventTypeId(j as u32),
                    tick: t,
                });
            }
        }
    }

    for (i, embed) in config.embeddings.iter().enumerate() {
        let pattern = embed.pattern.to_episode()?;
        let anchors = embedding_anchors(config, i)?;
        let mut jitter = derived_rng(config.seed, STREAM_EMBED_BASE + 2 * i as u64 + 1);
        let last_tick = config.length_ticks.saturating_sub(1);
        for &anchor in &anchors {
            for &etype in pattern.types() {
                let offset = jitter.random_range(0..=embed.jitter_span);
                events.push(Event {
                    etype,
                    tick: (anchor + offset).min(last_tick),
                });
            }
        }
    }

    EventSequence::new(
        events,
        config.delta_t,
        Some(config.length_ticks),
        Some(config.num_neurons),
    )
}
