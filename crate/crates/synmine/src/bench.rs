//! Benchmark harness comparing the level-wise miner against the
//! all-occurrence baseline.
//!
//! One generation parameter is swept over a grid. At every grid point the
//! harness simulates streams with embedded synchronous patterns, runs each
//! method, and scores it against the embedded truth:
//!
//! * recall — embedded patterns reported exactly (full type set), over the
//!   number embedded;
//! * false-positive rate — reported episodes whose type set is not contained
//!   in any embedded pattern, over everything reported (sub-patterns of an
//!   embedded pattern are genuinely synchronous, so only non-subsets count
//!   as false);
//! * mean runtime of the counting + significance phase, excluding
//!   simulation and i/o.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::baseline::{enumerate_patterns, SurrogateConfig, SurrogatePool, DEFAULT_WINDOW_CAP};
use crate::counting::SpanPolicy;
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::events::split_trials;
use crate::mining::{mine, FrequencyThreshold, MiningConfig};
use crate::simulate::{generate, EmbedSpec, PatternField, SimConfig};

/// Which generation parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Length,
    Rate,
    Neurons,
    Expiry,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Length => "length",
            SweepParameter::Rate => "rate",
            SweepParameter::Neurons => "neurons",
            SweepParameter::Expiry => "expiry",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(SweepParameter::Length),
            "rate" => Ok(SweepParameter::Rate),
            "neurons" => Ok(SweepParameter::Neurons),
            "expiry" => Ok(SweepParameter::Expiry),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter {other:?} (expected length|rate|neurons|expiry)"
            ))),
        }
    }
}

/// Benchmarked method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Level-wise non-overlapped episode mining with analytic thresholds.
    #[serde(rename = "pe")]
    Pe,
    /// All-occurrence counting with jitter-surrogate significance.
    #[serde(rename = "baseline")]
    Baseline,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pe => "pe",
            Method::Baseline => "baseline",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pe" => Ok(Method::Pe),
            "baseline" => Ok(Method::Baseline),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?} (expected pe|baseline)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub vary: SweepParameter,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    /// Base parameters; the swept one is overridden per grid value.
    pub neurons: u32,
    pub length_ticks: u64,
    pub rate_hz: f64,
    pub expiry: u64,
    pub delta_t: f64,
    /// Type-I error bound of the miner's analytic threshold.
    pub epsilon: f64,
    /// Sizes of the embedded patterns (consecutive disjoint type blocks).
    pub embed_sizes: Vec<usize>,
    /// Embedding instances per second.
    pub embed_rate_hz: f64,
    pub embed_jitter: u64,
    /// Runs per grid point; runtimes and scores are means over runs.
    pub pe_runs: usize,
    pub baseline_runs: usize,
    /// Largest pattern size the baseline enumerates; defaults to the largest
    /// embedded size.
    pub max_pattern_size: Option<usize>,
    pub surrogates: usize,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            vary: SweepParameter::Length,
            values: vec![50_000.0],
            methods: vec![Method::Pe, Method::Baseline],
            neurons: 20,
            length_ticks: 50_000,
            rate_hz: 5.0,
            expiry: 5,
            delta_t: 0.001,
            epsilon: 0.05,
            embed_sizes: vec![3, 5],
            embed_rate_hz: 3.0,
            embed_jitter: 2,
            pe_runs: 100,
            baseline_runs: 20,
            max_pattern_size: None,
            surrogates: 25,
            trials: 20,
            alpha: 0.05,
            seed: 1,
        }
    }
}

/// One report row: a grid point, a method, and its mean scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub parameter: String,
    pub value: f64,
    pub method: Method,
    pub mean_runtime_s: f64,
    /// `None` when no run reported anything.
    pub false_positive_rate: Option<f64>,
    /// Mean number of episodes reported per run.
    pub patterns_found: f64,
    pub patterns_embedded: u64,
    /// `None` when nothing was embedded.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

const TSV_HEADER: &str =
    "parameter\tvalue\tmethod\tmean_runtime_s\tfalse_positive_rate\tpatterns_found\tpatterns_embedded\trecall";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| x.to_string())
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "n/a" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::InvalidConfig(format!("bad numeric field {s:?}")))
}

impl BenchReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.parameter,
                r.value,
                r.method,
                r.mean_runtime_s,
                opt(r.false_positive_rate),
                r.patterns_found,
                r.patterns_embedded,
                opt(r.recall),
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<BenchReport> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line != TSV_HEADER {
                    return Err(Error::parse(1, "unexpected report header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 8 {
                return Err(Error::parse(i + 1, format!("expected 8 fields, got {}", f.len())));
            }
            rows.push(BenchRow {
                parameter: f[0].to_string(),
                value: f[1]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad value {:?}", f[1])))?,
                method: f[2].parse()?,
                mean_runtime_s: f[3]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad runtime {:?}", f[3])))?,
                false_positive_rate: parse_opt(f[4])?,
                patterns_found: f[5]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad count {:?}", f[5])))?,
                patterns_embedded: f[6]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad count {:?}", f[6])))?,
                recall: parse_opt(f[7])?,
            });
        }
        Ok(BenchReport { rows })
    }
}

/// Generation parameters at one grid point.
#[derive(Debug, Clone, Copy)]
struct GridPoint {
    neurons: u32,
    length_ticks: u64,
    rate_hz: f64,
    expiry: u64,
}

fn integral(v: f64, what: &str) -> Result<u64> {
    if v.fract() != 0.0 || v < 0.0 || v > u64::MAX as f64 {
        return Err(Error::InvalidConfig(format!(
            "{what} grid value must be a non-negative integer, got {v}"
        )));
    }
    Ok(v as u64)
}

impl BenchConfig {
    fn grid_point(&self, value: f64) -> Result<GridPoint> {
        let mut point = GridPoint {
            neurons: self.neurons,
            length_ticks: self.length_ticks,
            rate_hz: self.rate_hz,
            expiry: self.expiry,
        };
        match self.vary {
            SweepParameter::Length => point.length_ticks = integral(value, "length")?,
            SweepParameter::Rate => point.rate_hz = value,
            SweepParameter::Neurons => {
                point.neurons = u32::try_from(integral(value, "neurons")?)
                    .map_err(|_| Error::InvalidConfig(format!("neuron count {value} too large")))?
            }
            SweepParameter::Expiry => point.expiry = integral(value, "expiry")?,
        }
        if point.expiry == 0 {
            return Err(Error::InvalidConfig("expiry must be >= 1 tick".into()));
        }
        Ok(point)
    }

    fn embedded_patterns(&self, point: &GridPoint) -> Result<Vec<Episode>> {
        let total: usize = self.embed_sizes.iter().sum();
        if total > point.neurons as usize {
            return Err(Error::InvalidConfig(format!(
                "embedded patterns need {total} distinct types but only {} neurons exist",
                point.neurons
            )));
        }
        let mut next = 0u32;
        self.embed_sizes
            .iter()
            .map(|&size| {
                let ids: Vec<u32> = (next..next + size as u32).collect();
                next += size as u32;
                Episode::from_ids(&ids)
            })
            .collect()
    }

    fn sim_config(&self, point: &GridPoint, run: usize) -> Result<SimConfig> {
        let patterns = self.embedded_patterns(point)?;
        Ok(SimConfig {
            num_neurons: point.neurons,
            length_ticks: point.length_ticks,
            delta_t: self.delta_t,
            base_rate_hz: Some(point.rate_hz),
            base_rates_hz: None,
            phases: Vec::new(),
            embeddings: patterns
                .into_iter()
                .map(|p| EmbedSpec {
                    pattern: PatternField::Ids(p.types().iter().map(|t| t.0).collect()),
                    jitter_span: self.embed_jitter,
                    rate_hz: Some(self.embed_rate_hz),
                    anchors: None,
                })
                .collect(),
            connections: Vec::new(),
            seed: self
                .seed
                .wrapping_mul(0x9E37_79B9)
                .wrapping_add(run as u64)
                .wrapping_add((point.length_ticks ^ u64::from(point.neurons) ^ point.expiry) << 20),
        })
    }
}

/// Scores one run's reported episodes against the embedded truth.
fn score(reported: &[Episode], embedded: &[Episode]) -> (Option<f64>, Option<f64>) {
    let recall = if embedded.is_empty() {
        None
    } else {
        let hit = embedded
            .iter()
            .filter(|e| reported.contains(e))
            .count();
        Some(hit as f64 / embedded.len() as f64)
    };
    let fpr = if reported.is_empty() {
        None
    } else {
        let false_pos = reported
            .iter()
            .filter(|r| !embedded.iter().any(|e| r.is_subset_of(e)))
            .count();
        Some(false_pos as f64 / reported.len() as f64)
    };
    (recall, fpr)
}

fn mean_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Runs the sweep and assembles the report, one row per (grid value, method).
pub fn run(config: &BenchConfig) -> Result<BenchReport> {
    if config.values.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    if config.methods.is_empty() {
        return Err(Error::InvalidConfig("no methods selected".into()));
    }
    let mut rows = Vec::new();
    for &value in &config.values {
        let point = config.grid_point(value)?;
        let embedded = config.embedded_patterns(&point)?;
        for &method in &config.methods {
            let runs = match method {
                Method::Pe => config.pe_runs,
                Method::Baseline => config.baseline_runs,
            };
            if runs == 0 {
                return Err(Error::InvalidConfig("runs must be >= 1".into()));
            }
            let mut runtimes = Vec::with_capacity(runs);
            let mut recalls = Vec::new();
            let mut fprs = Vec::new();
            let mut found = Vec::with_capacity(runs);
            for run_idx in 0..runs {
                let sim = config.sim_config(&point, run_idx)?;
                let seq = generate(&sim)?;
                let started = Instant::now();
                let reported: Vec<Episode> = match method {
                    Method::Pe => {
                        let mining = MiningConfig {
                            expiry: point.expiry,
                            threshold: FrequencyThreshold::Auto {
                                epsilon: config.epsilon,
                                rate_hz: Some(point.rate_hz),
                            },
                            max_level: None,
                            span_policy: SpanPolicy::Inclusive,
                        };
                        mine(&seq, &mining)?
                            .into_iter()
                            .map(|m| m.episode)
                            .collect()
                    }
                    Method::Baseline => {
                        let max_size = config
                            .max_pattern_size
                            .or_else(|| config.embed_sizes.iter().copied().max())
                            .unwrap_or(2);
                        let trials = split_trials(&seq, config.trials)?;
                        let patterns =
                            enumerate_patterns(&seq, point.expiry, max_size, DEFAULT_WINDOW_CAP)?;
                        let pool = SurrogatePool::build(
                            &trials,
                            &SurrogateConfig {
                                n_surrogates: config.surrogates,
                                jitter: 2 * point.expiry,
                                n_trials: config.trials,
                                alpha: config.alpha,
                                seed: sim.seed ^ 0x5EED,
                            },
                        )?;
                        patterns
                            .into_iter()
                            .filter(|p| pool.evaluate(p, point.expiry).significant)
                            .collect()
                    }
                };
                runtimes.push(started.elapsed().as_secs_f64());
                let (recall, fpr) = score(&reported, &embedded);
                recalls.extend(recall);
                fprs.extend(fpr);
                found.push(reported.len() as f64);
            }
            rows.push(BenchRow {
                parameter: config.vary.name().to_string(),
                value,
                method,
                mean_runtime_s: mean_of(&runtimes).unwrap_or(0.0),
                false_positive_rate: mean_of(&fprs),
                patterns_found: mean_of(&found).unwrap_or(0.0),
                patterns_embedded: embedded.len() as u64,
                recall: mean_of(&recalls),
            });
        }
    }
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_round_trips_exactly() {
        let report = BenchReport {
            rows: vec![
                BenchRow {
                    parameter: "length".into(),
                    value: 50_000.0,
                    method: Method::Pe,
                    mean_runtime_s: 0.0123456789,
                    false_positive_rate: Some(0.125),
                    patterns_found: 12.25,
                    patterns_embedded: 2,
                    recall: Some(1.0),
                },
                BenchRow {
                    parameter: "length".into(),
                    value: 100_000.0,
                    method: Method::Baseline,
                    mean_runtime_s: 1.5e-3,
                    false_positive_rate: None,
                    patterns_found: 0.0,
                    patterns_embedded: 0,
                    recall: None,
                },
            ],
        };
        let text = report.to_tsv();
        let again = BenchReport::from_tsv(&text).unwrap();
        assert_eq!(report, again);
        assert!(text.contains("n/a"));
        assert!(BenchReport::from_tsv("bogus\n").is_err());
    }

    #[test]
    fn scoring_rules() {
        let emb = vec![
            Episode::from_ids(&[0, 1, 2]).unwrap(),
            Episode::from_ids(&[3, 4]).unwrap(),
        ];
        // one exact hit, one subset (not false), one disjoint false positive
        let rep = vec![
            Episode::from_ids(&[0, 1, 2]).unwrap(),
            Episode::from_ids(&[0, 1]).unwrap(),
            Episode::from_ids(&[5, 6]).unwrap(),
        ];
        let (recall, fpr) = score(&rep, &emb);
        assert_eq!(recall, Some(0.5));
        assert!((fpr.unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let (recall, fpr) = score(&[], &emb);
        assert_eq!(recall, Some(0.0));
        assert_eq!(fpr, None);

        let (recall, fpr) = score(&rep, &[]);
        assert_eq!(recall, None);
        assert_eq!(fpr.unwrap(), 1.0);
    }

    #[test]
    fn grid_point_validation() {
        let config = BenchConfig::default();
        assert!(config.grid_point(50_000.0).is_ok());
        assert!(config.grid_point(50_000.5).is_err());
        let bad = BenchConfig {
            vary: SweepParameter::Expiry,
            ..BenchConfig::default()
        };
        assert!(bad.grid_point(0.0).is_err());
    }

    #[test]
    fn tiny_sweep_runs_end_to_end() {
        let config = BenchConfig {
            vary: SweepParameter::Expiry,
            values: vec![3.0],
            methods: vec![Method::Pe, Method::Baseline],
            neurons: 6,
            length_ticks: 4_000,
            embed_sizes: vec![3],
            embed_rate_hz: 15.0,
            embed_jitter: 1,
            pe_runs: 2,
            baseline_runs: 1,
            trials: 4,
            surrogates: 5,
            ..BenchConfig::default()
        };
        let report = run(&config).unwrap();
        assert_eq!(report.rows.len(), 2);
        let pe = &report.rows[0];
        assert_eq!(pe.method, Method::Pe);
        assert_eq!(pe.patterns_embedded, 1);
        assert_eq!(pe.recall, Some(1.0), "embedded 3-node pattern not recovered");
        // round-trip of a real report
        let again = BenchReport::from_tsv(&report.to_tsv()).unwrap();
        assert_eq!(report, again);
    }
}
