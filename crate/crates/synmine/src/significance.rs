//! Analytic significance of synchrony counts under an independence null.
//!
//! The null hypothesis is that every source fires independently, with
//! per-tick firing probability `q = rate * delta_t`. The counting process is
//! modelled as a skip scan over `L` ticks: at each tick an occurrence of the
//! episode starts with probability `p`, in which case the scan counts it and
//! jumps ahead by the expiry `T`; otherwise it advances one tick. The
//! expected count `F` and the mean squared count `G` then satisfy
//!
//! ```text
//! F(L) = (1 - p) F(L - 1) + p (1 + F(L - T))
//! G(L) = (1 - p) G(L - 1) + p (1 + G(L - T) + 2 F(L - T))
//! ```
//!
//! with `F(x) = G(x) = 0` for `x < T`, and the variance is `V = G - F^2`.
//! For an episode of `n` independent sources the per-tick occurrence
//! probability is
//!
//! ```text
//! p = (Π q_j) * Σ_{i=0}^{n-1} (T-1)^(n-1-i) T^i
//! ```
//!
//! where the sum counts the constituent placements inside a `T`-tick window
//! anchored at the current tick, and telescopes to `T^n - (T-1)^n`.
//!
//! A distribution-free count threshold follows from the Chebyshev bound:
//! `F + k sqrt(V)` with `k` the smallest integer satisfying `k^2 >= 1/eps`
//! keeps the chance of a purely random episode exceeding the threshold
//! below `eps`.

use crate::error::{Error, Result};
use crate::events::{mean_rate, EventSequence};

/// Null-hypothesis firing rates for an episode's constituents, in Hz.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSpec {
    /// One rate shared by every constituent.
    Shared(f64),
    /// One rate per constituent; the occurrence probability uses their
    /// product, since the null factorizes across independent sources.
    PerConstituent(Vec<f64>),
}

/// Inputs of the significance computation.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceParams {
    /// Data length in ticks.
    pub length_ticks: u64,
    /// Expiry span in ticks.
    pub expiry: u64,
    /// Episode size `n`.
    pub episode_size: usize,
    /// Firing rates under the null.
    pub rates: RateSpec,
    /// Seconds per tick.
    pub delta_t: f64,
    /// Type-I error bound, in (0, 1).
    pub epsilon: f64,
}

/// Outputs of the significance computation.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceResult {
    /// Per-tick occurrence probability of the episode under the null.
    pub occurrence_prob: f64,
    /// Expected count of the skip-scan model.
    pub expected_frequency: f64,
    /// Variance of the count.
    pub variance: f64,
    /// Chebyshev multiplier.
    pub chebyshev_k: u64,
    /// Frequency threshold `F + k sqrt(V)`.
    pub threshold: f64,
}

impl SignificanceParams {
    fn validate(&self) -> Result<()> {
        if self.expiry == 0 {
            return Err(Error::InvalidConfig("expiry must be >= 1 tick".into()));
        }
        if self.episode_size == 0 {
            return Err(Error::InvalidConfig("episode size must be >= 1".into()));
        }
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "delta_t must be positive and finite, got {}",
                self.delta_t
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if let RateSpec::PerConstituent(rates) = &self.rates {
            if rates.len() != self.episode_size {
                return Err(Error::InvalidConfig(format!(
                    "got {} per-constituent rates for an episode of size {}",
                    rates.len(),
                    self.episode_size
                )));
            }
        }
        Ok(())
    }

    fn tick_probs(&self) -> Result<Vec<f64>> {
        let rates = match &self.rates {
            RateSpec::Shared(r) => vec![*r; self.episode_size],
            RateSpec::PerConstituent(v) => v.clone(),
        };
        rates
            .into_iter()
            .map(|r| {
                let q = r * self.delta_t;
                if !(0.0..=1.0).contains(&q) || !q.is_finite() {
                    Err(Error::InvalidProbability(format!(
                        "rate {r} Hz at delta_t {} gives per-tick probability {q}",
                        self.delta_t
                    )))
                } else {
                    Ok(q)
                }
            })
            .collect()
    }
}

/// Number of ways to place `n` constituents on ticks `0..T` so that at least
/// one sits on tick 0, i.e. `Σ_{i=0}^{n-1} (T-1)^(n-1-i) T^i`.
pub fn window_placements(episode_size: usize, expiry: u64) -> f64 {
    let t = expiry as f64;
    (0..episode_size)
        .map(|i| (t - 1.0).powi((episode_size - 1 - i) as i32) * t.powi(i as i32))
        .sum()
}

/// Per-tick probability that an occurrence of the episode starts at a given
/// tick under the independence null.
///
/// Fails if any per-tick firing probability leaves `[0, 1]`, or if the
/// resulting `p` exceeds 1 (the rare-event model breaks down when
/// `rate * delta_t * expiry` is large).
pub fn occurrence_prob(params: &SignificanceParams) -> Result<f64> {
    params.validate()?;
    let qs = params.tick_probs()?;
    let product: f64 = qs.iter().product();
    let p = product * window_placements(params.episode_size, params.expiry);
    if p > 1.0 + 1e-12 {
        return Err(Error::InvalidProbability(format!(
            "occurrence probability {p} exceeds 1; the independence model does not \
             apply at these rates and expiry"
        )));
    }
    Ok(p.min(1.0))
}

/// Jointly tabulates F and G bottom-up in one forward sweep.
///
/// Time O(L), memory O(L). Both are zero whenever `L < T`.
fn tabulate_fg(length_ticks: u64, expiry: u64, p: f64) -> (f64, f64) {
    debug_assert!(expiry >= 1);
    debug_assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1], got {p}");
    if length_ticks < expiry {
        return (0.0, 0.0);
    }
    let len = length_ticks as usize;
    let t = expiry as usize;
    let mut f = vec![0.0f64; len + 1];
    let mut g = vec![0.0f64; len + 1];
    let q = 1.0 - p;
    for l in t..=len {
        f[l] = q * f[l - 1] + p * (1.0 + f[l - t]);
        g[l] = q * g[l - 1] + p * (1.0 + g[l - t] + 2.0 * f[l - t]);
    }
    (f[len], g[len])
}

/// Expected count `F(L, T, p)` of the skip-scan model.
pub fn expected_frequency(length_ticks: u64, expiry: u64, p: f64) -> f64 {
    tabulate_fg(length_ticks, expiry, p).0
}

/// Variance `V(L, T, p) = G - F^2` of the skip-scan count. Tiny negative
/// results from float cancellation clamp to zero.
pub fn frequency_variance(length_ticks: u64, expiry: u64, p: f64) -> f64 {
    let (f, g) = tabulate_fg(length_ticks, expiry, p);
    let v = g - f * f;
    debug_assert!(v > -1e-6 * (g.abs() + 1.0), "variance {v} is negative beyond tolerance");
    v.max(0.0)
}

/// Smallest integer `k` with `k^2 >= 1/epsilon`.
pub fn chebyshev_multiplier(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let x = 1.0 / epsilon;
    // Accept within one part in 1e9 so that mathematically exact squares
    // (1/0.04 = 25) survive the float division.
    let accepts = |k: u64| (k as f64) * (k as f64) >= x * (1.0 - 1e-9);
    let mut k = x.sqrt().floor().max(1.0) as u64;
    while !accepts(k) {
        k += 1;
    }
    Ok(k)
}

/// Chebyshev frequency threshold `F + k sqrt(V)`.
pub fn chebyshev_threshold(expected: f64, variance: f64, epsilon: f64) -> Result<(u64, f64)> {
    if variance < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "variance must be non-negative, got {variance}"
        )));
    }
    let k = chebyshev_multiplier(epsilon)?;
    Ok((k, expected + k as f64 * variance.sqrt()))
}

/// Runs the full pipeline: occurrence probability, expected frequency,
/// variance, and the Chebyshev threshold.
pub fn evaluate(params: &SignificanceParams) -> Result<SignificanceResult> {
    let p = occurrence_prob(params)?;
    let f = expected_frequency(params.length_ticks, params.expiry, p);
    let v = frequency_variance(params.length_ticks, params.expiry, p);
    let (k, threshold) = chebyshev_threshold(f, v, params.epsilon)?;
    Ok(SignificanceResult {
        occurrence_prob: p,
        expected_frequency: f,
        variance: v,
        chebyshev_k: k,
        threshold,
    })
}

/// Integer count threshold `ceil(F + k sqrt(V))` for a given null rate.
pub fn auto_threshold_with_rate(
    length_ticks: u64,
    expiry: u64,
    episode_size: usize,
    rate_hz: f64,
    delta_t: f64,
    epsilon: f64,
) -> Result<u64> {
    let result = evaluate(&SignificanceParams {
        length_ticks,
        expiry,
        episode_size,
        rates: RateSpec::Shared(rate_hz),
        delta_t,
        epsilon,
    })?;
    Ok(result.threshold.ceil().max(0.0) as u64)
}

/// Integer count threshold for episodes of a given size on `seq`, with the
/// null rate estimated as the mean firing rate across the stream's sources.
pub fn auto_threshold(
    seq: &EventSequence,
    episode_size: usize,
    expiry: u64,
    epsilon: f64,
) -> Result<u64> {
    let rate = mean_rate(seq)?;
    auto_threshold_with_rate(
        seq.length_ticks(),
        expiry,
        episode_size,
        rate,
        seq.delta_t(),
        epsilon,
    )
}
