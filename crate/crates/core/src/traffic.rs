//! Ground-truth Markov packet generation.
//!
//! The number of packets in a frame follows a clipped random walk on
//! `[g_min, g_max]`: up by one with probability `p_plus`, down by one with
//! probability `p_minus`. When the count changes, exactly one slot is added
//! (uniformly among free slots) or removed (uniformly among occupied slots);
//! otherwise the pattern is repeated unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, SlotSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovParams {
    pub p_plus: f64,
    pub p_minus: f64,
    pub g_min: usize,
    pub g_max: usize,
}

impl MarkovParams {
    pub fn new(p_plus: f64, p_minus: f64, g_min: usize, g_max: usize) -> Self {
        Self {
            p_plus,
            p_minus,
            g_min,
            g_max,
        }
    }

    /// Same bounds, different walk probabilities.
    pub fn with_probs(self, p_plus: f64, p_minus: f64) -> Self {
        Self {
            p_plus,
            p_minus,
            ..self
        }
    }

    pub fn validate(&self, config: &FrameConfig) -> Result<()> {
        let probs_ok =
            self.p_plus >= 0.0 && self.p_minus >= 0.0 && self.p_plus + self.p_minus <= 1.0;
        if !probs_ok {
            return Err(Error::config(format!(
                "walk probabilities must satisfy p_plus, p_minus >= 0 and p_plus + p_minus <= 1, got ({}, {})",
                self.p_plus, self.p_minus
            )));
        }
        if self.g_min > self.g_max || self.g_max > config.num_slots {
            return Err(Error::config(format!(
                "need 0 <= g_min <= g_max <= {}, got g_min={} g_max={}",
                config.num_slots, self.g_min, self.g_max
            )));
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, set: SlotSet) -> Result<()> {
        let len = set.len();
        if len < self.g_min || len > self.g_max {
            return Err(Error::CardinalityOutOfRange {
                len,
                g_min: self.g_min,
                g_max: self.g_max,
            });
        }
        Ok(())
    }
}

/// Random stream for one run's traffic.
///
/// The stream depends only on the seed and the ground-truth parameters, so
/// runs that differ in scheduler or predictor see the same packets.
pub fn traffic_rng(seed: u64, params: &MarkovParams) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key = mix(params.p_plus.to_bits());
    key = mix(key ^ params.p_minus.to_bits());
    key = mix(key ^ params.g_min as u64);
    key = mix(key ^ (params.g_max as u64).rotate_left(32));
    rng.set_stream(key);
    rng
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Picks a uniformly random member of `set`, indexing members in increasing
/// slot order. `set` must be non-empty.
fn pick<R: Rng + ?Sized>(set: SlotSet, rng: &mut R) -> usize {
    let k = rng.gen_range(0..set.len());
    set.iter().nth(k).expect("index within set size")
}

/// Uniformly random pattern with `g_min` packets.
pub fn initial_pattern<R: Rng + ?Sized>(
    params: &MarkovParams,
    config: &FrameConfig,
    rng: &mut R,
) -> SlotSet {
    let full = config.full_set();
    let mut pattern = SlotSet::EMPTY;
    for _ in 0..params.g_min {
        let free = SlotSet::from_bits(full.bits() & !pattern.bits());
        pattern.insert(pick(free, rng));
    }
    pattern
}

/// Draws the next frame's pattern from `current`.
pub fn step_traffic<R: Rng + ?Sized>(
    current: SlotSet,
    params: &MarkovParams,
    config: &FrameConfig,
    rng: &mut R,
) -> Result<SlotSet> {
    params.check_len(current)?;
    config.check(current)?;

    let u: f64 = rng.gen();
    let len = current.len();
    let next_len = if u < params.p_plus {
        (len + 1).min(params.g_max)
    } else if u < params.p_plus + params.p_minus {
        len.saturating_sub(1).max(params.g_min)
    } else {
        len
    };

    Ok(match next_len.cmp(&len) {
        std::cmp::Ordering::Greater => {
            let free = SlotSet::from_bits(config.full_set().bits() & !current.bits());
            current.with(pick(free, rng))
        }
        std::cmp::Ordering::Less => current.without(pick(current, rng)),
        std::cmp::Ordering::Equal => current,
    })
}

/// A traffic source that owns its state and random stream.
#[derive(Debug, Clone)]
pub struct MarkovTraffic {
    params: MarkovParams,
    config: FrameConfig,
    current: SlotSet,
    rng: ChaCha8Rng,
}

impl MarkovTraffic {
    pub fn new(params: MarkovParams, config: FrameConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        params.validate(&config)?;
        let mut rng = traffic_rng(seed, &params);
        let current = initial_pattern(&params, &config, &mut rng);
        Ok(Self {
            params,
            config,
            current,
            rng,
        })
    }

    /// The most recently generated pattern (the initial pattern before the
    /// first call to [`MarkovTraffic::advance`]).
    pub fn current(&self) -> SlotSet {
        self.current
    }

    pub fn advance(&mut self) -> SlotSet {
        self.current = step_traffic(self.current, &self.params, &self.config, &mut self.rng)
            .expect("state stays within validated bounds");
        self.current
    }
}
