//! Probabilistic next-frame traffic predictors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, SlotSet};
use crate::traffic::MarkovParams;

/// Tolerance on the total mass of a normalized distribution.
pub const MASS_EPSILON: f64 = 1e-9;

/// Explicit probability table over slot patterns. Zero-mass patterns are
/// not stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseDistribution {
    entries: BTreeMap<SlotSet, f64>,
}

impl SparseDistribution {
    /// A normalized distribution: total mass within [`MASS_EPSILON`] of 1.
    pub fn new<I>(entries: I, config: &FrameConfig) -> Result<Self>
    where
        I: IntoIterator<Item = (SlotSet, f64)>,
    {
        let dist = Self::new_partial(entries, config)?;
        let total = dist.total_mass();
        if (total - 1.0).abs() > MASS_EPSILON {
            return Err(Error::Distribution(format!("total mass {total} is not 1")));
        }
        Ok(dist)
    }

    /// A possibly sub-normalized distribution (mass at most `1 + ε`), as
    /// produced by predictors that truncate their support.
    pub fn new_partial<I>(entries: I, config: &FrameConfig) -> Result<Self>
    where
        I: IntoIterator<Item = (SlotSet, f64)>,
    {
        let mut map = BTreeMap::new();
        for (pattern, prob) in entries {
            config.check(pattern)?;
            if !(prob.is_finite() && prob >= 0.0) {
                return Err(Error::Distribution(format!(
                    "probability {prob} for {pattern:?} is not a finite non-negative number"
                )));
            }
            if prob > 0.0 {
                *map.entry(pattern).or_insert(0.0) += prob;
            }
        }
        let dist = Self { entries: map };
        let total = dist.total_mass();
        if total > 1.0 + MASS_EPSILON {
            return Err(Error::Distribution(format!("total mass {total} exceeds 1")));
        }
        Ok(dist)
    }

    pub fn point_mass(pattern: SlotSet) -> Self {
        Self {
            entries: BTreeMap::from([(pattern, 1.0)]),
        }
    }

    pub fn prob(&self, pattern: SlotSet) -> f64 {
        self.entries.get(&pattern).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Support in ascending bit-encoding order.
    pub fn iter(&self) -> impl Iterator<Item = (SlotSet, f64)> + '_ {
        self.entries.iter().map(|(&s, &p)| (s, p))
    }
}

/// What the predictor learns at the end of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub allocated: SlotSet,
    pub generated: SlotSet,
    pub reliability: u8,
}

/// A traffic predictor: emits a distribution for the upcoming frame, then
/// ingests end-of-frame feedback. Implementations must be deterministic in
/// their feedback history.
pub trait Predictor {
    fn predict(&self) -> Result<SparseDistribution>;

    fn observe(&mut self, feedback: &Feedback);
}

/// One-step transition law of the Markov traffic model from `observed_prev`.
pub fn predict_next(
    observed_prev: SlotSet,
    params_hat: &MarkovParams,
    config: &FrameConfig,
) -> Result<SparseDistribution> {
    config.check(observed_prev)?;
    params_hat.check_len(observed_prev)?;

    let len = observed_prev.len();
    let full = config.full_set();
    let mut stay = 1.0 - params_hat.p_plus - params_hat.p_minus;
    let mut entries = Vec::with_capacity(config.num_slots + 1);

    if len < params_hat.g_max {
        let each = params_hat.p_plus / (config.num_slots - len) as f64;
        let free = SlotSet::from_bits(full.bits() & !observed_prev.bits());
        entries.extend(free.iter().map(|s| (observed_prev.with(s), each)));
    } else {
        stay += params_hat.p_plus;
    }
    if len > params_hat.g_min {
        let each = params_hat.p_minus / len as f64;
        entries.extend(
            observed_prev
                .iter()
                .map(|s| (observed_prev.without(s), each)),
        );
    } else {
        stay += params_hat.p_minus;
    }
    entries.push((observed_prev, stay));

    SparseDistribution::new(entries, config)
}

/// Markov-model predictor with (possibly mismatched) walk probabilities.
/// It tracks the chain state through full-pattern feedback.
#[derive(Debug, Clone)]
pub struct MarkovPredictor {
    params: MarkovParams,
    config: FrameConfig,
    state: SlotSet,
}

impl MarkovPredictor {
    pub fn new(params: MarkovParams, config: FrameConfig, initial: SlotSet) -> Result<Self> {
        params.validate(&config)?;
        config.check(initial)?;
        params.check_len(initial)?;
        Ok(Self {
            params,
            config,
            state: initial,
        })
    }

    pub fn state(&self) -> SlotSet {
        self.state
    }
}

impl Predictor for MarkovPredictor {
    fn predict(&self) -> Result<SparseDistribution> {
        predict_next(self.state, &self.params, &self.config)
    }

    fn observe(&mut self, feedback: &Feedback) {
        self.state = feedback.generated;
    }
}
