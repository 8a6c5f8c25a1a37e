//! Prediction-set construction, greedy slot allocation and the two
//! schedulers built on top of them.
//!
//! Both schedulers pick the smallest set of likely traffic patterns whose
//! predicted mass reaches `1 - alpha_f` and allocate slots that L-cover every
//! pattern in that set. The naive scheduler keeps `alpha_f` fixed at the
//! target. The conformal scheduler drives `alpha_f = stretching(theta)` and
//! moves `theta` after each frame according to the observed reliability:
//!
//! ```text
//! theta <- theta + gamma * (r - (1 - alpha))
//! ```
//!
//! Summing the update over `F` frames gives
//! `theta_{F+1} - theta_1 = gamma * F * (rho - (1 - alpha))`, so the
//! long-run reliability error shrinks as `O(1/F)` whenever `theta` stays
//! bounded.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::frame::{window_mask, FrameConfig, SlotSet};
use crate::predictor::SparseDistribution;

/// Slack when comparing cumulative mass against `1 - alpha_f`, absorbing
/// rounding in sums of probabilities.
pub const COVERAGE_SLACK: f64 = 1e-12;

/// Selected traffic patterns, in selection order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GammaSet {
    pub patterns: Vec<SlotSet>,
    pub covered_mass: f64,
    /// Set when the whole support falls short of `1 - alpha_f`.
    pub shortfall: bool,
}

/// Shortest prefix of the support, sorted by decreasing probability, whose
/// mass reaches `1 - alpha_f`. Equal probabilities are ordered by ascending
/// bit encoding.
pub fn build_gamma(dist: &SparseDistribution, alpha_f: f64) -> GammaSet {
    let required = 1.0 - alpha_f;
    let mut gamma = GammaSet::default();
    if reaches(0.0, required) {
        return gamma;
    }

    let mut support: Vec<(SlotSet, f64)> = dist.iter().collect();
    support.sort_by(selection_order);

    for (pattern, prob) in support {
        gamma.patterns.push(pattern);
        gamma.covered_mass += prob;
        if reaches(gamma.covered_mass, required) {
            return gamma;
        }
    }
    gamma.shortfall = true;
    gamma
}

fn reaches(mass: f64, required: f64) -> bool {
    mass + COVERAGE_SLACK >= required
}

/// Greedy backward slot allocation.
///
/// Walks slots from `S` down to 1 over working copies of the patterns. A slot
/// still present in any working pattern is allocated, and each pattern then
/// drops its largest packet within the last `L + 1` slots. The result
/// L-covers every input pattern.
pub fn greedy_allocate(patterns: &[SlotSet], latency: usize, num_slots: usize) -> SlotSet {
    let mut work: Vec<u64> = patterns.iter().map(|p| p.bits()).collect();
    let mut allocated = SlotSet::EMPTY;
    for s in (1..=num_slots).rev() {
        let bit = 1u64 << (s - 1);
        if work.iter().all(|g| g & bit == 0) {
            continue;
        }
        allocated.insert(s);
        let window = window_mask(s.saturating_sub(latency), s);
        for g in work.iter_mut() {
            let hit = *g & window;
            if hit != 0 {
                *g &= !(1u64 << (63 - hit.leading_zeros()));
            }
        }
    }
    allocated
}

/// Sine stretching function mapping the threshold to the per-frame target
/// unreliability: `(1 + sin(pi * (clip(theta, 0, 1) - 0.5))) / 2`.
pub fn stretching(theta: f64) -> f64 {
    let t = theta.clamp(0.0, 1.0);
    0.5 * (1.0 + (PI * (t - 0.5)).sin())
}

/// The `theta` in `[0, 1]` with `stretching(theta) == alpha`.
pub fn stretching_inverse(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(0.5 + (2.0 * alpha - 1.0).asin() / PI)
}

/// Calibration state of the conformal scheduler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpState {
    /// Stored unclipped; only [`stretching`] clips.
    pub theta: f64,
    pub alpha_target: f64,
    pub gamma_step: f64,
}

impl CpState {
    /// Starts at `theta = stretching_inverse(alpha_target)`.
    pub fn new(alpha_target: f64, gamma_step: f64) -> Result<Self> {
        if !(alpha_target > 0.0 && alpha_target < 1.0) {
            return Err(Error::config(format!(
                "alpha must be in (0, 1), got {alpha_target}"
            )));
        }
        if !(gamma_step > 0.0 && gamma_step.is_finite()) {
            return Err(Error::config(format!(
                "gamma must be > 0, got {gamma_step}"
            )));
        }
        Ok(Self {
            theta: stretching_inverse(alpha_target)?,
            alpha_target,
            gamma_step,
        })
    }

    pub fn alpha_f(&self) -> f64 {
        stretching(self.theta)
    }
}

pub fn cp_update(state: CpState, reliability: u8) -> CpState {
    debug_assert!(reliability <= 1);
    CpState {
        theta: state.theta
            + state.gamma_step * (f64::from(reliability) - (1.0 - state.alpha_target)),
        ..state
    }
}

/// Allocation of the naive scheduler, which trusts the predictor and uses the
/// configured target every frame.
pub fn naive_schedule_step(dist: &SparseDistribution, config: &FrameConfig) -> SlotSet {
    let gamma = build_gamma(dist, config.target_unreliability);
    greedy_allocate(&gamma.patterns, config.latency, config.num_slots)
}

/// Allocation of the conformal scheduler for the current threshold. The
/// caller feeds the frame's reliability back through [`cp_update`].
pub fn cp_schedule_step(
    state: &CpState,
    dist: &SparseDistribution,
    config: &FrameConfig,
) -> (SlotSet, f64) {
    let alpha_f = state.alpha_f();
    let gamma = build_gamma(dist, alpha_f);
    (
        greedy_allocate(&gamma.patterns, config.latency, config.num_slots),
        alpha_f,
    )
}

fn selection_order(a: &(SlotSet, f64), b: &(SlotSet, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}
