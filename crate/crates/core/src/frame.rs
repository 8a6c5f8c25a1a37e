//! Frame and slot domain types.
//!
//! A frame holds `S` slots numbered `1..=S`. Slot subsets are stored as a
//! single `u64` with slot `i` mapped to bit `i - 1`, which caps `S` at 64.
//!
//! The central relation is *L-cover*: an allocation `U` L-covers a generated
//! pattern `G` when every packet `g` in `G` can be matched to a distinct
//! allocated slot `u` with `g <= u <= g + L`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest frame size representable by [`SlotSet`].
pub const MAX_SLOTS: usize = 64;

/// Static description of a frame: slot count, latency budget and the
/// long-run unreliability target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub num_slots: usize,
    pub latency: usize,
    pub target_unreliability: f64,
}

impl FrameConfig {
    pub fn new(num_slots: usize, latency: usize, target_unreliability: f64) -> Result<Self> {
        let config = Self {
            num_slots,
            latency,
            target_unreliability,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_slots == 0 || self.num_slots > MAX_SLOTS {
            return Err(Error::config(format!(
                "num_slots must be in 1..={MAX_SLOTS}, got {}",
                self.num_slots
            )));
        }
        let alpha = self.target_unreliability;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::config(format!(
                "target_unreliability must be in (0, 1), got {alpha}"
            )));
        }
        Ok(())
    }

    /// Every slot of the frame.
    pub fn full_set(&self) -> SlotSet {
        SlotSet::full(self.num_slots)
    }

    /// Checks that all members of `set` are slots of this frame.
    pub fn check(&self, set: SlotSet) -> Result<()> {
        match set.max() {
            Some(m) if m > self.num_slots => Err(Error::SlotOutOfRange {
                slot: m,
                num_slots: self.num_slots,
            }),
            _ => Ok(()),
        }
    }
}

/// A subset of `{1, ..., 64}`.
///
/// Ordering and hashing follow the compact bit encoding, so sorting
/// slot sets sorts them by [`SlotSet::bits`].
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotSet(u64);

impl SlotSet {
    pub const EMPTY: SlotSet = SlotSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        SlotSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_SLOTS, "frame size {n} exceeds {MAX_SLOTS}");
        if n == MAX_SLOTS {
            SlotSet(u64::MAX)
        } else {
            SlotSet((1u64 << n) - 1)
        }
    }

    /// Builds a set from 1-based slot indices. Duplicates collapse.
    pub fn from_slots<I: IntoIterator<Item = usize>>(slots: I) -> Result<Self> {
        let mut bits = 0u64;
        for s in slots {
            if s == 0 || s > MAX_SLOTS {
                return Err(Error::SlotOutOfRange {
                    slot: s,
                    num_slots: MAX_SLOTS,
                });
            }
            bits |= 1 << (s - 1);
        }
        Ok(SlotSet(bits))
    }

    pub fn contains(self, slot: usize) -> bool {
        (1..=MAX_SLOTS).contains(&slot) && self.0 & (1 << (slot - 1)) != 0
    }

    pub fn insert(&mut self, slot: usize) {
        assert!((1..=MAX_SLOTS).contains(&slot), "slot {slot} out of range");
        self.0 |= 1 << (slot - 1);
    }

    pub fn remove(&mut self, slot: usize) {
        if (1..=MAX_SLOTS).contains(&slot) {
            self.0 &= !(1 << (slot - 1));
        }
    }

    pub fn with(mut self, slot: usize) -> Self {
        self.insert(slot);
        self
    }

    pub fn without(mut self, slot: usize) -> Self {
        self.remove(slot);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }

    pub fn union(self, other: SlotSet) -> SlotSet {
        SlotSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SlotSet) -> SlotSet {
        SlotSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: SlotSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> SlotIter {
        SlotIter(self.0)
    }
}

impl fmt::Debug for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Semicolon-separated ascending slot indices; empty for the empty set.
impl fmt::Display for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl IntoIterator for SlotSet {
    type Item = usize;
    type IntoIter = SlotIter;

    fn into_iter(self) -> SlotIter {
        self.iter()
    }
}

pub struct SlotIter(u64);

impl Iterator for SlotIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for SlotIter {}

/// Bits for slots `lo..=hi` (1-based, both inclusive, clamped to 64).
pub(crate) fn window_mask(lo: usize, hi: usize) -> u64 {
    let lo = lo.max(1);
    let hi = hi.min(MAX_SLOTS);
    if lo > hi {
        return 0;
    }
    let width = hi - lo + 1;
    let ones = if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    ones << (lo - 1)
}

/// Whether `allocated` L-covers `generated`.
///
/// Packets are visited in increasing slot order and each takes the smallest
/// free allocated slot in `[g, g + L]`. All windows have the same length, so
/// this earliest-deadline matching is exact.
pub fn l_covers(allocated: SlotSet, generated: SlotSet, latency: usize) -> bool {
    if generated.len() > allocated.len() {
        return false;
    }
    let mut free = allocated.bits();
    for g in generated.iter() {
        let candidates = free & window_mask(g, g.saturating_add(latency));
        if candidates == 0 {
            return false;
        }
        free &= !(candidates & candidates.wrapping_neg());
    }
    true
}

/// Exhaustive reference for [`l_covers`]: tries every injective assignment
/// of packets to allocated slots. Exponential; meant for small test cases.
pub fn l_covers_oracle(allocated: SlotSet, generated: SlotSet, latency: usize) -> bool {
    fn assign(packets: &[usize], slots: &[usize], used: &mut [bool], latency: usize) -> bool {
        let Some((&g, rest)) = packets.split_first() else {
            return true;
        };
        for (i, &u) in slots.iter().enumerate() {
            if used[i] || u < g || u - g > latency {
                continue;
            }
            used[i] = true;
            let ok = assign(rest, slots, used, latency);
            used[i] = false;
            if ok {
                return true;
            }
        }
        false
    }

    let packets: Vec<usize> = generated.iter().collect();
    let slots: Vec<usize> = allocated.iter().collect();
    let mut used = vec![false; slots.len()];
    assign(&packets, &slots, &mut used, latency)
}

/// Per-frame reliability: 1 when `allocated` L-covers `generated`, else 0.
pub fn reliability_indicator(allocated: SlotSet, generated: SlotSet, latency: usize) -> u8 {
    u8::from(l_covers(allocated, generated, latency))
}

/// Record of one simulated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrace {
    pub frame_index: usize,
    pub generated: SlotSet,
    pub allocated: SlotSet,
    pub reliability: u8,
    /// Unreliability target used to build the prediction set.
    pub alpha_f: f64,
    /// Calibration threshold in force during the frame.
    pub theta_f: f64,
    pub allocated_count: usize,
}

impl FrameTrace {
    pub fn new(
        frame_index: usize,
        generated: SlotSet,
        allocated: SlotSet,
        latency: usize,
        alpha_f: f64,
        theta_f: f64,
    ) -> Self {
        Self {
            frame_index,
            generated,
            allocated,
            reliability: reliability_indicator(allocated, generated, latency),
            alpha_f,
            theta_f,
            allocated_count: allocated.len(),
        }
    }
}

/// Aggregate metrics over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    #[serde(rename = "frames")]
    pub num_frames: usize,
    pub reliability_rate: f64,
    pub embb_efficiency: f64,
    #[serde(rename = "trailing_200_reliability")]
    pub trailing_reliability: f64,
}

/// Number of trailing frames averaged into [`SimSummary::trailing_reliability`].
pub const TRAILING_WINDOW: usize = 200;

impl SimSummary {
    pub fn from_traces(traces: &[FrameTrace], num_slots: usize) -> Result<Self> {
        let tail = &traces[traces.len().saturating_sub(TRAILING_WINDOW)..];
        Ok(Self {
            num_frames: traces.len(),
            reliability_rate: reliability_rate(traces)?,
            embb_efficiency: embb_efficiency(traces, num_slots)?,
            trailing_reliability: reliability_rate(tail)?,
        })
    }
}

/// Fraction of frames whose allocation covered the generated packets.
pub fn reliability_rate(traces: &[FrameTrace]) -> Result<f64> {
    if traces.is_empty() {
        return Err(Error::NoFrames);
    }
    let hits: u64 = traces.iter().map(|t| u64::from(t.reliability)).sum();
    Ok(hits as f64 / traces.len() as f64)
}

/// Fraction of slots left over for eMBB traffic.
pub fn embb_efficiency(traces: &[FrameTrace], num_slots: usize) -> Result<f64> {
    if traces.is_empty() {
        return Err(Error::NoFrames);
    }
    let used: usize = traces.iter().map(|t| t.allocated_count).sum();
    Ok(1.0 - used as f64 / (traces.len() * num_slots) as f64)
}
