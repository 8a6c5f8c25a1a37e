//! Dynamic slot scheduling for URLLC traffic sharing frames with eMBB.
//!
//! A scheduler commits a set of slots to URLLC at the start of every frame,
//! guided by a probabilistic traffic predictor. The naive scheduler trusts
//! the predictor. The conformal scheduler adapts its per-frame risk target
//! from reliability feedback, so its long-run reliability meets the target
//! whatever the predictor's quality.

pub mod error;
pub mod frame;
pub mod harness;
pub mod predictor;
pub mod scheduler;
pub mod traffic;

pub use error::{Error, Result};
pub use frame::{
    embb_efficiency, l_covers, l_covers_oracle, reliability_indicator, reliability_rate,
    FrameConfig, FrameTrace, SimSummary, SlotSet,
};
pub use harness::{
    run_simulation, run_sweep, SchedulerKind, SimConfig, SimRun, SweepRow, SweepSpec,
};
pub use predictor::{predict_next, Feedback, MarkovPredictor, Predictor, SparseDistribution};
pub use scheduler::{
    build_gamma, cp_schedule_step, cp_update, greedy_allocate, naive_schedule_step, stretching,
    stretching_inverse, CpState, GammaSet,
};
pub use traffic::{initial_pattern, step_traffic, MarkovParams, MarkovTraffic};
