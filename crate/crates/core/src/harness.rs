//! Simulation loop and parameter sweeps.
//!
//! Within a frame the order is fixed: the predictor emits its distribution,
//! the scheduler commits an allocation, the traffic for the frame is
//! revealed, the frame is scored, and finally the scheduler and predictor
//! receive feedback.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, FrameTrace, SimSummary};
use crate::predictor::{Feedback, MarkovPredictor, Predictor};
use crate::scheduler::{
    cp_schedule_step, cp_update, naive_schedule_step, stretching_inverse, CpState,
};
use crate::traffic::{MarkovParams, MarkovTraffic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Naive,
    Cp,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 2] = [SchedulerKind::Naive, SchedulerKind::Cp];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Naive => "naive",
            SchedulerKind::Cp => "cp",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub frame: FrameConfig,
    pub gamma_step: f64,
    pub num_frames: usize,
    pub traffic: MarkovParams,
    pub predictor_params: MarkovParams,
    pub scheduler_kind: SchedulerKind,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        if self.num_frames == 0 {
            return Err(Error::config("num_frames must be at least 1"));
        }
        if !(self.gamma_step > 0.0 && self.gamma_step.is_finite()) {
            return Err(Error::config(format!(
                "gamma_step must be > 0, got {}",
                self.gamma_step
            )));
        }
        self.traffic.validate(&self.frame)?;
        self.predictor_params.validate(&self.frame)?;
        if (self.traffic.g_min, self.traffic.g_max)
            != (self.predictor_params.g_min, self.predictor_params.g_max)
        {
            return Err(Error::config(
                "predictor_params must share g_min and g_max with traffic",
            ));
        }
        Ok(())
    }
}

/// Output of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub traces: Vec<FrameTrace>,
    pub summary: SimSummary,
    /// Threshold before the first frame.
    pub initial_theta: f64,
    /// Threshold after the last update. Equal to `initial_theta` for the
    /// naive scheduler, which never updates.
    pub final_theta: f64,
}

enum Scheduler {
    Naive { theta: f64 },
    Cp(CpState),
}

pub fn run_simulation(config: &SimConfig) -> Result<SimRun> {
    config.validate()?;
    let frame = config.frame;

    let mut traffic = MarkovTraffic::new(config.traffic, frame, config.seed)?;
    let mut predictor = MarkovPredictor::new(config.predictor_params, frame, traffic.current())?;
    let mut scheduler = match config.scheduler_kind {
        SchedulerKind::Naive => Scheduler::Naive {
            theta: stretching_inverse(frame.target_unreliability)?,
        },
        SchedulerKind::Cp => {
            Scheduler::Cp(CpState::new(frame.target_unreliability, config.gamma_step)?)
        }
    };
    let initial_theta = match &scheduler {
        Scheduler::Naive { theta } => *theta,
        Scheduler::Cp(state) => state.theta,
    };

    let mut traces = Vec::with_capacity(config.num_frames);
    for f in 1..=config.num_frames {
        let dist = predictor.predict()?;
        let (allocated, alpha_f, theta_f) = match &scheduler {
            Scheduler::Naive { theta } => (
                naive_schedule_step(&dist, &frame),
                frame.target_unreliability,
                *theta,
            ),
            Scheduler::Cp(state) => {
                let (u, a) = cp_schedule_step(state, &dist, &frame);
                (u, a, state.theta)
            }
        };
        let generated = traffic.advance();
        let trace = FrameTrace::new(f, generated, allocated, frame.latency, alpha_f, theta_f);
        if let Scheduler::Cp(state) = &mut scheduler {
            *state = cp_update(*state, trace.reliability);
        }
        predictor.observe(&Feedback {
            allocated,
            generated,
            reliability: trace.reliability,
        });
        traces.push(trace);
    }

    let final_theta = match &scheduler {
        Scheduler::Naive { theta } => *theta,
        Scheduler::Cp(state) => state.theta,
    };
    Ok(SimRun {
        summary: SimSummary::from_traces(&traces, frame.num_slots)?,
        traces,
        initial_theta,
        final_theta,
    })
}

/// Grid of ground-truth `p` (with `p_plus = p_minus = p`) against predictor
/// `p_hat`, for both schedulers and every seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub p_grid: Vec<f64>,
    pub p_hat_grid: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("p_grid", &self.p_grid), ("p_hat_grid", &self.p_hat_grid)] {
            if grid.is_empty() {
                return Err(Error::config(format!("{name} is empty")));
            }
            if let Some(v) = grid.iter().find(|v| !(0.0..=0.5).contains(*v)) {
                return Err(Error::config(format!("{name} value {v} outside [0, 0.5]")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::config("no seeds"));
        }
        Ok(())
    }

    /// Configuration for one cell of the grid.
    pub fn cell(&self, p: f64, p_hat: f64, scheduler: SchedulerKind, seed: u64) -> SimConfig {
        SimConfig {
            traffic: self.base.traffic.with_probs(p, p),
            predictor_params: self.base.predictor_params.with_probs(p_hat, p_hat),
            scheduler_kind: scheduler,
            seed,
            ..self.base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub p_hat: f64,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub reliability_rate: f64,
    pub embb_efficiency: f64,
    /// `theta` after the last frame minus `theta` before the first.
    pub theta_drift: f64,
}

/// Runs every cell of the sweep in parallel. Rows come back sorted by
/// `(p, p_hat, scheduler name, seed)`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &p in &spec.p_grid {
        for &p_hat in &spec.p_hat_grid {
            for kind in SchedulerKind::ALL {
                for &seed in &spec.seeds {
                    cells.push((p, p_hat, kind, seed));
                }
            }
        }
    }

    let mut rows = cells
        .into_par_iter()
        .map(|(p, p_hat, scheduler, seed)| {
            let run =
                run_simulation(&spec.cell(p, p_hat, scheduler, seed)).map_err(|e| Error::Cell {
                    p,
                    p_hat,
                    scheduler: scheduler.as_str(),
                    seed,
                    source: Box::new(e),
                })?;
            Ok(SweepRow {
                p,
                p_hat,
                scheduler,
                seed,
                reliability_rate: run.summary.reliability_rate,
                embb_efficiency: run.summary.embb_efficiency,
                theta_drift: run.final_theta - run.initial_theta,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    rows.sort_by(|a, b| {
        a.p.total_cmp(&b.p)
            .then(a.p_hat.total_cmp(&b.p_hat))
            .then(a.scheduler.as_str().cmp(b.scheduler.as_str()))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}
