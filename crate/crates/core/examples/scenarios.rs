//! Prints reliability and eMBB efficiency for the two mismatched-predictor
//! scenarios (S = 12, L = 1, alpha = 0.1, gamma = 0.1, 2000 frames).

use urllc_core::{run_simulation, FrameConfig, MarkovParams, SchedulerKind, SimConfig};

fn main() -> urllc_core::Result<()> {
    for p_hat in [0.02, 0.40] {
        for kind in SchedulerKind::ALL {
            for seed in 1..=5 {
                let config = SimConfig {
                    frame: FrameConfig::new(12, 1, 0.1)?,
                    gamma_step: 0.1,
                    num_frames: 2000,
                    traffic: MarkovParams::new(0.16, 0.16, 0, 6),
                    predictor_params: MarkovParams::new(p_hat, p_hat, 0, 6),
                    scheduler_kind: kind,
                    seed,
                };
                let run = run_simulation(&config)?;
                let s = run.summary;
                println!(
                    "p_hat={p_hat:.2} {kind:<5} seed={seed} reliability={:.4} embb={:.4} trailing={:.3}",
                    s.reliability_rate, s.embb_efficiency, s.trailing_reliability
                );
            }
        }
    }
    Ok(())
}
