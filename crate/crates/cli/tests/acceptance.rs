//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.
//!
//! Run with `cargo test --release -p urllc-cli --test acceptance`.

use std::fs;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urllc_cli::{cmd_run, OutputPaths};
use urllc_core::scheduler::COVERAGE_SLACK;
use urllc_core::{
    build_gamma, greedy_allocate, l_covers, l_covers_oracle, run_simulation, run_sweep, stretching,
    stretching_inverse, FrameConfig, MarkovParams, SchedulerKind, SimConfig, SlotSet,
    SparseDistribution, SweepSpec,
};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn fmt_all(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fig1_config(p_hat: f64, kind: SchedulerKind, seed: u64) -> SimConfig {
    SimConfig {
        frame: FrameConfig::new(12, 1, 0.1).unwrap(),
        gamma_step: 0.1,
        num_frames: 2000,
        traffic: MarkovParams::new(0.16, 0.16, 0, 6),
        predictor_params: MarkovParams::new(p_hat, p_hat, 0, 6),
        scheduler_kind: kind,
        seed,
    }
}

/// (reliability, efficiency) per seed.
fn fig1_runs(p_hat: f64, kind: SchedulerKind) -> (Vec<f64>, Vec<f64>) {
    SEEDS
        .iter()
        .map(|&seed| {
            let s = run_simulation(&fig1_config(p_hat, kind, seed))
                .unwrap()
                .summary;
            (s.reliability_rate, s.embb_efficiency)
        })
        .unzip()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn cp_coverage_guarantee() -> Outcome {
    let alpha = 0.01;
    let gamma = 0.05;
    let frames = 4000;
    let grid = vec![0.02, 0.08, 0.16, 0.24, 0.32, 0.40];
    let bound = (1.0 + 2.0 * gamma) / (gamma * frames as f64);
    let spec = SweepSpec {
        base: SimConfig {
            frame: FrameConfig::new(12, 1, alpha).unwrap(),
            gamma_step: gamma,
            num_frames: frames,
            traffic: MarkovParams::new(0.0, 0.0, 0, 6),
            predictor_params: MarkovParams::new(0.0, 0.0, 0, 6),
            scheduler_kind: SchedulerKind::Cp,
            seed: 0,
        },
        p_grid: grid.clone(),
        p_hat_grid: grid.clone(),
        seeds: SEEDS.to_vec(),
    };
    let rows = run_sweep(&spec).unwrap();
    let cp: Vec<_> = rows
        .iter()
        .filter(|r| r.scheduler == SchedulerKind::Cp)
        .collect();
    let worst = cp
        .iter()
        .map(|r| (r.reliability_rate - (1.0 - alpha)).abs())
        .fold(0.0, f64::max);
    let violations = cp
        .iter()
        .filter(|r| (r.reliability_rate - (1.0 - alpha)).abs() > bound)
        .count();

    // Threshold excursions and the telescoping identity behind the bound.
    let mut excursions = 0;
    let mut telescoping = 0;
    for r in &cp {
        let run = run_simulation(&spec.cell(r.p, r.p_hat, SchedulerKind::Cp, r.seed)).unwrap();
        let thetas = run
            .traces
            .iter()
            .map(|t| t.theta_f)
            .chain([run.final_theta]);
        excursions += thetas.filter(|t| *t < -gamma || *t > 1.0 + gamma).count();
        let lhs = run.final_theta - run.initial_theta;
        let rhs = gamma * frames as f64 * (run.summary.reliability_rate - (1.0 - alpha));
        if (lhs - rhs).abs() > 1e-9 * rhs.abs().max(1.0) {
            telescoping += 1;
        }
    }

    outcome(
        cp.len() == grid.len() * grid.len() * SEEDS.len()
            && violations == 0
            && excursions == 0
            && telescoping == 0,
        format!(
            "{} cp rows, worst |rho - 0.99| = {worst:.5} (bound {bound:.5}), {violations} violations, \
             {excursions} theta excursions, {telescoping} telescoping mismatches",
            cp.len()
        ),
    )
}

fn underestimation_scenario() -> Outcome {
    let (naive, _) = fig1_runs(0.02, SchedulerKind::Naive);
    let (cp, _) = fig1_runs(0.02, SchedulerKind::Cp);
    let naive_ok = within(mean(&naive), 0.82, 0.05);
    let cp_ok = cp.iter().all(|&r| within(r, 0.90, 0.01));
    outcome(
        naive_ok && cp_ok,
        format!(
            "naive mean {:.4} (per seed {}), target 0.82 +- 0.05; cp per seed {}, target 0.90 +- 0.01",
            mean(&naive),
            fmt_all(&naive),
            fmt_all(&cp)
        ),
    )
}

fn overestimation_scenario() -> Outcome {
    let (naive_r, naive_e) = fig1_runs(0.40, SchedulerKind::Naive);
    let (cp_r, cp_e) = fig1_runs(0.40, SchedulerKind::Cp);
    let ok = within(mean(&naive_r), 0.98, 0.02)
        && within(mean(&naive_e), 0.45, 0.05)
        && cp_r.iter().all(|&r| within(r, 0.90, 0.01))
        && within(mean(&cp_e), 0.66, 0.05)
        && cp_e.iter().zip(&naive_e).all(|(c, n)| c > n);
    outcome(
        ok,
        format!(
            "naive rho mean {:.4} ({}), eta mean {:.4} ({}); cp rho ({}), eta mean {:.4} ({})",
            mean(&naive_r),
            fmt_all(&naive_r),
            mean(&naive_e),
            fmt_all(&naive_e),
            fmt_all(&cp_r),
            mean(&cp_e),
            fmt_all(&cp_e)
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut cases = 0u64;
    let mut mismatches = 0u64;
    for s in 1..=6usize {
        let n = 1u64 << s;
        for u in 0..n {
            for g in 0..n {
                for l in 0..=2 {
                    let (u, g) = (SlotSet::from_bits(u), SlotSet::from_bits(g));
                    cases += 1;
                    if l_covers(u, g, l) != l_covers_oracle(u, g, l) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{cases} cases, {mismatches} mismatches"),
    )
}

fn greedy_coverage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5107);
    let trials = 20_000;
    let mut violations = 0;
    for _ in 0..trials {
        let s = rng.gen_range(1..=12);
        let l = rng.gen_range(0..=2);
        let mask = SlotSet::full(s).bits();
        let n = rng.gen_range(0..=8);
        let gamma: Vec<SlotSet> = (0..n)
            .map(|_| SlotSet::from_bits(rng.gen::<u64>() & mask))
            .collect();
        let u = greedy_allocate(&gamma, l, s);
        violations += gamma.iter().filter(|g| !l_covers(u, **g, l)).count();
    }
    outcome(
        violations == 0,
        format!("{trials} random sets, {violations} violations"),
    )
}

fn gamma_and_stretching() -> Outcome {
    let config = FrameConfig::new(12, 1, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a77);
    let trials = 10_000;
    let mut failures = 0;
    for _ in 0..trials {
        let support = rng.gen_range(1..=40);
        let weights: Vec<(SlotSet, f64)> = (0..support)
            .map(|_| {
                (
                    SlotSet::from_bits(rng.gen_range(0..4096)),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        let dist =
            SparseDistribution::new(weights.into_iter().map(|(s, w)| (s, w / total)), &config)
                .unwrap();
        let alpha = rng.gen_range(0.0..=1.0);
        let g = build_gamma(&dist, alpha);
        let reached = g.covered_mass + COVERAGE_SLACK >= 1.0 - alpha;
        let minimal = match g.patterns.split_last() {
            Some((_, rest)) => {
                rest.iter().map(|p| dist.prob(*p)).sum::<f64>() + COVERAGE_SLACK < 1.0 - alpha
            }
            None => true,
        };
        if g.shortfall || !reached || !minimal {
            failures += 1;
        }
    }

    let mut worst_round_trip = 0.0f64;
    for i in 0..=100_000 {
        let alpha = i as f64 / 100_000.0;
        let back = stretching(stretching_inverse(alpha).unwrap());
        worst_round_trip = worst_round_trip.max((back - alpha).abs());
    }
    let exact = stretching(0.0) == 0.0 && stretching(0.5) == 0.5 && stretching(1.0) == 1.0;
    outcome(
        failures == 0 && worst_round_trip <= 1e-12 && exact,
        format!(
            "{trials} distributions, {failures} prefix failures; worst round trip {worst_round_trip:.1e}; \
             phi(0), phi(0.5), phi(1) exact: {exact}"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        serde_json::to_string(&fig1_config(0.4, SchedulerKind::Cp, 17)).unwrap(),
    )
    .unwrap();
    let outputs = |tag: &str| OutputPaths {
        trace_path: dir.path().join(format!("{tag}/trace.csv")),
        summary_path: dir.path().join(format!("{tag}/summary.json")),
    };
    let (a, b) = (outputs("a"), outputs("b"));
    cmd_run(&config, Some(99), &a).unwrap();
    cmd_run(&config, Some(99), &b).unwrap();
    let same_trace = fs::read(&a.trace_path).unwrap() == fs::read(&b.trace_path).unwrap();
    let same_summary = fs::read(&a.summary_path).unwrap() == fs::read(&b.summary_path).unwrap();
    outcome(
        same_trace && same_summary,
        format!("trace identical: {same_trace}, summary identical: {same_summary}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 7] = [
        (
            "AC1 conformal coverage guarantee over the mismatch sweep",
            cp_coverage_guarantee,
        ),
        (
            "AC2 underestimating predictor scenario",
            underestimation_scenario,
        ),
        (
            "AC3 overestimating predictor scenario",
            overestimation_scenario,
        ),
        (
            "AC4 l_covers agrees with exhaustive oracle",
            oracle_equivalence,
        ),
        (
            "AC5 greedy allocation covers every selected pattern",
            greedy_coverage,
        ),
        (
            "AC6 prediction-set minimality and stretching identities",
            gamma_and_stretching,
        ),
        (
            "AC7 run command is byte-for-byte deterministic",
            cli_determinism,
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
