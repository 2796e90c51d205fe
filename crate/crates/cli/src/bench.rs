//! Paired-trial benchmark harness.
//!
//! Every trial draws its own instance and solver randomness from streams
//! keyed only by the trial id, so all detectors see identical instances
//! (common random numbers) and results are bit-identical for any worker
//! count. Trial outputs are reduced in trial order.

use std::time::Instant;

use hotml_core::solver::{gemm_solve, homotopy_solve};
use hotml_core::unfolded::{forward, NetworkParams};
use hotml_core::{
    baselines, build_context, lipschitz_bound, model::sgn, rng::stream_rng, ChannelSpec,
    DetectionMode, OpCounter, SolverConfig,
};

/// Streams per trial: instance noise/channel, then solver randomness.
const STREAMS_PER_TRIAL: u64 = 4;

#[derive(Clone, Debug)]
pub enum Detector {
    Zf,
    BoxRelax(SolverConfig),
    Exhaustive,
    Hotml(SolverConfig),
    /// Single penalized solve at `lambda = lambda_scale * L_f` (no
    /// homotopy continuation), for schedule ablations.
    FixedPenalty { lambda_scale: f64, cfg: SolverConfig },
    DeepHotml(NetworkParams),
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::Zf => "zf",
            Detector::BoxRelax(_) => "box",
            Detector::Exhaustive => "exhaustive",
            Detector::Hotml(_) => "hotml",
            Detector::FixedPenalty { .. } => "fixed-penalty",
            Detector::DeepHotml(_) => "deephotml",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub mode: DetectionMode,
    pub snr_db: f64,
    pub trials: u64,
    /// Additive noise-level mismatch fed to the one-bit objective.
    pub sigma0: f64,
    /// Multiplicative mismatch on the noise level reported to the
    /// detectors (1.0 = correctly known noise level).
    pub sigma_scale: f64,
    pub detectors: Vec<Detector>,
}

/// One aggregated CSV row per detector.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub detector: String,
    pub m: usize,
    pub n: usize,
    pub snr_db: f64,
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub flops: u64,
    pub phi_calls: u64,
    pub time_s: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct TrialOutcome {
    errors: u64,
    flops: u64,
    phi_calls: u64,
    time_s: f64,
}

fn bit_errors(x_hat: &[f64], x_true: &[f64]) -> u64 {
    x_hat
        .iter()
        .zip(x_true)
        .filter(|&(&a, &b)| sgn(a) != sgn(b))
        .count() as u64
}

fn run_trial(cfg: &ExperimentConfig, seed: u64, trial: u64) -> Vec<TrialOutcome> {
    let mut inst_rng = stream_rng(seed, trial * STREAMS_PER_TRIAL);
    let inst = hotml_core::model::synthesize_instance(&cfg.channel, cfg.snr_db, cfg.mode, &mut inst_rng)
        .expect("experiment channel spec must be valid");
    let n = inst.n();
    let mut reported = inst.clone();
    reported.sigma *= cfg.sigma_scale;
    let ctx = build_context(&reported, cfg.sigma0).expect("positive noise level");

    cfg.detectors
        .iter()
        .map(|det| {
            let mut counter = OpCounter::new();
            let mut solver_rng = stream_rng(seed, trial * STREAMS_PER_TRIAL + 1);
            let start = Instant::now();
            let result: Result<Vec<f64>, String> = match det {
                Detector::Zf => Ok(baselines::zf_detect(&reported).x_hat),
                Detector::BoxRelax(scfg) => baselines::box_relax_detect(&ctx, scfg, &mut counter)
                    .map(|r| r.x_hat)
                    .map_err(|e| e.to_string()),
                Detector::Exhaustive => baselines::exhaustive_ml(&ctx, &mut counter)
                    .map(|(x, _)| x)
                    .map_err(|e| e.to_string()),
                Detector::Hotml(scfg) => {
                    homotopy_solve(&ctx, scfg, None, &mut solver_rng, &mut counter)
                        .map(|r| r.x_hat)
                        .map_err(|e| e.to_string())
                }
                Detector::FixedPenalty { lambda_scale, cfg: scfg } => {
                    let lambda = lambda_scale * lipschitz_bound(&ctx);
                    let x0: Vec<f64> = (0..n)
                        .map(|_| rand::Rng::random_range(&mut solver_rng, -1.0..=1.0))
                        .collect();
                    gemm_solve(&ctx, lambda, &x0, scfg, &mut counter)
                        .map(|r| r.x.iter().map(|&v| sgn(v)).collect())
                        .map_err(|e| e.to_string())
                }
                Detector::DeepHotml(params) => forward(params, &reported, &ctx, &mut counter)
                    .map(|(x, _)| x.iter().map(|&v| sgn(v)).collect())
                    .map_err(|e| e.to_string()),
            };
            let time_s = start.elapsed().as_secs_f64();
            let errors = match result {
                Ok(x_hat) => bit_errors(&x_hat, &inst.x_true),
                Err(e) => {
                    eprintln!("trial {trial}: detector {} failed: {e}", det.name());
                    n as u64
                }
            };
            TrialOutcome { errors, flops: counter.flops, phi_calls: counter.phi_calls, time_s }
        })
        .collect()
}

/// Run all trials of an experiment, split across `workers` threads, and
/// aggregate per detector. The aggregation order is the trial order, so
/// the worker count never changes `errors`, `ber`, `flops`, or
/// `phi_calls`.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64, workers: usize) -> Vec<BenchmarkRow> {
    let workers = workers.max(1);
    let trials = cfg.trials;
    let per_trial: Vec<Vec<TrialOutcome>> = if workers == 1 || trials < 2 {
        (0..trials).map(|t| run_trial(cfg, seed, t)).collect()
    } else {
        let chunk = trials.div_ceil(workers as u64);
        let mut parts: Vec<(u64, Vec<Vec<TrialOutcome>>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(trials);
                    scope.spawn(move || {
                        (lo, (lo..hi).map(|t| run_trial(cfg, seed, t)).collect::<Vec<_>>())
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        parts.sort_by_key(|&(lo, _)| lo);
        parts.into_iter().flat_map(|(_, v)| v).collect()
    };

    let n = 2 * cfg.channel.n_c;
    let m = 2 * cfg.channel.m_c;
    cfg.detectors
        .iter()
        .enumerate()
        .map(|(d, det)| {
            let mut errors = 0u64;
            let mut flops = 0u64;
            let mut phi_calls = 0u64;
            let mut time_s = 0.0f64;
            for trial in &per_trial {
                let o = trial[d];
                errors += o.errors;
                flops += o.flops;
                phi_calls += o.phi_calls;
                time_s += o.time_s;
            }
            let bits = trials * n as u64;
            BenchmarkRow {
                detector: det.name().to_string(),
                m,
                n,
                snr_db: cfg.snr_db,
                errors,
                bits,
                ber: if bits == 0 { 0.0 } else { errors as f64 / bits as f64 },
                flops,
                phi_calls,
                time_s,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hotml_core::ChannelKind;

    fn small_experiment() -> ExperimentConfig {
        ExperimentConfig {
            channel: ChannelSpec { kind: ChannelKind::RayleighIid, m_c: 8, n_c: 2, seed: 0 },
            mode: DetectionMode::OneBit,
            snr_db: 15.0,
            trials: 12,
            sigma0: 0.5,
            sigma_scale: 1.0,
            detectors: vec![
                Detector::Zf,
                Detector::Hotml(SolverConfig::one_bit()),
                Detector::Exhaustive,
            ],
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small_experiment();
        let base = run_experiment(&cfg, 7, 1);
        for workers in [2, 3, 5] {
            let rows = run_experiment(&cfg, 7, workers);
            for (a, b) in base.iter().zip(&rows) {
                assert_eq!(a.errors, b.errors);
                assert_eq!(a.ber, b.ber);
                assert_eq!(a.flops, b.flops);
                assert_eq!(a.phi_calls, b.phi_calls);
                assert_eq!(a.detector, b.detector);
            }
        }
    }

    #[test]
    fn rows_carry_lifted_dimensions_and_bit_totals() {
        let cfg = small_experiment();
        let rows = run_experiment(&cfg, 3, 2);
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!((row.m, row.n), (16, 4));
            assert_eq!(row.bits, 12 * 4);
            assert!(row.ber <= 1.0);
        }
        // common random numbers: ML should not lose to ZF on these trials
        let zf = &rows[0];
        let ml = &rows[2];
        assert!(ml.errors <= zf.errors);
    }

    #[test]
    fn seed_changes_results_but_same_seed_repeats() {
        let cfg = small_experiment();
        let a = run_experiment(&cfg, 1, 2);
        let b = run_experiment(&cfg, 1, 4);
        assert_eq!(a[1].errors, b[1].errors);
        assert_eq!(a[1].flops, b[1].flops);
    }
}
