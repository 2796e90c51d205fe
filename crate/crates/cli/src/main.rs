use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hotml_cli::bench::{run_experiment, Detector, ExperimentConfig};
use hotml_cli::config::load_experiment;
use hotml_cli::report::write_csv;
use hotml_core::baselines::exhaustive_ml;
use hotml_core::model::synthesize_instance;
use hotml_core::rng::stream_rng;
use hotml_core::solver::{dual_curve, DualOracle};
use hotml_core::unfolded::{
    backward, decode_params, encode_params, forward, init_params, train, TrainConfig,
};
use hotml_core::{
    build_context, lipschitz_bound, ChannelKind, ChannelSpec, DetectionMode, OpCounter,
    SolverConfig,
};

#[derive(Parser)]
#[command(name = "hotml", about = "Homotopy and deep-unfolded MIMO detection", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    OneBit,
    Classical,
}

impl From<ModeArg> for DetectionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::OneBit => DetectionMode::OneBit,
            ModeArg::Classical => DetectionMode::Classical,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo benchmark described by a config file; emit CSV.
    Simulate {
        /// Experiment config file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train a deep-unfolded detector and save its parameters.
    Train {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Complex receive antennas.
        #[arg(long)]
        mc: usize,
        /// Complex transmit antennas.
        #[arg(long)]
        nc: usize,
        /// Network depth (number of unrolled iterations).
        #[arg(long, default_value_t = 10)]
        layers: usize,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = 500)]
        batch: usize,
        /// Training SNR range lower edge in dB (default per mode).
        #[arg(long)]
        snr_lo: Option<f64>,
        /// Training SNR range upper edge in dB (default per mode).
        #[arg(long)]
        snr_hi: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output parameter file.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-iteration loss log (one value per line).
        #[arg(long)]
        loss_log: Option<PathBuf>,
    },
    /// Benchmark a trained detector against the homotopy solver.
    Eval {
        /// Parameter file produced by `train`.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        snr_db: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Measure the duality gap of small one-bit instances by brute force.
    CheckDuality {
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 4)]
        mc: usize,
        #[arg(long, default_value_t = 2)]
        nc: usize,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        /// Points per dimension of the primal grid.
        #[arg(long, default_value_t = 81)]
        grid: usize,
        /// Number of penalty values between 0 and twice the gradient
        /// Lipschitz bound.
        #[arg(long, default_value_t = 200)]
        lambda_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check network gradients against central finite differences.
    Gradcheck {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 8)]
        mc: usize,
        #[arg(long, default_value_t = 4)]
        nc: usize,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum tolerated relative error.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// CSV output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit_rows(run: &RunArgs, rows: &[hotml_cli::bench::BenchmarkRow]) -> Result<(), String> {
    match &run.out {
        Some(path) => {
            let mut f = fs::File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            write_csv(&mut f, rows).map_err(|e| e.to_string())
        }
        None => write_csv(&mut std::io::stdout().lock(), rows).map_err(|e| e.to_string()),
    }
}

fn cmd_check_duality(
    instances: usize,
    mc: usize,
    nc: usize,
    snr_db: f64,
    grid: usize,
    lambda_points: usize,
    seed: u64,
) -> Result<(), String> {
    let spec = ChannelSpec { kind: ChannelKind::RayleighIid, m_c: mc, n_c: nc, seed };
    let mut worst = 0.0f64;
    for i in 0..instances {
        let mut rng = stream_rng(seed, i as u64);
        let inst = synthesize_instance(&spec, snr_db, DetectionMode::OneBit, &mut rng)
            .map_err(|e| e.to_string())?;
        let ctx = build_context(&inst, 0.5).map_err(|e| e.to_string())?;
        let mut counter = OpCounter::new();
        let (_, f_star) = exhaustive_ml(&ctx, &mut counter).map_err(|e| e.to_string())?;
        let l_f = lipschitz_bound(&ctx);
        let lambdas: Vec<f64> = (0..lambda_points)
            .map(|j| 2.0 * l_f * j as f64 / (lambda_points - 1) as f64)
            .collect();
        let d = dual_curve(&ctx, &lambdas, DualOracle::Grid { resolution: grid })
            .map_err(|e| e.to_string())?;
        let d_max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gap = (f_star - d_max).abs();
        worst = worst.max(gap);
        println!("instance {i}: f* = {f_star:.6}, max dual = {d_max:.6}, gap = {gap:.2e}");
    }
    println!("max gap over {instances} instances: {worst:.2e}");
    Ok(())
}

fn cmd_gradcheck(
    mode: DetectionMode,
    mc: usize,
    nc: usize,
    layers: usize,
    draws: usize,
    seed: u64,
    tol: f64,
) -> Result<(), String> {
    let spec = ChannelSpec { kind: ChannelKind::RayleighIid, m_c: mc, n_c: nc, seed };
    let mut worst = 0.0f64;
    for i in 0..draws {
        let mut rng = stream_rng(seed, i as u64);
        let inst = synthesize_instance(&spec, 12.0, mode, &mut rng).map_err(|e| e.to_string())?;
        let ctx = build_context(&inst, 0.5).map_err(|e| e.to_string())?;
        let params = init_params(mode, inst.m(), inst.n(), layers, &mut rng);
        let mut counter = OpCounter::new();
        let (x_hat, tape) = forward(&params, &inst, &ctx, &mut counter).map_err(|e| e.to_string())?;
        let residual: Vec<f64> =
            x_hat.iter().zip(&inst.x_true).map(|(&a, &b)| 2.0 * (a - b)).collect();
        let grad = backward(&params, &ctx, &tape, &residual);
        let flat = params.to_flat();
        let loss = |theta: &[f64]| -> Result<f64, String> {
            let p = params.from_flat(theta);
            let mut c = OpCounter::new();
            let (x, _) = forward(&p, &inst, &ctx, &mut c).map_err(|e| e.to_string())?;
            Ok(x.iter().zip(&inst.x_true).map(|(&a, &b)| (a - b) * (a - b)).sum())
        };
        let h = 1e-6;
        let mut max_rel = 0.0f64;
        for j in 0..flat.len() {
            let mut tp = flat.clone();
            let mut tm = flat.clone();
            tp[j] += h;
            tm[j] -= h;
            let fd = (loss(&tp)? - loss(&tm)?) / (2.0 * h);
            let denom = grad[j].abs().max(fd.abs()).max(1e-4);
            max_rel = max_rel.max((fd - grad[j]).abs() / denom);
        }
        println!("draw {i}: max relative gradient error {max_rel:.3e}");
        worst = worst.max(max_rel);
    }
    if worst < tol {
        println!("gradcheck passed: worst relative error {worst:.3e} < {tol:e}");
        Ok(())
    } else {
        Err(format!("gradcheck failed: worst relative error {worst:.3e} >= {tol:e}"))
    }
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::Simulate { config, run } => {
            let cfg = load_experiment(&config).map_err(|e| e.to_string())?;
            let rows = run_experiment(&cfg, run.seed, run.workers);
            emit_rows(&run, &rows)
        }
        Command::Train {
            mode,
            mc,
            nc,
            layers,
            iters,
            batch,
            snr_lo,
            snr_hi,
            seed,
            out,
            loss_log,
        } => {
            let mode: DetectionMode = mode.into();
            let channel = ChannelSpec { kind: ChannelKind::RayleighIid, m_c: mc, n_c: nc, seed };
            let mut cfg = TrainConfig::for_mode(mode, channel, layers);
            cfg.iters = iters;
            cfg.batch = batch;
            cfg.seed = seed;
            if let Some(lo) = snr_lo {
                cfg.snr_lo_db = lo;
            }
            if let Some(hi) = snr_hi {
                cfg.snr_hi_db = hi;
            }
            let mut counter = OpCounter::new();
            let result = train(&cfg, &mut stream_rng(seed, 0), &mut counter)
                .map_err(|e| e.to_string())?;
            fs::write(&out, encode_params(&result.params))
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            if let Some(path) = loss_log {
                let mut f = fs::File::create(&path)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                for l in &result.loss_log {
                    writeln!(f, "{l}").map_err(|e| e.to_string())?;
                }
            }
            println!(
                "trained {layers}-layer {:?} network, final batch loss {:.6}, saved to {}",
                mode,
                result.loss_log.last().copied().unwrap_or(f64::NAN),
                out.display()
            );
            Ok(())
        }
        Command::Eval { params, snr_db, trials, run } => {
            let bytes =
                fs::read(&params).map_err(|e| format!("cannot read {}: {e}", params.display()))?;
            let net = decode_params(&bytes).map_err(|e| e.to_string())?;
            let mode = net.mode();
            let cfg = ExperimentConfig {
                channel: ChannelSpec {
                    kind: ChannelKind::RayleighIid,
                    m_c: net.m / 2,
                    n_c: net.n / 2,
                    seed: run.seed,
                },
                mode,
                snr_db,
                trials,
                sigma0: 0.5,
                sigma_scale: 1.0,
                detectors: vec![
                    Detector::DeepHotml(net),
                    Detector::Hotml(SolverConfig::for_mode(mode)),
                ],
            };
            let rows = run_experiment(&cfg, run.seed, run.workers);
            emit_rows(&run, &rows)
        }
        Command::CheckDuality { instances, mc, nc, snr_db, grid, lambda_points, seed } => {
            cmd_check_duality(instances, mc, nc, snr_db, grid, lambda_points, seed)
        }
        Command::Gradcheck { mode, mc, nc, layers, draws, seed, tol } => {
            cmd_gradcheck(mode.into(), mc, nc, layers, draws, seed, tol)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
