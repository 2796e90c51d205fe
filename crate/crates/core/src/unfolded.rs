//! The DeepHOTML network: unrolled homotopy iterations with untied,
//! learned per-layer parameters.
//!
//! One-bit layer `k`:
//! ```text
//! z^k     = x^k + alpha_k (x^k - x^{k-1})
//! u^k     = Psi(w_k .* (G z^k) + b_k)
//! x^{k+1} = Pi(z^k + beta_k G^T u^k + gamma_k x^k)
//! ```
//! Classical layer `k`:
//! ```text
//! z^k     = x^k + alpha_k (x^k - x^{k-1})
//! x^{k+1} = Pi(z^k - beta_k H^T H z^k + omega_k H^T y + gamma_k x^k)
//! ```
//! with the learned starting point `x^0 = Pi(W_0 y + b_0)` and the
//! convention `x^{-1} = x^0`.
//!
//! Gradients are hand-derived reverse mode over this fixed graph; the clamp
//! backpropagates zero outside the open interval `(-1, 1)` (boundary
//! included). Training minimizes `sum_i ||x_i - net(y_i)||^2` with ADAM on
//! streamed, freshly generated samples.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{dot, Mat};
use crate::model::{synthesize_instance, ChannelSpec, DetectionInstance, DetectionMode};
use crate::numerics::{psi, psi_deriv_from, OpCounter};
use crate::objective::{build_context, ObjectiveContext};
use crate::rng::Stream;

/// Current parameter-file format version.
pub const PARAMS_VERSION: u16 = 1;
const PARAMS_MAGIC: &[u8; 4] = b"DHTM";

#[derive(Clone, Debug, PartialEq)]
pub struct OneBitLayer {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalLayer {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub gamma: f64,
}

/// Layer-0 affine map that produces the starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroLayer {
    pub w0: Mat,
    pub b0: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layers {
    OneBit(Vec<OneBitLayer>),
    Classical(Vec<ClassicalLayer>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub zero: ZeroLayer,
    pub layers: Layers,
    pub m: usize,
    pub n: usize,
    pub version: u16,
}

impl NetworkParams {
    pub fn k(&self) -> usize {
        match &self.layers {
            Layers::OneBit(l) => l.len(),
            Layers::Classical(l) => l.len(),
        }
    }

    pub fn mode(&self) -> DetectionMode {
        match &self.layers {
            Layers::OneBit(_) => DetectionMode::OneBit,
            Layers::Classical(_) => DetectionMode::Classical,
        }
    }

    /// Number of scalar parameters, equal to the flat-layout length.
    pub fn flat_len(&self) -> usize {
        let base = self.n * self.m + self.n;
        base + match &self.layers {
            Layers::OneBit(l) => l.len() * (3 + 2 * self.m),
            Layers::Classical(l) => l.len() * 4,
        }
    }

    /// Flatten in the declared order: `W0` row-major, `b0`, then per layer
    /// (one-bit: `alpha, beta, gamma, w, b`; classical:
    /// `alpha, beta, omega, gamma`). This is also the parameter-file
    /// payload order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        out.extend_from_slice(self.zero.w0.data());
        out.extend_from_slice(&self.zero.b0);
        match &self.layers {
            Layers::OneBit(layers) => {
                for l in layers {
                    out.push(l.alpha);
                    out.push(l.beta);
                    out.push(l.gamma);
                    out.extend_from_slice(&l.w);
                    out.extend_from_slice(&l.b);
                }
            }
            Layers::Classical(layers) => {
                for l in layers {
                    out.push(l.alpha);
                    out.push(l.beta);
                    out.push(l.omega);
                    out.push(l.gamma);
                }
            }
        }
        out
    }

    /// Rebuild from a flat buffer with this network's shape.
    pub fn from_flat(&self, flat: &[f64]) -> NetworkParams {
        assert_eq!(flat.len(), self.flat_len());
        let (m, n) = (self.m, self.n);
        let mut pos = 0usize;
        let w0 = Mat::from_vec(n, m, flat[pos..pos + n * m].to_vec());
        pos += n * m;
        let b0 = flat[pos..pos + n].to_vec();
        pos += n;
        let layers = match &self.layers {
            Layers::OneBit(layers) => Layers::OneBit(
                (0..layers.len())
                    .map(|_| {
                        let alpha = flat[pos];
                        let beta = flat[pos + 1];
                        let gamma = flat[pos + 2];
                        pos += 3;
                        let w = flat[pos..pos + m].to_vec();
                        pos += m;
                        let b = flat[pos..pos + m].to_vec();
                        pos += m;
                        OneBitLayer { alpha, beta, gamma, w, b }
                    })
                    .collect(),
            ),
            Layers::Classical(layers) => Layers::Classical(
                (0..layers.len())
                    .map(|_| {
                        let l = ClassicalLayer {
                            alpha: flat[pos],
                            beta: flat[pos + 1],
                            omega: flat[pos + 2],
                            gamma: flat[pos + 3],
                        };
                        pos += 4;
                        l
                    })
                    .collect(),
            ),
        };
        NetworkParams { zero: ZeroLayer { w0, b0 }, layers, m, n, version: self.version }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnfoldedError {
    /// Instance or context dimensions do not match the network.
    DimensionMismatch,
    /// Training loss became NaN.
    Diverged,
}

impl core::fmt::Display for UnfoldedError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            UnfoldedError::DimensionMismatch => write!(f, "network/instance dimension mismatch"),
            UnfoldedError::Diverged => write!(f, "training diverged (NaN loss)"),
        }
    }
}

/// Fresh network parameters, with the Gaussian entries drawn at
/// variance 0.01.
pub fn init_params(
    mode: DetectionMode,
    m: usize,
    n: usize,
    k: usize,
    rng: &mut Stream,
) -> NetworkParams {
    let sd = 0.1; // variance 0.01
    let mut gauss = |len: usize| -> Vec<f64> {
        (0..len).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let w0 = Mat::from_vec(n, m, gauss(n * m));
    let b0 = gauss(n);
    let layers = match mode {
        DetectionMode::OneBit => Layers::OneBit(
            (0..k)
                .map(|_| OneBitLayer {
                    alpha: 0.5,
                    beta: 0.01,
                    gamma: 0.001,
                    w: gauss(m),
                    b: gauss(m),
                })
                .collect(),
        ),
        DetectionMode::Classical => Layers::Classical(
            (0..k)
                .map(|_| ClassicalLayer { alpha: 0.5, beta: 0.01, omega: -0.01, gamma: 0.001 })
                .collect(),
        ),
    };
    NetworkParams { zero: ZeroLayer { w0, b0 }, layers, m, n, version: PARAMS_VERSION }
}

enum LayerTape {
    OneBit {
        gz: Vec<f64>,
        t: Vec<f64>,
        u: Vec<f64>,
        gtu: Vec<f64>,
        s: Vec<f64>,
    },
    Classical {
        hthz: Vec<f64>,
        s: Vec<f64>,
    },
}

/// Activation record of one forward pass, consumed by [`backward`].
pub struct Tape {
    y: Vec<f64>,
    s0: Vec<f64>,
    /// `x^0 ..= x^K`.
    x: Vec<Vec<f64>>,
    layers: Vec<LayerTape>,
}

impl Tape {
    /// Iterate `x^k` of the recorded forward pass, `0 <= k <= K`.
    pub fn iterate(&self, k: usize) -> &[f64] {
        &self.x[k]
    }

    /// Which pre-clamp activations were strictly inside `(-1, 1)`, over the
    /// zero layer and every unrolled layer. Two passes whose patterns
    /// differ straddle a clamp boundary, where the loss is not
    /// differentiable.
    pub fn clamp_pattern(&self) -> Vec<bool> {
        let mut out: Vec<bool> = self.s0.iter().map(|&v| clamp_mask(v) != 0.0).collect();
        for layer in &self.layers {
            let s = match layer {
                LayerTape::OneBit { s, .. } => s,
                LayerTape::Classical { s, .. } => s,
            };
            out.extend(s.iter().map(|&v| clamp_mask(v) != 0.0));
        }
        out
    }
}

#[inline]
fn clamp_vec(s: &[f64]) -> Vec<f64> {
    s.iter().map(|&v| v.clamp(-1.0, 1.0)).collect()
}

/// Clamp subgradient mask: identity strictly inside `(-1, 1)`, zero at and
/// beyond the boundary.
#[inline]
fn clamp_mask(s: f64) -> f64 {
    if s > -1.0 && s < 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Run the network on one instance. Returns the pre-sign output `x^K` and
/// the activation tape.
pub fn forward(
    params: &NetworkParams,
    inst: &DetectionInstance,
    ctx: &ObjectiveContext,
    counter: &mut OpCounter,
) -> Result<(Vec<f64>, Tape), UnfoldedError> {
    let (m, n) = (params.m, params.n);
    if inst.m() != m || inst.n() != n || ctx.mode() != params.mode() || inst.mode != params.mode()
    {
        return Err(UnfoldedError::DimensionMismatch);
    }
    let (mu, nu) = (m as u64, n as u64);

    let mut s0 = params.zero.w0.matvec(&inst.y);
    for (s, &b) in s0.iter_mut().zip(&params.zero.b0) {
        *s += b;
    }
    counter.add_flops(2 * nu * mu + nu);
    let x0 = clamp_vec(&s0);

    let mut tape = Tape { y: inst.y.clone(), s0, x: vec![x0], layers: Vec::with_capacity(params.k()) };

    match (&params.layers, ctx) {
        (Layers::OneBit(layers), ObjectiveContext::OneBit { g, .. }) => {
            for (k, l) in layers.iter().enumerate() {
                let x_cur = &tape.x[k];
                let x_prev = if k == 0 { &tape.x[0] } else { &tape.x[k - 1] };
                let z: Vec<f64> = x_cur
                    .iter()
                    .zip(x_prev)
                    .map(|(&xc, &xp)| xc + l.alpha * (xc - xp))
                    .collect();
                let gz = g.matvec(&z);
                let t: Vec<f64> =
                    gz.iter().zip(&l.w).zip(&l.b).map(|((&gzi, &wi), &bi)| wi * gzi + bi).collect();
                let u: Vec<f64> = t.iter().map(|&ti| psi(ti)).collect();
                let gtu = g.tr_matvec(&u);
                let s: Vec<f64> = z
                    .iter()
                    .zip(&gtu)
                    .zip(x_cur)
                    .map(|((&zi, &gi), &xi)| zi + l.beta * gi + l.gamma * xi)
                    .collect();
                counter.add_flops(4 * mu * nu + 3 * nu + 8 * mu + 4 * nu);
                counter.add_phi(mu);
                let x_next = clamp_vec(&s);
                tape.layers.push(LayerTape::OneBit { gz, t, u, gtu, s });
                tape.x.push(x_next);
            }
        }
        (Layers::Classical(layers), ObjectiveContext::Classical { ht_h, ht_y, .. }) => {
            for (k, l) in layers.iter().enumerate() {
                let x_cur = &tape.x[k];
                let x_prev = if k == 0 { &tape.x[0] } else { &tape.x[k - 1] };
                let z: Vec<f64> = x_cur
                    .iter()
                    .zip(x_prev)
                    .map(|(&xc, &xp)| xc + l.alpha * (xc - xp))
                    .collect();
                let hthz = ht_h.matvec(&z);
                let s: Vec<f64> = z
                    .iter()
                    .zip(&hthz)
                    .zip(ht_y.iter().zip(x_cur))
                    .map(|((&zi, &hi), (&hyi, &xi))| {
                        zi - l.beta * hi + l.omega * hyi + l.gamma * xi
                    })
                    .collect();
                counter.add_flops(2 * nu * nu + 9 * nu);
                let x_next = clamp_vec(&s);
                tape.layers.push(LayerTape::Classical { hthz, s });
                tape.x.push(x_next);
            }
        }
        _ => return Err(UnfoldedError::DimensionMismatch),
    }

    Ok((tape.x.last().unwrap().clone(), tape))
}

/// Exact reverse-mode gradients of `||x_true - x^K||^2` with respect to
/// every parameter, given `residual = 2 (x^K - x_true)`. Returns the
/// gradient in the flat layout of [`NetworkParams::to_flat`].
pub fn backward(
    params: &NetworkParams,
    ctx: &ObjectiveContext,
    tape: &Tape,
    residual: &[f64],
) -> Vec<f64> {
    let (m, n) = (params.m, params.n);
    let k_layers = params.k();
    debug_assert_eq!(tape.x.len(), k_layers + 1);

    // gradient accumulators for every x^k
    let mut gx: Vec<Vec<f64>> = vec![vec![0.0; n]; k_layers + 1];
    gx[k_layers].copy_from_slice(residual);

    let mut grad_w0 = Mat::zeros(n, m);
    let mut grad_b0 = vec![0.0; n];
    let mut grad_layers_flat: Vec<Vec<f64>> = Vec::with_capacity(k_layers);

    match (&params.layers, ctx) {
        (Layers::OneBit(layers), ObjectiveContext::OneBit { g, .. }) => {
            for k in (0..k_layers).rev() {
                let l = &layers[k];
                let LayerTape::OneBit { gz, t, u, gtu, s } = &tape.layers[k] else {
                    unreachable!()
                };
                let d = gx[k + 1].clone();
                let ds: Vec<f64> =
                    d.iter().zip(s).map(|(&di, &si)| di * clamp_mask(si)).collect();
                let d_beta = dot(&ds, gtu);
                let d_gamma = dot(&ds, &tape.x[k]);
                let du: Vec<f64> = g.matvec(&ds).iter().map(|&v| l.beta * v).collect();
                let dt: Vec<f64> = du
                    .iter()
                    .zip(u.iter().zip(t))
                    .map(|(&dui, (&ui, &ti))| dui * psi_deriv_from(ui, ti))
                    .collect();
                let d_w: Vec<f64> = dt.iter().zip(gz).map(|(&a, &b)| a * b).collect();
                let d_b = dt.clone();
                let dgz: Vec<f64> = dt.iter().zip(&l.w).map(|(&a, &b)| a * b).collect();
                let mut dz = g.tr_matvec(&dgz);
                for (dzi, &dsi) in dz.iter_mut().zip(&ds) {
                    *dzi += dsi;
                }
                let x_prev = if k == 0 { &tape.x[0] } else { &tape.x[k - 1] };
                let diff: Vec<f64> =
                    tape.x[k].iter().zip(x_prev).map(|(&a, &b)| a - b).collect();
                let d_alpha = dot(&dz, &diff);

                // chain into x^k and x^{k-1}
                for j in 0..n {
                    gx[k][j] += l.gamma * ds[j] + (1.0 + l.alpha) * dz[j];
                }
                let prev_idx = if k == 0 { 0 } else { k - 1 };
                for j in 0..n {
                    gx[prev_idx][j] -= l.alpha * dz[j];
                }

                let mut flat = Vec::with_capacity(3 + 2 * m);
                flat.push(d_alpha);
                flat.push(d_beta);
                flat.push(d_gamma);
                flat.extend_from_slice(&d_w);
                flat.extend_from_slice(&d_b);
                grad_layers_flat.push(flat);
            }
        }
        (Layers::Classical(layers), ObjectiveContext::Classical { ht_h, ht_y, .. }) => {
            for k in (0..k_layers).rev() {
                let l = &layers[k];
                let LayerTape::Classical { hthz, s, .. } = &tape.layers[k] else {
                    unreachable!()
                };
                let d = gx[k + 1].clone();
                let ds: Vec<f64> =
                    d.iter().zip(s).map(|(&di, &si)| di * clamp_mask(si)).collect();
                let d_beta = -dot(&ds, hthz);
                let d_omega = dot(&ds, ht_y);
                let d_gamma = dot(&ds, &tape.x[k]);
                let hth_ds = ht_h.matvec(&ds);
                let dz: Vec<f64> =
                    ds.iter().zip(&hth_ds).map(|(&a, &b)| a - l.beta * b).collect();
                let x_prev = if k == 0 { &tape.x[0] } else { &tape.x[k - 1] };
                let diff: Vec<f64> =
                    tape.x[k].iter().zip(x_prev).map(|(&a, &b)| a - b).collect();
                let d_alpha = dot(&dz, &diff);
                for j in 0..n {
                    gx[k][j] += l.gamma * ds[j] + (1.0 + l.alpha) * dz[j];
                }
                let prev_idx = if k == 0 { 0 } else { k - 1 };
                for j in 0..n {
                    gx[prev_idx][j] -= l.alpha * dz[j];
                }
                grad_layers_flat.push(vec![d_alpha, d_beta, d_omega, d_gamma]);
            }
        }
        _ => unreachable!("tape/context mode checked in forward"),
    }

    // zero layer: x^0 = clamp(W0 y + b0)
    let ds0: Vec<f64> =
        gx[0].iter().zip(&tape.s0).map(|(&di, &si)| di * clamp_mask(si)).collect();
    grad_w0.add_outer(1.0, &ds0, &tape.y);
    for (gb, &d) in grad_b0.iter_mut().zip(&ds0) {
        *gb += d;
    }

    let mut out = Vec::with_capacity(params.flat_len());
    out.extend_from_slice(grad_w0.data());
    out.extend_from_slice(&grad_b0);
    for flat in grad_layers_flat.into_iter().rev() {
        out.extend_from_slice(&flat);
    }
    out
}

/// ADAM state over the flat parameter vector.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState { m: vec![0.0; len], v: vec![0.0; len], step: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn update(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        debug_assert_eq!(theta.len(), grad.len());
        self.step += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        for i in 0..theta.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            theta[i] -= lr * mhat / (libm::sqrt(vhat) + self.eps);
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub mode: DetectionMode,
    pub channel: ChannelSpec,
    pub layers: usize,
    pub iters: usize,
    pub batch: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub lr_decay_every: usize,
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    pub sigma0: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Default training protocol for the given mode (step-size decay 0.9
    /// one-bit / 0.95 classical, SNR ranges 5-22 dB / 0-18 dB).
    pub fn for_mode(mode: DetectionMode, channel: ChannelSpec, layers: usize) -> Self {
        let (lr_decay, snr_lo_db, snr_hi_db) = match mode {
            DetectionMode::OneBit => (0.9, 5.0, 22.0),
            DetectionMode::Classical => (0.95, 0.0, 18.0),
        };
        TrainConfig {
            mode,
            channel,
            layers,
            iters: 10_000,
            batch: 500,
            lr: 0.001,
            lr_decay,
            lr_decay_every: 500,
            snr_lo_db,
            snr_hi_db,
            sigma0: 0.5,
            seed: channel.seed,
        }
    }
}

/// Learning rate at 1-indexed training iteration `iter`.
pub fn lr_at(cfg: &TrainConfig, iter: usize) -> f64 {
    let exponent = (iter / cfg.lr_decay_every) as i32;
    cfg.lr * libm::pow(cfg.lr_decay, exponent as f64)
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub params: NetworkParams,
    /// Mean per-sample loss of each training iteration.
    pub loss_log: Vec<f64>,
}

/// Train a network on streamed, freshly generated samples.
pub fn train(
    cfg: &TrainConfig,
    rng: &mut Stream,
    counter: &mut OpCounter,
) -> Result<TrainResult, UnfoldedError> {
    let (m, n) = (2 * cfg.channel.m_c, 2 * cfg.channel.n_c);
    let template = init_params(cfg.mode, m, n, cfg.layers, rng);
    let mut theta = template.to_flat();
    let mut adam = AdamState::new(theta.len());
    let mut loss_log = Vec::with_capacity(cfg.iters);

    for iter in 1..=cfg.iters {
        let params = template.from_flat(&theta);
        let mut grad_acc = vec![0.0; theta.len()];
        let mut batch_loss = 0.0;
        for _ in 0..cfg.batch {
            let snr_db = rng.random_range(cfg.snr_lo_db..=cfg.snr_hi_db);
            let inst = synthesize_instance(&cfg.channel, snr_db, cfg.mode, rng)
                .map_err(|_| UnfoldedError::DimensionMismatch)?;
            let ctx = build_context(&inst, cfg.sigma0)
                .map_err(|_| UnfoldedError::Diverged)?;
            let (x_hat, tape) = forward(&params, &inst, &ctx, counter)?;
            let residual: Vec<f64> =
                x_hat.iter().zip(&inst.x_true).map(|(&a, &b)| 2.0 * (a - b)).collect();
            batch_loss += x_hat
                .iter()
                .zip(&inst.x_true)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<f64>();
            let g = backward(&params, &ctx, &tape, &residual);
            for (acc, gi) in grad_acc.iter_mut().zip(&g) {
                *acc += gi;
            }
        }
        if batch_loss.is_nan() {
            return Err(UnfoldedError::Diverged);
        }
        adam.update(&mut theta, &grad_acc, lr_at(cfg, iter));
        loss_log.push(batch_loss / cfg.batch as f64);
    }

    Ok(TrainResult { params: template.from_flat(&theta), loss_log })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamsCodecError {
    BadMagic,
    BadVersion(u16),
    Truncated,
}

impl core::fmt::Display for ParamsCodecError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamsCodecError::BadMagic => write!(f, "not a parameter file (bad magic bytes)"),
            ParamsCodecError::BadVersion(v) => write!(f, "unsupported parameter-file version {v}"),
            ParamsCodecError::Truncated => write!(f, "parameter file truncated"),
        }
    }
}

/// Serialize: magic, version (u16 LE), mode (u8), pad, M, N, K (u32 LE),
/// then the flat parameter layout as little-endian f64.
pub fn encode_params(params: &NetworkParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(PARAMS_MAGIC);
    out.extend_from_slice(&params.version.to_le_bytes());
    out.push(match params.mode() {
        DetectionMode::OneBit => 0,
        DetectionMode::Classical => 1,
    });
    out.push(0);
    out.extend_from_slice(&(params.m as u32).to_le_bytes());
    out.extend_from_slice(&(params.n as u32).to_le_bytes());
    out.extend_from_slice(&(params.k() as u32).to_le_bytes());
    for v in params.to_flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_params(bytes: &[u8]) -> Result<NetworkParams, ParamsCodecError> {
    if bytes.len() < 20 {
        return Err(if bytes.len() >= 4 && &bytes[..4] != PARAMS_MAGIC {
            ParamsCodecError::BadMagic
        } else {
            ParamsCodecError::Truncated
        });
    }
    if &bytes[..4] != PARAMS_MAGIC {
        return Err(ParamsCodecError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != PARAMS_VERSION {
        return Err(ParamsCodecError::BadVersion(version));
    }
    let mode = match bytes[6] {
        0 => DetectionMode::OneBit,
        1 => DetectionMode::Classical,
        _ => return Err(ParamsCodecError::BadMagic),
    };
    let rd_u32 = |o: usize| u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as usize;
    let (m, n, k) = (rd_u32(8), rd_u32(12), rd_u32(16));
    let template = NetworkParams {
        zero: ZeroLayer { w0: Mat::zeros(n, m), b0: vec![0.0; n] },
        layers: match mode {
            DetectionMode::OneBit => Layers::OneBit(
                (0..k)
                    .map(|_| OneBitLayer {
                        alpha: 0.0,
                        beta: 0.0,
                        gamma: 0.0,
                        w: vec![0.0; m],
                        b: vec![0.0; m],
                    })
                    .collect(),
            ),
            DetectionMode::Classical => Layers::Classical(
                (0..k)
                    .map(|_| ClassicalLayer { alpha: 0.0, beta: 0.0, omega: 0.0, gamma: 0.0 })
                    .collect(),
            ),
        },
        m,
        n,
        version,
    };
    let expected = 20 + 8 * template.flat_len();
    if bytes.len() != expected {
        return Err(ParamsCodecError::Truncated);
    }
    let flat: Vec<f64> = bytes[20..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
        .collect();
    Ok(template.from_flat(&flat))
}
