//! Detection objectives and their majorants.
//!
//! One-bit mode: `f(x) = -sum_i log Phi(g_i^T x)` with rows
//! `g_i = (y_i / sigma_hat) h_i` and the mismatched noise deviation
//! `sigma_hat = sigma + sigma0` as the numerical-stability remedy.
//! Classical mode: `f(x) = 1/2 ||y - H x||^2` held as
//! `(H^T H, H^T y, ||y||^2)`.
//!
//! The penalized objective is `F_lambda(x) = f(x) - lambda ||x||^2`; its
//! convex differentiable majorant at `x_bar` is
//! `G_lambda(x | x_bar) = f(x) - 2 lambda <x_bar, x - x_bar> - lambda ||x_bar||^2`.

use alloc::vec::Vec;

use crate::linalg::{dot, norm_sq, power_iteration_sym, Mat};
use crate::model::{DetectionInstance, DetectionMode};
use crate::numerics::{log_phi, psi, OpCounter};

/// Power-iteration budget for spectral-norm bounds.
const POWER_ITERS: usize = 200;
const POWER_TOL: f64 = 1e-8;
/// The step rule only needs an upper bound on the spectral norm, so the
/// power-iteration estimate is inflated slightly.
const SPECTRAL_SAFETY: f64 = 1.001;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveError {
    /// Instance with non-positive noise deviation.
    InvalidInstance,
}

impl core::fmt::Display for ObjectiveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ObjectiveError::InvalidInstance => write!(f, "instance has non-positive sigma"),
        }
    }
}

/// Precomputed objective data, immutable after build and shareable across
/// threads; operation counters are caller-supplied.
#[derive(Clone, Debug)]
pub enum ObjectiveContext {
    OneBit {
        /// Rows `g_i = (y_i / sigma_hat) h_i`.
        g: Mat,
        sigma_hat: f64,
        sigma0: f64,
    },
    Classical {
        ht_h: Mat,
        ht_y: Vec<f64>,
        y_norm_sq: f64,
        /// Upper bound on `||H||_2^2`.
        spec_norm_sq: f64,
        m: usize,
    },
}

impl ObjectiveContext {
    pub fn n(&self) -> usize {
        match self {
            ObjectiveContext::OneBit { g, .. } => g.cols(),
            ObjectiveContext::Classical { ht_h, .. } => ht_h.rows(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            ObjectiveContext::OneBit { g, .. } => g.rows(),
            ObjectiveContext::Classical { m, .. } => *m,
        }
    }

    pub fn mode(&self) -> DetectionMode {
        match self {
            ObjectiveContext::OneBit { .. } => DetectionMode::OneBit,
            ObjectiveContext::Classical { .. } => DetectionMode::Classical,
        }
    }
}

/// Precompute the objective data for an instance. `sigma0` is the noise
/// over-estimation offset; classical mode ignores it.
pub fn build_context(
    inst: &DetectionInstance,
    sigma0: f64,
) -> Result<ObjectiveContext, ObjectiveError> {
    debug_assert!(sigma0 >= 0.0);
    match inst.mode {
        DetectionMode::OneBit => {
            if inst.sigma <= 0.0 {
                return Err(ObjectiveError::InvalidInstance);
            }
            let sigma_hat = inst.sigma + sigma0;
            let (m, n) = (inst.m(), inst.n());
            let mut g = Mat::zeros(m, n);
            for i in 0..m {
                let scale = inst.y[i] / sigma_hat;
                for j in 0..n {
                    g[(i, j)] = scale * inst.h[(i, j)];
                }
            }
            Ok(ObjectiveContext::OneBit { g, sigma_hat, sigma0 })
        }
        DetectionMode::Classical => {
            let ht_h = inst.h.gram();
            let ht_y = inst.h.tr_matvec(&inst.y);
            let spec_norm_sq =
                power_iteration_sym(&ht_h, POWER_ITERS, POWER_TOL) * SPECTRAL_SAFETY;
            Ok(ObjectiveContext::Classical {
                ht_h,
                ht_y,
                y_norm_sq: norm_sq(&inst.y),
                spec_norm_sq,
                m: inst.m(),
            })
        }
    }
}

/// Objective value `f(x)`.
pub fn f_value(ctx: &ObjectiveContext, x: &[f64], counter: &mut OpCounter) -> f64 {
    match ctx {
        ObjectiveContext::OneBit { g, .. } => {
            let m = g.rows();
            let mut acc = 0.0;
            for i in 0..m {
                acc -= log_phi(dot(g.row(i), x));
            }
            counter.add_flops((2 * g.cols() as u64 + 6) * m as u64);
            counter.add_phi(m as u64);
            acc
        }
        ObjectiveContext::Classical { ht_h, ht_y, y_norm_sq, .. } => {
            let n = ht_h.rows() as u64;
            let hx = ht_h.matvec(x);
            counter.add_flops(2 * n * n + 4 * n + 2);
            0.5 * dot(x, &hx) - dot(ht_y, x) + 0.5 * y_norm_sq
        }
    }
}

/// Gradient of `f` at `x`.
pub fn grad_f(ctx: &ObjectiveContext, x: &[f64], counter: &mut OpCounter) -> Vec<f64> {
    match ctx {
        ObjectiveContext::OneBit { g, .. } => {
            let m = g.rows();
            let t = g.matvec(x);
            let u: Vec<f64> = t.iter().map(|&ti| psi(ti)).collect();
            let mut grad = g.tr_matvec(&u);
            for v in grad.iter_mut() {
                *v = -*v;
            }
            counter.add_flops((4 * g.cols() as u64 + 6) * m as u64);
            counter.add_phi(m as u64);
            grad
        }
        ObjectiveContext::Classical { ht_h, ht_y, .. } => {
            let n = ht_h.rows() as u64;
            let mut grad = ht_h.matvec(x);
            for (gi, &hy) in grad.iter_mut().zip(ht_y) {
                *gi -= hy;
            }
            counter.add_flops(2 * n * n + n);
            grad
        }
    }
}

/// Gradient of the majorant: `grad f(z) - 2 lambda x_bar`.
pub fn grad_majorant(
    ctx: &ObjectiveContext,
    z: &[f64],
    x_bar: &[f64],
    lambda: f64,
    counter: &mut OpCounter,
) -> Vec<f64> {
    let mut grad = grad_f(ctx, z, counter);
    for (gi, &xb) in grad.iter_mut().zip(x_bar) {
        *gi -= 2.0 * lambda * xb;
    }
    counter.add_flops(3 * z.len() as u64);
    grad
}

/// Majorant value `G_lambda(x | x_bar)`.
pub fn majorant_value(
    ctx: &ObjectiveContext,
    x: &[f64],
    x_bar: &[f64],
    lambda: f64,
    counter: &mut OpCounter,
) -> f64 {
    let n = x.len() as u64;
    let inner: f64 = x_bar.iter().zip(x).map(|(&xb, &xi)| xb * (xi - xb)).sum();
    counter.add_flops(3 * n + 4 * n + 3);
    f_value(ctx, x, counter) - 2.0 * lambda * inner - lambda * norm_sq(x_bar)
}

/// Penalized objective `F_lambda(x) = f(x) - lambda ||x||^2`.
pub fn penalized_value(
    ctx: &ObjectiveContext,
    x: &[f64],
    lambda: f64,
    counter: &mut OpCounter,
) -> f64 {
    counter.add_flops(2 * x.len() as u64 + 2);
    f_value(ctx, x, counter) - lambda * norm_sq(x)
}

/// Certified Lipschitz bound for the gradient of `f` on the box.
///
/// One-bit: `||G||_2^2` (the scalar curvature `Psi(t)(Psi(t)+t)` lies in
/// `(0,1)`). Classical: the precomputed `||H||_2^2` bound.
pub fn lipschitz_bound(ctx: &ObjectiveContext) -> f64 {
    match ctx {
        ObjectiveContext::OneBit { g, .. } => {
            power_iteration_sym(&g.gram(), POWER_ITERS, POWER_TOL) * SPECTRAL_SAFETY
        }
        ObjectiveContext::Classical { spec_norm_sq, .. } => *spec_norm_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthesize_instance, ChannelKind, ChannelSpec, DetectionMode};
    use crate::rng::stream_rng;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::Rng;

    fn one_bit_instance(m_c: usize, n_c: usize, snr_db: f64, stream: u64) -> DetectionInstance {
        let spec = ChannelSpec { kind: ChannelKind::RayleighIid, m_c, n_c, seed: 0 };
        synthesize_instance(&spec, snr_db, DetectionMode::OneBit, &mut stream_rng(100, stream))
            .unwrap()
    }

    fn classical_identity(n: usize, y: Vec<f64>) -> DetectionInstance {
        DetectionInstance {
            h: Mat::identity(n),
            x_true: vec![1.0; n],
            v: vec![0.0; n],
            sigma: 1.0,
            mode: DetectionMode::Classical,
            y,
        }
    }

    #[test]
    fn context_rows_follow_sigma_hat() {
        let inst = one_bit_instance(4, 2, 10.0, 0);
        let ctx0 = build_context(&inst, 0.0).unwrap();
        if let ObjectiveContext::OneBit { g, sigma_hat, .. } = &ctx0 {
            assert_eq!(*sigma_hat, inst.sigma);
            for i in 0..inst.m() {
                for j in 0..inst.n() {
                    let want = inst.y[i] * inst.h[(i, j)] / inst.sigma;
                    assert!((g[(i, j)] - want).abs() < 1e-15);
                }
            }
        } else {
            panic!("expected one-bit context");
        }
        // sigma0 = 0.5, sigma = 0.5 -> rows are exactly y_i h_i
        let mut inst2 = inst.clone();
        inst2.sigma = 0.5;
        let ctx = build_context(&inst2, 0.5).unwrap();
        if let ObjectiveContext::OneBit { g, sigma_hat, .. } = &ctx {
            assert_eq!(*sigma_hat, 1.0);
            for i in 0..inst2.m() {
                assert!((g[(i, 0)] - inst2.y[i] * inst2.h[(i, 0)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_non_positive_sigma() {
        let mut inst = one_bit_instance(4, 2, 10.0, 1);
        inst.sigma = 0.0;
        assert_eq!(build_context(&inst, 0.5).err(), Some(ObjectiveError::InvalidInstance));
    }

    #[test]
    fn classical_identity_context() {
        let inst = classical_identity(2, vec![0.0, 0.0]);
        let ctx = build_context(&inst, 0.0).unwrap();
        if let ObjectiveContext::Classical { ht_h, spec_norm_sq, .. } = &ctx {
            assert!((ht_h[(0, 0)] - 1.0).abs() < 1e-12);
            assert!((ht_h[(0, 1)]).abs() < 1e-12);
            assert!(*spec_norm_sq >= 1.0 && *spec_norm_sq <= 1.0011);
        } else {
            panic!("expected classical context");
        }
    }

    #[test]
    fn one_bit_values() {
        let inst = one_bit_instance(4, 2, 10.0, 2);
        let ctx = build_context(&inst, 0.5).unwrap();
        let mut c = OpCounter::new();
        // x = 0 -> M log 2
        let v = f_value(&ctx, &vec![0.0; inst.n()], &mut c);
        let want = inst.m() as f64 * core::f64::consts::LN_2;
        assert!((v - want).abs() < 1e-12);
        assert_eq!(c.phi_calls, inst.m() as u64);
        // single row g = (1, 0), x = (1, 0) -> -log Phi(1)
        let single = ObjectiveContext::OneBit {
            g: Mat::from_vec(1, 2, vec![1.0, 0.0]),
            sigma_hat: 1.0,
            sigma0: 0.0,
        };
        let v1 = f_value(&single, &[1.0, 0.0], &mut c);
        assert!((v1 - 0.17275377902345).abs() < 1e-12);
    }

    #[test]
    fn classical_exact_fit_is_zero() {
        let n = 3;
        let mut inst = classical_identity(n, vec![1.0; n]);
        inst.x_true = vec![1.0; n];
        let ctx = build_context(&inst, 0.0).unwrap();
        let mut c = OpCounter::new();
        assert!(f_value(&ctx, &inst.x_true, &mut c).abs() < 1e-12);
    }

    #[test]
    fn classical_identity_gradient() {
        // H = I, y = 0, lambda = 0, z = e1 -> gradient e1
        let inst = classical_identity(2, vec![0.0, 0.0]);
        let ctx = build_context(&inst, 0.0).unwrap();
        let mut c = OpCounter::new();
        let g = grad_majorant(&ctx, &[1.0, 0.0], &[0.0, 0.0], 0.0, &mut c);
        assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences_both_modes() {
        for mode in [DetectionMode::OneBit, DetectionMode::Classical] {
            let spec = ChannelSpec { kind: ChannelKind::RayleighIid, m_c: 6, n_c: 3, seed: 0 };
            let inst =
                synthesize_instance(&spec, 10.0, mode, &mut stream_rng(55, 0)).unwrap();
            let ctx = build_context(&inst, 0.5).unwrap();
            let n = inst.n();
            let mut rng = stream_rng(56, 0);
            let mut c = OpCounter::new();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let g = grad_f(&ctx, &x, &mut c);
                let h = 1e-5;
                for j in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let fd =
                        (f_value(&ctx, &xp, &mut c) - f_value(&ctx, &xm, &mut c)) / (2.0 * h);
                    let denom = g[j].abs().max(1e-3);
                    assert!((fd - g[j]).abs() / denom < 1e-5, "mode {mode:?} coord {j}");
                }
            }
        }
    }

    #[test]
    fn majorant_tangency_and_domination() {
        let inst = one_bit_instance(5, 2, 12.0, 3);
        let ctx = build_context(&inst, 0.5).unwrap();
        let n = inst.n();
        let mut rng = stream_rng(57, 0);
        let mut c = OpCounter::new();
        let lambda = 0.7;
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xb: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // touches at x = x_bar
            let tangent = majorant_value(&ctx, &xb, &xb, lambda, &mut c);
            let f_pen = penalized_value(&ctx, &xb, lambda, &mut c);
            assert!((tangent - f_pen).abs() < 1e-12);
            // dominates F_lambda everywhere
            let maj = majorant_value(&ctx, &x, &xb, lambda, &mut c);
            let val = penalized_value(&ctx, &x, lambda, &mut c);
            assert!(maj >= val - 1e-12);
            // lambda = 0 reduces to f
            let m0 = majorant_value(&ctx, &x, &xb, 0.0, &mut c);
            assert!((m0 - f_value(&ctx, &x, &mut c)).abs() < 1e-12);
        }
    }

    #[test]
    fn f_is_convex_on_random_pairs() {
        for mode in [DetectionMode::OneBit, DetectionMode::Classical] {
            let spec = ChannelSpec { kind: ChannelKind::RayleighIid, m_c: 6, n_c: 3, seed: 0 };
            let inst =
                synthesize_instance(&spec, 10.0, mode, &mut stream_rng(58, 0)).unwrap();
            let ctx = build_context(&inst, 0.5).unwrap();
            let mut rng = stream_rng(59, 0);
            let mut c = OpCounter::new();
            for _ in 0..200 {
                let x1: Vec<f64> = (0..inst.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let x2: Vec<f64> = (0..inst.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mid: Vec<f64> =
                    x1.iter().zip(&x2).map(|(a, b)| 0.5 * (a + b)).collect();
                let lhs = f_value(&ctx, &mid, &mut c);
                let rhs = 0.5 * f_value(&ctx, &x1, &mut c) + 0.5 * f_value(&ctx, &x2, &mut c);
                assert!(lhs <= rhs + 1e-10);
            }
        }
    }

    #[test]
    fn lipschitz_bounds() {
        // classical H = 2I
        let n = 3;
        let mut h = Mat::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = 2.0;
        }
        let inst = DetectionInstance {
            h,
            y: vec![0.0; n],
            sigma: 1.0,
            x_true: vec![1.0; n],
            mode: DetectionMode::Classical,
            v: vec![0.0; n],
        };
        let ctx = build_context(&inst, 0.0).unwrap();
        let b = lipschitz_bound(&ctx);
        assert!(b >= 4.0 && b <= 4.0 * 1.0011, "bound {b}");
        // one-bit rank-1: single row (3, 4) -> 25
        let single = ObjectiveContext::OneBit {
            g: Mat::from_vec(1, 2, vec![3.0, 4.0]),
            sigma_hat: 1.0,
            sigma0: 0.0,
        };
        let b1 = lipschitz_bound(&single);
        assert!(b1 >= 25.0 * 0.999 && b1 <= 25.0 * 1.0011, "bound {b1}");
    }

    #[test]
    fn lipschitz_bound_dominates_hessian_eigenvalues() {
        // one-bit 20 x 8 context: Hessian of f at random box points has
        // max eigenvalue below the analytic bound
        let inst = one_bit_instance(10, 4, 10.0, 4);
        let ctx = build_context(&inst, 0.5).unwrap();
        let bound = lipschitz_bound(&ctx);
        let g = match &ctx {
            ObjectiveContext::OneBit { g, .. } => g.clone(),
            _ => unreachable!(),
        };
        let n = inst.n();
        let mut rng = stream_rng(60, 0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Hessian = sum_i c_i g_i g_i^T with c_i = Psi(t)(Psi(t)+t)
            let mut hess = Mat::zeros(n, n);
            for i in 0..inst.m() {
                let t = dot(g.row(i), &x);
                let p = psi(t);
                let cmul = p * (p + t);
                hess.add_outer(cmul, g.row(i), g.row(i));
            }
            let top = power_iteration_sym(&hess, 300, 1e-10);
            assert!(top <= bound * (1.0 + 1e-8), "top {top} bound {bound}");
        }
    }
}
