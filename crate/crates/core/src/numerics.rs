//! Numerically stable scalar kernels: the standard normal CDF `phi`, its
//! logarithm `log_phi`, and the inverse Mills ratio `psi`, plus the
//! per-detection operation counters.
//!
//! The tails matter here: the one-bit ML objective sums `-log Phi(g_i^T x)`
//! and its gradient needs `Psi(t) = pdf(t) / Phi(t)`, both evaluated at
//! arguments that can reach far into the left tail where `Phi` underflows.
//! Left of `t = -6` both are computed from the Mills-ratio continued
//! fraction instead of `Phi` itself.

use core::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7; // ln(sqrt(2*pi))
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const TAIL_SWITCH: f64 = -6.0;

/// Standard normal CDF. NaN propagates.
#[inline]
pub fn phi(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// Standard normal log-density `-t^2/2 - ln(sqrt(2 pi))`.
#[inline]
pub fn log_pdf(t: f64) -> f64 {
    -0.5 * t * t - LN_SQRT_2PI
}

/// Standard normal density.
#[inline]
pub fn pdf(t: f64) -> f64 {
    libm::exp(-0.5 * t * t) / libm::sqrt(2.0 * PI)
}

/// Upper-tail Mills ratio `Phi(-x) / pdf(x)` for `x > 0`, by the Laplace
/// continued fraction `1/(x + 1/(x + 2/(x + 3/(x + ...))))` evaluated with
/// the modified Lentz scheme.
fn mills(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..=500u32 {
        let a = if n == 1 { 1.0 } else { (n - 1) as f64 };
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// `ln Phi(t)`, with no underflow for arbitrarily negative `t`.
pub fn log_phi(t: f64) -> f64 {
    if t.is_nan() {
        return t;
    }
    if t >= 0.0 {
        // Phi(t) = 1 - Phi(-t); log1p keeps precision as Phi saturates
        libm::log1p(-phi(-t))
    } else if t >= TAIL_SWITCH {
        libm::log(phi(t))
    } else {
        log_pdf(t) + libm::log(mills(-t))
    }
}

/// Inverse Mills ratio `Psi(t) = pdf(t) / Phi(t)`; strictly positive and
/// strictly decreasing.
pub fn psi(t: f64) -> f64 {
    if t.is_nan() {
        return t;
    }
    if t < TAIL_SWITCH {
        1.0 / mills(-t)
    } else {
        libm::exp(log_pdf(t) - log_phi(t))
    }
}

/// Derivative of `Psi`, computed from an already-evaluated `psi_t = psi(t)`:
/// `Psi'(t) = -Psi(t) (Psi(t) + t)`.
#[inline]
pub fn psi_deriv_from(psi_t: f64, t: f64) -> f64 {
    -psi_t * (psi_t + t)
}

/// Per-detection operation counters.
///
/// `flops` counts `+,-,*,/,exp,log` as one each; `phi_calls` counts
/// evaluations of `Phi` (including those inside `log_phi` and `psi`)
/// separately. Counters are worker-local and merged at the end, never
/// shared mutable state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub flops: u64,
    pub phi_calls: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add_flops(&mut self, n: u64) {
        self.flops += n;
    }

    #[inline]
    pub fn add_phi(&mut self, n: u64) {
        self.phi_calls += n;
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.flops += other.flops;
        self.phi_calls += other.phi_calls;
    }
}
