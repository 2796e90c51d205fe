//! Scene generation: complex MIMO channels, QPSK symbols, noise, one-bit
//! quantization, and the complex-to-real lifting the solvers consume.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_sqrt, CMat, Mat};
use crate::rng::Stream;

/// Observation model: one-bit quantized or unquantized (classical).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionMode {
    OneBit,
    Classical,
}

/// Channel statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    /// Element-wise i.i.d. circular Gaussian, mean zero, unit variance.
    RayleighIid,
    /// `R_r^{1/2} H~ R_t^{1/2}` with exponential correlation coefficient `r`.
    KroneckerCorrelated { r: Complex64 },
}

/// What to generate: channel statistics, complex dimensions, master seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub m_c: usize,
    pub n_c: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelError {
    /// Correlation coefficient with `|r| > 1`.
    InvalidCorrelation,
    /// Non-positive matrix dimension.
    InvalidDimension,
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::InvalidCorrelation => write!(f, "correlation coefficient must satisfy |r| <= 1"),
            ModelError::InvalidDimension => write!(f, "matrix dimensions must be positive"),
        }
    }
}

/// One complex-domain realization before lifting.
#[derive(Clone, Debug)]
pub struct ComplexScene {
    pub h_c: CMat,
    pub x_c: Vec<Complex64>,
    pub v_c: Vec<Complex64>,
    pub y_c: Vec<Complex64>,
    pub sigma_c_sq: f64,
    pub mode: DetectionMode,
}

/// One real-valued detection problem `(H, y, sigma, x_true)`.
///
/// `M = 2 M_C`, `N = 2 N_C`, `sigma^2 = sigma_C^2 / 2`, and `H` carries the
/// block structure of the complex-to-real lifting.
#[derive(Clone, Debug)]
pub struct DetectionInstance {
    pub h: Mat,
    pub y: Vec<f64>,
    pub sigma: f64,
    pub x_true: Vec<f64>,
    pub mode: DetectionMode,
    /// Lifted noise draw, kept for consistency checks.
    pub v: Vec<f64>,
}

impl DetectionInstance {
    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }
}

/// Sign with the `sgn(0) = +1` convention.
#[inline]
pub fn sgn(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Element-wise one-bit quantizer: sign of real and imaginary parts.
pub fn quantize_one_bit(z: &[Complex64]) -> Vec<Complex64> {
    z.iter().map(|c| Complex64::new(sgn(c.re), sgn(c.im))).collect()
}

fn standard_normal(rng: &mut Stream) -> f64 {
    rng.sample(StandardNormal)
}

/// Exponential correlation matrix `[R]_{i,j} = r^{j-i}` for `i <= j`,
/// conjugate-symmetric otherwise.
fn correlation_matrix(n: usize, r: Complex64) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = (j as i64 - i as i64).unsigned_abs() as u32;
            let v = r.powu(p);
            m[(i, j)] = if i <= j { v } else { v.conj() };
        }
    }
    m
}

/// Draw a complex channel matrix according to `spec.kind`.
pub fn generate_channel(spec: &ChannelSpec, rng: &mut Stream) -> Result<CMat, ModelError> {
    if spec.m_c == 0 || spec.n_c == 0 {
        return Err(ModelError::InvalidDimension);
    }
    if let ChannelKind::KroneckerCorrelated { r } = spec.kind {
        if r.norm_sqr() > 1.0 + 1e-15 {
            return Err(ModelError::InvalidCorrelation);
        }
    }
    // unit-variance circular Gaussian: each part has variance 1/2
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut h = CMat::zeros(spec.m_c, spec.n_c);
    for i in 0..spec.m_c {
        for j in 0..spec.n_c {
            h[(i, j)] = Complex64::new(s * standard_normal(rng), s * standard_normal(rng));
        }
    }
    match spec.kind {
        ChannelKind::RayleighIid => Ok(h),
        ChannelKind::KroneckerCorrelated { r } => {
            let rr = hermitian_sqrt(&correlation_matrix(spec.m_c, r));
            let rt = hermitian_sqrt(&correlation_matrix(spec.n_c, r));
            Ok(rr.matmul(&h).matmul(&rt))
        }
    }
}

/// Noise variance from the SNR definition
/// `SNR = E||H_C x_C||^2 / E||v_C||^2` with `E||H_C x_C||^2 = 2 N_C M_C`
/// (unit-diagonal correlation matrices keep this valid for the Kronecker
/// model as well).
pub fn sigma_c_sq_for_snr(n_c: usize, snr_db: f64) -> f64 {
    2.0 * n_c as f64 / libm::pow(10.0, snr_db / 10.0)
}

/// Draw a full complex scene at the given SNR.
pub fn synthesize_scene(
    spec: &ChannelSpec,
    snr_db: f64,
    mode: DetectionMode,
    rng: &mut Stream,
) -> Result<ComplexScene, ModelError> {
    let h_c = generate_channel(spec, rng)?;
    let x_c: Vec<Complex64> = (0..spec.n_c)
        .map(|_| {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(re, im)
        })
        .collect();
    let sigma_c_sq = sigma_c_sq_for_snr(spec.n_c, snr_db);
    let part_sd = libm::sqrt(sigma_c_sq / 2.0);
    let v_c: Vec<Complex64> = (0..spec.m_c)
        .map(|_| Complex64::new(part_sd * standard_normal(rng), part_sd * standard_normal(rng)))
        .collect();
    let mut y_c = h_c.matvec(&x_c);
    for (y, v) in y_c.iter_mut().zip(&v_c) {
        *y += v;
    }
    if mode == DetectionMode::OneBit {
        y_c = quantize_one_bit(&y_c);
    }
    Ok(ComplexScene { h_c, x_c, v_c, y_c, sigma_c_sq, mode })
}

/// Real lifting of a complex vector: `[Re; Im]`.
pub fn lift_vector(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
}

/// Inverse of [`lift_vector`].
pub fn unlift_vector(x: &[f64]) -> Vec<Complex64> {
    let n = x.len() / 2;
    (0..n).map(|i| Complex64::new(x[i], x[i + n])).collect()
}

/// Real lifting of a complex matrix: `[[Re, -Im], [Im, Re]]`.
pub fn lift_matrix(h_c: &CMat) -> Mat {
    let (mc, nc) = (h_c.rows(), h_c.cols());
    let mut h = Mat::zeros(2 * mc, 2 * nc);
    for i in 0..mc {
        for j in 0..nc {
            let z = h_c[(i, j)];
            h[(i, j)] = z.re;
            h[(i, j + nc)] = -z.im;
            h[(i + mc, j)] = z.im;
            h[(i + mc, j + nc)] = z.re;
        }
    }
    h
}

/// Inverse of [`lift_matrix`] (reads the top blocks).
pub fn unlift_matrix(h: &Mat) -> CMat {
    let mc = h.rows() / 2;
    let nc = h.cols() / 2;
    let mut out = CMat::zeros(mc, nc);
    for i in 0..mc {
        for j in 0..nc {
            out[(i, j)] = Complex64::new(h[(i, j)], h[(i + mc, j)]);
        }
    }
    out
}

/// Lift a complex scene to the real-valued detection instance.
pub fn lift_scene(scene: &ComplexScene) -> DetectionInstance {
    DetectionInstance {
        h: lift_matrix(&scene.h_c),
        y: lift_vector(&scene.y_c),
        sigma: libm::sqrt(scene.sigma_c_sq / 2.0),
        x_true: lift_vector(&scene.x_c),
        mode: scene.mode,
        v: lift_vector(&scene.v_c),
    }
}

/// Draw a scene and lift it in one step.
pub fn synthesize_instance(
    spec: &ChannelSpec,
    snr_db: f64,
    mode: DetectionMode,
    rng: &mut Stream,
) -> Result<DetectionInstance, ModelError> {
    Ok(lift_scene(&synthesize_scene(spec, snr_db, mode, rng)?))
}
