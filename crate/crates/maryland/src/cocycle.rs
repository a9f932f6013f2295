//! Transfer-matrix cocycles and Lyapunov exponents.
//!
//! The one-step matrices are
//!
//!   D(θ) = [[E − λ tan πθ, −1], [1, 0]]          (det 1, poles at θ = 1/2)
//!   F(θ) = cos πθ · D(θ)                          (pole-free, det cos²πθ)
//!
//! and products over the orbit θ, θ+α, … are held as [`ScaledMatrix2`] so
//! 10^5-step cocycles stay in range. The Lyapunov exponent L(E) comes from
//! four routes that must agree: the closed form
//! e^L + e^{−L} = (√((2+E)²+λ²) + √((2−E)²+λ²))/2, the log-modulus of the
//! larger root of x² − (iλ−E)x + 1 = 0, and Birkhoff averages of the D- and
//! F-products (the latter shifted by ln 2, since L̃ = L − ln 2).

use crate::determinants::{ptilde_eval, ModelParams};
use crate::error::{Error, Result};
use crate::math::{cos_pi, pairwise_sum, sin_pi, tan_pi, ScaledComplex, SignedLog};
use crate::torus::{torus_norm, Frequency, SINGULAR_PHASE_GUARD};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Fixed irrational micro-offset added to quadrature grids so grid points
/// never land exactly on zeros of P̃ or poles of tan.
const QUAD_MICRO_OFFSET: f64 = 1.414_213_562_373_095e-4; // 1e-4·√2
/// Secondary offset applied once if the first grid still hits a singularity.
const QUAD_RETRY_OFFSET: f64 = 1.732_050_807_568_877e-5; // 1e-5·√3

/// Midpoint quadrature grid on [0,1) with the irrational micro-offset.
fn quadrature_grid(grid_size: usize, extra: f64) -> Vec<f64> {
    (0..grid_size)
        .map(|i| ((i as f64 + 0.5) / grid_size as f64 + QUAD_MICRO_OFFSET + extra).fract())
        .collect()
}

/// A 2×2 real matrix stored as e^{log_scale} · entries, with entries
/// normalized so the largest absolute entry is 1 (except for the zero
/// matrix).
#[derive(Clone, Copy, Debug)]
pub struct ScaledMatrix2 {
    entries: [[f64; 2]; 2],
    log_scale: f64,
}

impl ScaledMatrix2 {
    pub fn identity() -> Self {
        ScaledMatrix2 {
            entries: [[1.0, 0.0], [0.0, 1.0]],
            log_scale: 0.0,
        }
    }

    pub fn from_entries(m: [[f64; 2]; 2]) -> Self {
        let mut s = ScaledMatrix2 {
            entries: m,
            log_scale: 0.0,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let max = self
            .entries
            .iter()
            .flatten()
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        if max > 0.0 && max != 1.0 {
            for row in &mut self.entries {
                for x in row {
                    *x /= max;
                }
            }
            self.log_scale += max.ln();
        }
    }

    pub fn entries(&self) -> &[[f64; 2]; 2] {
        &self.entries
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Entry (i, j) of the represented matrix, in signed-log form.
    pub fn entry(&self, i: usize, j: usize) -> SignedLog {
        SignedLog::from_mantissa_log(self.entries[i][j], self.log_scale)
    }

    /// self · rhs, renormalized.
    pub fn matmul(&self, rhs: &ScaledMatrix2) -> ScaledMatrix2 {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = ScaledMatrix2 {
            entries: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            log_scale: self.log_scale + rhs.log_scale,
        };
        out.normalize();
        out
    }

    /// Determinant of the represented matrix.
    pub fn det(&self) -> SignedLog {
        let m = &self.entries;
        let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        SignedLog::from_mantissa_log(d, 2.0 * self.log_scale)
    }

    /// ln ‖·‖_F of the represented matrix.
    pub fn log_frobenius(&self) -> f64 {
        let m = &self.entries;
        let f = (m[0][0] * m[0][0]
            + m[0][1] * m[0][1]
            + m[1][0] * m[1][0]
            + m[1][1] * m[1][1])
            .sqrt();
        f.ln() + self.log_scale
    }

    /// Exact inverse for a represented matrix of determinant 1: swap the
    /// diagonal, negate the off-diagonal, keep the scale.
    pub fn inverse_unimodular(&self) -> ScaledMatrix2 {
        let m = &self.entries;
        ScaledMatrix2 {
            entries: [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]],
            log_scale: self.log_scale,
        }
    }

    /// The represented matrix as plain floats; may overflow for long
    /// products.
    pub fn to_matrix(&self) -> [[f64; 2]; 2] {
        let s = self.log_scale.exp();
        let m = &self.entries;
        [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
    }
}

/// Which one-step cocycle a product uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    D,
    F,
}

/// One step of the singular cocycle at site phase θ'.
pub fn step_d(params: &ModelParams, theta_site: f64) -> Result<[[f64; 2]; 2]> {
    let dist = torus_norm(theta_site - 0.5);
    if dist <= SINGULAR_PHASE_GUARD {
        return Err(Error::SingularPhase {
            site: 0,
            dist,
            guard: SINGULAR_PHASE_GUARD,
        });
    }
    Ok([
        [params.energy - params.lambda * tan_pi(theta_site), -1.0],
        [1.0, 0.0],
    ])
}

/// One step of the regularized cocycle F = cos πθ · D; pole-free.
pub fn step_f(params: &ModelParams, theta_site: f64) -> [[f64; 2]; 2] {
    let c = cos_pi(theta_site);
    let s = sin_pi(theta_site);
    [
        [params.energy * c - params.lambda * s, -c],
        [c, 0.0],
    ]
}

fn step_d_inverse(params: &ModelParams, theta_site: f64) -> Result<[[f64; 2]; 2]> {
    let m = step_d(params, theta_site)?;
    // det = 1, so the inverse is the adjugate
    Ok([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
}

/// The k-step cocycle product at the params' θ: for k ≥ 1 the left-ordered
/// product over sites 0..k−1; k = 0 the identity; k ≤ −1 (D only) the exact
/// inverse relation through per-step adjugates.
pub fn transfer_product(params: &ModelParams, k: i64, kind: StepKind) -> Result<ScaledMatrix2> {
    transfer_product_at(params, params.theta, k, kind)
}

/// As [`transfer_product`] with an explicit base phase.
pub fn transfer_product_at(
    params: &ModelParams,
    theta: f64,
    k: i64,
    kind: StepKind,
) -> Result<ScaledMatrix2> {
    let alpha = params.alpha();
    let mut m = ScaledMatrix2::identity();
    if k == 0 {
        return Ok(m);
    }
    if k > 0 {
        for j in 0..k {
            let phase = theta + j as f64 * alpha;
            let step = match kind {
                StepKind::D => step_d(params, phase).map_err(|e| site_error(e, j))?,
                StepKind::F => step_f(params, phase),
            };
            m = ScaledMatrix2::from_entries(step).matmul(&m);
        }
        Ok(m)
    } else {
        if kind == StepKind::F {
            return Err(Error::InvalidParameter(
                "F-cocycle products are defined for k ≥ 0".into(),
            ));
        }
        for j in k..0 {
            let phase = theta + j as f64 * alpha;
            let inv = step_d_inverse(params, phase).map_err(|e| site_error(e, j))?;
            m = m.matmul(&ScaledMatrix2::from_entries(inv));
        }
        Ok(m)
    }
}

fn site_error(e: Error, site: i64) -> Error {
    match e {
        Error::SingularPhase { dist, guard, .. } => Error::SingularPhase { site, dist, guard },
        other => other,
    }
}

/// How a Lyapunov estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LyapunovMethod {
    ClosedForm,
    BirkhoffD,
    BirkhoffFPlusLn2,
    X2Root,
}

#[derive(Clone, Copy, Debug)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub k_used: i64,
    pub grid_size: usize,
    pub method: LyapunovMethod,
}

/// L(E) from the closed form e^L + e^{−L} = (√((2+E)²+λ²) + √((2−E)²+λ²))/2.
/// arccosh is evaluated as ln(x + √(x²−1)) with one Newton polish step so the
/// value is uniformly accurate down to R/2 = 1.
pub fn lyapunov_closed_form(energy: f64, lambda: f64) -> LyapunovEstimate {
    let r = (((2.0 + energy) * (2.0 + energy) + lambda * lambda).sqrt()
        + ((2.0 - energy) * (2.0 - energy) + lambda * lambda).sqrt())
        / 2.0;
    let x = r / 2.0; // ≥ 1 for λ > 0
    let mut l = (x + (x * x - 1.0).max(0.0).sqrt()).ln();
    let sh = l.sinh();
    if sh > 0.0 {
        l -= (l.cosh() - x) / sh;
    }
    LyapunovEstimate {
        value: l.max(0.0),
        k_used: 0,
        grid_size: 0,
        method: LyapunovMethod::ClosedForm,
    }
}

/// ln|x₂| for the larger-modulus root of x² − (iλ−E)x + 1 = 0, with the root
/// itself. The product of the roots is 1, so degenerate moduli means both on
/// the unit circle.
pub fn x2_root(energy: f64, lambda: f64) -> Result<(Complex64, f64)> {
    let b = Complex64::new(-energy, lambda);
    let disc = b * b - Complex64::new(4.0, 0.0);
    let sq = disc.sqrt();
    let r1 = (b + sq) / 2.0;
    let r2 = (b - sq) / 2.0;
    let x2 = if r1.norm_sqr() >= r2.norm_sqr() { r1 } else { r2 };
    let log_mag = 0.5 * x2.norm_sqr().ln();
    if log_mag.abs() < 1e-12 {
        return Err(Error::DegenerateRoots);
    }
    Ok((x2, log_mag))
}

/// Birkhoff estimate of L(E): the θ-grid average of (1/k)·ln‖M_k(θ)‖ for the
/// chosen cocycle. The F variant reports value + ln 2 so every estimate is on
/// the L scale. If a grid point trips the pole guard the grid is re-offset
/// once before giving up.
pub fn lyapunov_birkhoff(
    params: &ModelParams,
    k: usize,
    grid_size: usize,
    kind: StepKind,
) -> Result<LyapunovEstimate> {
    if k == 0 || grid_size == 0 {
        return Err(Error::InvalidParameter(
            "birkhoff estimate needs k ≥ 1 and a nonempty grid".into(),
        ));
    }
    let run = |extra: f64| -> Result<f64> {
        let grid = quadrature_grid(grid_size, extra);
        let vals: Result<Vec<f64>> = grid
            .par_iter()
            .map(|&theta| {
                let m = transfer_product_at(params, theta, k as i64, kind)?;
                Ok(m.log_frobenius() / k as f64)
            })
            .collect();
        Ok(pairwise_sum(&vals?) / grid_size as f64)
    };
    let mean = match run(0.0) {
        Ok(v) => v,
        Err(Error::SingularPhase { .. }) => run(QUAD_RETRY_OFFSET)?,
        Err(e) => return Err(e),
    };
    let (value, method) = match kind {
        StepKind::D => (mean, LyapunovMethod::BirkhoffD),
        StepKind::F => (mean + LN_2, LyapunovMethod::BirkhoffFPlusLn2),
    };
    Ok(LyapunovEstimate {
        value,
        k_used: k as i64,
        grid_size,
        method,
    })
}

/// The determinant sequence d_k = (iλ−E)d_{k−1} − d_{k−2}, d_0 = 1,
/// d_1 = iλ−E, in scaled complex form, together with its growth diagnostics.
#[derive(Clone, Debug)]
pub struct DSequence {
    pub values: Vec<ScaledComplex>,
}

impl DSequence {
    pub fn value(&self, j: usize) -> ScaledComplex {
        self.values[j]
    }

    /// f_j(0) = d_j / (−2)^j in scaled form.
    pub fn f0(&self, j: usize) -> ScaledComplex {
        let d = self.values[j];
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        ScaledComplex {
            value: d.value * sign,
            log_scale: d.log_scale - j as f64 * LN_2,
        }
    }

    /// f_j(0) as a plain complex number; exact scaling by (−1/2)^j, valid
    /// while the magnitudes stay in floating range.
    pub fn f0_complex(&self, j: usize) -> Complex64 {
        self.values[j].to_complex() * (-0.5f64).powi(j as i32)
    }

    /// |d_k| / |d_{k−1}|: the rate estimator free of the constant in
    /// |d_k| ~ C|x₂|^{k−1}; converges to |x₂| geometrically.
    pub fn ratio_growth(&self, k: usize) -> f64 {
        (self.values[k].log_abs() - self.values[k - 1].log_abs()).exp()
    }

    /// |d_k|^{1/(k−1)}: the naive root; carries the k-th root of the
    /// constant C and so approaches |x₂| only like exp(ln C / (k−1)).
    pub fn root_growth(&self, k: usize) -> f64 {
        (self.values[k].log_abs() / (k - 1) as f64).exp()
    }
}

pub fn d_sequence(energy: f64, lambda: f64, k: usize) -> DSequence {
    let b = Complex64::new(-energy, lambda); // iλ − E
    let mut values = Vec::with_capacity(k + 1);
    values.push(ScaledComplex::from_complex(Complex64::new(1.0, 0.0)));
    if k == 0 {
        return DSequence { values };
    }
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = b;
    let mut scale = 0.0;
    values.push(ScaledComplex {
        value: cur,
        log_scale: scale,
    });
    for _ in 2..=k {
        let next = b * cur - prev;
        prev = cur;
        cur = next;
        let m = cur.norm().max(prev.norm());
        if m > 1e140 {
            prev /= m;
            cur /= m;
            scale += m.ln();
        }
        values.push(ScaledComplex {
            value: cur,
            log_scale: scale,
        });
    }
    DSequence { values }
}

/// Midpoint-rule average of (1/k)·ln|P̃_k(θ)| over θ ∈ [0,1), reported with
/// the asymptotic lower bound L − ln 2, the upper envelope L̃ + ε, and the
/// grid maximum of the same quantity.
#[derive(Clone, Copy, Debug)]
pub struct AvgLogPtilde {
    pub value: f64,
    pub max_value: f64,
    pub lower_bound: f64,
    pub upper_envelope: f64,
    pub k: usize,
    pub grid_size: usize,
}

pub fn avg_log_ptilde(params: &ModelParams, k: usize, grid_size: usize, epsilon: f64) -> AvgLogPtilde {
    assert!(k >= 1 && grid_size >= 1);
    let l = lyapunov_closed_form(params.energy, params.lambda).value;
    let run = |extra: f64| -> Vec<f64> {
        quadrature_grid(grid_size, extra)
            .par_iter()
            .map(|&theta| ptilde_eval(params, theta, k).log_mag() / k as f64)
            .collect()
    };
    let mut vals = run(0.0);
    if vals.iter().any(|v| !v.is_finite()) {
        vals = run(QUAD_RETRY_OFFSET);
    }
    AvgLogPtilde {
        value: pairwise_sum(&vals) / grid_size as f64,
        max_value: vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)),
        lower_bound: l - LN_2,
        upper_envelope: (l - LN_2) + epsilon,
        k,
        grid_size,
    }
}

/// ∏_{j=a}^{b} cos π(θ+jα) in signed-log form, with the per-site average of
/// ln|cos| shifted by ln 2 as the Birkhoff diagnostic (it heads to 0).
#[derive(Clone, Copy, Debug)]
pub struct CosProduct {
    pub value: SignedLog,
    pub per_site_avg_plus_ln2: f64,
}

pub fn cos_product(theta: f64, freq: &Frequency, a: i64, b: i64) -> CosProduct {
    assert!(a <= b, "cos_product needs a ≤ b");
    let alpha = freq.value();
    let mut sign = 1i8;
    let mut log_sum = 0.0;
    for j in a..=b {
        let c = cos_pi(theta + j as f64 * alpha);
        if c == 0.0 {
            return CosProduct {
                value: SignedLog::ZERO,
                per_site_avg_plus_ln2: f64::NEG_INFINITY,
            };
        }
        if c < 0.0 {
            sign = -sign;
        }
        log_sum += c.abs().ln();
    }
    let len = (b - a + 1) as f64;
    CosProduct {
        value: SignedLog::new(sign, log_sum),
        per_site_avg_plus_ln2: log_sum / len + LN_2,
    }
}
