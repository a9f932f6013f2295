//! The operator on finite boxes: the tangent potential, characteristic
//! determinants P_k = det[(E−H)|_{[0,k−1]}] and their pole-free
//! regularization P̃_k, Sturm-sequence eigenvalue counting, bisection
//! eigensolving, and solution sequences of the difference equation.
//!
//! P satisfies P_k = (E − λ tan π(θ+(k−1)α)) P_{k−1} − P_{k−2}, which blows
//! up at the poles of tan. Multiplying through by the cosine product gives
//! the recurrence actually used for anything long:
//!
//!   P̃_k = (E cos t_{k−1} − λ sin t_{k−1}) P̃_{k−1} − cos t_{k−1} cos t_{k−2} P̃_{k−2},
//!
//! with t_j = π(θ + jα). This is pole-free, and the running pair is
//! renormalized every step so |P̃_k| ~ e^{L̃k} never overflows.

use crate::error::{Error, Result};
use crate::math::{cos_pi, sin_pi, tan_pi, SignedLog};
use crate::torus::{torus_norm, Frequency, SINGULAR_PHASE_GUARD};

/// Mantissa magnitude at which running recurrence pairs are renormalized.
const RESCALE_LIMIT: f64 = 1e140;

/// Eigenvalue cap for [`eig_in_window`].
pub const MAX_WINDOW_EIGS: usize = 64;

/// One parameter point of the model: coupling λ > 0, frequency α with its
/// continued-fraction data, phase θ, and energy E.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub lambda: f64,
    pub freq: Frequency,
    pub theta: f64,
    pub energy: f64,
}

impl ModelParams {
    // negated comparisons so NaN inputs fail validation too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(lambda: f64, freq: Frequency, theta: f64, energy: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be positive, got {lambda}"
            )));
        }
        if !theta.is_finite() || !energy.is_finite() {
            return Err(Error::InvalidParameter(
                "theta and energy must be finite".into(),
            ));
        }
        Ok(ModelParams {
            lambda,
            freq,
            theta,
            energy,
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.freq.value()
    }

    /// θ + nα, unreduced; the trig kernels reduce mod 1 themselves.
    #[inline]
    pub fn site_phase(&self, n: i64) -> f64 {
        self.theta + n as f64 * self.alpha()
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        let mut p = self.clone();
        p.energy = energy;
        p
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        let mut p = self.clone();
        p.theta = theta;
        p
    }

    /// Distance of site n's phase to the pole set 1/2 + Z.
    #[inline]
    pub fn pole_distance(&self, n: i64) -> f64 {
        torus_norm(self.site_phase(n) - 0.5)
    }

    pub fn ensure_nonsingular(&self, n: i64) -> Result<()> {
        let dist = self.pole_distance(n);
        if dist <= SINGULAR_PHASE_GUARD {
            Err(Error::SingularPhase {
                site: n,
                dist,
                guard: SINGULAR_PHASE_GUARD,
            })
        } else {
            Ok(())
        }
    }

    /// Guard every site of an inclusive window.
    pub fn ensure_window(&self, lo: i64, hi: i64) -> Result<()> {
        for n in lo..=hi {
            self.ensure_nonsingular(n)?;
        }
        Ok(())
    }
}

/// v_n = λ tan π(θ + nα).
pub fn potential(params: &ModelParams, n: i64) -> Result<f64> {
    params.ensure_nonsingular(n)?;
    Ok(params.lambda * tan_pi(params.site_phase(n)))
}

/// Which determinant family a sequence holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetKind {
    P,
    Ptilde,
}

/// P_0 … P_k or P̃_0 … P̃_k in signed-log form; values\[0\] = 1 exactly.
#[derive(Clone, Debug)]
pub struct DetSequence {
    pub values: Vec<SignedLog>,
    pub kind: DetKind,
}

impl DetSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, k: usize) -> SignedLog {
        self.values[k]
    }

    pub fn last(&self) -> SignedLog {
        *self.values.last().expect("sequence holds at least P_0")
    }

    /// Indices k ≥ k_min whose value violates the upper envelope
    /// |P̃_k| ≤ e^{(l_tilde + epsilon) k}.
    pub fn envelope_violations(&self, l_tilde: f64, epsilon: f64, k_min: usize) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .skip(k_min.max(1))
            .filter(|(k, v)| v.log_mag() > (l_tilde + epsilon) * *k as f64)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Core P̃ recurrence over phases t_j supplied by `phase`; calls `record`
/// with (index, mantissa, log_scale) for every 0 ≤ j ≤ k.
fn ptilde_run<P, R>(energy: f64, lambda: f64, k: usize, phase: P, mut record: R)
where
    P: Fn(usize) -> f64,
    R: FnMut(usize, f64, f64),
{
    record(0, 1.0, 0.0);
    if k == 0 {
        return;
    }
    let t0 = phase(0);
    let mut c_prev = cos_pi(t0);
    let mut p_prev = 1.0;
    let mut p_cur = energy * c_prev - lambda * sin_pi(t0);
    let mut scale = 0.0;
    record(1, p_cur, scale);
    for j in 2..=k {
        let t = phase(j - 1);
        let c = cos_pi(t);
        let p_next = (energy * c - lambda * sin_pi(t)) * p_cur - c * c_prev * p_prev;
        p_prev = p_cur;
        p_cur = p_next;
        c_prev = c;
        let m = p_cur.abs().max(p_prev.abs());
        if m > RESCALE_LIMIT || (m > 0.0 && m < 1.0 / RESCALE_LIMIT) {
            p_cur /= m;
            p_prev /= m;
            scale += m.ln();
        }
        record(j, p_cur, scale);
    }
}

/// P̃_0 … P̃_k at the params' own θ.
pub fn ptilde_sequence(params: &ModelParams, k: usize) -> DetSequence {
    ptilde_sequence_at(params, params.theta, k)
}

/// P̃_0 … P̃_k as a function of an explicit θ (period 2 in θ).
pub fn ptilde_sequence_at(params: &ModelParams, theta: f64, k: usize) -> DetSequence {
    let alpha = params.alpha();
    let mut values = vec![SignedLog::ZERO; k + 1];
    ptilde_run(
        params.energy,
        params.lambda,
        k,
        |j| theta + j as f64 * alpha,
        |j, m, s| values[j] = SignedLog::from_mantissa_log(m, s),
    );
    DetSequence {
        values,
        kind: DetKind::Ptilde,
    }
}

/// P̃_k(θ) for an explicit θ, without materializing the sequence.
pub fn ptilde_eval(params: &ModelParams, theta: f64, k: usize) -> SignedLog {
    let alpha = params.alpha();
    let mut out = SignedLog::ONE;
    ptilde_run(
        params.energy,
        params.lambda,
        k,
        |j| theta + j as f64 * alpha,
        |j, m, s| {
            if j == k {
                out = SignedLog::from_mantissa_log(m, s);
            }
        },
    );
    out
}

/// P̃_k(θ + shift·α), with phases formed directly from the integer site
/// index so no rounding accumulates in the shift.
pub fn ptilde_eval_shifted(params: &ModelParams, shift: i64, k: usize) -> SignedLog {
    let alpha = params.alpha();
    let theta = params.theta;
    let mut out = SignedLog::ONE;
    ptilde_run(
        params.energy,
        params.lambda,
        k,
        |j| theta + (shift + j as i64) as f64 * alpha,
        |j, m, s| {
            if j == k {
                out = SignedLog::from_mantissa_log(m, s);
            }
        },
    );
    out
}

/// P_0 … P_k at the params' own θ. P_{-1} = 0 and P_0 = 1 anchor the
/// three-term recurrence; every visited site must clear the pole guard.
pub fn p_sequence(params: &ModelParams, k: usize) -> Result<DetSequence> {
    let mut values = vec![SignedLog::ZERO; k + 1];
    values[0] = SignedLog::ONE;
    if k == 0 {
        return Ok(DetSequence {
            values,
            kind: DetKind::P,
        });
    }
    params.ensure_window(0, k as i64 - 1)?;
    let mut p_prev = 1.0;
    let mut p_cur = params.energy - params.lambda * tan_pi(params.site_phase(0));
    let mut scale = 0.0;
    values[1] = SignedLog::from_mantissa_log(p_cur, scale);
    for j in 2..=k {
        let v = params.lambda * tan_pi(params.site_phase(j as i64 - 1));
        let p_next = (params.energy - v) * p_cur - p_prev;
        p_prev = p_cur;
        p_cur = p_next;
        let m = p_cur.abs().max(p_prev.abs());
        if m > RESCALE_LIMIT || (m > 0.0 && m < 1.0 / RESCALE_LIMIT) {
            p_cur /= m;
            p_prev /= m;
            scale += m.ln();
        }
        values[j] = SignedLog::from_mantissa_log(p_cur, scale);
    }
    Ok(DetSequence {
        values,
        kind: DetKind::P,
    })
}

/// g_k(tan πθ) = P̃_k(θ)/cos^k(πθ); 1-periodic in θ.
pub fn g_eval(params: &ModelParams, k: usize, theta: f64) -> Result<SignedLog> {
    let dist = torus_norm(theta - 0.5);
    if dist <= SINGULAR_PHASE_GUARD {
        return Err(Error::SingularPhase {
            site: 0,
            dist,
            guard: SINGULAR_PHASE_GUARD,
        });
    }
    let ptilde = ptilde_eval(params, theta, k);
    let cos_pow = SignedLog::from_f64(cos_pi(theta)).powi(k as i32);
    Ok(ptilde / cos_pow)
}

/// Number of eigenvalues of H restricted to [0, N−1] (zero boundary
/// conditions) strictly below `energy`, by the sign pattern of the minor
/// sequence P_0, P_1, …, P_N. An exact-zero minor is treated as positive,
/// the standard measure-zero tie-break.
pub fn sturm_count(params: &ModelParams, n: usize, energy: f64) -> Result<usize> {
    if n == 0 {
        return Ok(0);
    }
    params.ensure_window(0, n as i64 - 1)?;
    let lambda = params.lambda;
    let mut count = 0usize;
    let mut prev_sign = 1i8; // P_0 = 1
    let mut p_prev = 1.0f64;
    let mut p_cur = energy - lambda * tan_pi(params.site_phase(0));
    // An eigenvalue below E flips the minor sign of E−H at odd steps; in
    // terms of P the count is the number of consecutive sign agreements.
    for j in 1..=n {
        let sign = if p_cur >= 0.0 { 1i8 } else { -1i8 };
        if sign == prev_sign {
            count += 1;
        }
        prev_sign = sign;
        if j == n {
            break;
        }
        let v = lambda * tan_pi(params.site_phase(j as i64));
        let p_next = (energy - v) * p_cur - p_prev;
        p_prev = p_cur;
        p_cur = p_next;
        let m = p_cur.abs().max(p_prev.abs());
        if m > RESCALE_LIMIT || (m > 0.0 && m < 1.0 / RESCALE_LIMIT) {
            p_cur /= m;
            p_prev /= m;
        }
    }
    Ok(count)
}

/// Bisect for the j-th (0-based, counted from below over the whole box)
/// eigenvalue inside [lo, hi]. Caller guarantees count(lo) ≤ j < count(hi).
pub(crate) fn bisect_nth_eigenvalue(
    params: &ModelParams,
    n: usize,
    j: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(params, n, mid)? <= j {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Tridiagonal LU solve with partial pivoting. Returns the solution and the
/// log-magnitude of the determinant (for singularity screening).
pub(crate) fn tridiag_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let n = diag.len();
    assert!(n >= 1 && sub.len() == n - 1 && sup.len() == n - 1 && rhs.len() == n);
    let dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();

    for i in 0..n - 1 {
        if dl[i].abs() <= d[i].abs() {
            if d[i] == 0.0 {
                return Err(Error::SingularDenominator {
                    log_mag: f64::NEG_INFINITY,
                    floor: f64::NEG_INFINITY,
                });
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            if i < n - 2 {
                du2[i] = 0.0;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            du[i] = tmp;
            if i < n - 2 {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::SingularDenominator {
            log_mag: f64::NEG_INFINITY,
            floor: f64::NEG_INFINITY,
        });
    }
    let log_det: f64 = d.iter().map(|x| x.abs().ln()).sum();

    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok((x, log_det))
}

/// All eigenvalues of the [0, N−1] box inside (e_lo, e_hi) to absolute
/// accuracy `tol`, each with a unit eigenvector refined by three inverse
/// iterations; the residual ‖(H−E)v‖₂ is kept below 10·tol.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-robust validation
pub fn eig_in_window(
    params: &ModelParams,
    n: usize,
    e_lo: f64,
    e_hi: f64,
    tol: f64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if !(e_lo < e_hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(
            "need e_lo < e_hi and tol > 0".into(),
        ));
    }
    let c_lo = sturm_count(params, n, e_lo)?;
    let c_hi = sturm_count(params, n, e_hi)?;
    if c_hi - c_lo > MAX_WINDOW_EIGS {
        return Err(Error::WindowTooWide {
            found: c_hi - c_lo,
            cap: MAX_WINDOW_EIGS,
        });
    }
    let diag: Vec<f64> = (0..n as i64)
        .map(|i| potential(params, i))
        .collect::<Result<_>>()?;
    let ones = vec![1.0; n - 1];

    let mut out = Vec::with_capacity(c_hi - c_lo);
    for j in c_lo..c_hi {
        let e = bisect_nth_eigenvalue(params, n, j, e_lo, e_hi, tol)?;
        let shifted: Vec<f64> = diag.iter().map(|&v| v - e).collect();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..3 {
            let (w, _) = tridiag_solve(&ones, &shifted, &ones, &v)?;
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            v = w.iter().map(|x| x / norm).collect();
        }
        out.push((e, v));
    }
    Ok(out)
}

/// A solution of Hφ = Eφ on an integer range, in signed-log form.
#[derive(Clone, Debug)]
pub struct Solution {
    start: i64,
    values: Vec<SignedLog>,
}

impl Solution {
    pub fn new(start: i64, values: Vec<SignedLog>) -> Self {
        Solution { start, values }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last covered site (inclusive).
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn get(&self, site: i64) -> Option<SignedLog> {
        if site < self.start {
            return None;
        }
        self.values.get((site - self.start) as usize).copied()
    }

    pub fn value(&self, site: i64) -> SignedLog {
        self.get(site)
            .unwrap_or_else(|| panic!("site {site} outside solution range"))
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.start..=self.end()
    }
}

/// The unique solution of Hφ = Eφ with data (φ(0), φ(−1)) = `initial`,
/// evaluated on the inclusive integer range. The backward direction uses the
/// inverted one-step relation, which is exact because each step has
/// determinant one.
pub fn solution_sequence(
    params: &ModelParams,
    initial: (f64, f64),
    range: (i64, i64),
) -> Result<Solution> {
    let (phi0, phi_m1) = initial;
    if phi0 == 0.0 && phi_m1 == 0.0 {
        return Err(Error::TrivialInitial);
    }
    let (lo, hi) = range;
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "empty range [{lo}, {hi}]"
        )));
    }
    if hi >= 1 {
        params.ensure_window(0, hi - 1)?;
    }
    if lo <= -2 {
        params.ensure_window(lo + 1, -1)?;
    }

    let idx = |site: i64| (site - lo) as usize;
    let mut values = vec![SignedLog::ZERO; (hi - lo + 1) as usize];
    let mut store = |site: i64, mantissa: f64, scale: f64| {
        if site >= lo && site <= hi {
            values[idx(site)] = SignedLog::from_mantissa_log(mantissa, scale);
        }
    };
    store(-1, phi_m1, 0.0);
    store(0, phi0, 0.0);

    // forward from (φ(-1), φ(0))
    let mut prev = phi_m1;
    let mut cur = phi0;
    let mut scale = 0.0;
    for n in 0..hi {
        let v = params.lambda * tan_pi(params.site_phase(n));
        let next = (params.energy - v) * cur - prev;
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > RESCALE_LIMIT || (m > 0.0 && m < 1.0 / RESCALE_LIMIT) {
            cur /= m;
            prev /= m;
            scale += m.ln();
        }
        store(n + 1, cur, scale);
    }

    // backward from (φ(0), φ(-1)): φ(n−1) = (E − v_n)φ(n) − φ(n+1)
    let mut above = phi0;
    let mut at = phi_m1;
    scale = 0.0;
    let mut n = -1;
    while n > lo {
        let v = params.lambda * tan_pi(params.site_phase(n));
        let below = (params.energy - v) * at - above;
        above = at;
        at = below;
        let m = at.abs().max(above.abs());
        if m > RESCALE_LIMIT || (m > 0.0 && m < 1.0 / RESCALE_LIMIT) {
            at /= m;
            above /= m;
            scale += m.ln();
        }
        store(n - 1, at, scale);
        n -= 1;
    }

    Ok(Solution { start: lo, values })
}
