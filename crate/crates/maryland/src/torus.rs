//! Torus distance, continued-fraction expansion of frequencies, Diophantine
//! diagnostics, and the singular-phase guard.
//!
//! A frequency α ∈ (0,1) carries its partial quotients a_1, a_2, … and the
//! convergents p_n/q_n built by q_{n+1} = a_{n+1} q_n + q_{n-1} (q_0 = 1,
//! q_1 = a_1). The convergent denominators drive every interval scheme
//! downstream, so they are kept as exact integers.

use crate::error::{Error, Result};

/// Distance below which a phase counts as sitting on a pole of tan π(·).
/// Closer than this, the potential has no relative accuracy left.
pub const SINGULAR_PHASE_GUARD: f64 = 1e-9;

/// Gauss-map remainders below this are treated as floating-point noise and
/// end the expansion.
pub const GAUSS_REMAINDER_FLOOR: f64 = 9.094947017729282e-13; // 2^-40

/// Default denominator cap when building a frequency from coefficients.
pub const DEFAULT_MAX_Q: u64 = 1_000_000_000_000; // 10^12

/// ‖x‖_T = dist(x, Z). Even, 1-periodic, valued in [0, 1/2].
#[inline]
pub fn torus_norm(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// One rational approximant p/q of a frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
}

/// An irrational frequency in (0,1) with its continued-fraction data.
#[derive(Clone, Debug)]
pub struct Frequency {
    value: f64,
    cf_coeffs: Vec<u64>,
    convergents: Vec<Convergent>,
}

impl Frequency {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn cf_coeffs(&self) -> &[u64] {
        &self.cf_coeffs
    }

    /// Convergents starting from p_0/q_0 = 0/1.
    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    /// Denominator q_n.
    pub fn q(&self, n: usize) -> Option<u64> {
        self.convergents.get(n).map(|c| c.q)
    }

    /// The golden mean (√5−1)/2 = [0; 1, 1, 1, …].
    pub fn golden() -> Self {
        frequency_from_coeffs(&[1]).expect("golden mean coefficients are valid")
    }

    /// √2 − 1 = [0; 2, 2, 2, …].
    pub fn sqrt2_minus_1() -> Self {
        frequency_from_coeffs(&[2]).expect("constant coefficients are valid")
    }
}

/// Build the convergent list for a coefficient stream, stopping before the
/// denominator exceeds `max_q` or overflows.
fn convergents_from_coeff_iter<I: Iterator<Item = u64>>(coeffs: I, max_q: u64) -> (Vec<u64>, Vec<Convergent>) {
    let mut used = Vec::new();
    let mut conv = vec![Convergent { p: 0, q: 1 }];
    let (mut p_prev, mut q_prev) = (1u64, 0u64); // p_{-1}, q_{-1}
    let (mut p_cur, mut q_cur) = (0u64, 1u64); // p_0, q_0
    for a in coeffs {
        let q_next = match a.checked_mul(q_cur).and_then(|x| x.checked_add(q_prev)) {
            Some(q) if q <= max_q => q,
            _ => break,
        };
        let p_next = match a.checked_mul(p_cur).and_then(|x| x.checked_add(p_prev)) {
            Some(p) => p,
            None => break,
        };
        used.push(a);
        conv.push(Convergent { p: p_next, q: q_next });
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (p_next, q_next);
    }
    (used, conv)
}

/// Gauss-map expansion of a decimal frequency, truncated at the first
/// denominator above `max_q` or when the remainder drops below the
/// floating-point floor.
pub fn expand_cf(alpha: f64, max_q: u64) -> Result<Frequency> {
    if !(alpha > 0.0 && alpha < 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    if max_q < 1 {
        return Err(Error::InvalidParameter("max_q must be ≥ 1".into()));
    }
    let mut raw_coeffs = Vec::new();
    let mut x = alpha;
    loop {
        let recip = 1.0 / x;
        let a = recip.floor();
        if a < 1.0 || !a.is_finite() {
            break;
        }
        raw_coeffs.push(a as u64);
        x = recip - a;
        if x == 0.0 {
            return Err(Error::RationalInput {
                steps: raw_coeffs.len(),
            });
        }
        if x < GAUSS_REMAINDER_FLOOR {
            break;
        }
        // q grows at least like Fibonacci, so 90 coefficients is already far
        // beyond double-precision resolution.
        if raw_coeffs.len() >= 90 {
            break;
        }
    }
    let (cf_coeffs, convergents) = convergents_from_coeff_iter(raw_coeffs.into_iter(), max_q);
    Ok(Frequency {
        value: alpha,
        cf_coeffs,
        convergents,
    })
}

/// Frequency with the prescribed partial quotients, extended periodically by
/// the final coefficient. The value is computed exactly from the quadratic
/// fixed point of the repeating tail, so convergents and value agree to
/// machine precision.
pub fn frequency_from_coeffs(coeffs: &[u64]) -> Result<Frequency> {
    frequency_from_coeffs_capped(coeffs, DEFAULT_MAX_Q)
}

/// As [`frequency_from_coeffs`] with an explicit denominator cap.
pub fn frequency_from_coeffs_capped(coeffs: &[u64], max_q: u64) -> Result<Frequency> {
    if coeffs.is_empty() {
        return Err(Error::EmptyCoefficients);
    }
    if coeffs.contains(&0) {
        return Err(Error::InvalidParameter(
            "continued-fraction coefficients must be positive".into(),
        ));
    }
    // Tail [m; m, m, ...] has complete quotient ζ = (m + √(m²+4))/2.
    let m = *coeffs.last().unwrap() as f64;
    let zeta = (m + (m * m + 4.0).sqrt()) / 2.0;
    let mut x = zeta;
    for &a in coeffs[..coeffs.len() - 1].iter().rev() {
        x = a as f64 + 1.0 / x;
    }
    let value = 1.0 / x;

    let last = *coeffs.last().unwrap();
    let stream = coeffs
        .iter()
        .copied()
        .chain(std::iter::repeat(last))
        .take(10_000);
    let (cf_coeffs, convergents) = convergents_from_coeff_iter(stream, max_q);
    Ok(Frequency {
        value,
        cf_coeffs,
        convergents,
    })
}

/// Diophantine diagnostics of a stored frequency: the finite-scale estimate
/// of β = limsup ln q_{n+1}/q_n, and the margins ‖q_nα‖·e^{εq_n} against the
/// lower bound ‖q_nα‖ ≥ e^{−εq_n}.
#[derive(Clone, Debug)]
pub struct DiophantineReport {
    pub beta_estimate: f64,
    pub per_n_ratios: Vec<f64>,
    pub qnalpha_margin: Vec<f64>,
}

/// β-estimate over the convergent tail starting at `tail_from`, with margins
/// for a caller-supplied diagnostic ε.
pub fn beta_estimate(freq: &Frequency, tail_from: usize, epsilon: f64) -> Result<DiophantineReport> {
    let conv = freq.convergents();
    if conv.len() < tail_from + 2 {
        return Err(Error::InsufficientConvergents {
            needed: tail_from + 2,
            available: conv.len(),
        });
    }
    let per_n_ratios: Vec<f64> = conv
        .windows(2)
        .map(|w| (w[1].q as f64).ln() / w[0].q as f64)
        .collect();
    let beta = per_n_ratios[tail_from..]
        .iter()
        .fold(f64::NEG_INFINITY, |m, &r| m.max(r));
    let qnalpha_margin: Vec<f64> = conv
        .iter()
        .map(|c| {
            let norm = torus_norm(c.q as f64 * freq.value());
            (norm.ln() + epsilon * c.q as f64).exp()
        })
        .collect();
    Ok(DiophantineReport {
        beta_estimate: beta,
        per_n_ratios,
        qnalpha_margin,
    })
}

/// min over n in the (inclusive) window of ‖θ + nα − 1/2‖_T: how close any
/// lattice site's phase comes to the tangent pole. Callers compare against
/// [`SINGULAR_PHASE_GUARD`].
pub fn singular_phase_distance(theta: f64, freq: &Frequency, window: (i64, i64)) -> f64 {
    let alpha = freq.value();
    let mut min = f64::INFINITY;
    for n in window.0..=window.1 {
        let d = torus_norm(theta + n as f64 * alpha - 0.5);
        if d < min {
            min = d;
        }
    }
    min
}
