//! Numerical primitives: half-period-reduced trigonometry, signed-log
//! scalars for exponentially large/small quantities, scaled complex values,
//! and deterministic pairwise summation.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg};

/// sin(πx), computed after reducing x to [-1/2, 1/2] so that the result keeps
/// full relative accuracy near the zeros at integer x.
#[inline]
pub fn sin_pi(x: f64) -> f64 {
    let m = x.round();
    let r = x - m;
    let s = (PI * r).sin();
    if (m as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

/// cos(πx) with the same range reduction as [`sin_pi`]. Written as
/// sin(π(1/2 − |r|)) so the zeros at half-integer x are exact and keep full
/// relative accuracy.
#[inline]
pub fn cos_pi(x: f64) -> f64 {
    let m = x.round();
    let r = x - m;
    let c = (PI * (0.5 - r.abs())).sin();
    if (m as i64) & 1 == 0 {
        c
    } else {
        -c
    }
}

/// tan(πx) = sin(πx)/cos(πx); ±∞ at half-integers.
#[inline]
pub fn tan_pi(x: f64) -> f64 {
    sin_pi(x) / cos_pi(x)
}

/// Pairwise (cascade) summation: deterministic for a fixed slice regardless
/// of thread count, and with O(log n) error growth instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// A real number stored as (sign, ln|x|). All quantities that grow or decay
/// like e^{ck} for k in the thousands live in this representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    sign: i8,
    log_mag: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        log_mag: 0.0,
    };

    /// Build from an explicit sign and log-magnitude. A zero sign forces the
    /// canonical zero.
    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                log_mag,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                log_mag: x.abs().ln(),
            }
        }
    }

    /// From a mantissa and an accumulated log scale: represents
    /// mantissa · e^{log_scale}.
    pub fn from_mantissa_log(mantissa: f64, log_scale: f64) -> Self {
        if mantissa == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if mantissa > 0.0 { 1 } else { -1 },
                log_mag: mantissa.abs().ln() + log_scale,
            }
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    /// ln|x|; −∞ for zero.
    #[inline]
    pub fn log_mag(self) -> f64 {
        self.log_mag
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        SignedLog {
            sign: self.sign.abs(),
            log_mag: self.log_mag,
        }
    }

    /// Round-trip to f64; overflows to ±∞ and underflows to ±0 as usual.
    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.log_mag.exp()
    }

    pub fn recip(self) -> Self {
        SignedLog {
            sign: self.sign,
            log_mag: -self.log_mag,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if self.sign == 0 {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if n % 2 == 0 { 1 } else { self.sign };
        SignedLog {
            sign,
            log_mag: self.log_mag * n as f64,
        }
    }

    /// Compare absolute values.
    pub fn cmp_abs(self, other: Self) -> Ordering {
        self.log_mag
            .partial_cmp(&other.log_mag)
            .unwrap_or(Ordering::Equal)
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: self.sign * rhs.sign,
                log_mag: self.log_mag + rhs.log_mag,
            }
        }
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    // in log space division really is multiplication by the reciprocal
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: SignedLog) -> SignedLog {
        self * rhs.recip()
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            log_mag: self.log_mag,
        }
    }
}

impl Add for SignedLog {
    type Output = SignedLog;
    /// Log-sum-exp with sign resolution. Equal magnitudes of opposite sign
    /// cancel to exact zero.
    fn add(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = small.log_mag - big.log_mag; // ≤ 0
        if big.sign == small.sign {
            SignedLog {
                sign: big.sign,
                log_mag: big.log_mag + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: big.sign,
                log_mag: big.log_mag + (-d.exp()).ln_1p(),
            }
        }
    }
}

/// Pairwise signed-log summation; deterministic split, stable for long
/// alternating sums such as Lagrange interpolation terms.
pub fn signed_log_sum(terms: &[SignedLog]) -> SignedLog {
    match terms.len() {
        0 => SignedLog::ZERO,
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            signed_log_sum(&terms[..mid]) + signed_log_sum(&terms[mid..])
        }
    }
}

/// A complex number stored as value · e^{log_scale}, renormalized so the
/// mantissa stays in floating range across long recurrences.
#[derive(Clone, Copy, Debug)]
pub struct ScaledComplex {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn from_complex(z: Complex64) -> Self {
        ScaledComplex {
            value: z,
            log_scale: 0.0,
        }
    }

    /// ln|z|; −∞ for zero.
    pub fn log_abs(&self) -> f64 {
        if self.value == Complex64::new(0.0, 0.0) {
            f64::NEG_INFINITY
        } else {
            self.value.norm().ln() + self.log_scale
        }
    }

    /// Back to a plain complex; overflows if log_scale is too large.
    pub fn to_complex(&self) -> Complex64 {
        self.value * Complex64::new(self.log_scale.exp(), 0.0)
    }
}
