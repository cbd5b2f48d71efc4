//! Sign + log-magnitude arithmetic.
//!
//! Window determinants and invariant-measure weights routinely overflow or
//! underflow `f64` long before the ratios consumed downstream become
//! ill-defined, so all of them are carried as `sign * exp(ln_abs)`.

/// A real number stored as a sign and the natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// -1, 0 or +1.
    pub sign: i8,
    /// ln |x|; meaningless (`-inf`) when `sign == 0`.
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        ln_abs: 0.0,
    };

    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            SignedLog { sign, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs + rhs.ln_abs,
        }
    }

    pub fn div(self, rhs: SignedLog) -> SignedLog {
        assert!(rhs.sign != 0, "division of signed-log value by zero");
        if self.sign == 0 {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs - rhs.ln_abs,
        }
    }

    pub fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }

    /// Multiply by `exp(delta)` without leaving log space.
    pub fn scaled(self, delta: f64) -> SignedLog {
        if self.sign == 0 {
            return self;
        }
        SignedLog {
            sign: self.sign,
            ln_abs: self.ln_abs + delta,
        }
    }

    /// Ratio `self / rhs` as a plain float. Safe whenever the exponent
    /// difference is representable even if both operands are not.
    pub fn ratio(self, rhs: SignedLog) -> f64 {
        self.div(rhs).to_f64()
    }

    /// Relative difference `|self - rhs| / max(|self|, |rhs|)`, computed
    /// without leaving log space; returns 0 for two exact zeros.
    pub fn rel_diff(self, rhs: SignedLog) -> f64 {
        if self.sign == 0 && rhs.sign == 0 {
            return 0.0;
        }
        if self.sign == 0 || rhs.sign == 0 {
            return 1.0;
        }
        let m = self.ln_abs.max(rhs.ln_abs);
        let a = f64::from(self.sign) * (self.ln_abs - m).exp();
        let b = f64::from(rhs.sign) * (rhs.ln_abs - m).exp();
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Stable signed sum of log-magnitude terms: factor out the largest magnitude
/// and accumulate the signed ratios in plain floating point.
pub fn signed_log_sum(terms: &[SignedLog]) -> SignedLog {
    let mut m = f64::NEG_INFINITY;
    for t in terms {
        if t.sign != 0 && t.ln_abs > m {
            m = t.ln_abs;
        }
    }
    if m == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    let mut acc = 0.0f64;
    for t in terms {
        if t.sign != 0 {
            acc += f64::from(t.sign) * (t.ln_abs - m).exp();
        }
    }
    if acc == 0.0 {
        SignedLog::ZERO
    } else {
        SignedLog {
            sign: if acc > 0.0 { 1 } else { -1 },
            ln_abs: m + acc.abs().ln(),
        }
    }
}

/// Sum of nonnegative log-space terms, returned as ln of the sum.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    m + s.ln()
}
