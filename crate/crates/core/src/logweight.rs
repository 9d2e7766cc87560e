//! Log-domain arithmetic for partition functions.
//!
//! A log-weight of negative infinity encodes a partition function that is
//! exactly zero (no admissible path). Multiplying weights is addition of
//! log-weights; summing weights is log-sum-exp.

/// Log-weight of an empty path set.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// log(e^a + e^b), safe for either argument being LOG_ZERO.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log of a sum of exponentials over a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = StreamingLse::new();
    for &x in xs {
        acc.push(x);
    }
    acc.value()
}

/// Running-max log-sum-exp accumulator. Rescales in place when a new
/// maximum arrives, so it streams over unsorted input in one pass without
/// overflow for any finite log-weights.
#[derive(Debug, Clone, Copy)]
pub struct StreamingLse {
    max: f64,
    sum: f64,
}

impl StreamingLse {
    pub fn new() -> Self {
        StreamingLse {
            max: LOG_ZERO,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x == LOG_ZERO {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// Absorb another accumulator, as if its inputs had been pushed here.
    pub fn merge(&mut self, other: &StreamingLse) {
        if other.max == LOG_ZERO {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max == LOG_ZERO
    }

    pub fn value(&self) -> f64 {
        if self.max == LOG_ZERO || self.sum == 0.0 {
            LOG_ZERO
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for StreamingLse {
    fn default() -> Self {
        Self::new()
    }
}

/// log(e^a - e^b) for a >= b, with a cancellation guard.
#[derive(Debug, Clone, Copy)]
pub struct LogDiff {
    pub value: f64,
    /// Set when a - b <= 1e-9 * max(1, |a|): the difference is below the
    /// noise floor of the inputs and the value is reported as LOG_ZERO.
    pub cancelled: bool,
}

pub fn log_sub(a: f64, b: f64) -> LogDiff {
    if b == LOG_ZERO {
        return LogDiff {
            value: a,
            cancelled: false,
        };
    }
    if a - b <= 1e-9 * a.abs().max(1.0) {
        return LogDiff {
            value: LOG_ZERO,
            cancelled: true,
        };
    }
    LogDiff {
        value: a + (-((b - a).exp())).ln_1p(),
        cancelled: false,
    }
}
