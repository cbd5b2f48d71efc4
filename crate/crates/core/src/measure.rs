//! Measures on index windows, recurrence verdicts, and hitting-time queries.

use crate::error::{Error, Result};

/// Scaling convention of a stored measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Weights sum to one over the stored window (plus a declared tail).
    ProbabilityNormalized,
    /// Anchored at `pi_0 = 1`.
    Anchored,
    /// Representative of a scaling class, no particular normalization.
    RawClass,
}

/// Nonnegative sequence on an index window. Weights are stored as natural
/// logs: invariant measures of even mildly drifted chains leave the `f64`
/// range long before the window ends.
#[derive(Debug, Clone)]
pub struct Measure {
    pub window_start: usize,
    log_weights: Vec<f64>,
    pub normalization: Normalization,
}

impl Measure {
    pub fn from_log_weights(
        window_start: usize,
        log_weights: Vec<f64>,
        normalization: Normalization,
    ) -> Self {
        Measure {
            window_start,
            log_weights,
            normalization,
        }
    }

    pub fn from_values(window_start: usize, values: &[f64], normalization: Normalization) -> Self {
        Measure {
            window_start,
            log_weights: values.iter().map(|v| v.ln()).collect(),
            normalization,
        }
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    /// Last index covered by the window.
    pub fn window_end(&self) -> usize {
        self.window_start + self.len() - 1
    }

    pub fn log_weight(&self, a: usize) -> f64 {
        self.log_weights[a - self.window_start]
    }

    pub fn value(&self, a: usize) -> f64 {
        self.log_weight(a).exp()
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Ratio `mu_a / mu_b` computed in log space.
    pub fn ratio(&self, a: usize, b: usize) -> f64 {
        (self.log_weight(a) - self.log_weight(b)).exp()
    }

    /// Rescale so the first stored weight is 1.
    pub fn anchored(mut self) -> Self {
        let shift = self.log_weights[0];
        for l in &mut self.log_weights {
            *l -= shift;
        }
        self.normalization = Normalization::Anchored;
        self
    }

    /// Componentwise relative disagreement with another measure covering the
    /// same window, after matching scales at the anchor index.
    pub fn max_rel_diff_up_to_scale(&self, other: &Measure) -> f64 {
        assert_eq!(self.window_start, other.window_start);
        assert_eq!(self.len(), other.len());
        let shift = self.log_weights[0] - other.log_weights[0];
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            let d = (other.log_weights[k] + shift - self.log_weights[k]).exp() - 1.0;
            worst = worst.max(d.abs());
        }
        worst
    }
}

/// Recurrence verdicts. Limits cannot be decided from finitely many rows,
/// hence the `-Likely` qualifiers and the evidence trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PositiveRecurrent,
    RecurrentNullLikely,
    TransientLikely,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::PositiveRecurrent => "positive-recurrent",
            Verdict::RecurrentNullLikely => "recurrent-null-likely",
            Verdict::TransientLikely => "transient-likely",
            Verdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// A classification with its numerical evidence: one `(b, value)` pair per
/// evaluated schedule point.
#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Vec<(usize, f64)>,
    pub tolerance: f64,
    pub b_max: usize,
    /// Set when the evidence was cut short because the two computation
    /// routes stopped agreeing (numerical noise floor reached).
    pub breakdown_at: Option<usize>,
}

/// Doubling schedule `start, 2*start, ..., <= end`.
pub fn doubling_schedule(start: usize, end: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut b = start.max(2);
    while b <= end {
        v.push(b);
        b *= 2;
    }
    v
}

/// Hitting-generating-function query: start `x` strictly between the lower
/// target `a` and the upper barrier `b`, GF argument `z` in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct GFQuery {
    pub a: usize,
    pub b: usize,
    pub x: usize,
    pub z: f64,
}

impl GFQuery {
    pub fn new(a: usize, x: usize, b: usize, z: f64) -> Result<Self> {
        if !(a < x && x < b) {
            return Err(Error::bad_parameter("x", "need a < x < b"));
        }
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::bad_parameter("z", "need z in [0, 1]"));
        }
        Ok(GFQuery { a, b, x, z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchoring_and_ratios() {
        let m = Measure::from_values(0, &[2.0, 1.0, 0.5], Normalization::RawClass);
        let m = m.anchored();
        assert!((m.value(0) - 1.0).abs() < 1e-15);
        assert!((m.ratio(2, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rel_diff_up_to_scale() {
        let a = Measure::from_values(0, &[1.0, 2.0, 4.0], Normalization::RawClass);
        let b = Measure::from_values(0, &[3.0, 6.0, 12.0], Normalization::RawClass);
        assert!(a.max_rel_diff_up_to_scale(&b) < 1e-15);
        let c = Measure::from_values(0, &[3.0, 6.0, 12.1], Normalization::RawClass);
        assert!(a.max_rel_diff_up_to_scale(&c) > 1e-3);
    }

    #[test]
    fn query_invariants() {
        assert!(GFQuery::new(0, 1, 3, 0.5).is_ok());
        assert!(GFQuery::new(1, 1, 3, 0.5).is_err());
        assert!(GFQuery::new(0, 1, 3, 1.5).is_err());
    }
}
