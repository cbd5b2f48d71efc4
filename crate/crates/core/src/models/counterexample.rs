//! Explicit counterexample chains: an ALT chain with no invariant measure,
//! an AUT chain with several positive right 1-eigenvectors, and the induced
//! ALT chain carrying several invariant measures.

use std::sync::Arc;

use crate::chain::{ChainSpec, EntryFn, SeqFn};
use crate::error::Result;
use crate::reversal;

/// `a_j = j(j+2)/(j+1)^2` for `j >= 1`; `a_0 = 1`.
fn a_coeff(j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        let j = j as f64;
        j * (j + 2.0) / ((j + 1.0) * (j + 1.0))
    }
}

/// The no-invariant-measure chain: `L_{i,i+1} = a_i`, `L_{i,0} = 1 - a_i`.
/// A measure would have to satisfy `sum_k (1 - a_k) prod_{j<k} a_j = 1`,
/// but the series sums to 1/2; see [`no_invariant_certificate`].
pub fn no_invariant_measure() -> (ChainSpec, SeqFn) {
    let entry: EntryFn = Arc::new(|i, j| {
        if j == i + 1 {
            a_coeff(i)
        } else if j == 0 && i > 0 {
            1.0 - a_coeff(i)
        } else {
            0.0
        }
    });
    let a: SeqFn = Arc::new(a_coeff);
    (ChainSpec::alt(entry), a)
}

/// Evaluates `sum_{k>=1} (1 - a_k) prod_{j=1}^{k-1} a_j` by direct partial
/// sums with Richardson extrapolation (the partial sums approach the limit
/// like `c/k`, so one extrapolation level gains two orders).
///
/// Returns `(value, error_estimate)`.
pub fn no_invariant_certificate(k_max: usize) -> (f64, f64) {
    let mut prod = 1.0f64; // prod_{j=1}^{k-1} a_j
    let mut partial = 0.0f64;
    let half = k_max / 2;
    let mut s_half = 0.0f64;
    for k in 1..=k_max {
        partial += (1.0 - a_coeff(k)) * prod;
        prod *= a_coeff(k);
        if k == half {
            s_half = partial;
        }
    }
    let extrap = 2.0 * partial - s_half;
    (extrap, (extrap - partial).abs() / half as f64 * 2.0)
}

/// The oscillating bounded sequence `R` used for the multi-eigenvector
/// construction: odd entries slightly above 1, even entries slightly
/// below 2, neither reaching its infimum nor its supremum.
pub fn eigenvector_sequence(k: usize) -> f64 {
    if k % 2 == 1 {
        1.0 + 1.0 / (10.0 * k as f64)
    } else {
        2.0 - 1.0 / (10.0 * (k as f64 + 1.0))
    }
}

/// An irreducible AUT chain `U` with `U R = R` for the non-constant positive
/// sequence `R` above (alongside the constant eigenvector).
///
/// Each `R_j` with `j >= 1` is the unique convex combination of `R_{j-1}`
/// and `R_{j+2}` (the nearest later term on the other side of `R_j`); row 0
/// combines `R_1` and `R_2`.
pub fn multi_right_eigenvector() -> (ChainSpec, SeqFn) {
    let entry: EntryFn = Arc::new(|i, j| {
        let r = eigenvector_sequence;
        if i == 0 {
            // R_0 between R_1 (below) and R_2 (above)
            let w = (r(2) - r(0)) / (r(2) - r(1));
            if j == 1 {
                w
            } else if j == 2 {
                1.0 - w
            } else {
                0.0
            }
        } else {
            // R_i between R_{i-1} and R_{i+2} (opposite sides by parity)
            let w = (r(i + 2) - r(i)) / (r(i + 2) - r(i - 1));
            if j + 1 == i {
                w
            } else if j == i + 2 {
                1.0 - w
            } else {
                0.0
            }
        }
    });
    let e2 = Arc::clone(&entry);
    let tail: crate::chain::TailFn = Arc::new(move |i, j0| {
        let mut s = 0.0;
        for j in j0..=i + 2 {
            s += e2(i, j);
        }
        s
    });
    (
        ChainSpec::aut(entry, tail).with_band(2),
        Arc::new(eigenvector_sequence),
    )
}

/// The induced ALT chain with two non-proportional invariant measures
/// `pi . R^(0)` (with `R^(0) = 1`) and `pi . R^(1)`, where `pi` is the
/// unique invariant measure of the multi-eigenvector chain and `L` its
/// time-reversal.
pub struct MultiMeasure {
    pub l: ChainSpec,
    pub measure_flat: crate::measure::Measure,
    pub measure_weighted: crate::measure::Measure,
}

pub fn multi_invariant_measure(a_max: usize) -> Result<MultiMeasure> {
    let (u, r) = multi_right_eigenvector();
    let pair = reversal::reverse_u(&u, a_max)?;
    let flat = pair.pi.clone();
    let logs: Vec<f64> = (0..=a_max)
        .map(|a| pair.pi.log_weight(a) + r(a).ln())
        .collect();
    let weighted =
        crate::measure::Measure::from_log_weights(0, logs, crate::measure::Normalization::RawClass);
    Ok(MultiMeasure {
        l: pair.l,
        measure_flat: flat,
        measure_weighted: weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_value_is_half() {
        let (v, err_est) = no_invariant_certificate(1_000_000);
        assert!((v - 0.5).abs() <= 1e-10, "value={v} est={err_est}");
    }

    #[test]
    fn certificate_partial_sums_derived_by_hand() {
        // term_k = 1/(2k) - 1/(2(k+1)) telescopes: S_K = 1/2 - 1/(2(K+1))
        let mut prod = 1.0;
        let mut s = 0.0;
        for k in 1..=100 {
            s += (1.0 - a_coeff(k)) * prod;
            prod *= a_coeff(k);
        }
        assert!((s - (0.5 - 1.0 / 202.0)).abs() < 1e-14);
    }

    #[test]
    fn eigenvector_rowwise_identity() {
        let (u, r) = multi_right_eigenvector();
        for i in 0..=200usize {
            let mut s = 0.0;
            let mut row = 0.0;
            for j in i.saturating_sub(1)..=i + 2 {
                s += u.entry(i, j) * r(j);
                row += u.entry(i, j);
            }
            assert!((s - r(i)).abs() <= 1e-12, "UR=R fails at {i}");
            assert!((row - 1.0).abs() <= 1e-12, "row sum fails at {i}");
        }
        assert!(crate::chain::validate(&u, 100)
            .unwrap()
            .is_irreducible_on_prefix());
    }

    #[test]
    fn two_measures_both_invariant_not_proportional() {
        let mm = multi_invariant_measure(120).unwrap();
        // residuals of both measures under L, on a safely interior window
        for m in [&mm.measure_flat, &mm.measure_weighted] {
            for b in 1..=60usize {
                let mut s = 0.0;
                for a in (b - 1)..=118 {
                    let le = mm.l.entry(a, b);
                    if le > 0.0 {
                        s += (m.log_weight(a) - m.log_weight(b)).exp() * le;
                    }
                }
                assert!((s - 1.0).abs() <= 1e-9, "b={b} residual {}", (s - 1.0).abs());
            }
        }
        // ratio is R, which oscillates: sample variance well above zero
        let ratios: Vec<f64> = (0..=100)
            .map(|a| mm.measure_weighted.value(a) / mm.measure_flat.value(a))
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var =
            ratios.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / ratios.len() as f64;
        assert!(var > 0.01, "variance {var}");
    }
}
