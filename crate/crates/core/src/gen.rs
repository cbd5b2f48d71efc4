//! Seeded random chain generators used by the verification sweeps and the
//! test suites. Entries are pure functions of `(seed, row)`, so a generated
//! spec is a genuine infinite kernel: any entry can be recomputed on demand.

use std::sync::Arc;

use crate::chain::{ChainSpec, EntryFn, FiniteChain, TailFn};
use crate::sim::SplitMix64;

fn normalized_row(seed: u64, i: usize, width: usize) -> Vec<f64> {
    let mut rng = SplitMix64::stream(seed, i as u64);
    let mut w: Vec<f64> = (0..width).map(|_| 0.05 + 0.95 * rng.next_f64()).collect();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// Random AUT spec with up-jumps bounded by `band` (support of row `i` is
/// `[max(0,i-1), i+band]`). Sub-diagonal entries are bounded away from zero
/// so prefix irreducibility always holds.
pub fn random_aut_spec(seed: u64, band: usize) -> ChainSpec {
    let entry: EntryFn = Arc::new(move |i, j| {
        let lo = i.saturating_sub(1);
        if j < lo || j > i + band {
            return 0.0;
        }
        normalized_row(seed, i, i + band - lo + 1)[j - lo]
    });
    let row_tail: TailFn = Arc::new(move |i, j0| {
        let lo = i.saturating_sub(1);
        if j0 > i + band {
            return 0.0;
        }
        let w = normalized_row(seed, i, i + band - lo + 1);
        w[j0.max(lo) - lo..].iter().sum()
    });
    ChainSpec::aut(entry, row_tail).with_band(band)
}

/// Random ALT spec whose descents reach at most `band` levels down, with the
/// up-step bounded away from zero.
pub fn random_alt_spec(seed: u64, band: usize) -> ChainSpec {
    let entry: EntryFn = Arc::new(move |i, j| {
        let lo = i.saturating_sub(band);
        if j > i + 1 || j < lo {
            return 0.0;
        }
        normalized_row(seed, i, i + 1 - lo + 1)[j - lo]
    });
    ChainSpec::alt(entry).with_band(band)
}

/// Random tridiagonal spec. `up_bias >= 0` biases the drift upward; the
/// deep-window determinant identities are well-conditioned only when the
/// invariant measure does not decay, which is what the bias is for.
pub fn random_tridiagonal_spec(seed: u64, up_bias: f64) -> ChainSpec {
    let coeffs = move |i: usize| -> (f64, f64, f64) {
        let mut rng = SplitMix64::stream(seed, i as u64);
        let r = 0.2 * rng.next_f64();
        let rest = 1.0 - r;
        let center = 0.5 + 0.5 * (up_bias / (1.0 + up_bias));
        let beta = (center + 0.2 * (rng.next_f64() - 0.5)).clamp(0.5, 0.9);
        let p = rest * beta;
        (p, rest - p, r)
    };
    let p: Arc<dyn Fn(usize) -> f64 + Send + Sync> = Arc::new(move |i| coeffs(i).0);
    let q: Arc<dyn Fn(usize) -> f64 + Send + Sync> =
        Arc::new(move |i| if i == 0 { 0.0 } else { coeffs(i).1 });
    let r: Arc<dyn Fn(usize) -> f64 + Send + Sync> = Arc::new(move |i| {
        let (pi, qi, ri) = coeffs(i);
        if i == 0 {
            ri + qi // fold the unused down-mass back onto the diagonal
        } else {
            ri
        }
    });
    ChainSpec::tridiagonal(p, q, r)
}

/// Random dense AUT chain on `[0, n]` with dyadic entries `k/2^8`, rows
/// summing to exactly one in floating point. Used by the exact rational
/// oracles.
pub fn random_dyadic_aut_chain(seed: u64, n: usize) -> FiniteChain {
    const DENOM: u64 = 256;
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut rng = SplitMix64::stream(seed, i as u64);
        let lo = i.saturating_sub(1);
        let width = n - lo + 1;
        // random composition of DENOM into `width` positive parts
        let mut parts = vec![1u64; width];
        let mut rem = DENOM - width as u64;
        while rem > 0 {
            let k = (rng.next_u64() % width as u64) as usize;
            parts[k] += 1;
            rem -= 1;
        }
        let mut row = vec![0.0f64; n + 1];
        for (k, cnt) in parts.iter().enumerate() {
            row[lo + k] = *cnt as f64 / DENOM as f64;
        }
        rows.push(row);
    }
    FiniteChain::new(rows).expect("dyadic rows sum to one exactly")
}
