//! Monte Carlo trajectory engine and dense finite-state oracles: the two
//! independent validators behind every analytic formula in the crate.

use crate::chain::{ChainSpec, FiniteChain, Side};
use crate::dets;
use crate::error::{Error, Result};
use crate::linalg;
use crate::measure::{Measure, Normalization};

/// Splittable 64-bit generator (SplitMix64). Per-trajectory streams are
/// derived from `(seed, index)`, so parallel or re-ordered execution cannot
/// change any draw.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream for substream `index` of `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        // run the seed through one mixing round before combining so that
        // consecutive seeds do not produce correlated streams
        let mut base = SplitMix64::new(seed);
        let a = base.next_u64();
        SplitMix64::new(a ^ index.wrapping_mul(0x9E3779B97F4A7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

/// Where a simulated step landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    State(usize),
    Absorbed,
}

/// Sample one step from row `i`. Uses direct scan over the (finite or
/// decaying) support; for AUT rows the scan falls back to bisection on the
/// row tails once the accumulated mass stalls.
pub fn sample_row(spec: &ChainSpec, i: usize, u: f64) -> Result<StepOutcome> {
    let mut u = u;
    if i == 0 && spec.dagger_deficiency > 0.0 {
        if u < spec.dagger_deficiency {
            return Ok(StepOutcome::Absorbed);
        }
        u -= spec.dagger_deficiency;
    }
    let lo = spec.row_support_lo(i);
    match spec.side {
        Side::Alt | Side::Tridiagonal => {
            let mut acc = 0.0;
            for j in lo..=i + 1 {
                acc += spec.entry(i, j);
                if u < acc {
                    return Ok(StepOutcome::State(j));
                }
            }
            Ok(StepOutcome::State(i + 1)) // rounding: u landed in the last cell
        }
        Side::Aut => {
            // scan a prefix first: cheap for light-tailed rows
            let scan_hi = i + 8 + spec.band.unwrap_or(0);
            let mut acc = 0.0;
            for j in lo..=scan_hi {
                acc += spec.entry(i, j);
                if u < acc {
                    return Ok(StepOutcome::State(j));
                }
            }
            // bisection on the tail: find smallest j with 1 - tail(j+1) > u,
            // i.e. tail(j+1) < 1 - u  (row mass borrowed by dagger handled
            // above, so the row itself sums to 1 - dagger at i=0).
            if spec.row_tail(i, scan_hi + 1).is_err() {
                return Err(Error::UnsampleableRow { row: i });
            }
            let full = 1.0 - if i == 0 { spec.dagger_deficiency } else { 0.0 };
            let target = full - u; // want smallest J with tail(J+1) <= target... strictly
            let mut hi = scan_hi + 1;
            let mut span = 16usize;
            while spec.row_tail(i, hi + 1)? > target && span < (1 << 40) {
                hi += span;
                span *= 2;
            }
            let mut lo_b = scan_hi + 1;
            while lo_b < hi {
                let mid = (lo_b + hi) / 2;
                if spec.row_tail(i, mid + 1)? > target {
                    lo_b = mid + 1;
                } else {
                    hi = mid;
                }
            }
            Ok(StepOutcome::State(lo_b))
        }
    }
}

/// A simulated path. `absorbed` is set when the walk fell into the dagger
/// mass of row 0; the path ends at that point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: usize,
    pub states: Vec<usize>,
    pub seed: u64,
    pub absorbed: bool,
}

/// Exact-distribution trajectory sampling, reproducible given the seed.
pub fn simulate(spec: &ChainSpec, x0: usize, steps: usize, seed: u64) -> Result<Trajectory> {
    let mut rng = SplitMix64::stream(seed, 0);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0);
    let mut x = x0;
    let mut absorbed = false;
    for _ in 0..steps {
        match sample_row(spec, x, rng.next_f64())? {
            StepOutcome::State(y) => {
                debug_assert!(
                    match spec.side {
                        Side::Aut => y + 1 >= x,
                        Side::Alt => y <= x + 1,
                        Side::Tridiagonal => y + 1 >= x && y <= x + 1,
                    },
                    "increment violates the declared side"
                );
                states.push(y);
                x = y;
            }
            StepOutcome::Absorbed => {
                absorbed = true;
                break;
            }
        }
    }
    Ok(Trajectory {
        start: x0,
        states,
        seed,
        absorbed,
    })
}

/// A Bernoulli (or bounded-functional) estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct EstimateWithError {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    /// Trajectories that hit the step cap; they are excluded from `value`
    /// and reported, never silently dropped.
    pub timeouts: u64,
}

impl EstimateWithError {
    /// |value - reference| measured in standard errors.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        if self.stderr == 0.0 {
            if (self.value - reference).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - reference).abs() / self.stderr
        }
    }
}

/// Monte Carlo estimate of `P(hit [0,a] before [b,inf) | start x)`.
pub fn estimate_hit(
    spec: &ChainSpec,
    x: usize,
    a: usize,
    b: usize,
    trials: u64,
    seed: u64,
    step_cap: usize,
) -> Result<EstimateWithError> {
    assert!(a < x && x < b, "start must lie strictly between the targets");
    let mut hits = 0u64;
    let mut timeouts = 0u64;
    for t in 0..trials {
        let mut rng = SplitMix64::stream(seed, t + 1);
        let mut pos = x;
        let mut resolved = false;
        for _ in 0..step_cap {
            match sample_row(spec, pos, rng.next_f64())? {
                StepOutcome::Absorbed => {
                    resolved = true; // absorbed at 0's dagger: counts as down
                    hits += 1;
                    break;
                }
                StepOutcome::State(y) => {
                    pos = y;
                    if pos <= a {
                        hits += 1;
                        resolved = true;
                        break;
                    }
                    if pos >= b {
                        resolved = true;
                        break;
                    }
                }
            }
        }
        if !resolved {
            timeouts += 1;
        }
    }
    let done = trials - timeouts;
    let p = if done > 0 { hits as f64 / done as f64 } else { f64::NAN };
    let stderr = if done > 0 {
        (p * (1.0 - p) / done as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(EstimateWithError {
        value: p,
        stderr,
        trials: done,
        timeouts,
    })
}

/// Which hitting event a generating-function estimate conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfEvent {
    /// `tau_[0,a] < tau_[b,inf)`, weight `z^tau_[0,a]`.
    Lower,
    /// `tau_[b,inf) < tau_[0,a]`, weight `z^tau_[b,inf)`.
    Upper,
}

/// Monte Carlo estimate of the defective generating function
/// `E[z^tau 1_event | start x]`.
pub fn estimate_gf(
    spec: &ChainSpec,
    x: usize,
    a: usize,
    b: usize,
    z: f64,
    event: GfEvent,
    trials: u64,
    seed: u64,
    step_cap: usize,
) -> Result<EstimateWithError> {
    assert!(a < x && x < b);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let mut timeouts = 0u64;
    for t in 0..trials {
        let mut rng = SplitMix64::stream(seed, t + 1);
        let mut pos = x;
        let mut weight = None;
        for step in 1..=step_cap {
            match sample_row(spec, pos, rng.next_f64())? {
                StepOutcome::Absorbed => {
                    weight = Some(0.0); // neither target was hit
                    break;
                }
                StepOutcome::State(y) => {
                    pos = y;
                    if pos <= a {
                        weight = Some(if event == GfEvent::Lower {
                            z.powi(step as i32)
                        } else {
                            0.0
                        });
                        break;
                    }
                    if pos >= b {
                        weight = Some(if event == GfEvent::Upper {
                            z.powi(step as i32)
                        } else {
                            0.0
                        });
                        break;
                    }
                }
            }
        }
        match weight {
            Some(w) => {
                sum += w;
                sumsq += w * w;
            }
            None => timeouts += 1,
        }
    }
    let done = trials - timeouts;
    let mean = sum / done as f64;
    let var = (sumsq / done as f64 - mean * mean).max(0.0);
    Ok(EstimateWithError {
        value: mean,
        stderr: (var / done as f64).sqrt(),
        trials: done,
        timeouts,
    })
}

/// Probability-normalized stationary vector of an irreducible finite chain.
///
/// Computed by subtraction-free GTH elimination (componentwise accurate for
/// any irreducible stochastic matrix); for `n <= 10` the deleted-minor
/// determinant route (matrix-tree weights) is evaluated as well and must
/// agree to `1e-12` relative.
pub fn finite_oracle_invariant(chain: &FiniteChain) -> Result<Measure> {
    let rho = linalg::gth_stationary(chain.rows())?;
    if chain.n() <= 10 {
        let mut minors = Vec::with_capacity(chain.size());
        for k in 0..chain.size() {
            minors.push(deleted_minor_det(chain, k));
        }
        let total: f64 = minors.iter().sum();
        for (k, m) in minors.iter().enumerate() {
            let want = m / total;
            let rel = (rho[k] - want).abs() / want.abs().max(1e-300);
            if rel > 1e-12 {
                return Err(Error::CrossCheckFailure {
                    index: k,
                    rel_err: rel,
                });
            }
        }
    }
    Ok(Measure::from_values(0, &rho, Normalization::ProbabilityNormalized))
}

/// `det(Id - M^{dep(k)})`: the matrix-tree weight of spanning trees rooted
/// at `k`.
pub fn deleted_minor_det(chain: &FiniteChain, k: usize) -> f64 {
    let n = chain.size();
    let mut m = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != k) {
        let mut row = Vec::with_capacity(n - 1);
        for j in (0..n).filter(|&j| j != k) {
            row.push(f64::from(i == j) - chain.entry(i, j));
        }
        m.push(row);
    }
    linalg::det_dense(&m)
}

/// Hitting probabilities / defective GFs on a finite chain by one linear
/// solve: for interior states `x` in `(a, b)`,
/// `h = (Id - z Q)^{-1} z r` where `Q` is the interior block and `r` the
/// one-step mass into the target set.
#[derive(Debug, Clone)]
pub struct HittingSolution {
    pub interior_start: usize,
    /// `E[z^tau_lower 1(lower first)]` for each interior state.
    pub to_lower: Vec<f64>,
    /// `E[z^tau_upper 1(upper first)]` for each interior state.
    pub to_upper: Vec<f64>,
}

impl HittingSolution {
    pub fn lower_at(&self, x: usize) -> f64 {
        self.to_lower[x - self.interior_start]
    }
    pub fn upper_at(&self, x: usize) -> f64 {
        self.to_upper[x - self.interior_start]
    }
}

/// Solves the hitting system on `chain` with lower target `[0, a]` and upper
/// target `[b, n]`, at GF argument `z`.
pub fn finite_oracle_hitting(
    chain: &FiniteChain,
    a: usize,
    b: usize,
    z: f64,
) -> Result<HittingSolution> {
    assert!(a + 1 < b && b <= chain.n());
    let k = b - 1 - a; // interior states a+1..=b-1
    let mut sys = vec![vec![0.0f64; k]; k];
    let mut r_lo = vec![0.0f64; k];
    let mut r_hi = vec![0.0f64; k];
    for (ii, i) in (a + 1..b).enumerate() {
        for (jj, j) in (a + 1..b).enumerate() {
            sys[ii][jj] = f64::from(ii == jj) - z * chain.entry(i, j);
        }
        for j in 0..=a {
            r_lo[ii] += chain.entry(i, j);
        }
        for j in b..=chain.n() {
            r_hi[ii] += chain.entry(i, j);
        }
        r_lo[ii] *= z;
        r_hi[ii] *= z;
    }
    let lu = linalg::Lu::factor(&sys)?;
    let to_lower = lu.solve(&r_lo)?;
    let to_upper = lu.solve(&r_hi)?;
    Ok(HittingSolution {
        interior_start: a + 1,
        to_lower,
        to_upper,
    })
}

/// Same solve, driven directly by an entry kernel with the upper target
/// `[b, inf)` folded through row tails. Avoids materializing a projection.
pub fn spec_oracle_hitting(spec: &ChainSpec, a: usize, b: usize, z: f64) -> Result<HittingSolution> {
    assert!(a + 1 < b);
    let k = b - 1 - a;
    let mut sys = vec![vec![0.0f64; k]; k];
    let mut r_lo = vec![0.0f64; k];
    let mut r_hi = vec![0.0f64; k];
    for (ii, i) in (a + 1..b).enumerate() {
        for (jj, j) in (a + 1..b).enumerate() {
            sys[ii][jj] = f64::from(ii == jj) - z * spec.entry(i, j);
        }
        let lo = spec.row_support_lo(i);
        for j in lo..=a {
            r_lo[ii] += spec.entry(i, j);
        }
        r_lo[ii] *= z;
        r_hi[ii] = z * spec.row_tail(i, b)?;
    }
    let lu = linalg::Lu::factor(&sys)?;
    let to_lower = lu.solve(&r_lo)?;
    let to_upper = lu.solve(&r_hi)?;
    Ok(HittingSolution {
        interior_start: a + 1,
        to_lower,
        to_upper,
    })
}

/// Residual `max_b |(rho M)_b - rho_b|` of a candidate stationary vector.
pub fn stationarity_residual(chain: &FiniteChain, rho: &[f64]) -> f64 {
    let n = chain.size();
    let mut worst = 0.0f64;
    for b in 0..n {
        let mut s = 0.0;
        for a in 0..n {
            s += rho[a] * chain.entry(a, b);
        }
        worst = worst.max((s - rho[b]).abs());
    }
    worst
}
