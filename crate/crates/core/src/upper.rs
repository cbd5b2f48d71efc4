//! Analysis of almost upper-triangular chains: invariant measure (two
//! independent routes with a mandatory cross-check), recurrence and
//! positive-recurrence classification, hitting probabilities, hitting-time
//! generating functions, and absorption at state 0.

use crate::chain::ChainSpec;
use crate::dets::{left_ladder, right_ladder, DetLadder};
use crate::error::{Error, Result};
use crate::linalg;
use crate::logspace::SignedLog;
use crate::measure::{doubling_schedule, Classification, GFQuery, Measure, Normalization, Verdict};

fn require_aut(spec: &ChainSpec) -> Result<()> {
    if spec.side.is_aut_compatible() {
        Ok(())
    } else {
        Err(Error::bad_parameter("side", "operation needs an AUT chain"))
    }
}

/// Determinant route for the invariant measure:
/// `pi_a = det(Id - U_[0,a-1]) / prod_{j=1}^{a} U_{j,j-1}`, anchored at
/// `pi_0 = 1`. Returned as signed-log values (the sign should always be +1;
/// a flipped sign means the recursion left its stability region).
pub fn invariant_measure_det_route(spec: &ChainSpec, a_max: usize) -> Result<Vec<SignedLog>> {
    require_aut(spec)?;
    let mut ladder = left_ladder(spec, 0, 1.0)?;
    ladder.extend_to(a_max)?;
    let mut out = Vec::with_capacity(a_max + 1);
    let mut log_subdiag = 0.0f64;
    out.push(SignedLog::ONE);
    for a in 1..=a_max {
        let sub = spec.entry(a, a - 1);
        if sub <= 0.0 {
            return Err(Error::ZeroSubdiagonal { index: a });
        }
        log_subdiag += sub.ln();
        out.push(ladder.det(a).scaled(-log_subdiag));
    }
    Ok(out)
}

/// Triangular-recursion route:
/// `pi_a = pi_{a-1}(1 - U_{a-1,a-1})/U_{a,a-1} - sum_{x<=a-2} pi_x U_{x,a-1}/U_{a,a-1}`.
/// Values are carried as scaled floats with a running log offset so the
/// window can span many orders of magnitude.
pub fn invariant_measure_recursion_route(spec: &ChainSpec, a_max: usize) -> Result<Vec<SignedLog>> {
    require_aut(spec)?;
    let mut w = Vec::with_capacity(a_max + 1);
    w.push(1.0f64);
    let mut offset = 0.0f64;
    let mut out = vec![SignedLog::ONE];
    for a in 1..=a_max {
        let sub = spec.entry(a, a - 1);
        if sub <= 0.0 {
            return Err(Error::ZeroSubdiagonal { index: a });
        }
        let mut v = w[a - 1] * (1.0 - spec.entry(a - 1, a - 1));
        let x_lo = match spec.band {
            Some(band) => (a - 1).saturating_sub(band),
            None => 0,
        };
        for x in x_lo..a.saturating_sub(1) {
            v -= w[x] * spec.entry(x, a - 1);
        }
        v /= sub;
        w.push(v);
        out.push(SignedLog::from_f64(v).scaled(offset));
        // rescale before the running values overflow
        let m = v.abs();
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let shift = m.ln();
            for t in &mut w {
                *t *= (-shift).exp();
            }
            offset += shift;
        }
    }
    Ok(out)
}

/// Invariant measure of an AUT chain, anchored at `pi_0 = 1`.
///
/// Both independent routes are evaluated and must agree componentwise to
/// `1e-9` relative; disagreement signals numerical breakdown and fails with
/// [`Error::CrossCheckFailure`] carrying the first broken index.
pub fn invariant_measure_u(spec: &ChainSpec, a_max: usize) -> Result<Measure> {
    let det_route = invariant_measure_det_route(spec, a_max)?;
    let rec_route = invariant_measure_recursion_route(spec, a_max)?;
    let mut logs = Vec::with_capacity(a_max + 1);
    for a in 0..=a_max {
        let rel = det_route[a].rel_diff(rec_route[a]);
        if !(rel <= 1e-9) || det_route[a].sign <= 0 {
            return Err(Error::CrossCheckFailure {
                index: a,
                rel_err: rel,
            });
        }
        logs.push(det_route[a].ln_abs);
    }
    Ok(Measure::from_log_weights(0, logs, Normalization::Anchored))
}

/// Positive-recurrence test: partial sums of the invariant measure along a
/// doubling schedule.
///
/// The two measure routes are advanced together; once they stop agreeing
/// (and the disputed weights are not already negligible against the
/// accumulated sum) the evidence is truncated there and the tail is judged
/// on what was gathered. This test alone cannot distinguish null recurrence
/// from transience; pair it with [`recurrence_u`].
pub fn positive_recurrence_u(
    spec: &ChainSpec,
    b_schedule: &[usize],
    tol: f64,
) -> Result<Classification> {
    require_aut(spec)?;
    let b_max = *b_schedule.iter().max().unwrap_or(&16);
    let det_route = invariant_measure_det_route(spec, b_max)?;
    let rec_route = invariant_measure_recursion_route(spec, b_max)?;

    let mut partial = 0.0f64; // sums are O(1)-anchored: pi_0 = 1
    let mut valid_up_to = b_max;
    let mut evidence = Vec::new();
    let mut k = 0usize;
    for a in 0..=b_max {
        let rel = det_route[a].rel_diff(rec_route[a]);
        let va = det_route[a].to_f64();
        let agree = rel <= 1e-9 && det_route[a].sign > 0;
        let floor = (1e-14 * partial.max(1.0)).ln();
        let negligible = det_route[a].ln_abs < floor && rec_route[a].ln_abs < floor;
        if !agree && !negligible {
            valid_up_to = a.saturating_sub(1);
            break;
        }
        partial += va.max(0.0);
        while k < b_schedule.len() && a == b_schedule[k] {
            evidence.push((a, partial));
            k += 1;
        }
    }
    if evidence.is_empty() {
        evidence.push((valid_up_to, partial));
    }

    // increments between consecutive schedule points
    let verdict = classify_partial_sums(&evidence, tol);
    Ok(Classification {
        verdict,
        evidence,
        tolerance: tol,
        b_max,
        breakdown_at: if valid_up_to < b_max {
            Some(valid_up_to + 1)
        } else {
            None
        },
    })
}

fn classify_partial_sums(evidence: &[(usize, f64)], tol: f64) -> Verdict {
    if evidence.len() < 2 {
        let (_, s) = evidence[evidence.len() - 1];
        return if s.is_finite() { Verdict::Inconclusive } else { Verdict::TransientLikely };
    }
    let incs: Vec<f64> = evidence
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).max(0.0))
        .collect();
    let last_inc = *incs.last().unwrap();
    let last_sum = evidence.last().unwrap().1;
    if last_inc <= tol * last_sum.max(1.0) {
        return Verdict::PositiveRecurrent;
    }
    // increments not vanishing: log-log slope of increment against b
    let pts: Vec<(f64, f64)> = evidence
        .windows(2)
        .filter(|w| w[1].1 > w[0].1)
        .map(|w| ((w[1].0 as f64).ln(), (w[1].1 - w[0].1).ln()))
        .collect();
    if pts.len() >= 2 {
        let slope = fit_slope(&pts);
        if slope > -0.1 {
            // mass keeps arriving at a non-vanishing (or growing) rate
            return Verdict::TransientLikely;
        }
    }
    Verdict::Inconclusive
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    }
}

/// `u_b(x) = P(hit 0 before [b, inf) | start x)` via the determinant ratio
/// `det(Id - U_[x+1,b-1]) / det(Id - U_[1,b-1]) * prod_{j=1}^{x} U_{j,j-1}`.
pub fn hit_zero_before_b(spec: &ChainSpec, x: usize, b: usize) -> Result<f64> {
    require_aut(spec)?;
    assert!(0 < x && x < b, "need 0 < x < b");
    let num = crate::dets::det_window(spec, 1.0, x + 1, b - 1)?;
    let den = crate::dets::det_window(spec, 1.0, 1, b - 1)?;
    let mut log_prod = 0.0;
    for j in 1..=x {
        let s = spec.entry(j, j - 1);
        if s <= 0.0 {
            return Err(Error::ZeroSubdiagonal { index: j });
        }
        log_prod += s.ln();
    }
    let v = num.div(den).scaled(log_prod).to_f64();
    Ok(v.clamp(0.0, 1.0))
}

/// Recurrence test: trace of `u_b(1)` along the doubling schedule.
///
/// `u_b(1)` is nondecreasing in `b` (nested events); a violation beyond
/// rounding noise fails the whole classification. Recurrent-looking traces
/// are split into positive vs null recurrence with [`positive_recurrence_u`].
pub fn recurrence_u(spec: &ChainSpec, b_schedule: &[usize], tol: f64) -> Result<Classification> {
    require_aut(spec)?;
    let b_max = *b_schedule.iter().max().unwrap_or(&16);
    let u10 = spec.entry(1, 0);
    if u10 <= 0.0 {
        return Err(Error::ZeroSubdiagonal { index: 1 });
    }
    let mut lad1 = left_ladder(spec, 1, 1.0)?;
    let mut lad2 = left_ladder(spec, 2, 1.0)?;
    let mut evidence: Vec<(usize, f64)> = Vec::new();
    for &b in b_schedule {
        lad1.extend_to(b - 1)?;
        lad2.extend_to(b - 2)?;
        let u = u10 * lad2.det(b - 2).ratio(lad1.det(b - 1));
        if let Some(&(_, prev)) = evidence.last() {
            if u < prev - 1e-12 {
                return Err(Error::CrossCheckFailure {
                    index: b,
                    rel_err: prev - u,
                });
            }
        }
        evidence.push((b, u.clamp(0.0, 1.0)));
    }
    let verdict = classify_gap_trace(&evidence, tol, || {
        positive_recurrence_u(spec, b_schedule, tol).map(|c| c.verdict)
    })?;
    Ok(Classification {
        verdict,
        evidence,
        tolerance: tol,
        b_max,
        breakdown_at: None,
    })
}

/// Shared verdict logic for traces converging up to a limit `<= 1`:
/// looks at the gaps `1 - u_b`.
fn classify_gap_trace<F>(evidence: &[(usize, f64)], tol: f64, split_recurrent: F) -> Result<Verdict>
where
    F: FnOnce() -> Result<Verdict>,
{
    let (_, u_last) = *evidence.last().unwrap();
    let gap_last = 1.0 - u_last;
    let recurrent = if gap_last <= tol {
        true
    } else {
        // median ratio of consecutive gaps over the closing half
        let gaps: Vec<f64> = evidence.iter().map(|&(_, u)| (1.0 - u).max(0.0)).collect();
        let mut ratios: Vec<f64> = gaps
            .windows(2)
            .skip(gaps.len().saturating_sub(5))
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if ratios.is_empty() {
            1.0
        } else {
            ratios[ratios.len() / 2]
        };
        if median <= 0.9 {
            true // gap still shrinking at a solid geometric-in-doubling rate
        } else {
            // did the trace already stabilize below 1?
            let u_prev = evidence[evidence.len() - 2].1;
            if (u_last - u_prev).abs() <= tol * u_last.max(tol) && gap_last > tol {
                return Ok(Verdict::TransientLikely);
            }
            return Ok(Verdict::Inconclusive);
        }
    };
    if recurrent {
        match split_recurrent()? {
            Verdict::PositiveRecurrent => Ok(Verdict::PositiveRecurrent),
            _ => Ok(Verdict::RecurrentNullLikely),
        }
    } else {
        Ok(Verdict::Inconclusive)
    }
}

/// Defective GF of the descent hit: `E[z^tau_a 1(tau_a < tau_[b,inf))]`
/// starting from `x`, computed as
/// `det(Id - zU_[x+1,b-1]) / det(Id - zU_[a+1,b-1]) * prod_{j=a+1}^{x} (z U_{j,j-1})`.
pub fn hitting_gf_down(spec: &ChainSpec, q: &GFQuery) -> Result<f64> {
    require_aut(spec)?;
    if q.z == 0.0 {
        return Ok(0.0); // tau >= 1 always
    }
    let num = crate::dets::det_window(spec, q.z, q.x + 1, q.b - 1)?;
    let den = crate::dets::det_window(spec, q.z, q.a + 1, q.b - 1)?;
    let mut log_prod = 0.0;
    for j in q.a + 1..=q.x {
        let s = spec.entry(j, j - 1);
        if s <= 0.0 {
            return Err(Error::ZeroSubdiagonal { index: j });
        }
        log_prod += (q.z * s).ln();
    }
    Ok(num.div(den).scaled(log_prod).to_f64().clamp(0.0, 1.0))
}

/// Limit `b -> inf` of [`hitting_gf_down`] along a doubling schedule,
/// stopping when two consecutive values differ by less than `tol`.
pub fn hitting_gf_down_limit(
    spec: &ChainSpec,
    a: usize,
    x: usize,
    z: f64,
    tol: f64,
    b_cap: usize,
) -> Result<f64> {
    let mut prev: Option<f64> = None;
    let mut b = (x + 8).next_power_of_two();
    loop {
        let q = GFQuery::new(a, x, b, z)?;
        let v = hitting_gf_down(spec, &q)?;
        if let Some(p) = prev {
            if (v - p).abs() <= tol {
                return Ok(v);
            }
        }
        prev = Some(v);
        b *= 2;
        if b > b_cap {
            return Ok(v);
        }
    }
}

/// Defective GF of the ascent hit: `E[z^tau_[b,inf) 1(tau_[b,inf) < tau_a)]`,
/// by one dense solve on the window `[a+1, b-1]` of the projection at `b`.
pub fn hitting_gf_up(spec: &ChainSpec, q: &GFQuery) -> Result<f64> {
    require_aut(spec)?;
    if q.z == 0.0 {
        return Ok(0.0);
    }
    let k = q.b - 1 - q.a;
    let mut sys = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    for (ii, i) in (q.a + 1..q.b).enumerate() {
        for (jj, j) in (q.a + 1..q.b).enumerate() {
            sys[ii][jj] = f64::from(ii == jj) - q.z * spec.entry(i, j);
        }
        rhs[ii] = q.z * spec.row_tail(i, q.b)?;
    }
    let sol = linalg::solve_dense(&sys, &rhs)?;
    Ok(sol[q.x - q.a - 1])
}

/// Result of an absorption computation: the GF value plus the truncation
/// bookkeeping for the infinite sum over the row-0 successors.
#[derive(Debug, Clone)]
pub struct Absorption {
    pub value: f64,
    /// Bound on the discarded tail of the row-0 sum.
    pub tail_bound: f64,
    pub terms_used: usize,
    pub denominator: f64,
}

/// Defective GF of the absorption time at the dagger state:
/// `a(x; z) = z U_{0,dagger} u(x; z) / (1 - (z U_{0,0} + sum_y z U_{0,y} u(y; z)))`
/// where `u(.; z)` is the `b -> inf` limit of the descent GF to 0.
pub fn absorption_u(spec: &ChainSpec, x: usize, z: f64) -> Result<Absorption> {
    require_aut(spec)?;
    if spec.dagger_deficiency <= 0.0 {
        return Ok(Absorption {
            value: 0.0,
            tail_bound: 0.0,
            terms_used: 0,
            denominator: 1.0,
        });
    }
    if z == 0.0 {
        return Ok(Absorption {
            value: 0.0,
            tail_bound: 0.0,
            terms_used: 0,
            denominator: 1.0,
        });
    }
    let tol = 1e-12;
    let b_cap = 1 << 14;
    let u_of = |y: usize| -> Result<f64> {
        if y == 0 {
            Ok(1.0)
        } else {
            hitting_gf_down_limit(spec, 0, y, z, tol, b_cap)
        }
    };
    // sum over y >= 1 of z U_{0,y} u(y; z), truncated once the summand is
    // negligible; tail bounded by z * row_tail(0, Y+1) since u <= 1.
    let mut sum = z * spec.entry(0, 0);
    let mut y = 1usize;
    let mut terms = 0usize;
    loop {
        let w = spec.entry(0, y);
        if w > 0.0 {
            let term = z * w * u_of(y)?;
            sum += term;
            terms += 1;
            if term < 1e-14 * sum.max(1e-300) && spec.row_tail(0, y + 1)? < 1e-13 {
                break;
            }
        }
        y += 1;
        if spec.row_tail(0, y)? == 0.0 {
            break;
        }
        if y > 100_000 {
            break;
        }
    }
    let tail_bound = z * spec.row_tail(0, y.min(100_000))?;
    let denominator = 1.0 - sum;
    if denominator <= tail_bound.max(1e-13) {
        return Err(Error::Divergent { det: denominator });
    }
    let ux = u_of(x)?;
    Ok(Absorption {
        value: (z * spec.dagger_deficiency * ux / denominator).clamp(0.0, 1.0),
        tail_bound,
        terms_used: terms,
        denominator,
    })
}

/// Overall classification of an AUT chain: recurrence trace first, split by
/// the positive-recurrence test.
pub fn classify_u(spec: &ChainSpec, b_max: usize, tol: f64) -> Result<Classification> {
    let schedule = doubling_schedule(16, b_max);
    recurrence_u(spec, &schedule, tol)
}

/// Fixed right-edge sweep: `u_b(x)` for all `1 <= x < b` at once, from one
/// right-anchored ladder (cost one ladder pass instead of b).
pub fn hit_zero_sweep(spec: &ChainSpec, b: usize) -> Result<Vec<f64>> {
    require_aut(spec)?;
    let mut right = right_ladder(spec, b - 1, 1.0)?;
    right.extend_to(b - 1)?; // windows [x+1, b-1] for x >= 0
    let den = right.det(b - 1); // window [1, b-1]... length b-1 anchored at b-1
    let mut out = vec![0.0f64; b];
    let mut log_prod = 0.0;
    for x in 1..b {
        let s = spec.entry(x, x - 1);
        if s <= 0.0 {
            return Err(Error::ZeroSubdiagonal { index: x });
        }
        log_prod += s.ln();
        // window [x+1, b-1] has length b-1-x
        let num = right.det(b - 1 - x);
        out[x] = num.div(den).scaled(log_prod).to_f64().clamp(0.0, 1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::project;
    use crate::gen;
    use crate::sim;
    use std::sync::Arc;

    fn tridiag(p: f64, q: f64) -> ChainSpec {
        ChainSpec::tridiagonal(
            Arc::new(move |_| p),
            Arc::new(move |i| if i == 0 { 0.0 } else { q }),
            Arc::new(move |i| if i == 0 { 1.0 - p } else { 1.0 - p - q }),
        )
    }

    #[test]
    fn invariant_measure_geometric_chain() {
        // p=0.4 up, q=0.6 down: pi_a = (2/3)^a, well inside the stable window
        let spec = tridiag(0.4, 0.6);
        let pi = invariant_measure_u(&spec, 30).unwrap();
        for a in 0..=30usize {
            let want = (2.0f64 / 3.0).powi(a as i32);
            let got = pi.value(a);
            assert!(
                (got - want).abs() <= 1e-10 * want,
                "a={a} got={got} want={want}"
            );
        }
    }

    #[test]
    fn invariant_measure_anchor() {
        let spec = gen::random_aut_spec(3, 4);
        let pi = invariant_measure_u(&spec, 0).unwrap();
        assert_eq!(pi.value(0), 1.0);
    }

    #[test]
    fn invariant_measure_matches_finite_oracle() {
        // projection invariant vector is proportional to pi on [0, n-1]
        let spec = gen::random_aut_spec(12, 4);
        let n = 30usize;
        let pi = invariant_measure_u(&spec, n - 1).unwrap();
        let fc = project(&spec, n).unwrap();
        let rho = sim::finite_oracle_invariant(&fc).unwrap();
        let mut worst = 0.0f64;
        for a in 0..n {
            let want = rho.value(a) / rho.value(0);
            let got = pi.value(a);
            worst = worst.max((got / want - 1.0).abs());
        }
        assert!(worst <= 1e-9, "worst rel err {worst}");
    }

    #[test]
    fn invariant_residual_small() {
        let spec = gen::random_aut_spec(5, 3);
        let a_max = 40usize;
        let pi = invariant_measure_u(&spec, a_max).unwrap();
        // residual |sum_a pi_a U_{a,b} - pi_b| / pi_b
        for b in 0..a_max - 1 {
            let mut s = 0.0;
            for a in 0..=b + 1 {
                s += pi.ratio(a, b) * spec.entry(a, b);
            }
            assert!((s - 1.0).abs() <= 1e-9, "b={b} residual={}", (s - 1.0).abs());
        }
    }

    #[test]
    fn positive_recurrence_verdicts_on_srw() {
        let sched = doubling_schedule(16, 2048);
        // drift down: positive recurrent, sum = 1/(1-2/3) = 3
        let c = positive_recurrence_u(&tridiag(0.4, 0.6), &sched, 1e-8).unwrap();
        assert_eq!(c.verdict, Verdict::PositiveRecurrent);
        let (_, total) = *c.evidence.last().unwrap();
        assert!((total - 3.0).abs() < 1e-6, "sum={total}");
        // drift up: partial sums diverge geometrically
        let c = positive_recurrence_u(&tridiag(0.6, 0.4), &sched, 1e-8).unwrap();
        assert_ne!(c.verdict, Verdict::PositiveRecurrent);
    }

    #[test]
    fn gamblers_ruin_closed_form() {
        let spec = tridiag(0.5, 0.5);
        for &(x, b) in &[(1usize, 10usize), (3, 10), (7, 32)] {
            let got = hit_zero_before_b(&spec, x, b).unwrap();
            let want = 1.0 - x as f64 / b as f64;
            assert!((got - want).abs() < 1e-13, "x={x} b={b} got={got}");
        }
    }

    #[test]
    fn asymmetric_ruin_matches_linear_oracle() {
        // p up = 0.4, q down = 0.6; classical ruin formula with rho = q/p
        let spec = tridiag(0.4, 0.6);
        let (x, b) = (1usize, 10usize);
        let got = hit_zero_before_b(&spec, x, b).unwrap();
        let rho: f64 = 0.6 / 0.4;
        let want = (rho.powi(x as i32) - rho.powi(b as i32)) / (1.0 - rho.powi(b as i32));
        assert!((got - want).abs() < 1e-12, "got={got} want={want}");
        let oracle = sim::spec_oracle_hitting(&spec, 0, b, 1.0).unwrap();
        assert!((got - oracle.lower_at(x)).abs() < 1e-12);
    }

    #[test]
    fn hit_formula_matches_oracle_on_random_aut() {
        let spec = gen::random_aut_spec(31, 4);
        let oracle = sim::spec_oracle_hitting(&spec, 0, 7, 1.0).unwrap();
        for x in 1..7usize {
            let got = hit_zero_before_b(&spec, x, 7).unwrap();
            assert!(
                (got - oracle.lower_at(x)).abs() <= 1e-10,
                "x={x} got={got} oracle={}",
                oracle.lower_at(x)
            );
        }
        // sweep agrees with pointwise values
        let sweep = hit_zero_sweep(&spec, 7).unwrap();
        for x in 1..7usize {
            assert!((sweep[x] - oracle.lower_at(x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn recurrence_classification_srw_family() {
        let sched = doubling_schedule(16, 4096);
        let c = recurrence_u(&tridiag(0.5, 0.5), &sched, 1e-8).unwrap();
        assert_eq!(c.verdict, Verdict::RecurrentNullLikely);
        // u_b(1) = 1 - 1/b for the symmetric walk
        for &(b, u) in &c.evidence {
            assert!((u - (1.0 - 1.0 / b as f64)).abs() < 1e-10);
        }
        let c = recurrence_u(&tridiag(0.4, 0.6), &sched, 1e-8).unwrap();
        assert_eq!(c.verdict, Verdict::PositiveRecurrent);
        let c = recurrence_u(&tridiag(0.6, 0.4), &sched, 1e-8).unwrap();
        assert_eq!(c.verdict, Verdict::TransientLikely);
        // the trace stabilizes at q/p = 2/3
        let (_, u_last) = *c.evidence.last().unwrap();
        assert!((u_last - 2.0 / 3.0).abs() < 1e-6, "u_last={u_last}");
    }

    #[test]
    fn gf_down_special_values() {
        let spec = tridiag(0.5, 0.5);
        // z = 0: no path of length 0 reaches 0
        let q = GFQuery::new(0, 2, 6, 0.0).unwrap();
        assert_eq!(hitting_gf_down(&spec, &q).unwrap(), 0.0);
        // z = 1, a = 0 coincides with the hit probability
        let q = GFQuery::new(0, 2, 6, 1.0).unwrap();
        let gf = hitting_gf_down(&spec, &q).unwrap();
        let hit = hit_zero_before_b(&spec, 2, 6).unwrap();
        assert!((gf - hit).abs() < 1e-14);
    }

    #[test]
    fn gf_down_two_state_hand_solve() {
        // symmetric SRW, x=1, a=0, b=3, z=1/2: solve (Id - zQ) g = z r on {1,2}
        let spec = tridiag(0.5, 0.5);
        let z = 0.5f64;
        // hand elimination: g1 = z*q + z*p*g2, g2 = z*q*g1
        // => g1 = z*0.5 / (1 - z^2*0.25)
        let want = (z * 0.5) / (1.0 - z * z * 0.25);
        let q = GFQuery::new(0, 1, 3, z).unwrap();
        let got = hitting_gf_down(&spec, &q).unwrap();
        assert!((got - want).abs() < 1e-14, "got={got} want={want}");
    }

    #[test]
    fn gf_up_and_down_are_complementary_at_z1() {
        let spec = gen::random_aut_spec(9, 3);
        let q = GFQuery::new(0, 3, 9, 1.0).unwrap();
        let down = hitting_gf_down(&spec, &q).unwrap();
        let up = hitting_gf_up(&spec, &q).unwrap();
        assert!((down + up - 1.0).abs() <= 1e-10, "down={down} up={up}");
    }

    #[test]
    fn gf_up_gamblers_ruin() {
        let spec = tridiag(0.5, 0.5);
        let q = GFQuery::new(0, 1, 3, 1.0).unwrap();
        let up = hitting_gf_up(&spec, &q).unwrap();
        assert!((up - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gf_down_monotone_in_z() {
        let spec = gen::random_aut_spec(41, 3);
        let mut prev = 0.0;
        for k in 0..=10 {
            let z = k as f64 / 10.0;
            let q = GFQuery::new(0, 2, 8, z).unwrap();
            let v = hitting_gf_down(&spec, &q).unwrap();
            assert!(v + 1e-12 >= prev, "z={z} v={v} prev={prev}");
            prev = v;
        }
    }

    #[test]
    fn absorption_edge_cases() {
        // no dagger mass: absorption probability 0
        let spec = tridiag(0.5, 0.5);
        let a = absorption_u(&spec, 3, 1.0).unwrap();
        assert_eq!(a.value, 0.0);

        // all of row 0 absorbs and the chain drifts down: absorption certain
        let p = 0.3f64;
        let q = 0.7f64;
        let entry: crate::chain::EntryFn = Arc::new(move |i, j| {
            if i == 0 {
                0.0
            } else if j + 1 == i {
                q
            } else if j == i + 1 {
                p
            } else if j == i {
                1.0 - p - q
            } else {
                0.0
            }
        });
        let tail: crate::chain::TailFn = Arc::new(move |i, j0| {
            if i == 0 {
                return 0.0;
            }
            let mut s = 0.0;
            for j in j0..=i + 1 {
                s += if j + 1 == i {
                    q
                } else if j == i + 1 {
                    p
                } else if j == i {
                    1.0 - p - q
                } else {
                    0.0
                };
            }
            s
        });
        let spec = ChainSpec::aut(entry, tail).with_band(1).with_dagger(1.0);
        let a = absorption_u(&spec, 2, 1.0).unwrap();
        assert!((a.value - 1.0).abs() < 1e-9, "value={}", a.value);
    }

    #[test]
    fn absorption_matches_absorbing_chain_oracle() {
        // SRW p=0.4(up)/q=0.6(down) with 0.1 dagger mass carved from row 0
        let (p, q) = (0.4f64, 0.6f64);
        let dagger = 0.1f64;
        let entry: crate::chain::EntryFn = Arc::new(move |i, j| {
            if i == 0 {
                if j == 0 {
                    (1.0 - p) - dagger
                } else if j == 1 {
                    p
                } else {
                    0.0
                }
            } else if j + 1 == i {
                q
            } else if j == i + 1 {
                p
            } else {
                0.0
            }
        });
        let tail: crate::chain::TailFn = Arc::new(move |i, j0| {
            let row = |jj: usize| -> f64 {
                if i == 0 {
                    if jj == 0 {
                        (1.0 - p) - dagger
                    } else if jj == 1 {
                        p
                    } else {
                        0.0
                    }
                } else if jj + 1 == i {
                    q
                } else if jj == i + 1 {
                    p
                } else {
                    0.0
                }
            };
            (j0..=i + 1).map(row).sum()
        });
        let spec = ChainSpec::aut(entry, tail).with_band(1).with_dagger(dagger);
        let x = 2usize;

        // fundamental-matrix oracle on a truncation: the chain drifts down,
        // so mass beyond the edge is negligible
        let n = 200usize;
        for &z in &[0.9f64, 1.0] {
            let got = absorption_u(&spec, x, z).unwrap();
            let mut sys = vec![vec![0.0f64; n + 1]; n + 1];
            let mut rhs = vec![0.0f64; n + 1];
            for i in 0..=n {
                for j in 0..=n {
                    sys[i][j] = f64::from(i == j) - z * spec.entry(i, j);
                }
                rhs[i] = if i == 0 { z * dagger } else { 0.0 };
            }
            let h = crate::linalg::solve_dense(&sys, &rhs).unwrap();
            assert!(
                (got.value - h[x]).abs() <= 1e-8,
                "z={z} got={} oracle={}",
                got.value,
                h[x]
            );
        }
    }

    #[test]
    fn gf_up_matches_monte_carlo() {
        let spec = gen::random_aut_spec(55, 3);
        let q = GFQuery::new(0, 2, 7, 0.7).unwrap();
        let v = hitting_gf_up(&spec, &q).unwrap();
        let est = sim::estimate_gf(
            &spec,
            2,
            0,
            7,
            0.7,
            sim::GfEvent::Upper,
            30_000,
            5,
            1_000_000,
        )
        .unwrap();
        assert!(est.sigmas_from(v) <= 3.5, "v={v} est={}", est.value);
    }
}
