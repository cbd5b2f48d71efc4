//! Chain representations: entry kernels for (possibly infinite) transition
//! matrices, dense finite chains, descent representations, and the
//! validation / projection operations connecting them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Row-sum tolerance used by all stochasticity checks.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Declared triangularity of a transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Almost upper-triangular: `entry(i,j) > 0 => j >= i-1`.
    Aut,
    /// Almost lower-triangular: `entry(i,j) > 0 => j <= i+1`.
    Alt,
    /// Tridiagonal: both at once.
    Tridiagonal,
}

impl Side {
    pub fn is_aut_compatible(self) -> bool {
        matches!(self, Side::Aut | Side::Tridiagonal)
    }
    pub fn is_alt_compatible(self) -> bool {
        matches!(self, Side::Alt | Side::Tridiagonal)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Aut => write!(f, "aut"),
            Side::Alt => write!(f, "alt"),
            Side::Tridiagonal => write!(f, "tridiagonal"),
        }
    }
}

pub type EntryFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;
pub type TailFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// A (possibly infinite) transition matrix given as an entry kernel with a
/// declared triangularity side and, for AUT rows, a tail-sum function
/// `row_tail(i, j0) = sum_{j >= j0} entry(i, j)`.
#[derive(Clone)]
pub struct ChainSpec {
    pub side: Side,
    entry: EntryFn,
    row_tail: Option<TailFn>,
    /// `1 - sum_j entry(0, j)`: mass of row 0 that is absorbed.
    pub dagger_deficiency: f64,
    pub max_index_hint: Option<usize>,
    /// When set: AUT entries vanish for `j > i + band`, ALT entries vanish
    /// for `j < i - band`. Purely an evaluation hint.
    pub band: Option<usize>,
}

impl fmt::Debug for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChainSpec")
            .field("side", &self.side)
            .field("dagger_deficiency", &self.dagger_deficiency)
            .field("band", &self.band)
            .finish()
    }
}

impl ChainSpec {
    /// AUT chain from an entry kernel and its row-tail function.
    pub fn aut(entry: EntryFn, row_tail: TailFn) -> Self {
        ChainSpec {
            side: Side::Aut,
            entry,
            row_tail: Some(row_tail),
            dagger_deficiency: 0.0,
            max_index_hint: None,
            band: None,
        }
    }

    /// ALT chain from an entry kernel. Rows have finite support `[0, i+1]`,
    /// so tails are computed by direct summation.
    pub fn alt(entry: EntryFn) -> Self {
        ChainSpec {
            side: Side::Alt,
            entry,
            row_tail: None,
            dagger_deficiency: 0.0,
            max_index_hint: None,
            band: None,
        }
    }

    /// Tridiagonal chain from the three diagonals. `q(0)` is ignored.
    pub fn tridiagonal(
        p: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        q: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        r: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    ) -> Self {
        let entry: EntryFn = Arc::new(move |i, j| {
            if j + 1 == i {
                q(i)
            } else if j == i {
                r(i)
            } else if j == i + 1 {
                p(i)
            } else {
                0.0
            }
        });
        ChainSpec {
            side: Side::Tridiagonal,
            entry,
            row_tail: None,
            dagger_deficiency: 0.0,
            max_index_hint: None,
            band: Some(1),
        }
    }

    pub fn with_dagger(mut self, deficiency: f64) -> Self {
        self.dagger_deficiency = deficiency;
        self
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.band = Some(band);
        self
    }

    pub fn with_max_index_hint(mut self, hint: usize) -> Self {
        self.max_index_hint = Some(hint);
        self
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (self.entry)(i, j)
    }

    /// `sum_{j >= j0} entry(i, j)`.
    ///
    /// For ALT and tridiagonal rows the support is finite and the sum is
    /// direct; AUT rows require the declared tail function.
    pub fn row_tail(&self, i: usize, j0: usize) -> Result<f64> {
        match self.side {
            Side::Aut => match &self.row_tail {
                Some(t) => Ok(t(i, j0)),
                None => Err(Error::TailUnavailable),
            },
            Side::Alt | Side::Tridiagonal => {
                if let Some(t) = &self.row_tail {
                    return Ok(t(i, j0));
                }
                let hi = i + 1; // support ends at i+1 on these sides
                let mut s = 0.0;
                let mut j = j0;
                while j <= hi {
                    s += self.entry(i, j);
                    j += 1;
                }
                Ok(s)
            }
        }
    }

    /// Full row sum including tail (absorbed mass not included).
    pub fn row_sum(&self, i: usize) -> Result<f64> {
        match self.side {
            Side::Aut => {
                // finite part [max(0,i-1), i+K) plus tail; pick the split at
                // the diagonal to keep the finite part short.
                let lo = i.saturating_sub(1);
                let split = i + 1;
                let mut s = 0.0;
                for j in lo..split {
                    s += self.entry(i, j);
                }
                Ok(s + self.row_tail(i, split)?)
            }
            Side::Alt | Side::Tridiagonal => {
                let lo = match self.band {
                    Some(b) => i.saturating_sub(b),
                    None => 0,
                };
                let mut s = 0.0;
                for j in lo..=i + 1 {
                    s += self.entry(i, j);
                }
                Ok(s)
            }
        }
    }

    /// Lowest column that can be nonzero in row `i`.
    pub fn row_support_lo(&self, i: usize) -> usize {
        match self.side {
            Side::Aut | Side::Tridiagonal => i.saturating_sub(1),
            Side::Alt => match self.band {
                Some(b) => i.saturating_sub(b),
                None => 0,
            },
        }
    }
}

/// Validates stochasticity, support pattern and prefix irreducibility.
///
/// Row 0 may sum to less than one; the deficit is the absorbed mass and is
/// reported (not an error). Any other deficient row is an error.
pub fn validate(spec: &ChainSpec, check_rows: usize) -> Result<IrreducibilityReport> {
    assert!(check_rows >= 1, "check_rows must be at least 1");
    let n = check_rows;
    // Row sums.
    for i in 0..=n {
        let s = spec.row_sum(i)? + if i == 0 { spec.dagger_deficiency } else { 0.0 };
        let deficit = 1.0 - s;
        if deficit.abs() > ROW_SUM_TOL {
            if i == 0 && deficit > 0.0 {
                // tolerated: promoted to dagger mass by constructors
            } else {
                return Err(Error::RowSumViolation { row: i, deficit });
            }
        }
    }
    // Support pattern on a sampled block.
    for i in 0..=n {
        match spec.side {
            Side::Aut | Side::Tridiagonal => {
                for j in 0..i.saturating_sub(1) {
                    let v = spec.entry(i, j);
                    if v != 0.0 {
                        return Err(Error::SupportViolation {
                            row: i,
                            col: j,
                            value: v,
                        });
                    }
                }
                if spec.side == Side::Tridiagonal {
                    for j in (i + 2)..=(n + 2).min(i + 8) {
                        let v = spec.entry(i, j);
                        if v != 0.0 {
                            return Err(Error::SupportViolation {
                                row: i,
                                col: j,
                                value: v,
                            });
                        }
                    }
                }
            }
            Side::Alt => {
                for j in (i + 2)..=(n + 2).min(i + 8) {
                    let v = spec.entry(i, j);
                    if v != 0.0 {
                        return Err(Error::SupportViolation {
                            row: i,
                            col: j,
                            value: v,
                        });
                    }
                }
            }
        }
    }
    // Sub/super-diagonal positivity needed for irreducibility.
    let mut down_up_ok = true;
    let mut verdict = PrefixVerdict::IrreducibleOnPrefix;
    match spec.side {
        Side::Aut | Side::Tridiagonal => {
            for j in 1..=n {
                if spec.entry(j, j - 1) <= 0.0 {
                    down_up_ok = false;
                    verdict = PrefixVerdict::ReducibleAt(j);
                    break;
                }
            }
        }
        Side::Alt => {
            for j in 0..n {
                if spec.entry(j, j + 1) <= 0.0 {
                    down_up_ok = false;
                    verdict = PrefixVerdict::ReducibleAt(j);
                    break;
                }
            }
        }
    }
    // Upward reachability on the truncated support graph.
    let mut upward = true;
    if down_up_ok {
        match spec.side {
            Side::Alt => {} // the positive super-diagonal is the up route
            Side::Aut | Side::Tridiagonal => {
                // BFS from 0 over {(i,j): entry > 0, j <= n}; every state of
                // the prefix must be reachable.
                let mut seen = vec![false; n + 1];
                let mut queue = vec![0usize];
                seen[0] = true;
                while let Some(i) = queue.pop() {
                    let hi = match spec.band {
                        Some(b) => (i + b).min(n),
                        None => n,
                    };
                    for j in i.saturating_sub(1)..=hi {
                        if !seen[j] && spec.entry(i, j) > 0.0 {
                            seen[j] = true;
                            queue.push(j);
                        }
                    }
                    // AUT rows may reach above n; that is fine for upward
                    // reachability but contributes nothing to the prefix scan.
                }
                if let Some(k) = seen.iter().position(|s| !s) {
                    upward = false;
                    verdict = PrefixVerdict::ReducibleAt(k);
                }
            }
        }
    }
    Ok(IrreducibilityReport {
        checked_up_to: n,
        down_steps_positive: down_up_ok,
        upward_reachability: upward,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixVerdict {
    IrreducibleOnPrefix,
    ReducibleAt(usize),
}

/// Outcome of [`validate`]. Irreducibility is certified on the checked
/// prefix only; nothing is claimed beyond it.
#[derive(Debug, Clone)]
pub struct IrreducibilityReport {
    pub checked_up_to: usize,
    pub down_steps_positive: bool,
    pub upward_reachability: bool,
    pub verdict: PrefixVerdict,
}

impl IrreducibilityReport {
    pub fn is_irreducible_on_prefix(&self) -> bool {
        self.verdict == PrefixVerdict::IrreducibleOnPrefix
    }
}

/// Dense stochastic matrix on `[0, n]`.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    matrix: Arc<Vec<Vec<f64>>>,
    n: usize,
}

impl FiniteChain {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        assert!(n > 0, "empty matrix");
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::bad_parameter("matrix", "matrix must be square"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowSumViolation {
                    row: i,
                    deficit: 1.0 - s,
                });
            }
            if let Some(j) = row.iter().position(|&v| !(0.0..=1.0 + 1e-15).contains(&v)) {
                return Err(Error::SupportViolation {
                    row: i,
                    col: j,
                    value: row[j],
                });
            }
        }
        Ok(FiniteChain {
            matrix: Arc::new(matrix),
            n: n - 1,
        })
    }

    /// Largest state index (states are `0..=n`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.n + 1
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn rows(&self) -> &Vec<Vec<f64>> {
        &self.matrix
    }

    /// Detects the triangularity pattern of the dense matrix.
    pub fn detect_side(&self) -> Option<Side> {
        let mut aut = true;
        let mut alt = true;
        for i in 0..=self.n {
            for j in 0..=self.n {
                if self.matrix[i][j] > 0.0 {
                    if j + 1 < i {
                        aut = false;
                    }
                    if j > i + 1 {
                        alt = false;
                    }
                }
            }
        }
        match (aut, alt) {
            (true, true) => Some(Side::Tridiagonal),
            (true, false) => Some(Side::Aut),
            (false, true) => Some(Side::Alt),
            (false, false) => None,
        }
    }

    /// View the dense chain as an entry-kernel spec (entries beyond the
    /// stored block are zero).
    pub fn to_spec(&self, side: Side) -> ChainSpec {
        let m = Arc::clone(&self.matrix);
        let n = self.n;
        let entry: EntryFn = Arc::new(move |i, j| {
            if i <= n && j <= n {
                m[i][j]
            } else {
                0.0
            }
        });
        let m2 = Arc::clone(&self.matrix);
        let tail: TailFn = Arc::new(move |i, j0| {
            if i > n {
                return 0.0;
            }
            m2[i][j0.min(n + 1)..=n].iter().sum()
        });
        ChainSpec {
            side,
            entry,
            row_tail: Some(tail),
            dagger_deficiency: 0.0,
            max_index_hint: Some(n),
            band: None,
        }
    }
}

/// Projection of a chain onto `[0, n]`: column `n` absorbs the row tails.
pub fn project(spec: &ChainSpec, n: usize) -> Result<FiniteChain> {
    assert!(n >= 1, "projection needs at least two states");
    let mut m = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..=n {
        let lo = spec.row_support_lo(i);
        for j in lo..n {
            m[i][j] = spec.entry(i, j);
        }
        m[i][n] = spec.row_tail(i, n)?;
        if i == 0 && spec.dagger_deficiency > 0.0 {
            // keep the projected matrix stochastic: the absorbed mass is not
            // part of the projection, so fold it into the diagonal is wrong;
            // instead reject, the caller models absorption explicitly.
            return Err(Error::bad_parameter(
                "dagger_deficiency",
                "cannot project a chain with absorbed mass; model the absorbing state explicitly",
            ));
        }
    }
    FiniteChain::new(m)
}

pub type SeqFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// Descent representation of an ALT chain: go up from `b` with probability
/// `1 - v_b`, otherwise descend according to the kernel row `D(b, .)`.
#[derive(Clone)]
pub struct DescentRep {
    pub v: SeqFn,
    pub d: KernelFn,
}

impl fmt::Debug for DescentRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DescentRep").finish()
    }
}

/// `v_b = 1 - L_{b,b+1}`, `D_{b,a} = L_{b,a} / v_b`.
///
/// Fails with [`Error::DegenerateRow`] when some row `b >= 1` has no descent
/// mass. The check is performed lazily, on access, and eagerly on the first
/// `check_rows` rows.
pub fn descent_decompose(l: &ChainSpec, check_rows: usize) -> Result<DescentRep> {
    if !l.side.is_alt_compatible() {
        return Err(Error::bad_parameter("side", "descent form needs an ALT chain"));
    }
    for b in 1..=check_rows {
        if 1.0 - l.entry(b, b + 1) <= 0.0 {
            return Err(Error::DegenerateRow { row: b });
        }
    }
    let spec = l.clone();
    let v: SeqFn = Arc::new(move |b| 1.0 - spec.entry(b, b + 1));
    let spec2 = l.clone();
    let d: KernelFn = Arc::new(move |b, a| {
        if a > b {
            return 0.0;
        }
        let vb = 1.0 - spec2.entry(b, b + 1);
        if vb <= 0.0 {
            // row 0 of a chain that always ascends: D_{0,0} = 1 by convention
            if b == 0 {
                return if a == 0 { 1.0 } else { 0.0 };
            }
            f64::NAN
        } else {
            spec2.entry(b, a) / vb
        }
    });
    Ok(DescentRep { v, d })
}

/// Rebuild the ALT chain from its descent representation.
pub fn descent_compose(rep: &DescentRep) -> ChainSpec {
    let v = Arc::clone(&rep.v);
    let d = Arc::clone(&rep.d);
    let entry: EntryFn = Arc::new(move |b, a| {
        if a == b + 1 {
            1.0 - v(b)
        } else if a <= b {
            v(b) * d(b, a)
        } else {
            0.0
        }
    });
    ChainSpec::alt(entry)
}
