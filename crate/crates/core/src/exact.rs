//! Exact combinatorial oracles for small instances: the alternating
//! expansion of `det(Id - M)` over increasing index sequences, total weights
//! of rooted forests, and total weights of heaps of cycles. All three are
//! evaluated in exact rational arithmetic (every `f64` entry is a dyadic
//! rational, so the conversion is lossless) and cross-checked against
//! fraction-free Gaussian elimination.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::chain::FiniteChain;
use crate::error::{Error, Result};

/// Exhaustive-enumeration cutoffs.
pub const FOREST_MAX_N: usize = 8;
pub const EXPANSION_MAX_N: usize = 12;

pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Exact `det(A)` by Gaussian elimination over the rationals.
pub fn det_rational(a: &[Vec<BigRational>]) -> BigRational {
    let n = a.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let mut det = BigRational::one();
    for k in 0..n {
        // find a nonzero pivot
        let piv = (k..n).find(|&i| !m[i][k].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => return BigRational::zero(),
        };
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k].clone();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &m[k][k];
            for j in k..n {
                let sub = &f * &m[k][j];
                m[i][j] -= sub;
            }
        }
    }
    det
}

/// `Id - chain` restricted to `[a, b]`, as exact rationals.
pub fn id_minus_window_rational(chain: &FiniteChain, a: usize, b: usize) -> Vec<Vec<BigRational>> {
    let k = b + 1 - a;
    let mut m = vec![vec![BigRational::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let e = rational_from_f64(chain.entry(a + i, a + j));
            m[i][j] = if i == j {
                BigRational::one() - e
            } else {
                -e
            };
        }
    }
    m
}

/// Exact window determinant `det(Id - chain_[a,b])`.
pub fn det_window_rational(chain: &FiniteChain, a: usize, b: usize) -> BigRational {
    if b + 1 == a {
        return BigRational::one();
    }
    det_rational(&id_minus_window_rational(chain, a, b))
}

/// The alternating expansion of `det(A)` for an AUT-patterned matrix `A` on
/// `[0, N]`, summed over increasing sequences `s_0 = -1 < s_1 < ... < s_k = N`:
///
/// ```text
/// det(A) = sum_s  prod_j A[s_{j-1}+1][s_j]  *  prod_{j in [0,N-1] \ s} (-A[j+1][j])
/// ```
///
/// Exponential cost; guarded by [`EXPANSION_MAX_N`]. ALT-patterned input is
/// transposed first.
pub fn det_expansion(chain: &FiniteChain) -> Result<f64> {
    let a = id_minus_float(chain)?;
    Ok(det_expansion_float(&a))
}

/// Same expansion, evaluated exactly.
pub fn det_expansion_rational(chain: &FiniteChain) -> Result<BigRational> {
    let a = id_minus_float(chain)?;
    let n = a.len();
    let ar: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| rational_from_f64(a[i][j])).collect())
        .collect();
    Ok(expansion_generic(
        &|i, j| ar[i][j].clone(),
        n - 1,
        BigRational::zero(),
        BigRational::one(),
    ))
}

fn id_minus_float(chain: &FiniteChain) -> Result<Vec<Vec<f64>>> {
    let n = chain.n();
    if n > EXPANSION_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: EXPANSION_MAX_N,
        });
    }
    let side = chain
        .detect_side()
        .ok_or_else(|| Error::bad_parameter("chain", "matrix is neither AUT nor ALT patterned"))?;
    let transpose = side == crate::chain::Side::Alt;
    let sz = chain.size();
    let mut a = vec![vec![0.0f64; sz]; sz];
    for i in 0..sz {
        for j in 0..sz {
            let (r, c) = if transpose { (j, i) } else { (i, j) };
            a[i][j] = f64::from(i == j) - chain.entry(r, c);
        }
    }
    Ok(a)
}

fn det_expansion_float(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    expansion_generic(&|i, j| a[i][j], n - 1, 0.0, 1.0)
}

/// Shared expansion driver. `entry(i, j)` addresses the matrix `A`; `nn` is
/// the top index `N`; sums over the 2^N subsets of `[0, N-1]` forming the
/// interior of the sequence.
fn expansion_generic<T>(entry: &dyn Fn(usize, usize) -> T, nn: usize, zero: T, one: T) -> T
where
    T: Clone
        + std::ops::Add<T, Output = T>
        + std::ops::Mul<T, Output = T>
        + std::ops::Neg<Output = T>,
{
    // recursion over positions 0..N-1: each either joins the sequence s or
    // contributes its sub-diagonal factor -A[j+1][j]
    fn rec<T>(
        entry: &dyn Fn(usize, usize) -> T,
        nn: usize,
        pos: usize,
        prev: i64, // last element of s so far (starts at -1)
        acc: T,
        total: &mut T,
    ) where
        T: Clone
            + std::ops::Add<T, Output = T>
            + std::ops::Mul<T, Output = T>
            + std::ops::Neg<Output = T>,
    {
        if pos == nn {
            // close the sequence with s_k = N
            let step = entry((prev + 1) as usize, nn);
            let term = acc * step;
            *total = total.clone() + term;
            return;
        }
        // pos joins s
        let step = entry((prev + 1) as usize, pos);
        rec(
            entry,
            nn,
            pos + 1,
            pos as i64,
            acc.clone() * step,
            total,
        );
        // pos skipped: factor -A[pos+1][pos]
        let skip = -entry(pos + 1, pos);
        rec(entry, nn, pos + 1, prev, acc * skip, total);
    }

    let mut total = zero;
    rec(entry, nn, 0, -1, one, &mut total);
    total
}

/// Total weight of `Forests([0, x-1], [x, n])`: forests of node-disjoint
/// trees spanning `[0, x-1]`, rooted in `[x, n]`, edges oriented toward the
/// roots and weighted by the chain entries. Exact enumeration; equals
/// `det(Id - U_[0,x-1])` by the matrix-tree argument.
pub fn forest_weight(chain: &FiniteChain, x: usize) -> Result<BigRational> {
    let n = chain.n();
    if n > FOREST_MAX_N {
        return Err(Error::TooLarge { n, max: FOREST_MAX_N });
    }
    assert!(x >= 1 && x <= n, "need 1 <= x <= n");
    // parent choices for each node in [0, x-1]
    let mut choices: Vec<Vec<(usize, BigRational)>> = Vec::with_capacity(x);
    for v in 0..x {
        let mut c = Vec::new();
        for j in 0..=n {
            let e = chain.entry(v, j);
            if e > 0.0 && j != v {
                c.push((j, rational_from_f64(e)));
            }
        }
        choices.push(c);
    }
    let mut total = BigRational::zero();
    let mut parent = vec![usize::MAX; x];

    fn acyclic(parent: &[usize], x: usize) -> bool {
        // follow parents; a walk that stays >= x steps has left the node set
        for start in 0..x {
            let mut v = start;
            let mut steps = 0;
            while v < x {
                v = parent[v];
                steps += 1;
                if steps > x {
                    return false; // cycle
                }
            }
        }
        true
    }

    fn rec(
        v: usize,
        x: usize,
        choices: &[Vec<(usize, BigRational)>],
        parent: &mut [usize],
        acc: BigRational,
        total: &mut BigRational,
    ) {
        if v == x {
            if acyclic(parent, x) {
                *total += acc;
            }
            return;
        }
        for (j, w) in &choices[v] {
            parent[v] = *j;
            rec(v + 1, x, choices, parent, acc.clone() * w.clone(), total);
        }
    }

    rec(0, x, &choices, &mut parent, BigRational::one(), &mut total);
    Ok(total)
}

/// All simple cycles on the surviving vertex set, as (vertex bitmask, weight).
fn simple_cycles(chain: &FiniteChain, alive: &[usize]) -> Vec<(u32, BigRational)> {
    let mut cycles = Vec::new();
    // enumerate cycles by their minimal vertex; extensions only through
    // larger vertices
    for (root_pos, &root) in alive.iter().enumerate() {
        // self-loop
        let e = chain.entry(root, root);
        if e > 0.0 {
            cycles.push((1 << root_pos, rational_from_f64(e)));
        }
        // longer cycles: DFS over paths root -> ... -> back to root
        let mut stack: Vec<(usize, u32, BigRational)> =
            vec![(root, 1 << root_pos, BigRational::one())];
        while let Some((v, mask, w)) = stack.pop() {
            for (next_pos, &next) in alive.iter().enumerate() {
                if next_pos <= root_pos {
                    // closing edge back to the root
                    if next == root && v != root {
                        let e = chain.entry(v, root);
                        if e > 0.0 {
                            cycles.push((mask, w.clone() * rational_from_f64(e)));
                        }
                    }
                    continue;
                }
                if mask & (1 << next_pos) != 0 {
                    continue;
                }
                let e = chain.entry(v, next);
                if e > 0.0 {
                    stack.push((
                        next,
                        mask | (1 << next_pos),
                        w.clone() * rational_from_f64(e),
                    ));
                }
            }
        }
    }
    cycles
}

/// Alternating sum over trivial heaps (collections of pairwise vertex-
/// disjoint simple cycles) on the graph minus `avoid`:
/// `sum (-1)^{#cycles} * prod Weight(cycle)`. Equals
/// `det(Id - M_{G \ avoid})` — the heap-of-cycles identity.
pub fn trivial_heap_alternating_sum(chain: &FiniteChain, avoid: &[usize]) -> Result<BigRational> {
    let n = chain.n();
    if n > FOREST_MAX_N {
        return Err(Error::TooLarge { n, max: FOREST_MAX_N });
    }
    let alive: Vec<usize> = (0..=n).filter(|v| !avoid.contains(v)).collect();
    let cycles = simple_cycles(chain, &alive);

    // the empty selection contributes +1; each added disjoint cycle flips
    // the sign and multiplies by its weight
    fn rec(cycles: &[(u32, BigRational)], from: usize, used: u32) -> BigRational {
        let mut total = BigRational::one();
        for k in from..cycles.len() {
            let (mask, w) = &cycles[k];
            if mask & used != 0 {
                continue;
            }
            total -= w * rec(cycles, k + 1, used | mask);
        }
        total
    }

    Ok(rec(&cycles, 0, 0))
}

/// Total weight of heaps of cycles avoiding `avoid`: the inverse of the
/// alternating trivial-heap sum. Fails with [`Error::Divergent`] when the
/// sum is not positive (spectral radius >= 1 on the subwindow).
pub fn heap_weight(chain: &FiniteChain, avoid: &[usize]) -> Result<BigRational> {
    let a = trivial_heap_alternating_sum(chain, avoid)?;
    if a.is_zero() || a.is_negative() {
        return Err(Error::Divergent {
            det: rational_to_f64(&a),
        });
    }
    Ok(a.recip())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
