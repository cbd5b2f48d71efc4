//! Small dense linear algebra: LU with partial pivoting (determinants and
//! solves) and the subtraction-free GTH elimination for stationary vectors.

use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a square matrix.
pub struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
    sign: i8,
    n: usize,
}

impl Lu {
    pub fn factor(a: &[Vec<f64>]) -> Result<Lu> {
        let n = a.len();
        let mut lu: Vec<Vec<f64>> = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1i8;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k][k].abs();
            for i in k + 1..n {
                if lu[i][k].abs() > best {
                    best = lu[i][k].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                // singular to working precision; keep going so det() can
                // still report zero, but solves will fail.
                continue;
            }
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let pivot = lu[k][k];
            for i in k + 1..n {
                let m = lu[i][k] / pivot;
                lu[i][k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        lu[i][j] -= m * lu[k][j];
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign, n })
    }

    pub fn det(&self) -> f64 {
        let mut d = f64::from(self.sign);
        for k in 0..self.n {
            d *= self.lu[k][k];
        }
        d
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        for k in 0..n {
            if self.lu[k][k] == 0.0 {
                return Err(Error::SingularSystem);
            }
        }
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s / self.lu[i][i];
        }
        Ok(x)
    }
}

/// `det(A)` by dense LU with partial pivoting.
pub fn det_dense(a: &[Vec<f64>]) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    Lu::factor(a).map(|f| f.det()).unwrap_or(0.0)
}

/// Solve `A x = b`.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    Lu::factor(a)?.solve(b)
}

/// Stationary distribution of an irreducible stochastic matrix by GTH
/// (Grassmann-Taksar-Heyman) elimination.
///
/// The algorithm uses no subtractions, which keeps every component of the
/// result accurate in a relative sense even when the stationary weights span
/// hundreds of orders of magnitude.
pub fn gth_stationary(m: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = m.len();
    if n == 0 {
        return Err(Error::SingularSystem);
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut row_sums = vec![0.0f64; n];
    // Forward elimination of states n-1, ..., 1.
    for k in (1..n).rev() {
        let s: f64 = a[k][..k].iter().sum();
        if s <= 0.0 {
            // state k cannot reach below itself: reducible
            return Err(Error::SingularSystem);
        }
        row_sums[k] = s;
        for i in 0..k {
            let f = a[i][k] / s;
            if f != 0.0 {
                for j in 0..k {
                    a[i][j] += f * a[k][j];
                }
            }
        }
    }
    // Back substitution.
    let mut pi = vec![0.0f64; n];
    pi[0] = 1.0;
    for k in 1..n {
        let mut s = 0.0;
        for i in 0..k {
            s += pi[i] * a[i][k];
        }
        pi[k] = s / row_sums[k];
    }
    let total: f64 = pi.iter().sum();
    for v in &mut pi {
        *v /= total;
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_solve() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        // det = 2*(6-1) - 1*(2-0) = 8
        assert!((det_dense(&a) - 8.0).abs() < 1e-12);
        let x = solve_dense(&a, &[3.0, 5.0, 3.0]).unwrap();
        for (got, want) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn gth_two_state() {
        // classical two-state chain: stationary (beta, alpha)/(alpha+beta)
        let (alpha, beta) = (0.3, 0.1);
        let m = vec![vec![1.0 - alpha, alpha], vec![beta, 1.0 - beta]];
        let pi = gth_stationary(&m).unwrap();
        assert!((pi[0] - beta / (alpha + beta)).abs() < 1e-15);
        assert!((pi[1] - alpha / (alpha + beta)).abs() < 1e-15);
    }

    #[test]
    fn gth_componentwise_accuracy_on_decaying_chain() {
        // birth-death with strong downward drift: pi_k = (p/q)^k decays fast
        let (p, q) = (0.05, 0.95);
        let n = 60;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            if i == 0 {
                m[0][0] = 1.0 - p;
                m[0][1] = p;
            } else if i == n - 1 {
                m[i][i - 1] = q;
                m[i][i] = 1.0 - q;
            } else {
                m[i][i - 1] = q;
                m[i][i + 1] = p;
                m[i][i] = 1.0 - p - q;
            }
        }
        let pi = gth_stationary(&m).unwrap();
        let r = p / q;
        for k in 1..n {
            let ratio = pi[k] / pi[k - 1];
            assert!(
                (ratio - r).abs() < 1e-12 * r.max(ratio),
                "k={k} ratio={ratio} r={r}"
            );
        }
    }
}
