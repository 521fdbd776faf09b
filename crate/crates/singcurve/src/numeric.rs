//! Dense complex SVD by one-sided Jacobi rotations.
//!
//! The matrices here are tiny (tens of rows), so the quadratically
//! convergent Jacobi sweep is accurate and more than fast enough, and it
//! yields honest smallest singular values for the exceptional-set test.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Svd {
    /// m x n with orthonormal nonzero columns (left vectors times sigma).
    u: Vec<Vec<Complex64>>,
    /// Right vectors, n x n unitary (columns).
    v: Vec<Vec<Complex64>>,
    /// Singular values, descending.
    sigma: Vec<f64>,
}

fn col_dot(a: &[Vec<Complex64>], p: usize, q: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for row in a {
        acc += row[p].conj() * row[q];
    }
    acc
}

/// One-sided Jacobi SVD of an m x n matrix with m >= n.
pub fn svd(a: &[Vec<Complex64>]) -> Result<Svd> {
    let m = a.len();
    if m == 0 {
        return Err(Error::Invariant("empty matrix".into()));
    }
    let n = a[0].len();
    if m < n {
        return Err(Error::Invariant(format!(
            "jacobi svd expects at least as many rows as columns: {m} x {n}"
        )));
    }
    let mut work = a.to_vec();
    // v accumulates the right rotations, starting from the identity
    let mut v = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = col_dot(&work, p, p).re;
                let beta = col_dot(&work, q, q).re;
                let gamma = col_dot(&work, p, q);
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt().max(f64::MIN_POSITIVE) {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt().max(f64::MIN_POSITIVE));
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase = gamma / g;
                for row in work.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = xp * c - xq * phase.conj() * s;
                    row[q] = xp * phase * s + xq * c;
                }
                for row in v.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = xp * c - xq * phase.conj() * s;
                    row[q] = xp * phase * s + xq * c;
                }
            }
        }
        if off <= 1e-14 {
            break;
        }
    }
    // singular values are the column norms; sort descending
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| col_dot(&work, j, j).re.max(0.0).sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut u = vec![vec![Complex64::new(0.0, 0.0); n]; m];
    let mut vv = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut sigma = Vec::with_capacity(n);
    for (new_j, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        for i in 0..m {
            u[i][new_j] = if s > 0.0 {
                work[i][j] / s
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        for i in 0..n {
            vv[i][new_j] = v[i][j];
        }
    }
    Ok(Svd { u, v: vv, sigma })
}

impl Svd {
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    /// Condition number estimate.
    pub fn condition(&self) -> f64 {
        let min = self.sigma_min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            self.sigma_max() / min
        }
    }

    /// Numerical rank relative to the largest singular value.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cutoff = self.sigma_max() * rel_tol;
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }

    /// Least-squares solve through the pseudoinverse, dropping directions
    /// below the relative tolerance.
    pub fn solve(&self, b: &[Complex64], rel_tol: f64) -> Vec<Complex64> {
        let n = self.sigma.len();
        let cutoff = self.sigma_max() * rel_tol;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            if self.sigma[j] <= cutoff {
                continue;
            }
            // coefficient = (u_j^H b) / sigma_j
            let mut dot = Complex64::new(0.0, 0.0);
            for (i, bi) in b.iter().enumerate() {
                dot += self.u[i][j].conj() * bi;
            }
            let coef = dot / self.sigma[j];
            for i in 0..n {
                x[i] += self.v[i][j] * coef;
            }
        }
        x
    }
}

/// Residual of a candidate solution, `max |A x - b|`.
pub fn residual_inf(a: &[Vec<Complex64>], x: &[Complex64], b: &[Complex64]) -> f64 {
    let mut worst = 0.0_f64;
    for (row, bi) in a.iter().zip(b) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (aij, xj) in row.iter().zip(x) {
            acc += aij * xj;
        }
        worst = worst.max((acc - bi).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reconstructs_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
        for trial in 0..20 {
            let m = rng.gen_range(2..7);
            let n = rng.gen_range(1..=m);
            let a: Vec<Vec<Complex64>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                        .collect()
                })
                .collect();
            let s = svd(&a).unwrap();
            // A = U diag(sigma) V^H
            for i in 0..m {
                for j in 0..n {
                    let mut acc = c(0.0, 0.0);
                    for k in 0..n {
                        acc += s.u[i][k] * s.sigma[k] * s.v[j][k].conj();
                    }
                    assert!((acc - a[i][j]).norm() < 1e-10, "trial {trial} at ({i},{j})");
                }
            }
            // descending singular values
            for w in s.sigma.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn rank_and_solve() {
        // singular 2x2
        let a = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]];
        let s = svd(&a).unwrap();
        assert_eq!(s.rank(1e-10), 1);
        assert!(s.sigma_min() < 1e-12);
        // well-conditioned solve
        let a = vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]];
        let b = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let s = svd(&a).unwrap();
        let x = s.solve(&b, 1e-12);
        assert!(residual_inf(&a, &x, &b) < 1e-12);
    }
}
