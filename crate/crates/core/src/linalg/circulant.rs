use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Exact solver for symmetric positive definite matrices that are block
/// circulant in the angular index: entry `((i, j), (i', j'))` depends only on
/// `i`, `i'` and `j' - j mod n`. Each Fourier mode gives a dense Hermitian
/// system of size `rings`, factored once by Cholesky.
pub struct BlockCirculantSolver {
    rings: usize,
    n: usize,
    factors: Vec<Cholesky<Complex64, Dyn>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BlockCirculantSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockCirculantSolver")
            .field("rings", &self.rings)
            .field("n", &self.n)
            .finish()
    }
}

impl BlockCirculantSolver {
    /// Factors `matrix + ring_rank_one`, where the optional rank-one term is
    /// `β βᵀ` with `β` constant on each ring (`β_(i,j) = beta[i]`).
    pub fn new(matrix: &CsrMatrix, rings: usize, n: usize, ring_rank_one: Option<&[f64]>) -> Result<Self> {
        assert_eq!(matrix.rows(), rings * n);
        let omega: Vec<Complex64> = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
            .collect();
        let entries: Vec<(usize, usize, usize, f64)> = (0..rings)
            .flat_map(|i| {
                matrix
                    .row(i * n)
                    .map(move |(col, v)| (i, col / n, col % n, v))
            })
            .collect();
        let factors = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut block = DMatrix::<Complex64>::zeros(rings, rings);
                for &(i, ip, m, v) in &entries {
                    block[(i, ip)] += omega[(k * m) % n] * v;
                }
                if k == 0 {
                    if let Some(beta) = ring_rank_one {
                        for i in 0..rings {
                            for ip in 0..rings {
                                block[(i, ip)] += Complex64::new(n as f64 * beta[i] * beta[ip], 0.0);
                            }
                        }
                    }
                }
                // symmetrize away rounding noise before factoring
                let herm = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
                Cholesky::new(herm)
            })
            .collect::<Vec<_>>();
        let factors = factors
            .into_iter()
            .enumerate()
            .map(|(k, f)| {
                f.ok_or_else(|| {
                    Error::Invariant(format!("Fourier block {k} of the operator is not positive definite"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            rings,
            n,
            factors,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.rings * self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim());
        let (rings, n) = (self.rings, self.n);
        let mut spectra: Vec<Vec<Complex64>> = (0..rings)
            .map(|i| {
                let mut buf: Vec<Complex64> =
                    rhs[i * n..(i + 1) * n].iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.forward.process(&mut buf);
                buf
            })
            .collect();
        let solved: Vec<DVector<Complex64>> = (0..n)
            .map(|k| {
                let b = DVector::from_iterator(rings, spectra.iter().map(|s| s[k]));
                self.factors[k].solve(&b)
            })
            .collect();
        let mut out = vec![0.0; rings * n];
        for (i, spec) in spectra.iter_mut().enumerate() {
            for (k, x) in solved.iter().enumerate() {
                spec[k] = x[i];
            }
            self.inverse.process(spec);
            for j in 0..n {
                out[i * n + j] = spec[j].re / n as f64;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrBuilder;

    /// Periodic 2D Laplacian-like SPD matrix with a pole coupling.
    fn sample(rings: usize, n: usize) -> CsrMatrix {
        let mut b = CsrBuilder::new(rings * n);
        for i in 0..rings {
            for j in 0..n {
                let k = i * n + j;
                b.push(k, 4.0 + i as f64);
                b.push(i * n + (j + 1) % n, -1.0);
                b.push(i * n + (j + n - 1) % n, -1.0);
                if i + 1 < rings {
                    b.push(k + n, -0.5);
                }
                if i > 0 {
                    b.push(k - n, -0.5);
                } else {
                    b.push((j + n / 2) % n, 0.3);
                }
                b.finish_row();
            }
        }
        b.build()
    }

    #[test]
    fn solves_block_circulant_system() {
        let (rings, n) = (5, 8);
        let a = sample(rings, n);
        let solver = BlockCirculantSolver::new(&a, rings, n, None).unwrap();
        let x: Vec<f64> = (0..rings * n).map(|k| ((k * 7) % 11) as f64 - 5.0).collect();
        let b = a.mul_vec(&x);
        let y = solver.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn ring_rank_one_term_enters_mode_zero() {
        let (rings, n) = (4, 8);
        let a = sample(rings, n);
        let beta = [0.3, -0.1, 0.7, 0.2];
        let solver = BlockCirculantSolver::new(&a, rings, n, Some(&beta)).unwrap();
        let x: Vec<f64> = (0..rings * n).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x);
        let s: f64 = (0..rings * n).map(|k| beta[k / n] * x[k]).sum();
        for (k, bk) in b.iter_mut().enumerate() {
            *bk += beta[k / n] * s;
        }
        let y = solver.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
