//! Cyclic Jacobi diagonalization of complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` and then applies
//! the classical real Jacobi rotation, i.e. `J = P R P†` with
//! `P = diag(1, e^{-iφ})`. Exact zeros are skipped, so block-diagonal
//! inputs only pay for rotations inside their blocks.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> Eigen<T> {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::square_zeros(n);
        for (k, &fk) in fv.iter().enumerate() {
            if fk == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                if vik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out.hermitize()
    }
}

/// Diagonalizes `a`, which must be Hermitian (only checked by callers).
pub(crate) fn jacobi_eigen<T: Real>(a: &ComplexMatrix<T>) -> Eigen<T> {
    let n = a.dim();
    let mut m = a.hermitize();
    let mut v = ComplexMatrix::identity(n);

    let frob2: T = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let target = T::epsilon() * T::epsilon() * frob2;

    for _ in 0..MAX_SWEEPS {
        let mut off2 = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += m[(p, q)].norm_sqr();
            }
        }
        if off2 + off2 <= target || off2 == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| {
        diag[i]
            .partial_cmp(&diag[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::square_zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new)] = v[(r, old)];
        }
    }
    Eigen { values, vectors }
}

fn rotate<T: Real>(m: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let g = m[(p, q)];
    let abs_g = g.norm();
    if abs_g == T::zero() {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Negligible pivot relative to both diagonal entries.
    let hundred = T::lit(100.0);
    if abs_g * hundred * T::epsilon() < T::min_positive_value()
        || (app.abs() + hundred * abs_g == app.abs() && aqq.abs() + hundred * abs_g == aqq.abs())
    {
        m[(p, q)] = Complex::zero();
        m[(q, p)] = Complex::zero();
        return;
    }

    let u = g / abs_g;
    let theta = (aqq - app) / (abs_g + abs_g);
    let t = {
        let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -t
        } else {
            t
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    // J restricted to (p, q): [[c, s·u], [-s·ū, c]].
    let jpq = u * s;
    let jqp = -(u.conj() * s);

    let n = m.dim();
    // m ← m J
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * c;
    }
    // m ← J† m
    let jpq_c = jpq.conj();
    let jqp_c = jqp.conj();
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c + mqk * jqp_c;
        m[(q, k)] = mpk * jpq_c + mqk * c;
    }
    m[(p, p)] = Complex::new(app - t * abs_g, T::zero());
    m[(q, q)] = Complex::new(aqq + t * abs_g, T::zero());
    m[(p, q)] = Complex::zero();
    m[(q, p)] = Complex::zero();
    // v ← v J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, 1-i], [1+i, 3]] has eigenvalues 1 and 4.
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0)],
            vec![c(1.0, 1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let e = jacobi_eigen(&a);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 4.0).abs() < 1e-14);
        let r = e.reconstruct_with(|x| x);
        assert!((&r - &a).max_abs() < 1e-14);
    }

    #[test]
    fn block_diagonal_stays_block_diagonal() {
        let mut a = ComplexMatrix::square_zeros(4);
        a[(0, 0)] = c(1.0, 0.0);
        a[(0, 1)] = c(0.5, 0.5);
        a[(1, 0)] = c(0.5, -0.5);
        a[(1, 1)] = c(2.0, 0.0);
        a[(2, 2)] = c(3.0, 0.0);
        a[(2, 3)] = c(0.0, 1.0);
        a[(3, 2)] = c(0.0, -1.0);
        a[(3, 3)] = c(3.0, 0.0);
        let e = jacobi_eigen(&a);
        for k in 0..4 {
            // eigenvectors never mix the two blocks
            let upper = e.vectors[(0, k)].norm() + e.vectors[(1, k)].norm();
            let lower = e.vectors[(2, k)].norm() + e.vectors[(3, k)].norm();
            assert_eq!(upper * lower, 0.0);
        }
        assert!((&e.reconstruct_with(|x| x) - &a).max_abs() < 1e-14);
    }
}
