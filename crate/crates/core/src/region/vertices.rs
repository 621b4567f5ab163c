use crate::channel::SenderSubset;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{RateConstraintSet, RatePoint};

/// Largest sender count for brute-force vertex enumeration.
pub const MAX_VERTEX_SENDERS: usize = 3;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < T::tol(1e-12) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let pivot = a[col].clone();
            for (x, v) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * *v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn choose(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// All vertices of `{R ≥ 0, R(J) ≤ b(J)}`, found by intersecting every
/// `s`-subset of constraint hyperplanes and keeping the feasible points.
pub fn polytope_vertices<T: Real>(cs: &RateConstraintSet<T>, tol: T) -> Result<Vec<RatePoint<T>>> {
    let s = cs.num_senders();
    if s > MAX_VERTEX_SENDERS {
        return Err(Error::CapExceeded {
            what: "senders for vertex enumeration",
            required: s,
            cap: MAX_VERTEX_SENDERS,
        });
    }
    // rows: a · R ≤ b
    let mut rows: Vec<(Vec<T>, T)> = cs
        .iter()
        .map(|(j, b)| {
            (
                (0..s)
                    .map(|i| if j.contains(i) { T::one() } else { T::zero() })
                    .collect(),
                b,
            )
        })
        .collect();
    for i in 0..s {
        let mut a = vec![T::zero(); s];
        a[i] = -T::one();
        rows.push((a, T::zero()));
    }

    let mut out: Vec<Vec<T>> = Vec::new();
    for pick in choose(rows.len(), s) {
        let a = pick.iter().map(|&r| rows[r].0.clone()).collect();
        let b = pick.iter().map(|&r| rows[r].1).collect();
        let Some(x) = solve(a, b) else { continue };
        let feasible = rows.iter().all(|(a, b)| {
            let lhs: T = a.iter().zip(&x).map(|(p, q)| *p * *q).sum();
            lhs <= *b + tol
        });
        if feasible
            && !out
                .iter()
                .any(|v| v.iter().zip(&x).all(|(p, q)| (*p - *q).abs() <= tol))
        {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out
        .into_iter()
        .map(|v| RatePoint {
            rates: v.into_iter().map(|r| r.max(T::zero())).collect(),
        })
        .collect())
}

/// Vertices on the face `R([s]) = b([s])`.
pub fn dominant_vertices<T: Real>(cs: &RateConstraintSet<T>, tol: T) -> Result<Vec<RatePoint<T>>> {
    let full = SenderSubset::full(cs.num_senders());
    Ok(polytope_vertices(cs, tol)?
        .into_iter()
        .filter(|p| p.sum_over(full) >= cs.full_bound() - tol)
        .collect())
}
