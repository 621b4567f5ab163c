use rayon::prelude::*;

use crate::channel::{channel_state, CqMacChannel, Prior};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::scalar::Real;

use super::{corners_from_table, Corner, EntropyTable, RateConstraintSet, RatePoint};

/// Which product priors a sweep visits.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorGrid<T: Real> {
    /// Every product prior whose per-sender numerators over `k` sum to `k`.
    Resolution(usize),
    Explicit(Vec<Prior<T>>),
}

/// One grid prior with its bounds and distinct corners.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T: Real> {
    pub prior: Prior<T>,
    pub constraints: RateConstraintSet<T>,
    pub corners: Vec<Corner<T>>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Nonnegative vectors of length `parts` summing to `k`, in lexicographic order.
pub fn compositions(k: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, slot: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[slot] = v;
            go(left - v, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        go(k, 0, &mut vec![0; parts], &mut out);
    }
    out
}

fn grid_priors<T: Real>(alphabets: &[usize], k: usize, limits: &Limits) -> Result<Vec<Prior<T>>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "grid resolution must be at least 1".into(),
        ));
    }
    let mut total: usize = 1;
    for &a in alphabets {
        total = binomial(k + a - 1, a - 1)
            .and_then(|c| total.checked_mul(c))
            .unwrap_or(usize::MAX);
    }
    if total > limits.max_grid_points {
        return Err(Error::CapExceeded {
            what: "prior grid points",
            required: total,
            cap: limits.max_grid_points,
        });
    }
    let denom = T::from_usize(k).unwrap();
    let per_sender: Vec<Vec<Vec<T>>> = alphabets
        .iter()
        .map(|&a| {
            compositions(k, a)
                .into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|v| T::from_usize(v).unwrap() / denom)
                        .collect()
                })
                .collect()
        })
        .collect();
    let radix = crate::index::MixedRadix::new(&per_sender.iter().map(Vec::len).collect::<Vec<_>>());
    radix
        .iter()
        .map(|idx| {
            Prior::new(
                idx.iter()
                    .enumerate()
                    .map(|(i, &c)| per_sender[i][c].clone())
                    .collect(),
            )
        })
        .collect()
}

/// Bounds and corners at every grid prior, in grid order.
pub fn boundary_sweep<T: Real>(
    ch: &CqMacChannel<T>,
    grid: &PriorGrid<T>,
    limits: &Limits,
) -> Result<Vec<SweepPoint<T>>> {
    let priors = match grid {
        PriorGrid::Resolution(k) => grid_priors(ch.alphabet_sizes(), *k, limits)?,
        PriorGrid::Explicit(ps) => {
            if ps.len() > limits.max_grid_points {
                return Err(Error::CapExceeded {
                    what: "prior grid points",
                    required: ps.len(),
                    cap: limits.max_grid_points,
                });
            }
            ps.clone()
        }
    };
    priors
        .into_par_iter()
        .map(|prior| {
            let table = EntropyTable::new(&channel_state(ch, &prior)?)?;
            Ok(SweepPoint {
                constraints: table.constraint_set(),
                corners: corners_from_table(&table, limits)?,
                prior,
            })
        })
        .collect()
}

/// Vertices of the upper-right boundary of the two-sender region spanned by
/// `points`: from `(0, max R₂)` along the concave hull to `(max R₁, 0)`.
pub fn upper_boundary_2d<T: Real>(points: &[RatePoint<T>]) -> Result<Vec<[T; 2]>> {
    if let Some(p) = points.iter().find(|p| p.num_senders() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.num_senders(),
        });
    }
    if points.is_empty() {
        return Ok(vec![[T::zero(), T::zero()]]);
    }
    let xmax = points.iter().map(|p| p.rates()[0]).fold(T::zero(), T::max);
    let ymax = points.iter().map(|p| p.rates()[1]).fold(T::zero(), T::max);
    let mut pts: Vec<[T; 2]> = points
        .iter()
        .map(|p| [p.rates()[0], p.rates()[1]])
        .collect();
    pts.push([T::zero(), ymax]);
    pts.push([xmax, T::zero()]);
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });

    let cross = |o: [T; 2], a: [T; 2], b: [T; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[T; 2]> = Vec::new();
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= T::zero() {
            hull.pop();
        }
        if hull.last() != Some(&p) {
            hull.push(p);
        }
    }
    if hull.last().is_some_and(|l| l[1] > T::zero()) {
        hull.push([xmax, T::zero()]);
    }
    Ok(hull)
}
