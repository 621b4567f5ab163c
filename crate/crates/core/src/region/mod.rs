//! Rate regions: the `2^s − 1` bounds `R(J) ≤ I(X(J)∧Y|X(J^c))`, the
//! successive-decoding corners, membership, mixtures of priors and sweeps.

mod sweep;
mod vertices;

pub use sweep::{boundary_sweep, compositions, upper_boundary_2d, PriorGrid, SweepPoint};
pub use vertices::{dominant_vertices, polytope_vertices};

use crate::channel::{channel_state, CqEnsemble, CqMacChannel, Prior, SenderSubset};
use crate::entropy::{subsystem_entropy, SubsystemSelector, MI_CLAMP_TOL};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::scalar::Real;

/// Default slack for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Corners closer than this in every coordinate are merged.
pub const CORNER_DEDUP_TOL: f64 = 1e-9;

/// Bounds `b(J)` for every nonempty `J ⊆ [s]`, stored by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConstraintSet<T: Real> {
    senders: usize,
    bounds: Vec<T>,
}

impl<T: Real> RateConstraintSet<T> {
    /// `bounds[m − 1]` is the bound for mask `m`.
    pub fn new(senders: usize, bounds: Vec<T>) -> Result<Self> {
        let expected = (1usize << senders) - 1;
        if bounds.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: bounds.len(),
            });
        }
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { senders, bounds })
    }

    pub fn num_senders(&self) -> usize {
        self.senders
    }

    pub fn bound(&self, j: SenderSubset) -> T {
        assert!(
            !j.is_empty() && j.within(self.senders),
            "subset {j} out of range"
        );
        self.bounds[j.mask() as usize - 1]
    }

    pub fn full_bound(&self) -> T {
        self.bound(SenderSubset::full(self.senders))
    }

    pub fn bounds(&self) -> &[T] {
        &self.bounds
    }

    pub fn iter(&self) -> impl Iterator<Item = (SenderSubset, T)> + '_ {
        SenderSubset::nonempty_subsets(self.senders).map(|j| (j, self.bound(j)))
    }

    /// Corner read off the bounds: `R_{π(i)} = b([s]∖π(<i)) − b([s]∖π(≤i))`, with `b(∅) = 0`.
    pub fn corner(&self, order: &[usize]) -> Result<RatePoint<T>> {
        crate::channel::check_permutation(order, self.senders)?;
        let b = |j: SenderSubset| {
            if j.is_empty() {
                T::zero()
            } else {
                self.bound(j)
            }
        };
        let mut rates = vec![T::zero(); self.senders];
        let mut known = SenderSubset::empty();
        for &i in order {
            let next = known.with(i);
            rates[i] = clamp_small_negative(
                b(known.complement(self.senders)) - b(next.complement(self.senders)),
            );
            known = next;
        }
        Ok(RatePoint { rates })
    }
}

/// A rate tuple in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint<T: Real> {
    rates: Vec<T>,
}

impl<T: Real> RatePoint<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "rate {r} is negative or not finite"
            )));
        }
        Ok(Self { rates })
    }

    pub fn origin(senders: usize) -> Self {
        Self {
            rates: vec![T::zero(); senders],
        }
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn num_senders(&self) -> usize {
        self.rates.len()
    }

    /// `R(J) = Σ_{i∈J} R_i`.
    pub fn sum_over(&self, j: SenderSubset) -> T {
        j.members().into_iter().map(|i| self.rates[i]).sum()
    }

    fn close_to(&self, other: &Self, tol: T) -> bool {
        self.rates
            .iter()
            .zip(&other.rates)
            .all(|(a, b)| (*a - *b).abs() <= tol)
    }
}

/// A corner with the decoding order that produced it (0-based, first decoded first).
#[derive(Debug, Clone, PartialEq)]
pub struct Corner<T: Real> {
    pub order: Vec<usize>,
    pub point: RatePoint<T>,
}

/// Time-sharing of priors with weights `q_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec<T: Real> {
    components: Vec<(T, Prior<T>)>,
}

impl<T: Real> MixtureSpec<T> {
    /// At most `max_components` components; `None` means the sender count.
    pub fn new(components: Vec<(T, Prior<T>)>, max_components: Option<usize>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("mixture without components".into()))?;
        let s = first.1.num_senders();
        let cap = max_components.unwrap_or(s.max(1));
        if components.len() > cap {
            return Err(Error::CapExceeded {
                what: "mixture components",
                required: components.len(),
                cap,
            });
        }
        let weights: Vec<T> = components.iter().map(|(w, _)| *w).collect();
        crate::channel::check_distribution(&weights).map_err(Error::InvalidDistribution)?;
        if components
            .iter()
            .any(|(_, p)| p.alphabet_sizes() != first.1.alphabet_sizes())
        {
            return Err(Error::InvalidArgument(
                "mixture priors differ in shape".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn single(prior: Prior<T>) -> Self {
        Self {
            components: vec![(T::one(), prior)],
        }
    }

    pub fn components(&self) -> &[(T, Prior<T>)] {
        &self.components
    }
}

fn clamp_small_negative<T: Real>(x: T) -> T {
    if x < T::zero() && x >= -T::tol(MI_CLAMP_TOL) {
        T::zero()
    } else {
        x
    }
}

/// `H(X(K))` and `H(Y X(K))` for every `K ⊆ [s]`, indexed by mask.
#[derive(Debug, Clone)]
pub struct EntropyTable<T: Real> {
    senders: usize,
    h_x: Vec<T>,
    h_yx: Vec<T>,
}

impl<T: Real> EntropyTable<T> {
    pub fn new(e: &CqEnsemble<T>) -> Result<Self> {
        let s = e.arity();
        let mut h_x = Vec::with_capacity(1 << s);
        let mut h_yx = Vec::with_capacity(1 << s);
        for k in SenderSubset::all_subsets(s) {
            h_x.push(subsystem_entropy(e, SubsystemSelector::classical(k))?);
            h_yx.push(subsystem_entropy(e, SubsystemSelector::with_quantum(k))?);
        }
        Ok(Self {
            senders: s,
            h_x,
            h_yx,
        })
    }

    pub fn num_senders(&self) -> usize {
        self.senders
    }

    /// `H(Y | X(K))`.
    pub fn conditional_output_entropy(&self, k: SenderSubset) -> T {
        let m = k.mask() as usize;
        self.h_yx[m] - self.h_x[m]
    }

    pub fn constraint_set(&self) -> RateConstraintSet<T> {
        let s = self.senders;
        let full = SenderSubset::full(s);
        let bounds = SenderSubset::nonempty_subsets(s)
            .map(|j| {
                clamp_small_negative(
                    self.conditional_output_entropy(j.complement(s))
                        - self.conditional_output_entropy(full),
                )
            })
            .collect();
        RateConstraintSet { senders: s, bounds }
    }

    /// Successive-decoding rates; `order[0]` is decoded first.
    pub fn corner(&self, order: &[usize]) -> Result<RatePoint<T>> {
        crate::channel::check_permutation(order, self.senders)?;
        let mut rates = vec![T::zero(); self.senders];
        let mut known = SenderSubset::empty();
        for &i in order {
            let next = known.with(i);
            rates[i] = clamp_small_negative(
                self.conditional_output_entropy(known) - self.conditional_output_entropy(next),
            );
            known = next;
        }
        Ok(RatePoint { rates })
    }
}

pub fn constraint_set<T: Real>(ch: &CqMacChannel<T>, p: &Prior<T>) -> Result<RateConstraintSet<T>> {
    Ok(EntropyTable::new(&channel_state(ch, p)?)?.constraint_set())
}

pub fn corner<T: Real>(
    ch: &CqMacChannel<T>,
    p: &Prior<T>,
    order: &[usize],
) -> Result<RatePoint<T>> {
    EntropyTable::new(&channel_state(ch, p)?)?.corner(order)
}

/// All orderings of `0..s` in lexicographic order.
pub fn permutations(s: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(s), &mut vec![false; s], &mut out);
    out
}

fn distinct_corners<T: Real>(
    s: usize,
    limits: &Limits,
    corner: impl Fn(&[usize]) -> Result<RatePoint<T>>,
) -> Result<Vec<Corner<T>>> {
    if s > limits.max_corner_senders {
        return Err(Error::CapExceeded {
            what: "senders for corner enumeration",
            required: s,
            cap: limits.max_corner_senders,
        });
    }
    let tol = T::tol(CORNER_DEDUP_TOL);
    let mut out: Vec<Corner<T>> = Vec::new();
    for order in permutations(s) {
        let point = corner(&order)?;
        if !out.iter().any(|c| c.point.close_to(&point, tol)) {
            out.push(Corner { order, point });
        }
    }
    Ok(out)
}

/// One corner per decoding order, keeping the first order that reaches each distinct point.
pub fn corners_from_table<T: Real>(
    table: &EntropyTable<T>,
    limits: &Limits,
) -> Result<Vec<Corner<T>>> {
    distinct_corners(table.num_senders(), limits, |o| table.corner(o))
}

/// Same as [`corners_from_table`] but from the bounds alone, e.g. for a mixture.
pub fn corners_from_constraints<T: Real>(
    cs: &RateConstraintSet<T>,
    limits: &Limits,
) -> Result<Vec<Corner<T>>> {
    distinct_corners(cs.num_senders(), limits, |o| cs.corner(o))
}

pub fn all_corners<T: Real>(
    ch: &CqMacChannel<T>,
    p: &Prior<T>,
    limits: &Limits,
) -> Result<Vec<Corner<T>>> {
    corners_from_table(&EntropyTable::new(&channel_state(ch, p)?)?, limits)
}

/// `R(J) ≤ b(J) + tol` for every nonempty `J`.
pub fn is_member<T: Real>(point: &RatePoint<T>, cs: &RateConstraintSet<T>, tol: T) -> Result<bool> {
    if point.num_senders() != cs.num_senders() {
        return Err(Error::DimensionMismatch {
            expected: cs.num_senders(),
            found: point.num_senders(),
        });
    }
    Ok(cs.iter().all(|(j, b)| point.sum_over(j) <= b + tol))
}

/// `b(J) = Σ_u q_u b_u(J)`.
pub fn mixture_constraints<T: Real>(
    ch: &CqMacChannel<T>,
    mix: &MixtureSpec<T>,
) -> Result<RateConstraintSet<T>> {
    let s = ch.num_senders();
    let mut bounds = vec![T::zero(); (1 << s) - 1];
    for (w, p) in mix.components() {
        let cs = constraint_set(ch, p)?;
        for (acc, b) in bounds.iter_mut().zip(cs.bounds()) {
            *acc += *w * *b;
        }
    }
    RateConstraintSet::new(s, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DensityMatrix;
    use rand::SeedableRng;

    pub(super) fn adder() -> CqMacChannel<f64> {
        CqMacChannel::from_fn(&[2, 2], 3, |t| DensityMatrix::basis(3, t[0] + t[1])).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn adder_region() {
        let ch = adder();
        let p = Prior::uniform(&[2, 2]);
        let cs = constraint_set(&ch, &p).unwrap();
        assert_close(cs.bounds(), &[1.0, 1.0, 1.5]);
        assert_close(corner(&ch, &p, &[0, 1]).unwrap().rates(), &[0.5, 1.0]);
        assert_close(corner(&ch, &p, &[1, 0]).unwrap().rates(), &[1.0, 0.5]);
        let all = all_corners(&ch, &p, &Limits::default()).unwrap();
        assert_eq!(all.len(), 2);
        assert!(corner(&ch, &p, &[0, 0]).is_err());
    }

    #[test]
    fn membership() {
        let cs = constraint_set(&adder(), &Prior::uniform(&[2, 2])).unwrap();
        assert!(is_member(&RatePoint::origin(2), &cs, 1e-9).unwrap());
        assert!(!is_member(&RatePoint::new(vec![1.0, 1.0]).unwrap(), &cs, 1e-9).unwrap());
        assert!(is_member(&RatePoint::new(vec![0.5, 1.0]).unwrap(), &cs, 1e-9).unwrap());
        assert!(is_member(&RatePoint::origin(3), &cs, 1e-9).is_err());
        assert!(RatePoint::new(vec![-0.1]).is_err());
    }

    #[test]
    fn collapsing_corners() {
        // output depends only on sender 1
        let ch =
            CqMacChannel::from_fn(&[2, 2], 2, |t| DensityMatrix::<f64>::basis(2, t[0])).unwrap();
        let all = all_corners(&ch, &Prior::uniform(&[2, 2]), &Limits::default()).unwrap();
        assert_eq!(all.len(), 1);
        assert_close(all[0].point.rates(), &[1.0, 0.0]);
    }

    #[test]
    fn single_sender_holevo() {
        let ch = CqMacChannel::from_fn(&[2], 2, |t| {
            if t[0] == 0 {
                DensityMatrix::basis(2, 0)
            } else {
                DensityMatrix::pure_real(&[1.0f64, 1.0]).unwrap()
            }
        })
        .unwrap();
        let p = Prior::uniform(&[2]);
        let cs = constraint_set(&ch, &p).unwrap();
        let l = (1.0 + 0.5f64.sqrt()) / 2.0;
        let chi = -l * l.log2() - (1.0 - l) * (1.0 - l).log2();
        assert!((cs.full_bound() - chi).abs() < 1e-12);
        assert_close(corner(&ch, &p, &[0]).unwrap().rates(), &[chi]);
    }

    #[test]
    fn mixtures() {
        let ch = adder();
        let u = Prior::uniform(&[2, 2]);
        let point = Prior::point_mass(&[2, 2], &[0, 1]);
        let plain = constraint_set(&ch, &u).unwrap();
        assert_eq!(
            mixture_constraints(&ch, &MixtureSpec::single(u.clone())).unwrap(),
            plain
        );
        let twice = MixtureSpec::new(vec![(0.5, u.clone()), (0.5, u.clone())], None).unwrap();
        assert_close(
            mixture_constraints(&ch, &twice).unwrap().bounds(),
            plain.bounds(),
        );
        let mix = MixtureSpec::new(vec![(0.5, u.clone()), (0.5, point)], None).unwrap();
        assert_close(
            mixture_constraints(&ch, &mix).unwrap().bounds(),
            &[0.5, 0.5, 0.75],
        );

        assert!(MixtureSpec::new(vec![(0.5, u.clone()), (0.4, u.clone())], None).is_err());
        let three = vec![(0.5, u.clone()), (0.25, u.clone()), (0.25, u.clone())];
        assert!(MixtureSpec::new(three.clone(), None).is_err());
        assert!(MixtureSpec::new(three, Some(3)).is_ok());
    }

    #[test]
    fn corner_cap() {
        let lim = Limits {
            max_corner_senders: 1,
            ..Limits::default()
        };
        assert!(matches!(
            all_corners(&adder(), &Prior::uniform(&[2, 2]), &lim),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn permutation_listing() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn corners_from_bounds_match_table() {
        let ch = crate::checks::random::random_channel(
            &mut rand_chacha::ChaCha8Rng::seed_from_u64(3),
            &[2, 3, 2],
            3,
        );
        let table =
            EntropyTable::new(&channel_state(&ch, &Prior::uniform(&[2, 3, 2])).unwrap()).unwrap();
        let cs = table.constraint_set();
        for order in permutations(3) {
            let a = table.corner(&order).unwrap();
            assert!(a.close_to(&cs.corner(&order).unwrap(), 1e-12));
        }
        let lim = Limits::default();
        assert_eq!(
            corners_from_constraints(&cs, &lim).unwrap().len(),
            corners_from_table(&table, &lim).unwrap().len()
        );
    }
}
