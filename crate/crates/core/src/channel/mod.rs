//! Classical-quantum multiple-access channels and the objects derived from them.

mod block;
mod ensemble;
pub mod format;
mod qq;
mod subset;

pub(crate) use block::block_dim;
pub use block::{block_channel, tensor_word, BlockChannel};
pub use ensemble::{Atom, CqEnsemble, EnsembleBuilder, MIN_ATOM_PROB};
pub use qq::{precompose_qq, CpMap};
pub use subset::{SenderSubset, MAX_PARTIES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{fmt_tuple, MixedRadix};
use crate::operator::{ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

/// Allowed distance of a probability vector's sum from 1.
pub const PROB_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sender {
    pub name: String,
    pub alphabet: usize,
}

/// A map from joint input letters `(x_1, …, x_s)` to output states.
#[derive(Debug, Clone, PartialEq)]
pub struct CqMacChannel<T: Real> {
    senders: Vec<Sender>,
    output_dim: usize,
    radix: MixedRadix,
    states: Vec<DensityMatrix<T>>,
}

impl<T: Real> CqMacChannel<T> {
    /// `states` is indexed by joint tuple, first sender most significant.
    pub fn new(
        senders: Vec<Sender>,
        output_dim: usize,
        states: Vec<DensityMatrix<T>>,
    ) -> Result<Self> {
        if senders.is_empty() || senders.len() > MAX_PARTIES {
            return Err(Error::InvalidArgument(format!(
                "sender count must be in 1..={MAX_PARTIES}"
            )));
        }
        if let Some(s) = senders.iter().find(|s| s.alphabet == 0) {
            return Err(Error::InvalidArgument(format!(
                "sender {} has an empty alphabet",
                s.name
            )));
        }
        let radix = MixedRadix::new(&senders.iter().map(|s| s.alphabet).collect::<Vec<_>>());
        let count = radix
            .checked_len()
            .ok_or_else(|| Error::InvalidArgument("joint alphabet too large".into()))?;
        if states.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                found: states.len(),
            });
        }
        if let Some(bad) = states.iter().find(|r| r.dim() != output_dim) {
            return Err(Error::DimensionMismatch {
                expected: output_dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            senders,
            output_dim,
            radix,
            states,
        })
    }

    /// Builds a channel with default sender names `X1, X2, …`.
    pub fn from_fn(
        alphabets: &[usize],
        output_dim: usize,
        mut f: impl FnMut(&[usize]) -> DensityMatrix<T>,
    ) -> Result<Self> {
        let radix = MixedRadix::new(alphabets);
        let states = radix.iter().map(|t| f(&t)).collect();
        Self::new(default_senders(alphabets), output_dim, states)
    }

    /// Classical channel from a row-stochastic table (rows in joint-tuple order).
    pub fn classical(alphabets: &[usize], rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let states = rows
            .iter()
            .map(|r| DensityMatrix::diagonal(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(default_senders(alphabets), d, states)
    }

    pub fn num_senders(&self) -> usize {
        self.senders.len()
    }

    pub fn senders(&self) -> &[Sender] {
        &self.senders
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        self.radix.radices()
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn num_tuples(&self) -> usize {
        self.states.len()
    }

    pub fn joint_index(&self, tuple: &[usize]) -> usize {
        self.radix.encode(tuple)
    }

    pub fn state(&self, tuple: &[usize]) -> &DensityMatrix<T> {
        assert!(
            self.radix.in_range(tuple),
            "letter tuple {} out of range",
            fmt_tuple(tuple)
        );
        &self.states[self.radix.encode(tuple)]
    }

    pub fn states(&self) -> &[DensityMatrix<T>] {
        &self.states
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.radix.iter()
    }

    /// Reorders senders: sender `k` of the result is sender `order[k]` of `self`.
    pub fn relabel_senders(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.num_senders())?;
        let senders: Vec<Sender> = order.iter().map(|&i| self.senders[i].clone()).collect();
        let radix = MixedRadix::new(&senders.iter().map(|s| s.alphabet).collect::<Vec<_>>());
        let states = radix
            .iter()
            .map(|t| {
                let mut orig = vec![0; t.len()];
                for (k, &i) in order.iter().enumerate() {
                    orig[i] = t[k];
                }
                self.state(&orig).clone()
            })
            .collect();
        Self::new(senders, self.output_dim, states)
    }

    /// True when all output states commute pairwise.
    pub fn is_quasi_classical(&self) -> bool {
        let tol = T::tol(1e-10);
        self.states.iter().enumerate().all(|(i, a)| {
            self.states[i + 1..].iter().all(|b| {
                let ab = a.matrix() * b.matrix();
                let ba = b.matrix() * a.matrix();
                (&ab - &ba).max_abs() <= tol
            })
        })
    }
}

pub(crate) fn default_senders(alphabets: &[usize]) -> Vec<Sender> {
    alphabets
        .iter()
        .enumerate()
        .map(|(i, &a)| Sender {
            name: format!("X{}", i + 1),
            alphabet: a,
        })
        .collect()
}

pub(crate) fn check_permutation(perm: &[usize], s: usize) -> Result<()> {
    let mut seen = vec![false; s];
    if perm.len() != s {
        return Err(Error::InvalidArgument(format!(
            "permutation has {} entries, expected {s}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= s || seen[p] {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{s}"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Independent input distributions, one per sender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prior<T: Real> {
    per_sender: Vec<Vec<T>>,
}

impl<T: Real> Prior<T> {
    pub fn new(per_sender: Vec<Vec<T>>) -> Result<Self> {
        for (i, p) in per_sender.iter().enumerate() {
            check_distribution(p)
                .map_err(|e| Error::InvalidDistribution(format!("sender {}: {e}", i + 1)))?;
        }
        Ok(Self { per_sender })
    }

    pub fn uniform(alphabets: &[usize]) -> Self {
        Self {
            per_sender: alphabets
                .iter()
                .map(|&a| vec![T::one() / T::from_usize(a).unwrap(); a])
                .collect(),
        }
    }

    pub fn point_mass(alphabets: &[usize], letters: &[usize]) -> Self {
        Self {
            per_sender: alphabets
                .iter()
                .zip(letters)
                .map(|(&a, &x)| {
                    (0..a)
                        .map(|k| if k == x { T::one() } else { T::zero() })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn num_senders(&self) -> usize {
        self.per_sender.len()
    }

    pub fn sender(&self, i: usize) -> &[T] {
        &self.per_sender[i]
    }

    pub fn per_sender(&self) -> &[Vec<T>] {
        &self.per_sender
    }

    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.per_sender.iter().map(Vec::len).collect()
    }

    /// `Π_{i ∈ members} P_i(letters[k])`, letters listed in member order.
    pub fn probability_of(&self, members: &[usize], letters: &[usize]) -> T {
        members
            .iter()
            .zip(letters)
            .map(|(&i, &x)| self.per_sender[i][x])
            .fold(T::one(), |a, b| a * b)
    }

    pub fn joint_probability(&self, tuple: &[usize]) -> T {
        tuple
            .iter()
            .enumerate()
            .map(|(i, &x)| self.per_sender[i][x])
            .fold(T::one(), |a, b| a * b)
    }

    pub(crate) fn check_matches(&self, alphabets: &[usize]) -> Result<()> {
        if self.alphabet_sizes() != alphabets {
            return Err(Error::InvalidArgument(format!(
                "prior alphabet sizes {:?} do not match channel alphabets {:?}",
                self.alphabet_sizes(),
                alphabets
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_distribution<T: Real>(p: &[T]) -> std::result::Result<(), String> {
    if p.is_empty() {
        return Err("empty distribution".into());
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < T::zero()) {
        return Err(format!("entry {x} is negative or not finite"));
    }
    let total: T = p.iter().copied().sum();
    if (total - T::one()).abs() > T::tol(PROB_TOL) {
        return Err(format!("entries sum to {total}"));
    }
    Ok(())
}

/// The channel state `γ = Σ P(x) x_1⊗…⊗x_s⊗W_x` as a labeled ensemble.
pub fn channel_state<T: Real>(ch: &CqMacChannel<T>, p: &Prior<T>) -> Result<CqEnsemble<T>> {
    p.check_matches(ch.alphabet_sizes())?;
    let atoms = ch
        .tuples()
        .map(|t| {
            let prob = p.joint_probability(&t);
            let state = ch.state(&t).clone();
            Atom {
                labels: t,
                prob,
                state,
            }
        })
        .collect();
    CqEnsemble::new(ch.alphabet_sizes().to_vec(), ch.output_dim(), atoms)
}

/// The channel `P_{J^c}W` seen by senders in `J`, the others averaged out.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChannel<T: Real> {
    subset: SenderSubset,
    radix: MixedRadix,
    states: Vec<DensityMatrix<T>>,
}

impl<T: Real> ReducedChannel<T> {
    pub fn subset(&self) -> SenderSubset {
        self.subset
    }

    /// Alphabet sizes of the members of `J`, ascending sender order.
    pub fn alphabet_sizes(&self) -> &[usize] {
        self.radix.radices()
    }

    /// State for the letters of the members of `J`, in ascending sender order.
    pub fn state(&self, letters: &[usize]) -> &DensityMatrix<T> {
        &self.states[self.radix.encode(letters)]
    }

    pub fn states(&self) -> &[DensityMatrix<T>] {
        &self.states
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.radix.iter()
    }
}

pub fn reduced_channel<T: Real>(
    ch: &CqMacChannel<T>,
    p: &Prior<T>,
    j: SenderSubset,
) -> Result<ReducedChannel<T>> {
    p.check_matches(ch.alphabet_sizes())?;
    let s = ch.num_senders();
    if j.is_empty() || !j.within(s) {
        return Err(Error::InvalidArgument(format!(
            "sender subset {j} must be nonempty within {s} senders"
        )));
    }
    let members = j.members();
    let others = j.complement(s).members();
    let alph = ch.alphabet_sizes();
    let radix = MixedRadix::new(&members.iter().map(|&i| alph[i]).collect::<Vec<_>>());
    let other_radix = MixedRadix::new(&others.iter().map(|&i| alph[i]).collect::<Vec<_>>());
    let d = ch.output_dim();

    let states = radix
        .iter()
        .map(|xj| {
            let mut acc = ComplexMatrix::square_zeros(d);
            let mut full = vec![0; s];
            for (&i, &x) in members.iter().zip(&xj) {
                full[i] = x;
            }
            for xc in other_radix.iter() {
                for (&i, &x) in others.iter().zip(&xc) {
                    full[i] = x;
                }
                let w = p.probability_of(&others, &xc);
                if w > T::zero() {
                    acc.add_scaled(w, ch.state(&full).matrix());
                }
            }
            DensityMatrix::from_matrix_unchecked(acc)
        })
        .collect();
    Ok(ReducedChannel {
        subset: j,
        radix,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn adder() -> CqMacChannel<f64> {
        CqMacChannel::from_fn(&[2, 2], 3, |t| DensityMatrix::basis(3, t[0] + t[1])).unwrap()
    }

    #[test]
    fn channel_state_probabilities() {
        let ch = adder();
        let e = channel_state(&ch, &Prior::uniform(&[2, 2])).unwrap();
        assert_eq!(e.atoms().len(), 4);
        assert!(e.atoms().iter().all(|a| (a.prob - 0.25).abs() < 1e-15));

        let point = channel_state(&ch, &Prior::point_mass(&[2, 2], &[1, 0])).unwrap();
        assert_eq!(point.atoms().len(), 1);
        assert_eq!(point.atoms()[0].labels, vec![1, 0]);
        assert_eq!(point.atoms()[0].prob, 1.0);

        let p = Prior::new(vec![vec![0.3, 0.7], vec![0.5, 0.5]]).unwrap();
        let e = channel_state(&ch, &p).unwrap();
        assert!((e.probability_of(&[0, 1]) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn reduced_channel_examples() {
        let ch = adder();
        let uni = Prior::uniform(&[2, 2]);
        let full = reduced_channel(&ch, &uni, SenderSubset::full(2)).unwrap();
        for t in ch.tuples() {
            assert_eq!(full.state(&t), ch.state(&t));
        }

        let degenerate = Prior::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let r = reduced_channel(&ch, &degenerate, SenderSubset::singleton(0)).unwrap();
        assert_eq!(r.state(&[1]).matrix(), ch.state(&[1, 0]).matrix());

        let r = reduced_channel(&ch, &uni, SenderSubset::singleton(0)).unwrap();
        let want = ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.0]);
        assert!((r.state(&[0]).matrix() - &want).max_abs() < 1e-15);

        assert!(reduced_channel(&ch, &uni, SenderSubset::empty()).is_err());
    }

    #[test]
    fn prior_validation() {
        assert!(Prior::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(Prior::new(vec![vec![-0.1, 1.1]]).is_err());
        assert!(Prior::<f64>::new(vec![vec![]]).is_err());
        assert!(Prior::new(vec![vec![0.25, 0.75]]).is_ok());
    }

    #[test]
    fn relabel_swaps_senders() {
        let ch =
            CqMacChannel::<f64>::from_fn(&[2, 3], 6, |t| DensityMatrix::basis(6, 3 * t[0] + t[1]))
                .unwrap();
        let sw = ch.relabel_senders(&[1, 0]).unwrap();
        assert_eq!(sw.alphabet_sizes(), &[3, 2]);
        assert_eq!(sw.state(&[2, 1]), ch.state(&[1, 2]));
        assert!(ch.is_quasi_classical());
    }
}
