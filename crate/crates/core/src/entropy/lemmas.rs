use crate::channel::{Atom, CqEnsemble, SenderSubset, PROB_TOL};
use crate::coding::Povm;
use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::operator::{partial_trace, DensityMatrix};
use crate::scalar::Real;

use super::{mutual_information, restrict, subsystem_entropy, SubsystemSelector};

/// Terms of `I(A₁A₂∧Z₁Z₂) − I(A₁∧Z₁) − I(A₂∧Z₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubadditivityCheck<T: Real> {
    pub joint: T,
    pub first: T,
    pub second: T,
    /// `joint − first − second`; never positive beyond rounding.
    pub slack: T,
}

/// Mutual informations of two channels used in parallel on a joint input
/// distribution `q[a₁][a₂]`.
pub fn check_subadditivity<T: Real>(
    v1: &[DensityMatrix<T>],
    v2: &[DensityMatrix<T>],
    q: &[Vec<T>],
) -> Result<SubadditivityCheck<T>> {
    let (n1, n2) = (v1.len(), v2.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(
            "channels need at least one letter".into(),
        ));
    }
    if q.len() != n1 || q.iter().any(|row| row.len() != n2) {
        return Err(Error::InvalidArgument(format!(
            "joint distribution must be {n1}×{n2}"
        )));
    }
    let (d1, d2) = (v1[0].dim(), v2[0].dim());
    if v1.iter().any(|r| r.dim() != d1) || v2.iter().any(|r| r.dim() != d2) {
        return Err(Error::InvalidArgument(
            "channel outputs differ in dimension".into(),
        ));
    }
    let mut atoms = Vec::with_capacity(n1 * n2);
    for (a1, row) in q.iter().enumerate() {
        for (a2, &p) in row.iter().enumerate() {
            if p < T::zero() || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "entry {p} is negative or not finite"
                )));
            }
            if p > T::zero() {
                atoms.push(Atom {
                    labels: vec![a1, a2],
                    prob: p,
                    state: v1[a1].tensor(&v2[a2]),
                });
            }
        }
    }
    let joint_state = CqEnsemble::new(vec![n1, n2], d1 * d2, atoms)?;
    let joint = mutual_information(&joint_state, SenderSubset::full(2))?;

    let marginal = |keep: usize| -> Result<T> {
        let d = [d1, d2][keep];
        let traced = joint_state.map_states(d, |rho| {
            Ok(DensityMatrix::from_matrix_unchecked(partial_trace(
                rho.matrix(),
                &[d1, d2],
                &[keep],
            )?))
        })?;
        let e = restrict(
            &traced,
            SubsystemSelector::with_quantum(SenderSubset::singleton(keep)),
        )?;
        mutual_information(&e, SenderSubset::singleton(0))
    };
    let first = marginal(0)?;
    let second = marginal(1)?;
    Ok(SubadditivityCheck {
        joint,
        first,
        second,
        slack: joint - first - second,
    })
}

/// Both sides of the Fano-type bound `H(X|Y) ≤ 1 + P_e log₂ Tr 1_X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoCheck<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub error_probability: T,
}

impl<T: Real> FanoCheck<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `x_povm[j][x]` is the diagonal of the `j`-th element on the joint label
/// space (labels flattened first-factor-major); `y_povm` element `k` pairs
/// with `x_povm[k]`. Every `x_povm` element must have trace at most 1, so
/// that outcome `j` reads as a (randomized) guess of a single label.
pub fn fano_bound_check<T: Real>(
    e: &CqEnsemble<T>,
    x_povm: &[Vec<T>],
    y_povm: &Povm<T>,
) -> Result<FanoCheck<T>> {
    let radix = MixedRadix::new(e.label_spaces());
    let nx = radix.len();
    if x_povm.len() != y_povm.len() {
        return Err(Error::InvalidArgument(format!(
            "POVMs index {} and {} outcomes",
            x_povm.len(),
            y_povm.len()
        )));
    }
    if y_povm.dim() != e.quantum_dim() {
        return Err(Error::DimensionMismatch {
            expected: e.quantum_dim(),
            found: y_povm.dim(),
        });
    }
    for x in 0..nx {
        let mut total = T::zero();
        for row in x_povm {
            if row.len() != nx {
                return Err(Error::DimensionMismatch {
                    expected: nx,
                    found: row.len(),
                });
            }
            if row[x] < -T::tol(PROB_TOL) {
                return Err(Error::InvalidArgument("X POVM has a negative entry".into()));
            }
            total += row[x];
        }
        if (total - T::one()).abs() > T::tol(PROB_TOL) {
            return Err(Error::InvalidArgument(format!(
                "X POVM elements sum to {total} at label {x}"
            )));
        }
    }

    for (j, row) in x_povm.iter().enumerate() {
        let tr = row.iter().fold(T::zero(), |a, &b| a + b);
        if tr > T::one() + T::tol(PROB_TOL) {
            return Err(Error::InvalidArgument(format!(
                "X POVM element {j} has trace {tr}; each element may carry at most one label"
            )));
        }
    }

    let mut success = T::zero();
    for a in e.atoms() {
        let x = radix.encode(&a.labels);
        let probs = y_povm.probabilities(&a.state)?;
        for (row, py) in x_povm.iter().zip(probs) {
            success += a.prob * row[x] * py;
        }
    }
    let error_probability = (T::one() - success).max(T::zero());
    let all = SenderSubset::full(e.arity());
    let lhs = subsystem_entropy(e, SubsystemSelector::with_quantum(all))?
        - subsystem_entropy(e, SubsystemSelector::quantum_only())?;
    let rhs = T::one() + error_probability * T::from_usize(nx).unwrap().log2();
    Ok(FanoCheck {
        lhs,
        rhs,
        error_probability,
    })
}
