//! Entropies and mutual informations of classical-quantum ensembles.
//!
//! Every quantity is computed from the block form: the Shannon entropy of
//! the label marginal plus the average conditional von Neumann entropy. The
//! dense route (expand, partial trace, diagonalize) is kept alongside as an
//! independent check.

mod lemmas;

pub use lemmas::{check_subadditivity, fano_bound_check, FanoCheck, SubadditivityCheck};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{CqEnsemble, EnsembleBuilder, SenderSubset};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::operator::{partial_trace, DensityMatrix, HermitianOperator};
use crate::scalar::Real;

/// Negative conditional mutual informations above `-MI_CLAMP_TOL` are reported as 0.
pub const MI_CLAMP_TOL: f64 = 1e-9;

/// A set of commuting factors: some classical label factors, optionally the quantum one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubsystemSelector {
    pub classical: SenderSubset,
    pub quantum: bool,
}

impl SubsystemSelector {
    pub fn new(classical: SenderSubset, quantum: bool) -> Self {
        Self { classical, quantum }
    }

    pub fn classical(classical: SenderSubset) -> Self {
        Self::new(classical, false)
    }

    /// `Y X(J)`.
    pub fn with_quantum(classical: SenderSubset) -> Self {
        Self::new(classical, true)
    }

    pub fn quantum_only() -> Self {
        Self::new(SenderSubset::empty(), true)
    }

    pub fn is_empty(self) -> bool {
        self.classical.is_empty() && !self.quantum
    }

    pub fn overlaps(self, other: Self) -> bool {
        !self.classical.intersection(other.classical).is_empty() || (self.quantum && other.quantum)
    }

    pub fn union(self, other: Self) -> Self {
        Self::new(
            self.classical.union(other.classical),
            self.quantum || other.quantum,
        )
    }

    /// Bitmask with the quantum factor as bit `arity`.
    pub fn mask(self, arity: usize) -> u32 {
        self.classical.mask() | (u32::from(self.quantum) << arity)
    }

    pub fn from_mask(mask: u32, arity: usize) -> Self {
        Self::new(
            SenderSubset::from_mask(mask & SenderSubset::full(arity).mask()),
            mask >> arity & 1 == 1,
        )
    }

    fn check(self, e: &CqEnsemble<impl Real>) -> Result<()> {
        if !self.classical.within(e.arity()) {
            return Err(Error::InvalidArgument(format!(
                "selector {} exceeds the {} label factors",
                self.classical,
                e.arity()
            )));
        }
        Ok(())
    }
}

/// Marginal on the selected factors: other labels summed out, and the
/// quantum factor traced away unless selected.
pub fn restrict<T: Real>(e: &CqEnsemble<T>, sel: SubsystemSelector) -> Result<CqEnsemble<T>> {
    sel.check(e)?;
    if sel.is_empty() {
        return Err(Error::InvalidArgument("empty subsystem selector".into()));
    }
    let kept = sel.classical.members();
    if kept.len() == e.arity() && sel.quantum {
        return Ok(e.clone());
    }
    let spaces: Vec<usize> = kept.iter().map(|&k| e.label_spaces()[k]).collect();
    let d = if sel.quantum { e.quantum_dim() } else { 1 };
    let unit = crate::operator::ComplexMatrix::identity(1);
    let mut builder = EnsembleBuilder::new(spaces, d);
    for a in e.atoms() {
        let labels = kept.iter().map(|&k| a.labels[k]).collect();
        let state = if sel.quantum { a.state.matrix() } else { &unit };
        builder.add(labels, a.prob, state);
    }
    builder.build()
}

fn shannon_bits<T: Real>(probs: impl Iterator<Item = T>) -> T {
    probs
        .filter(|&p| p > T::zero())
        .map(|p| -p * p.log2())
        .sum()
}

/// `H = H(labels) + Σ p(ℓ) S(ρ_ℓ)` of an ensemble taken as a whole.
pub fn ensemble_entropy<T: Real>(e: &CqEnsemble<T>) -> T {
    let classical = shannon_bits(e.atoms().iter().map(|a| a.prob));
    let quantum: T = if e.quantum_dim() > 1 {
        e.atoms()
            .iter()
            .map(|a| a.prob * a.state.entropy_bits())
            .sum()
    } else {
        T::zero()
    };
    classical + quantum
}

/// Entropy of the selected factors in bits; the empty selector has entropy 0.
pub fn subsystem_entropy<T: Real>(e: &CqEnsemble<T>, sel: SubsystemSelector) -> Result<T> {
    sel.check(e)?;
    if sel.is_empty() {
        return Ok(T::zero());
    }
    Ok(ensemble_entropy(&restrict(e, sel)?))
}

/// The same entropy from the dense block-diagonal matrix: expand, partial
/// trace onto the selected factors, diagonalize.
pub fn dense_subsystem_entropy<T: Real>(
    e: &CqEnsemble<T>,
    sel: SubsystemSelector,
    limits: &Limits,
) -> Result<T> {
    sel.check(e)?;
    if sel.is_empty() {
        return Ok(T::zero());
    }
    let dense = e.to_dense(limits)?;
    let mut dims = e.label_spaces().to_vec();
    dims.push(e.quantum_dim());
    let mut keep = sel.classical.members();
    if sel.quantum {
        keep.push(e.arity());
    }
    let reduced = partial_trace(&dense, &dims, &keep)?;
    let rho =
        DensityMatrix::from_hermitian_unchecked(HermitianOperator::from_matrix_unchecked(reduced));
    Ok(rho.entropy_bits())
}

/// `H(B|C) = H(BC) − H(C)` for disjoint selectors.
pub fn conditional_entropy<T: Real>(
    e: &CqEnsemble<T>,
    b: SubsystemSelector,
    c: SubsystemSelector,
) -> Result<T> {
    b.check(e)?;
    c.check(e)?;
    if b.overlaps(c) {
        return Err(Error::InvalidArgument(
            "conditional entropy needs non-overlapping selectors".into(),
        ));
    }
    Ok(subsystem_entropy(e, b.union(c))? - subsystem_entropy(e, c)?)
}

/// Both evaluations of `I(X(J)∧Y|X(J^c))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInformation<T: Real> {
    /// Conditional form, clamped at 0 when within `MI_CLAMP_TOL` below it.
    pub value: T,
    /// `H(Y|X(J^c)) − H(Y|X_1…X_s)` before clamping.
    pub raw: T,
    /// `H(X(J)) + H(Y X(J^c)) − H(X_1…X_s Y)`, i.e. `I(X(J) ∧ Y X(J^c))`.
    pub joint_form: T,
}

impl<T: Real> MutualInformation<T> {
    /// Disagreement between the two forms; zero up to rounding for product label marginals.
    pub fn dual_path_gap(&self) -> T {
        (self.raw - self.joint_form).abs()
    }
}

pub fn mutual_information_detail<T: Real>(
    e: &CqEnsemble<T>,
    j: SenderSubset,
) -> Result<MutualInformation<T>> {
    let s = e.arity();
    if j.is_empty() || !j.within(s) {
        return Err(Error::InvalidArgument(format!(
            "sender subset {j} must be nonempty within {s} label factors"
        )));
    }
    let jc = j.complement(s);
    let all = SenderSubset::full(s);
    let h = |sel| subsystem_entropy(e, sel);
    let h_y_given_jc =
        h(SubsystemSelector::with_quantum(jc))? - h(SubsystemSelector::classical(jc))?;
    let h_y_given_all =
        h(SubsystemSelector::with_quantum(all))? - h(SubsystemSelector::classical(all))?;
    let raw = h_y_given_jc - h_y_given_all;
    let joint_form = h(SubsystemSelector::classical(j))? + h(SubsystemSelector::with_quantum(jc))?
        - h(SubsystemSelector::with_quantum(all))?;
    let value = if raw < T::zero() && raw >= -T::tol(MI_CLAMP_TOL) {
        T::zero()
    } else {
        raw
    };
    Ok(MutualInformation {
        value,
        raw,
        joint_form,
    })
}

/// `I(X(J)∧Y|X(J^c))` in bits.
pub fn mutual_information<T: Real>(e: &CqEnsemble<T>, j: SenderSubset) -> Result<T> {
    Ok(mutual_information_detail(e, j)?.value)
}

/// `H(V|Q) = Σ_a Q(a) S(V_a)`.
pub fn conditional_channel_entropy<T: Real>(v: &[DensityMatrix<T>], q: &[T]) -> Result<T> {
    if v.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: q.len(),
        });
    }
    Ok(v.iter()
        .zip(q)
        .filter(|(_, &w)| w > T::zero())
        .map(|(rho, &w)| w * rho.entropy_bits())
        .sum())
}

/// All subsystem entropies and conditional mutual informations of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    /// Keyed by selector mask; the quantum factor is bit `arity`.
    #[serde(rename = "H")]
    pub entropies: BTreeMap<String, f64>,
    /// Keyed by subset mask `J`.
    #[serde(rename = "I_cond")]
    pub mutual_informations: BTreeMap<String, f64>,
    /// Unclamped values, present only where clamping changed something.
    #[serde(
        rename = "I_cond_raw",
        default,
        skip_serializing_if = "BTreeMap::is_empty"
    )]
    pub raw_mutual_informations: BTreeMap<String, f64>,
}

pub fn info_report<T: Real>(e: &CqEnsemble<T>) -> Result<InfoReport> {
    let s = e.arity();
    let mut entropies = BTreeMap::new();
    for mask in 1..(1u32 << (s + 1)) {
        let sel = SubsystemSelector::from_mask(mask, s);
        entropies.insert(mask.to_string(), subsystem_entropy(e, sel)?.as_f64());
    }
    let mut mutual_informations = BTreeMap::new();
    let mut raw_mutual_informations = BTreeMap::new();
    for j in SenderSubset::nonempty_subsets(s) {
        let mi = mutual_information_detail(e, j)?;
        mutual_informations.insert(j.mask().to_string(), mi.value.as_f64());
        if mi.value != mi.raw {
            raw_mutual_informations.insert(j.mask().to_string(), mi.raw.as_f64());
        }
    }
    Ok(InfoReport {
        entropies,
        mutual_informations,
        raw_mutual_informations,
    })
}
