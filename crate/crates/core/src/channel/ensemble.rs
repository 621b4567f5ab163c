use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::index::{fmt_tuple, MixedRadix};
use crate::limits::Limits;
use crate::operator::{ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

use super::PROB_TOL;

/// Atoms lighter than this are dropped.
pub const MIN_ATOM_PROB: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<T: Real> {
    pub labels: Vec<usize>,
    pub prob: T,
    pub state: DensityMatrix<T>,
}

/// A classical-quantum state `Σ p(ℓ) |ℓ⟩⟨ℓ| ⊗ ρ_ℓ` kept in block form.
///
/// Labels are tuples over `label_spaces`; every atom carries a normalized
/// conditional state on the quantum factor. An ensemble without a quantum
/// factor uses `quantum_dim == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CqEnsemble<T: Real> {
    label_spaces: Vec<usize>,
    quantum_dim: usize,
    atoms: Vec<Atom<T>>,
}

impl<T: Real> CqEnsemble<T> {
    pub fn new(label_spaces: Vec<usize>, quantum_dim: usize, atoms: Vec<Atom<T>>) -> Result<Self> {
        let radix = MixedRadix::new(&label_spaces);
        let mut total = T::zero();
        let mut kept = Vec::with_capacity(atoms.len());
        for atom in atoms {
            if !radix.in_range(&atom.labels) {
                return Err(Error::InvalidArgument(format!(
                    "label {} outside label spaces {:?}",
                    fmt_tuple(&atom.labels),
                    label_spaces
                )));
            }
            if atom.state.dim() != quantum_dim {
                return Err(Error::DimensionMismatch {
                    expected: quantum_dim,
                    found: atom.state.dim(),
                });
            }
            if !atom.prob.is_finite() || atom.prob < T::zero() {
                return Err(Error::InvalidDistribution(format!(
                    "atom probability {}",
                    atom.prob
                )));
            }
            total += atom.prob;
            if atom.prob >= T::lit(MIN_ATOM_PROB) {
                kept.push(atom);
            }
        }
        if (total - T::one()).abs() > T::tol(PROB_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "atom probabilities sum to {total}"
            )));
        }
        kept.sort_by(|a, b| a.labels.cmp(&b.labels));
        if let Some(w) = kept.windows(2).find(|w| w[0].labels == w[1].labels) {
            return Err(Error::InvalidArgument(format!(
                "duplicate label {}",
                fmt_tuple(&w[0].labels)
            )));
        }
        Ok(Self {
            label_spaces,
            quantum_dim,
            atoms: kept,
        })
    }

    pub fn label_spaces(&self) -> &[usize] {
        &self.label_spaces
    }

    /// Number of classical label factors.
    pub fn arity(&self) -> usize {
        self.label_spaces.len()
    }

    pub fn quantum_dim(&self) -> usize {
        self.quantum_dim
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn probability_of(&self, labels: &[usize]) -> T {
        self.atoms
            .binary_search_by(|a| a.labels.as_slice().cmp(labels))
            .map(|k| self.atoms[k].prob)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn atom(&self, labels: &[usize]) -> Option<&Atom<T>> {
        self.atoms
            .binary_search_by(|a| a.labels.as_slice().cmp(labels))
            .ok()
            .map(|k| &self.atoms[k])
    }

    /// The averaged quantum state `Σ p ρ`.
    pub fn average_state(&self) -> DensityMatrix<T> {
        let mut acc = ComplexMatrix::square_zeros(self.quantum_dim);
        for a in &self.atoms {
            acc.add_scaled(a.prob, a.state.matrix());
        }
        DensityMatrix::from_matrix_unchecked(acc)
    }

    /// Applies a map to every conditional state; the map must send states to states.
    pub fn map_states(
        &self,
        quantum_dim: usize,
        mut f: impl FnMut(&DensityMatrix<T>) -> Result<DensityMatrix<T>>,
    ) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(Atom {
                    labels: a.labels.clone(),
                    prob: a.prob,
                    state: f(&a.state)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.label_spaces.clone(), quantum_dim, atoms)
    }

    /// Dimension of the dense block-diagonal expansion.
    pub fn dense_dim(&self) -> Option<usize> {
        MixedRadix::new(&self.label_spaces)
            .checked_len()
            .and_then(|n| n.checked_mul(self.quantum_dim))
    }

    /// Dense matrix `Σ p |ℓ⟩⟨ℓ| ⊗ ρ_ℓ` over factors `label_spaces ++ [quantum_dim]`.
    pub fn to_dense(&self, limits: &Limits) -> Result<ComplexMatrix<T>> {
        let dim = self.dense_dim().unwrap_or(usize::MAX);
        if dim > limits.max_dense_dim {
            return Err(Error::CapExceeded {
                what: "dense ensemble expansion",
                required: dim,
                cap: limits.max_dense_dim,
            });
        }
        let radix = MixedRadix::new(&self.label_spaces);
        let d = self.quantum_dim;
        let mut out = ComplexMatrix::square_zeros(dim);
        for a in &self.atoms {
            let base = radix.encode(&a.labels) * d;
            for i in 0..d {
                for j in 0..d {
                    out[(base + i, base + j)] = a.state.matrix()[(i, j)] * a.prob;
                }
            }
        }
        Ok(out)
    }
}

/// Accumulates weighted states per label, merging repeated labels.
#[derive(Debug, Clone)]
pub struct EnsembleBuilder<T: Real> {
    label_spaces: Vec<usize>,
    quantum_dim: usize,
    blocks: BTreeMap<Vec<usize>, (T, ComplexMatrix<T>)>,
}

impl<T: Real> EnsembleBuilder<T> {
    pub fn new(label_spaces: Vec<usize>, quantum_dim: usize) -> Self {
        Self {
            label_spaces,
            quantum_dim,
            blocks: BTreeMap::new(),
        }
    }

    /// Adds `weight · |labels⟩⟨labels| ⊗ state`.
    pub fn add(&mut self, labels: Vec<usize>, weight: T, state: &ComplexMatrix<T>) {
        if weight <= T::zero() {
            return;
        }
        let d = self.quantum_dim;
        let entry = self
            .blocks
            .entry(labels)
            .or_insert_with(|| (T::zero(), ComplexMatrix::square_zeros(d)));
        entry.0 += weight;
        entry.1.add_scaled(weight, state);
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn build(self) -> Result<CqEnsemble<T>> {
        let atoms = self
            .blocks
            .into_iter()
            .filter(|(_, (w, _))| *w >= T::lit(MIN_ATOM_PROB))
            .map(|(labels, (w, m))| Atom {
                labels,
                prob: w,
                state: DensityMatrix::from_matrix_unchecked(m.scale(T::one() / w)),
            })
            .collect();
        CqEnsemble::new(self.label_spaces, self.quantum_dim, atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_merges_labels() {
        let mut b = EnsembleBuilder::new(vec![2], 2);
        b.add(vec![0], 0.25, DensityMatrix::<f64>::basis(2, 0).matrix());
        b.add(vec![0], 0.25, DensityMatrix::basis(2, 1).matrix());
        b.add(vec![1], 0.5, DensityMatrix::basis(2, 1).matrix());
        let e = b.build().unwrap();
        assert_eq!(e.atoms().len(), 2);
        assert!((e.atoms()[0].state.entropy_bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ensembles() {
        let s = DensityMatrix::<f64>::basis(2, 0);
        let atom = |l: usize, p: f64| Atom {
            labels: vec![l],
            prob: p,
            state: s.clone(),
        };
        assert!(CqEnsemble::new(vec![2], 2, vec![atom(0, 0.5)]).is_err());
        assert!(CqEnsemble::new(vec![2], 2, vec![atom(2, 1.0)]).is_err());
        assert!(CqEnsemble::new(vec![2], 2, vec![atom(0, 0.5), atom(0, 0.5)]).is_err());
        let e = CqEnsemble::new(vec![2], 2, vec![atom(0, 1.0), atom(1, 1e-17)]).unwrap();
        assert_eq!(e.atoms().len(), 1);
    }

    #[test]
    fn dense_expansion_is_block_diagonal() {
        let e = CqEnsemble::new(
            vec![2],
            2,
            vec![
                Atom {
                    labels: vec![0],
                    prob: 0.5,
                    state: DensityMatrix::<f64>::maximally_mixed(2),
                },
                Atom {
                    labels: vec![1],
                    prob: 0.5,
                    state: DensityMatrix::basis(2, 1),
                },
            ],
        )
        .unwrap();
        let m = e.to_dense(&Limits::default()).unwrap();
        assert_eq!(m, ComplexMatrix::from_real_diag(&[0.25, 0.25, 0.0, 0.5]));
        let tiny = Limits {
            max_dense_dim: 3,
            ..Limits::default()
        };
        assert!(matches!(e.to_dense(&tiny), Err(Error::CapExceeded { .. })));
    }
}
