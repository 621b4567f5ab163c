use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::scalar::Real;

/// Allowed max-entry distance of `Σ D` from the identity.
pub const POVM_SUM_TOL: f64 = 1e-8;
/// Elements may have eigenvalues down to `-POVM_PSD_TOL`.
pub const POVM_PSD_TOL: f64 = 1e-10;

/// Label of a measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Index(usize),
    /// The PGM's remainder `1 − Π_supp`.
    Fail,
}

/// A measurement: labeled PSD elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm<T: Real> {
    dim: usize,
    elements: Vec<(Outcome, HermitianOperator<T>)>,
}

impl<T: Real> Povm<T> {
    pub fn new(elements: Vec<(Outcome, HermitianOperator<T>)>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|(_, e)| e.dim())
            .ok_or_else(|| Error::InvalidArgument("POVM without elements".into()))?;
        let mut sum = ComplexMatrix::square_zeros(dim);
        for (k, (label, e)) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            if elements[..k].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate POVM outcome {label:?}"
                )));
            }
            let min = e.min_eigenvalue();
            if min < -T::tol(POVM_PSD_TOL) {
                return Err(Error::NotPsd {
                    min_eigenvalue: min.as_f64(),
                });
            }
            sum += e.matrix();
        }
        let defect = (&sum - &ComplexMatrix::identity(dim)).max_abs();
        if defect > T::tol(POVM_SUM_TOL) {
            return Err(Error::InvalidArgument(format!(
                "POVM elements sum to identity only within {defect:e}"
            )));
        }
        Ok(Self { dim, elements })
    }

    /// Indexed elements `0..k` in order.
    pub fn from_indexed(elements: Vec<HermitianOperator<T>>) -> Result<Self> {
        Self::new(
            elements
                .into_iter()
                .enumerate()
                .map(|(k, e)| (Outcome::Index(k), e))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[(Outcome, HermitianOperator<T>)] {
        &self.elements
    }

    pub fn element(&self, outcome: Outcome) -> Option<&HermitianOperator<T>> {
        self.elements
            .iter()
            .find(|(l, _)| *l == outcome)
            .map(|(_, e)| e)
    }

    /// `Tr(ρ D_b)` per element, in element order.
    pub fn probabilities(&self, rho: &DensityMatrix<T>) -> Result<Vec<T>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(self
            .elements
            .iter()
            .map(|(_, e)| e.expectation(rho.as_hermitian()))
            .collect())
    }
}
