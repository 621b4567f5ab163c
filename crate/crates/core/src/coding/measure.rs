use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, PSD_TOL};
use crate::scalar::Real;

use super::povm::{Outcome, Povm};

/// Eigenvalues of the averaged state at or below this count as outside its support.
pub const PGM_SUPPORT_FLOOR: f64 = 1e-9;
/// Allowed distance of `(√D)²` from `D`.
pub const SQRT_RECONSTRUCTION_TOL: f64 = 1e-9;

/// Square-root measurement for `states` with prior `weights` (uniform when `None`).
///
/// Element `c` is `S^{-1/2} w_c ρ_c S^{-1/2}` on the support of
/// `S = Σ w_c ρ_c`; the remainder `1 − Π_supp(S)` is the `Fail` outcome,
/// present only when nonzero.
pub fn pgm_decoder<T: Real>(
    states: &[(usize, &DensityMatrix<T>)],
    weights: Option<&[T]>,
) -> Result<Povm<T>> {
    let dim = states
        .first()
        .map(|(_, r)| r.dim())
        .ok_or_else(|| Error::InvalidArgument("PGM needs at least one state".into()))?;
    let uniform;
    let weights = match weights {
        Some(w) => {
            if w.len() != states.len() {
                return Err(Error::DimensionMismatch {
                    expected: states.len(),
                    found: w.len(),
                });
            }
            crate::channel::check_distribution(w).map_err(Error::InvalidDistribution)?;
            w
        }
        None => {
            uniform = vec![T::one() / T::from_usize(states.len()).unwrap(); states.len()];
            &uniform
        }
    };
    let mut avg = ComplexMatrix::square_zeros(dim);
    for ((_, rho), &w) in states.iter().zip(weights) {
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.dim(),
            });
        }
        avg.add_scaled(w, rho.matrix());
    }
    let (inv_sqrt, support) = HermitianOperator::new(avg)?.pinv_sqrt(T::tol(PGM_SUPPORT_FLOOR))?;
    let mut elements: Vec<(Outcome, HermitianOperator<T>)> = states
        .iter()
        .zip(weights)
        .map(|((label, rho), &w)| {
            let d = rho.as_hermitian().scale(w).conjugate_by(inv_sqrt.matrix());
            (Outcome::Index(*label), d)
        })
        .collect();
    let fail = HermitianOperator::identity(dim).sub(&support);
    if fail.matrix().max_abs() > T::tol(PSD_TOL) {
        elements.push((Outcome::Fail, fail));
    }
    Povm::new(elements)
}

/// A POVM implemented by the measurement channel `ρ ↦ √D_b ρ √D_b`.
#[derive(Debug, Clone)]
pub struct TenderInstrument<T: Real> {
    povm: Povm<T>,
    sqrt_elements: Vec<HermitianOperator<T>>,
}

impl<T: Real> TenderInstrument<T> {
    pub fn new(povm: Povm<T>) -> Result<Self> {
        let sqrt_elements = povm
            .elements()
            .iter()
            .map(|(_, d)| {
                let r = d.sqrt()?;
                let defect = (&r.matrix().matmul(r.matrix()) - d.matrix()).max_abs();
                if defect > T::tol(SQRT_RECONSTRUCTION_TOL) {
                    return Err(Error::InvalidArgument(format!(
                        "square root of POVM element reproduces it only within {defect:e}"
                    )));
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            povm,
            sqrt_elements,
        })
    }

    pub fn povm(&self) -> &Povm<T> {
        &self.povm
    }

    pub fn sqrt_elements(&self) -> &[HermitianOperator<T>] {
        &self.sqrt_elements
    }

    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    pub fn sqrt_element(&self, outcome: Outcome) -> Option<&HermitianOperator<T>> {
        self.povm
            .elements()
            .iter()
            .position(|(l, _)| *l == outcome)
            .map(|k| &self.sqrt_elements[k])
    }

    /// Unnormalized branch `√D_b σ √D_b` for any operator `σ`.
    pub fn branch(&self, outcome: Outcome, sigma: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let r = self
            .sqrt_element(outcome)
            .ok_or_else(|| Error::InvalidArgument(format!("no outcome {outcome:?}")))?;
        if sigma.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: sigma.rows(),
            });
        }
        Ok(ComplexMatrix::sandwich(r.matrix(), sigma).hermitize())
    }
}

/// One outcome of a tender measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T: Real> {
    pub outcome: Outcome,
    pub probability: T,
    /// Normalized post-measurement state; `None` for a zero-probability branch.
    pub state: Option<DensityMatrix<T>>,
}

pub fn tender_apply<T: Real>(
    inst: &TenderInstrument<T>,
    rho: &DensityMatrix<T>,
) -> Result<Vec<Branch<T>>> {
    if rho.dim() != inst.dim() {
        return Err(Error::DimensionMismatch {
            expected: inst.dim(),
            found: rho.dim(),
        });
    }
    Ok(inst
        .povm
        .elements()
        .iter()
        .zip(&inst.sqrt_elements)
        .map(|((outcome, _), r)| {
            let post = rho.as_hermitian().conjugate_by(r.matrix());
            let probability = post.trace().max(T::zero());
            let state =
                (probability > T::tol(1e-14)).then(|| DensityMatrix::normalized_unchecked(post));
            Branch {
                outcome: *outcome,
                probability,
                state,
            }
        })
        .collect())
}

/// Both sides of `‖ρ − √Xρ√X‖₁ ≤ √(8ε)` with `ε = 1 − Tr(ρX)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceCheck<T: Real> {
    pub epsilon: T,
    pub lhs: T,
    pub bound: T,
}

impl<T: Real> DisturbanceCheck<T> {
    pub fn slack(&self) -> T {
        self.bound - self.lhs
    }
}

pub fn disturbance_check<T: Real>(
    rho: &DensityMatrix<T>,
    x: &HermitianOperator<T>,
) -> Result<DisturbanceCheck<T>> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: x.dim(),
        });
    }
    let e = x.eig();
    let tol = T::tol(PSD_TOL);
    if e.values.first().is_some_and(|&l| l < -tol)
        || e.values.last().is_some_and(|&l| l > T::one() + tol)
    {
        return Err(Error::InvalidArgument(
            "operator spectrum leaves [0, 1]".into(),
        ));
    }
    let root = e.reconstruct_with(|l| l.max(T::zero()).min(T::one()).sqrt());
    let epsilon = (T::one() - x.expectation(rho.as_hermitian())).max(T::zero());
    let post = ComplexMatrix::sandwich(&root, rho.matrix());
    let lhs = HermitianOperator::from_matrix_unchecked(rho.matrix() - &post).trace_norm();
    Ok(DisturbanceCheck {
        epsilon,
        lhs,
        bound: (T::lit(8.0) * epsilon).sqrt(),
    })
}

/// Per-state and averaged terms of the identification bounds:
/// `‖|a⟩⟨a|⊗ρ_a − Δ(ρ_a)‖₁ ≤ √(8ε)+ε` and its average form with `ε̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationCheck<T: Real> {
    /// `ε_a = 1 − Tr(ρ_a D_a)`.
    pub errors: Vec<T>,
    /// `‖ρ_a − √D_aρ_a√D_a‖₁ + Σ_{b≠a} Tr(ρ_a D_b)`.
    pub disturbances: Vec<T>,
    pub max_error: T,
    pub mean_error: T,
    pub mean_disturbance: T,
}

impl<T: Real> IdentificationCheck<T> {
    /// `√(8ε) + ε` for the worst-case error.
    pub fn worst_case_bound(&self) -> T {
        (T::lit(8.0) * self.max_error).sqrt() + self.max_error
    }

    /// `√(8ε̄) + ε̄`.
    pub fn average_bound(&self) -> T {
        (T::lit(8.0) * self.mean_error).sqrt() + self.mean_error
    }

    /// Smallest of the per-state and average slacks.
    pub fn min_slack(&self) -> T {
        let per_state = self
            .disturbances
            .iter()
            .map(|&d| self.worst_case_bound() - d)
            .fold(T::infinity(), T::min);
        per_state.min(self.average_bound() - self.mean_disturbance)
    }
}

/// State `a` is identified by outcome `Index(a)`; averages use `weights` (uniform when `None`).
pub fn identification_check<T: Real>(
    states: &[DensityMatrix<T>],
    inst: &TenderInstrument<T>,
    weights: Option<&[T]>,
) -> Result<IdentificationCheck<T>> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no states to identify".into()));
    }
    let uniform = vec![T::one() / T::from_usize(states.len()).unwrap(); states.len()];
    let weights = weights.unwrap_or(&uniform);
    if weights.len() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            found: weights.len(),
        });
    }
    let mut errors = Vec::with_capacity(states.len());
    let mut disturbances = Vec::with_capacity(states.len());
    for (a, rho) in states.iter().enumerate() {
        let d = inst
            .povm()
            .element(Outcome::Index(a))
            .ok_or_else(|| Error::InvalidArgument(format!("no outcome for state {a}")))?;
        let check = disturbance_check(rho, d)?;
        // wrong branches are orthogonal blocks, each contributing its trace
        let wrong = (T::one() - d.expectation(rho.as_hermitian())).max(T::zero());
        errors.push(check.epsilon);
        disturbances.push(check.lhs + wrong);
    }
    let max_error = errors.iter().copied().fold(T::zero(), T::max);
    let mean_error = errors.iter().zip(weights).map(|(e, w)| *e * *w).sum();
    let mean_disturbance = disturbances.iter().zip(weights).map(|(e, w)| *e * *w).sum();
    Ok(IdentificationCheck {
        errors,
        disturbances,
        max_error,
        mean_error,
        mean_disturbance,
    })
}
