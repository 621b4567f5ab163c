use num_complex::Complex;

use super::eigen::{jacobi_eigen, Eigen};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Max-entry deviation from `a = a†` tolerated on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL` count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below `-SQRT_DOMAIN_TOL` make a square root undefined.
pub const SQRT_DOMAIN_TOL: f64 = 1e-6;
/// Allowed distance of a state's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues below this floor are ignored by entropies.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Square complex matrix equal to its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates Hermiticity and stores the symmetrized matrix.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if matrix
            .as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > T::tol(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self {
            matrix: matrix.hermitize(),
        })
    }

    /// Wraps a matrix that is Hermitian by construction, symmetrizing away drift.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix<T>) -> Self {
        Self {
            matrix: matrix.hermitize(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diag(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn eig(&self) -> Eigen<T> {
        jacobi_eigen(&self.matrix)
    }

    /// Applies `f` to the spectrum: `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            matrix: self.eig().reconstruct_with(f),
        }
    }

    /// Positive square root; small negative eigenvalues are clamped to zero.
    pub fn sqrt(&self) -> Result<Self> {
        let e = self.eig();
        check_psd_domain(&e.values)?;
        Ok(Self {
            matrix: e.reconstruct_with(|l| l.max(T::zero()).sqrt()),
        })
    }

    /// Pseudo-inverse square root on the support (eigenvalues above `floor`).
    pub fn pinv_sqrt(&self, floor: T) -> Result<(Self, Self)> {
        let e = self.eig();
        check_psd_domain(&e.values)?;
        let inv = e.reconstruct_with(|l| {
            if l > floor {
                T::one() / l.sqrt()
            } else {
                T::zero()
            }
        });
        let support = e.reconstruct_with(|l| if l > floor { T::one() } else { T::zero() });
        Ok((Self { matrix: inv }, Self { matrix: support }))
    }

    /// `Tr|a|`.
    pub fn trace_norm(&self) -> T {
        self.eig().values.iter().map(|l| l.abs()).sum()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eig().values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -T::tol(PSD_TOL)
    }

    /// `b a b†`.
    pub fn conjugate_by(&self, b: &ComplexMatrix<T>) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::sandwich(b, &self.matrix))
    }

    /// `Tr(self · other)`, real for Hermitian pairs.
    pub fn expectation(&self, other: &HermitianOperator<T>) -> T {
        self.matrix.trace_product(&other.matrix).re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.matrix - &other.matrix)
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            matrix: self.matrix.scale(k),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }
}

fn check_psd_domain<T: Real>(values: &[T]) -> Result<()> {
    match values.first() {
        Some(&min) if min < -T::tol(SQRT_DOMAIN_TOL) => Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        }),
        _ => Ok(()),
    }
}

/// Positive semidefinite Hermitian operator of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(matrix)?)
    }

    pub fn from_hermitian(op: HermitianOperator<T>) -> Result<Self> {
        let trace = op.trace();
        if (trace - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(Error::BadTrace {
                trace: trace.as_f64(),
            });
        }
        let min = op.min_eigenvalue();
        if min < -T::tol(PSD_TOL) {
            return Err(Error::NotPsd {
                min_eigenvalue: min.as_f64(),
            });
        }
        Ok(Self { op })
    }

    /// Wraps an operator that is a state by construction.
    pub(crate) fn from_hermitian_unchecked(op: HermitianOperator<T>) -> Self {
        Self { op }
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix<T>) -> Self {
        Self {
            op: HermitianOperator::from_matrix_unchecked(matrix),
        }
    }

    /// Normalizes a nonzero PSD operator to unit trace.
    pub(crate) fn normalized_unchecked(op: HermitianOperator<T>) -> Self {
        let tr = op.trace();
        Self {
            op: op.scale(T::one() / tr),
        }
    }

    /// Projector onto a normalized copy of `psi`.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm2: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= T::zero() || !norm2.is_finite() {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Ok(Self::from_matrix_unchecked(
            ComplexMatrix::outer(psi).scale(T::one() / norm2),
        ))
    }

    pub fn pure_real(psi: &[T]) -> Result<Self> {
        let v: Vec<Complex<T>> = psi.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::pure(&v)
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut diag = vec![T::zero(); dim];
        diag[k] = T::one();
        Self::from_matrix_unchecked(ComplexMatrix::from_real_diag(&diag))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_usize(dim).unwrap();
        Self::from_matrix_unchecked(ComplexMatrix::from_real_diag(&vec![w; dim]))
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probs: &[T]) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::from_real_diag(probs))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    pub fn entropy_bits(&self) -> T {
        entropy_of_spectrum(&self.op.eig().values)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            op: self.op.tensor(&other.op),
        }
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be a distribution.
    pub fn mixture<'a>(items: impl IntoIterator<Item = (T, &'a DensityMatrix<T>)>) -> Result<Self> {
        let mut acc: Option<ComplexMatrix<T>> = None;
        let mut total = T::zero();
        for (w, rho) in items {
            let m = acc.get_or_insert_with(|| ComplexMatrix::square_zeros(rho.dim()));
            if m.dim() != rho.dim() {
                return Err(Error::DimensionMismatch {
                    expected: m.dim(),
                    found: rho.dim(),
                });
            }
            m.add_scaled(w, rho.matrix());
            total += w;
        }
        let m = acc.ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if (total - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(Self::from_matrix_unchecked(m))
    }
}

pub(crate) fn entropy_of_spectrum<T: Real>(values: &[T]) -> T {
    let floor = T::tol(ENTROPY_FLOOR);
    let h: T = values
        .iter()
        .filter(|&&l| l >= floor)
        .map(|&l| -l * l.log2())
        .sum();
    h.max(T::zero())
}

/// Eigendecomposition `a = V diag(λ) V†` with `λ` ascending.
pub fn eig_hermitian<T: Real>(a: &HermitianOperator<T>) -> Eigen<T> {
    a.eig()
}

pub fn op_sqrt<T: Real>(a: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    a.sqrt()
}

/// Von Neumann entropy in bits.
pub fn entropy_bits<T: Real>(rho: &DensityMatrix<T>) -> T {
    rho.entropy_bits()
}

pub fn trace_norm<T: Real>(a: &HermitianOperator<T>) -> T {
    a.trace_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(rows: &[Vec<f64>]) -> HermitianOperator<f64> {
        HermitianOperator::new(ComplexMatrix::from_real_rows(rows).unwrap()).unwrap()
    }

    fn plus_zero_mixture() -> DensityMatrix<f64> {
        DensityMatrix::new(
            ComplexMatrix::from_real_rows(&[vec![0.75, 0.25], vec![0.25, 0.25]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn eig_of_diagonal() {
        let e = eig_hermitian(&HermitianOperator::from_real_diag(&[2.0, 5.0]));
        assert_eq!(e.values, vec![2.0, 5.0]);
        assert!((&e.vectors - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        let e = eig_hermitian(plus_zero_mixture().as_hermitian());
        let r = 0.125f64.sqrt();
        assert!((e.values[0] - (0.5 - r)).abs() < 1e-12);
        assert!((e.values[1] - (0.5 + r)).abs() < 1e-12);
        assert!((e.values[0] - 0.146447).abs() < 1e-6);
    }

    #[test]
    fn eig_identity() {
        let e = eig_hermitian(&HermitianOperator::<f64>::identity(5));
        assert!(e.values.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_examples() {
        let s = op_sqrt(&HermitianOperator::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!((s.matrix() - &ComplexMatrix::from_real_diag(&[2.0, 3.0])).max_abs() < 1e-14);
        let id = op_sqrt(&HermitianOperator::<f64>::identity(3)).unwrap();
        assert!((id.matrix() - &ComplexMatrix::identity(3)).max_abs() < 1e-14);
        let p = DensityMatrix::pure_real(&[1.0, 1.0]).unwrap();
        let sp = op_sqrt(p.as_hermitian()).unwrap();
        assert!((sp.matrix() - p.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn sqrt_domain() {
        assert!(matches!(
            op_sqrt(&HermitianOperator::from_real_diag(&[1.0, -1e-3])),
            Err(Error::NotPsd { .. })
        ));
        // tiny negative noise is clamped
        let s = op_sqrt(&HermitianOperator::from_real_diag(&[1.0, -1e-11])).unwrap();
        assert_eq!(s.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn entropy_examples() {
        assert!((DensityMatrix::<f64>::maximally_mixed(2).entropy_bits() - 1.0).abs() < 1e-15);
        let psi =
            DensityMatrix::<f64>::pure(&[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]).unwrap();
        assert!(psi.entropy_bits().abs() < 1e-12);
        // (1 ± 2^{-1/2})/2 then binary entropy
        let l = (1.0 + 0.5f64.sqrt()) / 2.0;
        let h = -l * l.log2() - (1.0 - l) * (1.0 - l).log2();
        assert!((entropy_bits(&plus_zero_mixture()) - h).abs() < 1e-12);
        assert!((h - 0.60088).abs() < 1e-5);
    }

    #[test]
    fn trace_norm_examples() {
        assert!(
            (trace_norm(&HermitianOperator::<f64>::from_real_diag(&[1.0, -1.0])) - 2.0).abs()
                < 1e-15
        );
        assert!((trace_norm(plus_zero_mixture().as_hermitian()) - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::<f64>::pure_real(&[0.6, 0.8]).unwrap();
        let diff = rho.as_hermitian().sub(&rho.as_hermitian().scale(0.98));
        assert!((trace_norm(&diff) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::from_real_diag(&[0.5, 0.4]);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::BadTrace { .. })
        ));
        let not_psd = ComplexMatrix::from_real_diag(&[1.2, -0.2]);
        assert!(matches!(
            DensityMatrix::new(not_psd),
            Err(Error::NotPsd { .. })
        ));
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.3, 0.7])).is_ok());
    }

    #[test]
    fn works_in_single_precision() {
        let rho = DensityMatrix::<f32>::new(
            ComplexMatrix::from_real_rows(&[vec![0.75, 0.25], vec![0.25, 0.25]]).unwrap(),
        )
        .unwrap();
        assert!((rho.entropy_bits() - 0.600876).abs() < 1e-4);
        let s = herm(&[vec![4.0, 0.0], vec![0.0, 9.0]]).sqrt().unwrap();
        assert!((s.trace() - 5.0).abs() < 1e-12);
    }
}
