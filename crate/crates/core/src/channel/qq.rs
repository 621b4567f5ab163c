use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::scalar::Real;

use super::{default_senders, CqMacChannel};

/// Tolerance on `Σ K†K = 1`.
pub const TRACE_PRESERVING_TOL: f64 = 1e-9;

/// A completely positive map given by Kraus operators `K: C^in → C^out`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpMap<T: Real> {
    input_dim: usize,
    output_dim: usize,
    kraus: Vec<ComplexMatrix<T>>,
}

impl<T: Real> CpMap<T> {
    pub fn from_kraus(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (output_dim, input_dim) = (first.rows(), first.cols());
        for k in &kraus {
            if (k.rows(), k.cols()) != (output_dim, input_dim) {
                return Err(Error::DimensionMismatch {
                    expected: output_dim * input_dim,
                    found: k.rows() * k.cols(),
                });
            }
        }
        Ok(Self {
            input_dim,
            output_dim,
            kraus,
        })
    }

    /// Kraus form of a Choi matrix `J = Σ_ij |i⟩⟨j| ⊗ φ(|i⟩⟨j|)` (input factor first).
    pub fn from_choi(choi: &ComplexMatrix<T>, input_dim: usize, output_dim: usize) -> Result<Self> {
        if !choi.is_square() || choi.rows() != input_dim * output_dim {
            return Err(Error::DimensionMismatch {
                expected: input_dim * output_dim,
                found: choi.rows(),
            });
        }
        let h = HermitianOperator::new(choi.clone())?;
        let e = h.eig();
        if let Some(&min) = e.values.first() {
            if min < -T::tol(1e-9) {
                return Err(Error::NotPsd {
                    min_eigenvalue: min.as_f64(),
                });
            }
        }
        let floor = T::tol(1e-14);
        let mut kraus = Vec::new();
        for (k, &lambda) in e.values.iter().enumerate() {
            if lambda <= floor {
                continue;
            }
            let w = lambda.sqrt();
            let mut op = ComplexMatrix::zeros(output_dim, input_dim);
            for i in 0..input_dim {
                for a in 0..output_dim {
                    op[(a, i)] = e.vectors[(i * output_dim + a, k)] * w;
                }
            }
            kraus.push(op);
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(output_dim, input_dim));
        }
        Self::from_kraus(kraus)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            input_dim: dim,
            output_dim: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Replaces every input by the maximally mixed state on `output_dim`.
    pub fn completely_depolarizing(input_dim: usize, output_dim: usize) -> Self {
        let w = T::one() / T::from_usize(output_dim).unwrap().sqrt();
        let mut kraus = Vec::with_capacity(input_dim * output_dim);
        for a in 0..output_dim {
            for i in 0..input_dim {
                let mut k = ComplexMatrix::zeros(output_dim, input_dim);
                k[(a, i)] = num_complex::Complex::new(w, T::zero());
                kraus.push(k);
            }
        }
        Self {
            input_dim,
            output_dim,
            kraus,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    /// Max-entry distance of `Σ K†K` from the identity.
    pub fn trace_preservation_defect(&self) -> T {
        let mut acc = ComplexMatrix::square_zeros(self.input_dim);
        for k in &self.kraus {
            acc += &k.adjoint().matmul(k);
        }
        (&acc - &ComplexMatrix::identity(self.input_dim)).max_abs()
    }

    pub fn apply(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::square_zeros(self.output_dim);
        for k in &self.kraus {
            out += &ComplexMatrix::sandwich(k, rho);
        }
        out
    }
}

/// Compiles product-state inputs through a quantum channel into a cq channel.
///
/// `input_states[i][a]` is the state sender `i` prepares for signal `a`;
/// the result maps `(a_1, …, a_s)` to `φ(F_1(a_1) ⊗ … ⊗ F_s(a_s))`.
pub fn precompose_qq<T: Real>(
    input_states: &[Vec<DensityMatrix<T>>],
    phi: &CpMap<T>,
) -> Result<CqMacChannel<T>> {
    if input_states.is_empty() || input_states.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument(
            "every sender needs at least one input state".into(),
        ));
    }
    let mut in_dim = 1usize;
    for signals in input_states {
        let d = signals[0].dim();
        if let Some(bad) = signals.iter().find(|r| r.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        in_dim *= d;
    }
    if in_dim != phi.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.input_dim(),
            found: in_dim,
        });
    }
    let defect = phi.trace_preservation_defect();
    if defect > T::tol(TRACE_PRESERVING_TOL) {
        return Err(Error::InvalidArgument(format!(
            "map is not trace preserving (Σ K†K deviates from identity by {defect:e})"
        )));
    }

    let alphabets: Vec<usize> = input_states.iter().map(Vec::len).collect();
    let states = MixedRadix::new(&alphabets)
        .iter()
        .map(|t| {
            let input = t
                .iter()
                .enumerate()
                .map(|(i, &a)| input_states[i][a].matrix().clone())
                .reduce(|acc, m| acc.kron(&m))
                .expect("at least one sender");
            DensityMatrix::from_matrix_unchecked(phi.apply(&input))
        })
        .collect();
    CqMacChannel::new(default_senders(&alphabets), phi.output_dim(), states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_with_orthogonal_inputs_is_classical() {
        let inputs = vec![
            vec![
                DensityMatrix::<f64>::basis(2, 0),
                DensityMatrix::basis(2, 1),
            ],
            vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)],
        ];
        let ch = precompose_qq(&inputs, &CpMap::identity(4)).unwrap();
        for t in ch.tuples() {
            for u in ch.tuples() {
                let f = ch
                    .state(&t)
                    .as_hermitian()
                    .expectation(ch.state(&u).as_hermitian());
                if t == u {
                    assert!((f - 1.0).abs() < 1e-12);
                } else {
                    assert!(f.abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn full_depolarization_is_constant() {
        let inputs = vec![vec![
            DensityMatrix::<f64>::basis(2, 0),
            DensityMatrix::pure_real(&[1.0, 1.0]).unwrap(),
        ]];
        let ch = precompose_qq(&inputs, &CpMap::completely_depolarizing(2, 3)).unwrap();
        for s in ch.states() {
            assert!((s.matrix() - DensityMatrix::maximally_mixed(3).matrix()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn non_trace_preserving_rejected() {
        let k = ComplexMatrix::<f64>::identity(2).scale(0.5);
        let phi = CpMap::from_kraus(vec![k]).unwrap();
        let inputs = vec![vec![DensityMatrix::basis(2, 0)]];
        assert!(precompose_qq(&inputs, &phi).is_err());
        let wrong_dim = vec![vec![DensityMatrix::<f64>::basis(3, 0)]];
        assert!(precompose_qq(&wrong_dim, &CpMap::identity(2)).is_err());
    }

    #[test]
    fn choi_round_trip() {
        // Amplitude damping with γ = 0.3.
        let g: f64 = 0.3;
        let k0 =
            ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, (1.0 - g).sqrt()]]).unwrap();
        let k1 = ComplexMatrix::from_real_rows(&[vec![0.0, g.sqrt()], vec![0.0, 0.0]]).unwrap();
        let phi = CpMap::from_kraus(vec![k0, k1]).unwrap();
        let mut choi = ComplexMatrix::square_zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                let mut e = ComplexMatrix::square_zeros(2);
                e[(i, j)] = num_complex::Complex::new(1.0, 0.0);
                let out = phi.apply(&e);
                for a in 0..2 {
                    for b in 0..2 {
                        choi[(i * 2 + a, j * 2 + b)] = out[(a, b)];
                    }
                }
            }
        }
        let back = CpMap::from_choi(&choi, 2, 2).unwrap();
        let rho = DensityMatrix::pure_real(&[0.6, 0.8]).unwrap();
        assert!((&back.apply(rho.matrix()) - &phi.apply(rho.matrix())).max_abs() < 1e-12);
        assert!(back.trace_preservation_defect() < 1e-12);
    }
}
