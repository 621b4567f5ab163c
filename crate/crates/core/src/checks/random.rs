//! Random instances for the property suites.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channel::{CqMacChannel, Prior};
use crate::coding::Povm;
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator};

/// `rows × cols` matrix of standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix<f64> {
    let data = (0..rows * cols)
        .map(|_| Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("shape matches data")
}

/// `GG†/Tr` for a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityMatrix<f64> {
    let g = ginibre(rng, d, rank.max(1));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr)).expect("Ginibre states are valid")
}

/// Full-rank or low-rank with equal odds, pure now and then.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix<f64> {
    let rank = match rng.random_range(0..4) {
        0 => 1,
        1 => rng.random_range(1..=d),
        _ => d,
    };
    random_density(rng, d, rank)
}

pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    alphabets: &[usize],
    d: usize,
) -> CqMacChannel<f64> {
    CqMacChannel::from_fn(alphabets, d, |_| random_state(rng, d)).expect("random channel is valid")
}

/// Channel whose outputs are all diagonal in one basis.
pub fn random_diagonal_channel<R: Rng + ?Sized>(
    rng: &mut R,
    alphabets: &[usize],
    d: usize,
) -> CqMacChannel<f64> {
    CqMacChannel::from_fn(alphabets, d, |_| {
        let p = random_probability_vector(rng, d, true);
        DensityMatrix::diagonal(&p).expect("probability vector")
    })
    .expect("random channel is valid")
}

/// Flat Dirichlet draw; with `sparse`, entries are zeroed now and then.
pub fn random_probability_vector<R: Rng + ?Sized>(rng: &mut R, k: usize, sparse: bool) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..k)
            .map(|_| {
                if sparse && k > 1 && rng.random_bool(0.15) {
                    0.0
                } else {
                    Exp1.sample(rng)
                }
            })
            .collect();
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            v.iter_mut().for_each(|x| *x /= total);
            return v;
        }
    }
}

pub fn random_prior<R: Rng + ?Sized>(rng: &mut R, alphabets: &[usize]) -> Prior<f64> {
    Prior::new(
        alphabets
            .iter()
            .map(|&a| random_probability_vector(rng, a, true))
            .collect(),
    )
    .expect("normalized vectors")
}

/// Random eigenbasis.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix<f64> {
    let g = ginibre(rng, d, d);
    let h =
        HermitianOperator::new((&g + &g.adjoint()).scale(0.5)).expect("Hermitian by construction");
    h.eig().vectors
}

/// `0 ≤ X ≤ 1` with eigenvalues biased towards 1 so that `ε` spans small and large values.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator<f64> {
    let u = random_unitary(rng, d);
    let spread: f64 = [1e-3, 1e-2, 0.1, 1.0][rng.random_range(0..4)];
    let vals: Vec<f64> = (0..d).map(|_| 1.0 - spread * rng.random::<f64>()).collect();
    let m = ComplexMatrix::sandwich(&u, &ComplexMatrix::from_real_diag(&vals));
    HermitianOperator::new(m.hermitize()).expect("Hermitian by construction")
}

/// `k` elements `S^{-1/2} A_j S^{-1/2}` from random PSD `A_j`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Povm<f64> {
    let parts: Vec<HermitianOperator<f64>> = (0..k)
        .map(|j| {
            // the first part has full rank so the sum is invertible
            let rank = if j == 0 { d } else { rng.random_range(1..=d) };
            let g = ginibre(rng, d, rank);
            HermitianOperator::new(g.matmul(&g.adjoint()).hermitize()).expect("PSD by construction")
        })
        .collect();
    let total = parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, p| acc.add(p));
    let (inv, _) = total.pinv_sqrt(1e-12).expect("PSD");
    Povm::from_indexed(parts.iter().map(|a| a.conjugate_by(inv.matrix())).collect())
        .expect("complete by construction")
}
