//! Oracles that share no numerical code with the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn channels_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("channels")
}

// ---------------------------------------------------------------- classical

fn entropy_of(dist: &BTreeMap<Vec<usize>, f64>) -> f64 {
    dist.values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn all_tuples(alphabets: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &a in alphabets {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..a).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// `I(X_J ; Y | X_{J^c})` for every nonempty `J` (index `mask − 1`) of a
/// classical MAC with transition rows `w(x)` and independent inputs.
pub fn shannon_bounds(
    alphabets: &[usize],
    prior: &[Vec<f64>],
    w: impl Fn(&[usize]) -> Vec<f64>,
) -> Vec<f64> {
    let s = alphabets.len();
    let mut joint: Vec<(Vec<usize>, usize, f64)> = Vec::new();
    for x in all_tuples(alphabets) {
        let px: f64 = x.iter().enumerate().map(|(i, &xi)| prior[i][xi]).product();
        for (y, py) in w(&x).into_iter().enumerate() {
            joint.push((x.clone(), y, px * py));
        }
    }
    // H(Y | X_K) = H(X_K, Y) − H(X_K)
    let cond = |mask: usize| {
        let mut with_y = BTreeMap::new();
        let mut without = BTreeMap::new();
        for (x, y, p) in &joint {
            let key: Vec<usize> = (0..s)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| x[i])
                .collect();
            *without.entry(key.clone()).or_insert(0.0) += p;
            let mut k = key;
            k.push(*y);
            *with_y.entry(k).or_insert(0.0) += p;
        }
        entropy_of(&with_y) - entropy_of(&without)
    };
    let full = (1 << s) - 1;
    (1..=full).map(|j| cond(full & !j) - cond(full)).collect()
}

/// Successive-decoding rates from the bounds; `order[0]` first.
pub fn corner_from_bounds(bounds: &[f64], s: usize, order: &[usize]) -> Vec<f64> {
    let full = (1usize << s) - 1;
    let b = |m: usize| if m == 0 { 0.0 } else { bounds[m - 1] };
    let mut rates = vec![0.0; s];
    let mut known = 0usize;
    for &i in order {
        let next = known | 1 << i;
        rates[i] = b(full & !known) - b(full & !next);
        known = next;
    }
    rates
}

// ---------------------------------------------------------------- quantum

pub fn pure(v: &[f64]) -> CMat {
    let n = v.len();
    CMat::from_fn(n, n, |i, j| Complex64::new(v[i] * v[j], 0.0))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(f(x), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

pub fn von_neumann(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .filter(|&&x| x > 1e-15)
        .map(|&x| -x * x.log2())
        .sum()
}

fn trace(m: &CMat) -> f64 {
    m.trace().re
}

/// Square-root measurement with uniform weights plus the complement of the support.
pub fn pgm(states: &[CMat]) -> Vec<CMat> {
    let d = states[0].nrows();
    let w = Complex64::new(1.0 / states.len() as f64, 0.0);
    let avg = states.iter().fold(CMat::zeros(d, d), |acc, r| acc + r * w);
    let inv_sqrt = hermitian_fn(&avg, |x| if x > 1e-9 { 1.0 / x.sqrt() } else { 0.0 });
    let support = hermitian_fn(&avg, |x| if x > 1e-9 { 1.0 } else { 0.0 });
    let mut out: Vec<CMat> = states
        .iter()
        .map(|r| &inv_sqrt * (r * w) * &inv_sqrt)
        .collect();
    out.push(CMat::identity(d, d) - support);
    out
}

fn sqrt_psd(m: &CMat) -> CMat {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Two-sender sequential decoding with ensemble averaging, evaluated by
/// enumerating every outcome chain `(b1, b2)` including failures.
/// Returns the mean error over all message pairs and the largest deviation of
/// the chain probabilities from summing to 1.
pub fn brute_force_two_sender(
    letter: impl Fn(usize, usize) -> CMat,
    prior2: &[f64],
    book1: &[Vec<usize>],
    book2: &[Vec<usize>],
) -> (f64, f64) {
    let word_state = |w1: &[usize], w2: &[usize]| {
        w1.iter()
            .zip(w2)
            .map(|(&a, &b)| letter(a, b))
            .reduce(|acc, m| kron(&acc, &m))
            .unwrap()
    };
    let averaged = |w1: &[usize]| {
        w1.iter()
            .map(|&a| {
                let d = letter(a, 0).nrows();
                prior2
                    .iter()
                    .enumerate()
                    .fold(CMat::zeros(d, d), |acc, (b, &p)| {
                        acc + letter(a, b) * Complex64::new(p, 0.0)
                    })
            })
            .reduce(|acc, m| kron(&acc, &m))
            .unwrap()
    };
    let stage1: Vec<CMat> = pgm(&book1.iter().map(|w| averaged(w)).collect::<Vec<_>>())
        .iter()
        .map(sqrt_psd)
        .collect();
    let stage2: Vec<Vec<CMat>> = book1
        .iter()
        .map(|w1| {
            pgm(&book2
                .iter()
                .map(|w2| word_state(w1, w2))
                .collect::<Vec<_>>())
            .iter()
            .map(sqrt_psd)
            .collect()
        })
        .collect();

    let mut total_error = 0.0;
    let mut worst_leak: f64 = 0.0;
    for (m1, w1) in book1.iter().enumerate() {
        for (m2, w2) in book2.iter().enumerate() {
            let rho = word_state(w1, w2);
            let mut success = 0.0;
            let mut mass = 0.0;
            for (b1, k1) in stage1.iter().enumerate() {
                let sigma = k1 * &rho * k1;
                if b1 == book1.len() {
                    mass += trace(&sigma);
                    continue;
                }
                for (b2, k2) in stage2[b1].iter().enumerate() {
                    let p = trace(&(k2 * &sigma * k2));
                    mass += p;
                    if b1 == m1 && b2 == m2 {
                        success += p;
                    }
                }
            }
            total_error += 1.0 - success;
            worst_leak = worst_leak.max((mass - 1.0).abs());
        }
    }
    (total_error / (book1.len() * book2.len()) as f64, worst_leak)
}

/// `cos α|0⟩ + sin α|1⟩` with `α = (2x₁ + x₂)π/4`.
pub fn qubit_mac_letter(x1: usize, x2: usize) -> CMat {
    let a = (2 * x1 + x2) as f64 * std::f64::consts::FRAC_PI_4;
    pure(&[a.cos(), a.sin()])
}
