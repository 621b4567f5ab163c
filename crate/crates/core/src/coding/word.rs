use serde::{Deserialize, Serialize};

use crate::channel::{block_dim, CqEnsemble, CqMacChannel, EnsembleBuilder, Prior};
use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::limits::Limits;
use crate::operator::{ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

use super::Codebook;

/// How senders that are not yet decoded are averaged out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMode {
    /// Uniformly over the other senders' actual codebooks.
    Empirical,
    /// Over `P_j^{⊗n}`, giving the product state `V^n`.
    #[default]
    Ensemble,
}

/// Part a sender plays in a word state.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Role<'a> {
    Known(&'a [usize]),
    Averaged,
}

pub(crate) fn check_codebooks(
    ch: &CqMacChannel<impl Real>,
    codebooks: &[Codebook],
) -> Result<usize> {
    if codebooks.len() != ch.num_senders() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_senders(),
            found: codebooks.len(),
        });
    }
    let n = codebooks[0].n;
    for (i, c) in codebooks.iter().enumerate() {
        if c.n != n {
            return Err(Error::InvalidArgument(format!(
                "codebook {} has block length {} but codebook 1 has {n}",
                i + 1,
                c.n
            )));
        }
        let a = ch.alphabet_sizes()[i];
        if c.words.iter().flatten().any(|&x| x >= a) {
            return Err(Error::InvalidArgument(format!(
                "codebook {} uses letters outside alphabet of size {a}",
                i + 1
            )));
        }
    }
    Ok(n)
}

/// Block state with known senders fixed to their words and the rest averaged.
pub(crate) fn word_state<T: Real>(
    ch: &CqMacChannel<T>,
    prior: &Prior<T>,
    codebooks: &[Codebook],
    roles: &[Role<'_>],
    n: usize,
    mode: AveragingMode,
) -> DensityMatrix<T> {
    let averaged: Vec<usize> = (0..roles.len())
        .filter(|&j| matches!(roles[j], Role::Averaged))
        .collect();
    let letter = |k: usize, tuple: &mut [usize]| {
        for (j, r) in roles.iter().enumerate() {
            if let Role::Known(w) = r {
                tuple[j] = w[k];
            }
        }
    };
    let mut tuple = vec![0; roles.len()];
    match mode {
        AveragingMode::Ensemble => {
            let radix = MixedRadix::new(
                &averaged
                    .iter()
                    .map(|&j| ch.alphabet_sizes()[j])
                    .collect::<Vec<_>>(),
            );
            let d = ch.output_dim();
            let mut factors = Vec::with_capacity(n);
            for k in 0..n {
                letter(k, &mut tuple);
                let mut acc = ComplexMatrix::square_zeros(d);
                for xs in radix.iter() {
                    let mut w = T::one();
                    for (&j, &x) in averaged.iter().zip(&xs) {
                        tuple[j] = x;
                        w *= prior.sender(j)[x];
                    }
                    if w > T::zero() {
                        acc.add_scaled(w, ch.state(&tuple).matrix());
                    }
                }
                factors.push(DensityMatrix::from_matrix_unchecked(acc));
            }
            crate::channel::tensor_word(factors.iter()).expect("positive block length")
        }
        AveragingMode::Empirical => {
            let radix = MixedRadix::new(
                &averaged
                    .iter()
                    .map(|&j| codebooks[j].len())
                    .collect::<Vec<_>>(),
            );
            let weight = T::one() / T::from_usize(radix.len()).unwrap();
            let mut acc: Option<ComplexMatrix<T>> = None;
            for ms in radix.iter() {
                let letters = (0..n).map(|k| {
                    letter(k, &mut tuple);
                    for (&j, &m) in averaged.iter().zip(&ms) {
                        tuple[j] = codebooks[j].words[m][k];
                    }
                    ch.state(&tuple).clone()
                });
                let state = letters
                    .reduce(|a, b| a.tensor(&b))
                    .expect("positive block length");
                match acc.as_mut() {
                    Some(a) => a.add_scaled(weight, state.matrix()),
                    None => acc = Some(state.matrix().scale(weight)),
                }
            }
            DensityMatrix::from_matrix_unchecked(acc.expect("at least one tuple"))
        }
    }
}

/// Word states seen when decoding sender `target` after senders `0..target`:
/// an ensemble labeled by the earlier senders' words (as integers over
/// `|X_j|^n`, first letter most significant), each atom holding the block
/// state for `word` with later senders averaged out.
pub fn averaged_word_state<T: Real>(
    ch: &CqMacChannel<T>,
    prior: &Prior<T>,
    codebooks: &[Codebook],
    target: usize,
    word: &[usize],
    mode: AveragingMode,
    limits: &Limits,
) -> Result<CqEnsemble<T>> {
    prior.check_matches(ch.alphabet_sizes())?;
    let n = check_codebooks(ch, codebooks)?;
    let s = ch.num_senders();
    if target >= s {
        return Err(Error::InvalidArgument(format!(
            "sender index {target} out of range"
        )));
    }
    if word.len() != n || word.iter().any(|&x| x >= ch.alphabet_sizes()[target]) {
        return Err(Error::InvalidArgument(
            "word does not fit the target sender".into(),
        ));
    }
    let dim = block_dim(ch.output_dim(), n, limits)?;

    let word_spaces: Vec<usize> = (0..target)
        .map(|j| {
            u32::try_from(n)
                .ok()
                .and_then(|e| ch.alphabet_sizes()[j].checked_pow(e))
                .ok_or(Error::CapExceeded {
                    what: "word label space",
                    required: usize::MAX,
                    cap: limits.max_ensemble_atoms,
                })
        })
        .collect::<Result<_>>()?;
    // candidate words and weights per earlier sender
    let choices: Vec<Vec<(Vec<usize>, T)>> = (0..target)
        .map(|j| match mode {
            AveragingMode::Ensemble => {
                let p = prior.sender(j);
                MixedRadix::new(&vec![p.len(); n])
                    .iter()
                    .map(|w| {
                        let prob = w.iter().map(|&x| p[x]).fold(T::one(), |a, b| a * b);
                        (w, prob)
                    })
                    .filter(|(_, prob)| *prob > T::zero())
                    .collect()
            }
            AveragingMode::Empirical => {
                let weight = T::one() / T::from_usize(codebooks[j].len()).unwrap();
                codebooks[j]
                    .words
                    .iter()
                    .map(|w| (w.clone(), weight))
                    .collect()
            }
        })
        .collect();
    let radix = MixedRadix::new(&choices.iter().map(Vec::len).collect::<Vec<_>>());
    let atoms = radix.checked_len().unwrap_or(usize::MAX);
    if atoms > limits.max_ensemble_atoms {
        return Err(Error::CapExceeded {
            what: "word-state ensemble atoms",
            required: atoms,
            cap: limits.max_ensemble_atoms,
        });
    }

    let mut builder = EnsembleBuilder::new(word_spaces, dim);
    for pick in radix.iter() {
        let mut roles = vec![Role::Averaged; s];
        let mut labels = Vec::with_capacity(target);
        let mut prob = T::one();
        for (j, &c) in pick.iter().enumerate() {
            let (w, p) = &choices[j][c];
            roles[j] = Role::Known(w);
            labels.push(MixedRadix::new(&vec![ch.alphabet_sizes()[j]; n]).encode(w));
            prob *= *p;
        }
        roles[target] = Role::Known(word);
        let state = word_state(ch, prior, codebooks, &roles, n, mode);
        builder.add(labels, prob, state.matrix());
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::block_channel;

    fn adder() -> CqMacChannel<f64> {
        CqMacChannel::from_fn(&[2, 2], 3, |t| DensityMatrix::basis(3, t[0] + t[1])).unwrap()
    }

    #[test]
    fn single_sender_is_block_state() {
        let ch = CqMacChannel::from_fn(&[2], 2, |t| {
            if t[0] == 0 {
                DensityMatrix::basis(2, 0)
            } else {
                DensityMatrix::pure_real(&[1.0f64, 1.0]).unwrap()
            }
        })
        .unwrap();
        let cb = vec![Codebook::full(0, 2, 2).unwrap()];
        let lim = Limits::default();
        let e = averaged_word_state(
            &ch,
            &Prior::uniform(&[2]),
            &cb,
            0,
            &[1, 0],
            AveragingMode::Ensemble,
            &lim,
        )
        .unwrap();
        assert_eq!(e.atoms().len(), 1);
        let direct = block_channel(&ch, 2, &lim)
            .unwrap()
            .state(&[&[1, 0]])
            .unwrap();
        assert!((e.atoms()[0].state.matrix() - direct.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn adder_first_sender_average() {
        let ch = adder();
        let cb = vec![
            Codebook::full(0, 2, 1).unwrap(),
            Codebook::full(1, 2, 1).unwrap(),
        ];
        let e = averaged_word_state(
            &ch,
            &Prior::uniform(&[2, 2]),
            &cb,
            0,
            &[0],
            AveragingMode::Ensemble,
            &Limits::default(),
        )
        .unwrap();
        let expected = ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.0]);
        assert!((e.atoms()[0].state.matrix() - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn last_sender_with_singleton_codebooks() {
        let ch = adder();
        let cb = vec![
            Codebook::new(0, 2, vec![vec![1, 0]], 0).unwrap(),
            Codebook::full(1, 2, 2).unwrap(),
        ];
        let e = averaged_word_state(
            &ch,
            &Prior::uniform(&[2, 2]),
            &cb,
            1,
            &[0, 1],
            AveragingMode::Empirical,
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(e.atoms().len(), 1);
        assert_eq!(e.atoms()[0].labels, vec![2]);
        let direct = DensityMatrix::basis(3, 1).tensor(&DensityMatrix::basis(3, 1));
        assert!((e.atoms()[0].state.matrix() - direct.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn empirical_over_full_alphabet_matches_ensemble() {
        let ch = adder();
        // prior (1/3, 2/3) realized by multiplicities
        let prior = Prior::new(vec![vec![0.5, 0.5], vec![1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let n = 2;
        let words: Vec<Vec<usize>> = MixedRadix::new(&[3; 2])
            .iter()
            .map(|w| w.iter().map(|&x| usize::from(x > 0)).collect())
            .collect();
        let cb = vec![
            Codebook::full(0, 2, n).unwrap(),
            Codebook::new(1, 2, words, 0).unwrap(),
        ];
        let lim = Limits::default();
        let a = averaged_word_state(&ch, &prior, &cb, 0, &[1, 0], AveragingMode::Empirical, &lim)
            .unwrap();
        let b = averaged_word_state(&ch, &prior, &cb, 0, &[1, 0], AveragingMode::Ensemble, &lim)
            .unwrap();
        assert!((a.atoms()[0].state.matrix() - b.atoms()[0].state.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn caps() {
        let ch = adder();
        let cb = vec![
            Codebook::full(0, 2, 3).unwrap(),
            Codebook::full(1, 2, 3).unwrap(),
        ];
        let lim = Limits::default().with_max_block_dim(9);
        assert!(matches!(
            averaged_word_state(
                &ch,
                &Prior::uniform(&[2, 2]),
                &cb,
                1,
                &[0, 0, 0],
                AveragingMode::Ensemble,
                &lim
            ),
            Err(Error::CapExceeded { required: 27, .. })
        ));
    }
}
