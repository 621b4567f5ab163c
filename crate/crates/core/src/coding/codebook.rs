use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Derives an independent seed for `stream` from a master seed.
///
/// Each stream draws from its own ChaCha stream, so seeds for different
/// purposes never overlap and do not depend on evaluation order.
pub fn split_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Seed of codebook `sender` in draw `draw`.
pub fn codebook_seed(master: u64, draw: u64, sender: usize) -> u64 {
    split_seed(master, (draw << 8) | sender as u64)
}

/// Seed of the message sampler in draw `draw`.
pub fn trial_seed(master: u64, draw: u64) -> u64 {
    split_seed(master, (draw << 8) | 0xff)
}

/// Codewords of one sender.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub sender: usize,
    pub n: usize,
    pub words: Vec<Vec<usize>>,
    pub seed: u64,
}

impl Codebook {
    pub fn new(sender: usize, alphabet: usize, words: Vec<Vec<usize>>, seed: u64) -> Result<Self> {
        let n = words
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("codebook needs at least one word".into()))?;
        if n == 0 {
            return Err(Error::InvalidArgument("codewords must be nonempty".into()));
        }
        for w in &words {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
            if let Some(&x) = w.iter().find(|&&x| x >= alphabet) {
                return Err(Error::InvalidArgument(format!(
                    "letter {x} outside alphabet of size {alphabet}"
                )));
            }
        }
        Ok(Self {
            sender,
            n,
            words,
            seed,
        })
    }

    /// Every word of `X^n` once, in lexicographic order.
    pub fn full(sender: usize, alphabet: usize, n: usize) -> Result<Self> {
        let words = crate::index::MixedRadix::new(&vec![alphabet; n])
            .iter()
            .collect();
        Self::new(sender, alphabet, words, 0)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// `size` i.i.d. words of length `n` drawn letterwise from `prior`.
pub fn sample_codebook<T: Real>(
    sender: usize,
    prior: &[T],
    n: usize,
    size: usize,
    seed: u64,
) -> Result<Codebook> {
    if n == 0 || size == 0 {
        return Err(Error::InvalidArgument(
            "block length and codebook size must be positive".into(),
        ));
    }
    let weights: Vec<f64> = prior.iter().map(|p| p.as_f64()).collect();
    let dist =
        WeightedIndex::new(&weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = (0..size)
        .map(|_| (0..n).map(|_| dist.sample(&mut rng)).collect())
        .collect();
    Codebook::new(sender, prior.len(), words, seed)
}

/// `L_i = ⌈2^{n(R_i − δ)}⌉`, at least 1.
pub fn codebook_sizes(rates: &[f64], n: usize, delta: f64) -> Result<Vec<usize>> {
    rates
        .iter()
        .map(|&r| {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "rate {r} is negative or not finite"
                )));
            }
            let size = (n as f64 * (r - delta)).exp2().ceil();
            if size > usize::MAX as f64 / 2.0 {
                return Err(Error::InvalidArgument(format!(
                    "rate {r} gives an unrepresentable codebook"
                )));
            }
            Ok((size as usize).max(1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_sampling() {
        let p = [0.5f64, 0.5];
        let a = sample_codebook(0, &p, 8, 4, 7).unwrap();
        let b = sample_codebook(0, &p, 8, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_codebook(0, &p, 8, 4, 8).unwrap());
        assert_eq!(a.len(), 4);
        assert!(a
            .words
            .iter()
            .all(|w| w.len() == 8 && w.iter().all(|&x| x < 2)));
    }

    #[test]
    fn point_mass_gives_identical_words() {
        let c = sample_codebook(1, &[0.0f64, 0.0, 1.0], 5, 6, 3).unwrap();
        assert!(c.words.iter().all(|w| w == &vec![2; 5]));
    }

    #[test]
    fn letter_frequencies() {
        // 10^4 seeds × 32 letters
        let mut ones = 0usize;
        let seeds = 10_000u64;
        for s in 0..seeds {
            let c = sample_codebook(0, &[0.5f64, 0.5], 8, 4, s).unwrap();
            ones += c.words.iter().flatten().filter(|&&x| x == 1).count();
        }
        let freq = ones as f64 / (seeds as f64 * 32.0);
        assert!((freq - 0.5).abs() < 0.05, "{freq}");
    }

    #[test]
    fn seed_streams_differ() {
        let seeds: Vec<u64> = (0..4).map(|i| codebook_seed(42, 0, i)).collect();
        for i in 0..4 {
            for j in 0..i {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
        assert_ne!(codebook_seed(42, 1, 0), seeds[0]);
        assert_ne!(trial_seed(42, 0), seeds[0]);
        assert_eq!(split_seed(42, 3), split_seed(42, 3));
    }

    #[test]
    fn sizes() {
        assert_eq!(codebook_sizes(&[0.5, 0.0], 4, 0.0).unwrap(), vec![4, 1]);
        assert_eq!(
            codebook_sizes(&[0.19956, 0.30044], 6, 0.0).unwrap(),
            vec![3, 4]
        );
        assert!(codebook_sizes(&[-1.0], 4, 0.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(Codebook::new(0, 2, vec![], 0).is_err());
        assert!(Codebook::new(0, 2, vec![vec![0, 2]], 0).is_err());
        assert!(Codebook::new(0, 2, vec![vec![0, 1], vec![1]], 0).is_err());
        assert_eq!(
            Codebook::full(0, 2, 2).unwrap().words,
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }
}
