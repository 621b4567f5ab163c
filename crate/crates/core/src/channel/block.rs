use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::limits::Limits;
use crate::operator::DensityMatrix;
use crate::scalar::Real;

use super::CqMacChannel;

/// `⊗_k ρ_k` over a sequence of letter states.
pub fn tensor_word<'a, T: Real>(
    mut letters: impl Iterator<Item = &'a DensityMatrix<T>>,
) -> Option<DensityMatrix<T>> {
    let first = letters.next()?.clone();
    Some(letters.fold(first, |acc, r| acc.tensor(r)))
}

/// The memoryless n-block extension `W^n`, evaluated one word tuple at a time.
#[derive(Debug, Clone, Copy)]
pub struct BlockChannel<'a, T: Real> {
    channel: &'a CqMacChannel<T>,
    n: usize,
    output_dim: usize,
}

/// Checks `d^n` against the block cap and returns it.
pub(crate) fn block_dim(d: usize, n: usize, limits: &Limits) -> Result<usize> {
    let dim = u32::try_from(n)
        .ok()
        .and_then(|n| d.checked_pow(n))
        .unwrap_or(usize::MAX);
    if dim > limits.max_block_dim {
        return Err(Error::CapExceeded {
            what: "n-block output dimension",
            required: dim,
            cap: limits.max_block_dim,
        });
    }
    Ok(dim)
}

pub fn block_channel<'a, T: Real>(
    ch: &'a CqMacChannel<T>,
    n: usize,
    limits: &Limits,
) -> Result<BlockChannel<'a, T>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "block length must be positive".into(),
        ));
    }
    let output_dim = block_dim(ch.output_dim(), n, limits)?;
    Ok(BlockChannel {
        channel: ch,
        n,
        output_dim,
    })
}

impl<'a, T: Real> BlockChannel<'a, T> {
    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn letter_channel(&self) -> &'a CqMacChannel<T> {
        self.channel
    }

    /// Word alphabet sizes `|X_i|^n`.
    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.channel
            .alphabet_sizes()
            .iter()
            .map(|&a| a.pow(self.n as u32))
            .collect()
    }

    /// `W^n` for one word per sender.
    pub fn state(&self, words: &[&[usize]]) -> Result<DensityMatrix<T>> {
        let s = self.channel.num_senders();
        if words.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: words.len(),
            });
        }
        for (i, w) in words.iter().enumerate() {
            if w.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: w.len(),
                });
            }
            if w.iter().any(|&x| x >= self.channel.alphabet_sizes()[i]) {
                return Err(Error::InvalidArgument(format!(
                    "word {w:?} has letters outside sender {}'s alphabet",
                    i + 1
                )));
            }
        }
        let mut letters = vec![0; s];
        let states: Vec<&DensityMatrix<T>> = (0..self.n)
            .map(|k| {
                for (slot, w) in letters.iter_mut().zip(words) {
                    *slot = w[k];
                }
                self.channel.state(&letters)
            })
            .collect();
        Ok(tensor_word(states.into_iter()).expect("n >= 1"))
    }

    /// `W^n` addressed by word indices in `X_i^n` (first letter most significant).
    pub fn state_by_index(&self, word_indices: &[usize]) -> Result<DensityMatrix<T>> {
        let words: Vec<Vec<usize>> = word_indices
            .iter()
            .zip(self.channel.alphabet_sizes())
            .map(|(&w, &a)| MixedRadix::new(&vec![a; self.n]).decode(w))
            .collect();
        let refs: Vec<&[usize]> = words.iter().map(Vec::as_slice).collect();
        self.state(&refs)
    }
}
