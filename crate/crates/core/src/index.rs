/// Mixed-radix enumeration of tuples, first position most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<usize>,
}

impl MixedRadix {
    pub fn new(radices: &[usize]) -> Self {
        Self {
            radices: radices.to_vec(),
        }
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// Number of tuples, or `None` on overflow.
    pub fn checked_len(&self) -> Option<usize> {
        self.radices
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
    }

    pub fn len(&self) -> usize {
        self.checked_len().expect("tuple count overflows usize")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.radices.len());
        tuple
            .iter()
            .zip(&self.radices)
            .fold(0usize, |acc, (&x, &r)| acc * r + x)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = index % r;
            index /= r;
        }
        out
    }

    pub fn in_range(&self, tuple: &[usize]) -> bool {
        tuple.len() == self.radices.len() && tuple.iter().zip(&self.radices).all(|(&x, &r)| x < r)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(move |i| self.decode(i))
    }
}

/// `(a,b,c)` rendering used in diagnostics.
pub fn fmt_tuple(tuple: &[usize]) -> String {
    let inner: Vec<String> = tuple.iter().map(usize::to_string).collect();
    format!("({})", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        let r = MixedRadix::new(&[2, 3, 2]);
        assert_eq!(r.len(), 12);
        for (i, t) in r.iter().enumerate() {
            assert_eq!(r.encode(&t), i);
        }
        assert_eq!(r.decode(5), vec![0, 2, 1]);
        assert_eq!(
            MixedRadix::new(&[]).iter().collect::<Vec<_>>(),
            vec![Vec::<usize>::new()]
        );
    }
}
