use serde::{Deserialize, Serialize};

/// Size caps that keep dense computations bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    /// Largest quantum dimension of an n-block state (`d^n`).
    pub max_block_dim: usize,
    /// Largest dimension of a dense block-diagonal expansion.
    pub max_dense_dim: usize,
    /// Largest sender count for which all `s!` corners are enumerated.
    pub max_corner_senders: usize,
    /// Largest number of message tuples evaluated exhaustively.
    pub max_exhaustive_tuples: usize,
    /// Largest number of priors in a sweep grid.
    pub max_grid_points: usize,
    /// Largest number of atoms in an averaged word-state ensemble.
    pub max_ensemble_atoms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_block_dim: 4096,
            max_dense_dim: 4096,
            max_corner_senders: 6,
            max_exhaustive_tuples: 4096,
            max_grid_points: 1 << 16,
            max_ensemble_atoms: 1 << 16,
        }
    }
}

impl Limits {
    pub fn with_max_block_dim(mut self, cap: usize) -> Self {
        self.max_block_dim = cap;
        self
    }
}
