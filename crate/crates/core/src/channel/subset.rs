use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported number of senders (or label factors).
pub const MAX_PARTIES: usize = 31;

/// A set of sender indices `J ⊆ {0, …, s-1}` stored as a bitmask.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SenderSubset(u32);

impl SenderSubset {
    pub const fn empty() -> Self {
        Self(0)
    }

    pub const fn from_mask(mask: u32) -> Self {
        Self(mask)
    }

    pub fn full(s: usize) -> Self {
        assert!(s <= MAX_PARTIES);
        Self(((1u64 << s) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_PARTIES);
        Self(1 << i)
    }

    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Self {
        members
            .into_iter()
            .fold(Self::empty(), |acc, i| acc.with(i))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn with(self, i: usize) -> Self {
        assert!(i < MAX_PARTIES);
        Self(self.0 | (1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_PARTIES && self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in ascending order.
    pub fn members(self) -> Vec<usize> {
        (0..MAX_PARTIES).filter(|&i| self.contains(i)).collect()
    }

    pub fn complement(self, s: usize) -> Self {
        Self(!self.0 & Self::full(s).0)
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// True when every member is below `s`.
    pub fn within(self, s: usize) -> bool {
        self.is_subset_of(Self::full(s))
    }

    /// All nonempty subsets of `{0, …, s-1}` in increasing mask order.
    pub fn nonempty_subsets(s: usize) -> impl Iterator<Item = Self> {
        (1..=Self::full(s).0).map(Self)
    }

    /// All subsets including the empty one.
    pub fn all_subsets(s: usize) -> impl Iterator<Item = Self> {
        (0..=Self::full(s).0).map(Self)
    }
}

/// One-based rendering, e.g. `{1,3}`.
impl fmt::Display for SenderSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
