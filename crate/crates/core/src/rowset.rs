//! Compact sets of row indices.
//!
//! Pattern matrices handled by this crate have at most [`MAX_ROWS`] rows, so a
//! set of rows fits in one machine word. Indices are 0-based; the `Display`
//! impl prints the 1-based form used in all user-facing output.

use std::fmt;

/// Largest supported row count for any pattern matrix.
pub const MAX_ROWS: usize = 64;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowSet(u64);

impl RowSet {
    pub const fn empty() -> Self {
        RowSet(0)
    }

    /// The set `{0, .., p-1}`.
    pub fn full(p: usize) -> Self {
        debug_assert!(p <= MAX_ROWS);
        if p == MAX_ROWS {
            RowSet(u64::MAX)
        } else {
            RowSet((1u64 << p) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        RowSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        RowSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_ROWS && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: RowSet) -> RowSet {
        RowSet(self.0 | other.0)
    }

    pub fn intersection(self, other: RowSet) -> RowSet {
        RowSet(self.0 & other.0)
    }

    pub fn difference(self, other: RowSet) -> RowSet {
        RowSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: RowSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Ascending iterator over members.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Members as 1-based indices.
    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl FromIterator<usize> for RowSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = RowSet::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Display for RowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for RowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
