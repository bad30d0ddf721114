//! Receiver subsets as bitmasks.

use serde::{Deserialize, Serialize};

/// A subset of receivers, bit `r` set iff receiver `r` is in the set.
///
/// Exhaustive enumerations over `2^n` subsets are capped by callers (tables at
/// n <= 12, brute-force pricing at n <= 16), so 32 bits are plenty.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(n: usize) -> Subset {
        debug_assert!(n <= 32);
        if n == 32 {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << n) - 1)
        }
    }

    pub fn singleton(r: usize) -> Subset {
        Subset(1 << r)
    }

    pub fn contains(self, r: usize) -> bool {
        self.0 >> r & 1 == 1
    }

    pub fn insert(self, r: usize) -> Subset {
        Subset(self.0 | 1 << r)
    }

    pub fn remove(self, r: usize) -> Subset {
        Subset(self.0 & !(1 << r))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Iterates over the members in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let r = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(r)
            }
        })
    }

    /// All subsets of an n-receiver ground set, in increasing mask order.
    pub fn all(n: usize) -> impl Iterator<Item = Subset> {
        debug_assert!(n < 32);
        (0u32..1 << n).map(Subset)
    }
}

impl std::fmt::Debug for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_counts() {
        let s = Subset::EMPTY.insert(0).insert(3);
        assert!(s.contains(0) && s.contains(3) && !s.contains(1));
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(s.remove(3), Subset::singleton(0));
    }

    #[test]
    fn enumeration_order_is_mask_order() {
        let all: Vec<u32> = Subset::all(3).map(|s| s.0).collect();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
        assert_eq!(Subset::full(3).0, 7);
    }

    #[test]
    fn lattice_ops() {
        let a = Subset(0b0110);
        let b = Subset(0b0011);
        assert_eq!(a.union(b).0, 0b0111);
        assert_eq!(a.intersection(b).0, 0b0010);
        assert!(Subset(0b0010).is_subset_of(a));
        assert!(!a.is_subset_of(b));
    }
}
