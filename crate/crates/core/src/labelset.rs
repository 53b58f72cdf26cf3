use alloc::vec::Vec;
use core::fmt;

use serde::de::{Deserialize, Deserializer, Error as _};
use serde::ser::{Serialize, SerializeSeq, Serializer};

/// A subset of the labels `0..64`, stored as a bit mask.
///
/// Serialized as a sorted array of labels.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        LabelSet(0)
    }

    /// `{0, 1, ..., n - 1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= Self::CAPACITY);
        if n == Self::CAPACITY {
            LabelSet(u64::MAX)
        } else {
            LabelSet((1u64 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        LabelSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, label: usize) -> bool {
        label < Self::CAPACITY && self.0 >> label & 1 == 1
    }

    pub fn insert(&mut self, label: usize) {
        assert!(
            label < Self::CAPACITY,
            "label {label} does not fit a LabelSet"
        );
        self.0 |= 1 << label;
    }

    pub fn remove(&mut self, label: usize) {
        if label < Self::CAPACITY {
            self.0 &= !(1 << label);
        }
    }

    pub fn clear(&mut self) {
        self.0 = 0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest label plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        Self::CAPACITY - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..Self::CAPACITY).filter(move |&l| self.contains(l))
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = LabelSet::empty();
        for label in iter {
            set.insert(label);
        }
        set
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for label in self.iter() {
            seq.serialize_element(&label)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(deserializer)?;
        let mut set = LabelSet::empty();
        for label in labels {
            if label >= Self::CAPACITY {
                return Err(D::Error::custom("label out of range"));
            }
            set.insert(label);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_ops() {
        let mut s: LabelSet = [0, 2].into_iter().collect();
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.len(), 2);
        assert_eq!(s.span(), 3);
        s.insert(63);
        assert!(s.contains(63));
        s.remove(0);
        assert_eq!(s.iter().collect::<std::vec::Vec<_>>(), [2, 63]);
        assert!(LabelSet::full(3).is_subset(LabelSet::full(4)));
        assert_eq!(LabelSet::full(64).len(), 64);
    }
}
