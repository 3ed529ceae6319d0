//! Fixed-width vertex bitsets. Adjacency rows, neighbourhoods and every
//! definable set are stored this way so that intersections and counts are
//! word-parallel popcounts.

use std::fmt;

const BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    len: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(len: usize) -> Self {
        VertexSet {
            len,
            words: vec![0; len.div_ceil(BITS)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = VertexSet {
            len,
            words: vec![!0; len.div_ceil(BITS)],
        };
        s.trim();
        s
    }

    pub fn singleton(len: usize, v: usize) -> Self {
        let mut s = Self::new(len);
        s.insert(v);
        s
    }

    pub fn from_indices(len: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(len);
        for v in items {
            s.insert(v);
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.len % BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Universe size (number of addressable vertices).
    #[inline]
    pub fn universe(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.len);
        self.words[v / BITS] |= 1 << (v % BITS);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.len);
        self.words[v / BITS] &= !(1 << (v % BITS));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.len && self.words[v / BITS] & (1 << (v % BITS)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn intersection_count(&self, other: &VertexSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// `self ⊆ other ∪ extra`, without materializing the union.
    pub fn is_subset_of_union(&self, other: &VertexSet, extra: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .zip(&extra.words)
            .all(|((a, b), c)| a & !(b | c) == 0)
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn complement(&self) -> VertexSet {
        let mut s = VertexSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    /// Size of the symmetric difference.
    pub fn distance(&self, other: &VertexSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Elements missing from at most `k` of `sets` (all of them for `k = 0`
    /// is the plain intersection). Counts are kept as "at least j misses"
    /// masks, so the cost is `k + 1` word operations per set.
    pub fn in_all_but(len: usize, sets: &[&VertexSet], k: usize) -> VertexSet {
        let words = len.div_ceil(BITS);
        let mut ge: Vec<Vec<u64>> = vec![vec![0; words]; k + 1];
        for set in sets {
            debug_assert_eq!(set.len, len);
            for w in 0..words {
                let miss = !set.words[w];
                for j in (1..=k).rev() {
                    let (lo, hi) = ge.split_at_mut(j);
                    hi[0][w] |= lo[j - 1][w] & miss;
                }
                ge[0][w] |= miss;
            }
        }
        let mut out = VertexSet {
            len,
            words: ge[k].iter().map(|&g| !g).collect(),
        };
        out.trim();
        out
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = VertexSet::from_indices(130, [0, 5, 64, 129]);
        let b = VertexSet::from_indices(130, [5, 64, 100]);
        assert_eq!(a.count(), 4);
        assert_eq!(a.intersection_count(&b), 2);
        assert_eq!(a.union(&b).to_vec(), vec![0, 5, 64, 100, 129]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 129]);
        assert_eq!(a.distance(&b), 3);
        assert!(!a.is_subset(&b));
        assert!(a.intersection(&b).is_subset(&a));
    }

    #[test]
    fn complement_respects_universe() {
        let a = VertexSet::from_indices(70, [1, 69]);
        let c = a.complement();
        assert_eq!(c.count(), 68);
        assert!(!c.contains(69));
        assert_eq!(VertexSet::full(70).count(), 70);
        assert!(VertexSet::new(0).is_empty());
    }
}
