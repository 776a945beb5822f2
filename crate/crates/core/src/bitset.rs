//! Fixed-width bitset keyed by edge indices. Matchings and flip cycles are
//! stored in this form so that move application is a couple of XORs and
//! configuration states hash cheaply.

/// Bitset over the edge ids of one section. Width is fixed at construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet {
    len: u32,
    words: Box<[u64]>,
}

impl EdgeSet {
    pub fn empty(len: usize) -> Self {
        EdgeSet {
            len: len as u32,
            words: vec![0u64; len.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut s = Self::empty(len);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len());
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len());
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// In-place symmetric difference.
    pub fn xor_with(&mut self, other: &EdgeSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    /// True when `self & mask == expected` word-wise.
    pub fn masked_eq(&self, mask: &EdgeSet, expected: &EdgeSet) -> bool {
        debug_assert_eq!(self.len, mask.len);
        self.words
            .iter()
            .zip(mask.words.iter())
            .zip(expected.words.iter())
            .all(|((a, m), e)| a & m == *e)
    }

    pub fn intersects(&self, other: &EdgeSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset_of(&self, other: &EdgeSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let len = self.len();
        self.words.iter().enumerate().flat_map(move |(wi, w)| {
            let mut w = *w;
            let mut out = Vec::new();
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * 64 + b);
                w &= w - 1;
            }
            out.into_iter().filter(move |&i| i < len)
        })
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Raw words, used for stable content hashing.
    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl std::fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EdgeSet{:?}", self.to_indices())
    }
}

/// 64-bit FNV-1a over arbitrary bytes. Stable across runs and platforms; used
/// for section content hashes embedded in JSON artifacts.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_roundtrip() {
        let mut s = EdgeSet::empty(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert!(s.contains(64));
        assert_eq!(s.count(), 3);
        s.remove(64);
        assert!(!s.contains(64));
        assert_eq!(s.to_indices(), vec![0, 129]);
    }

    #[test]
    fn xor_is_involution() {
        let a = EdgeSet::from_indices(70, &[1, 3, 69]);
        let b = EdgeSet::from_indices(70, &[3, 5]);
        let mut c = a.clone();
        c.xor_with(&b);
        c.xor_with(&b);
        assert_eq!(a, c);
    }
}
