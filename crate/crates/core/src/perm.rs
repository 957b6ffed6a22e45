//! Permutations of `0..n` and multiset permutations of index tuples.

use std::fmt;

use crate::error::{Error, Result};

/// A bijection on `0..n`, stored by images.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::NotAPermutation(images));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// The permutation reversing `0..n`.
    pub fn reversal(n: usize) -> Self {
        Permutation {
            images: (0..n).rev().collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, a: usize) -> usize {
        self.images[a]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (a, &b) in self.images.iter().enumerate() {
            inv[b] = a;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`, i.e. `a ↦ self(other(a))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&b| self.images[b]).collect(),
        })
    }

    /// Pairs `a < b` with `self(a) > self(b)`.
    pub fn inversions(&self) -> Vec<(usize, usize)> {
        let n = self.images.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.images[a] > self.images[b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn inversion_count(&self) -> usize {
        self.inversions().len()
    }

    /// `(x_{π(0)}, …, x_{π(n-1)})`.
    pub fn act_on<T: Clone>(&self, tuple: &[T]) -> Vec<T> {
        self.images.iter().map(|&a| tuple[a].clone()).collect()
    }

    /// All permutations of degree `n` in lexicographic order of images.
    pub fn all(n: usize) -> Vec<Permutation> {
        multiset_permutations(&(0..n).collect::<Vec<_>>())
            .into_iter()
            .map(|images| Permutation { images })
            .collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, x) in self.images.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", x + 1)?;
        }
        f.write_str("]")
    }
}

/// Distinct orderings of `items` in lexicographic order.
pub fn multiset_permutations<T: Ord + Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut cur: Vec<T> = items.to_vec();
    cur.sort();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// Advances to the next lexicographic ordering; false when already last.
pub fn next_permutation<T: Ord>(xs: &mut [T]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    #[test]
    fn enumeration_counts() {
        for n in 0..6 {
            assert_eq!(Permutation::all(n).len(), factorial(n).max(1));
        }
        assert_eq!(
            multiset_permutations(&[1, 1, 2]),
            vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]
        );
        assert_eq!(multiset_permutations(&[3, 3]).len(), 1);
    }

    #[test]
    fn lexicographic() {
        let all = Permutation::all(4);
        for w in all.windows(2) {
            assert!(w[0].images() < w[1].images());
        }
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::identity(2)
            .compose(&Permutation::identity(3))
            .is_err());
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(Permutation::reversal(3).to_string(), "[3 2 1]");
    }

    fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn group_axioms(a in perm_strategy(6), b in perm_strategy(6), c in perm_strategy(6)) {
            let id = Permutation::identity(6);
            prop_assert_eq!(a.compose(&a.inverse()).unwrap(), id.clone());
            prop_assert_eq!(a.inverse().compose(&a).unwrap(), id.clone());
            prop_assert_eq!(a.compose(&id).unwrap(), a.clone());
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn inverse_has_same_inversion_count(a in perm_strategy(7)) {
            prop_assert_eq!(a.inversion_count(), a.inverse().inversion_count());
        }

        #[test]
        fn act_on_composes(a in perm_strategy(5), b in perm_strategy(5)) {
            let base: Vec<usize> = (10..15).collect();
            // (x_{a(b(k))})_k
            let composed = a.compose(&b).unwrap().act_on(&base);
            let stepwise = b.act_on(&a.act_on(&base));
            prop_assert_eq!(composed, stepwise);
        }
    }
}
