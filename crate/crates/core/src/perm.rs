//! Full rankings over `n` items and the Kendall tau metric.
//!
//! A [`Permutation`] is stored in rank-vector form: `rank(i)` is the position
//! (1 = most preferred) given to item `i`. Items are indexed from 0 in the API
//! and written 1-based in every text format, so the rank vector `"2,1,3"` and
//! the ordering `"2>1>3"` describe the same ranking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which exhaustive search over all `n!` rankings is allowed.
pub const ORACLE_CAP: usize = 8;

/// A full ranking of `n >= 2` items.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    ranks: Vec<usize>,
}

impl Permutation {
    /// Builds a ranking from 1-based ranks, `ranks[i]` being the rank of item `i`.
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        if n < 2 {
            return Err(Error::InvalidPermutation(format!(
                "a ranking needs at least 2 items, got {n}"
            )));
        }
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r > n {
                return Err(Error::InvalidPermutation(format!(
                    "rank {r} outside 1..={n}"
                )));
            }
            if std::mem::replace(&mut seen[r - 1], true) {
                return Err(Error::InvalidPermutation(format!("rank {r} repeated")));
            }
        }
        Ok(Self { ranks })
    }

    /// Builds a ranking from an ordering of 0-based items, best first.
    pub fn from_ordering(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut ranks = vec![0; n];
        for (pos, &item) in order.iter().enumerate() {
            if item >= n {
                return Err(Error::InvalidPermutation(format!(
                    "item {} outside 1..={n}",
                    item + 1
                )));
            }
            if ranks[item] != 0 {
                return Err(Error::InvalidPermutation(format!(
                    "item {} repeated",
                    item + 1
                )));
            }
            ranks[item] = pos + 1;
        }
        Self::from_ranks(ranks)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 2, "a ranking needs at least 2 items");
        Self {
            ranks: (1..=n).collect(),
        }
    }

    /// The ranking that reverses every pairwise preference of `self`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        Self {
            ranks: self.ranks.iter().map(|&r| n + 1 - r).collect(),
        }
    }

    /// Number of items.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    /// Rank (1-based) of the 0-based `item`.
    #[inline]
    pub fn rank(&self, item: usize) -> usize {
        self.ranks[item]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Items sorted from most to least preferred (0-based).
    pub fn ordering(&self) -> Vec<usize> {
        let mut order = vec![0; self.len()];
        for (item, &r) in self.ranks.iter().enumerate() {
            order[r - 1] = item;
        }
        order
    }

    /// True when item `i` is ranked ahead of item `j`.
    #[inline]
    pub fn prefers(&self, i: usize, j: usize) -> bool {
        self.ranks[i] < self.ranks[j]
    }

    /// Kendall tau distance to `other`.
    ///
    /// # Panics
    ///
    /// Panics if the two rankings have different lengths; use [`kendall_tau`]
    /// for a checked version.
    pub fn distance(&self, other: &Permutation) -> usize {
        assert_eq!(self.len(), other.len(), "rankings of different length");
        let (a, b) = (&self.ranks, &other.ranks);
        let n = a.len();
        let mut d = 0;
        for i in 0..n {
            for j in i + 1..n {
                if (a[i] < a[j]) != (b[i] < b[j]) {
                    d += 1;
                }
            }
        }
        d
    }

    /// Ordering form, e.g. `"1>3>2"`.
    pub fn to_ordering_string(&self) -> String {
        self.ordering()
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(">")
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(ranks: Vec<usize>) -> Result<Self> {
        Self::from_ranks(ranks)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.ranks
    }
}

impl fmt::Display for Permutation {
    /// Rank-vector form, e.g. `"1,3,2"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, r) in self.ranks.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts either a rank vector `"1,3,2"` or an ordering `"1>3>2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_matches(|c| c == '(' || c == ')' || c == '"');
        let parse = |tok: &str| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad item or rank {tok:?} in {s:?}")))
        };
        if s.contains('>') {
            let order = s
                .split('>')
                .map(|t| parse(t).and_then(|v| v.checked_sub(1).ok_or_else(|| {
                    Error::Parse(format!("items are numbered from 1 in {s:?}"))
                })))
                .collect::<Result<Vec<_>>>()?;
            Self::from_ordering(&order)
        } else {
            let ranks = s.split(',').map(parse).collect::<Result<Vec<_>>>()?;
            Self::from_ranks(ranks)
        }
    }
}

/// An unordered pair of items `i < j` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemPair {
    i: usize,
    j: usize,
}

impl ItemPair {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i >= j {
            return Err(Error::InvalidInput(format!(
                "item pair requires i < j, got ({}, {})",
                i + 1,
                j + 1
            )));
        }
        Ok(Self { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// All pairs `i < j` over `n` items in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = ItemPair> {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| ItemPair { i, j }))
    }

    /// Position of the pair in the lexicographic enumeration of [`ItemPair::all`].
    #[inline]
    pub fn index(&self, n: usize) -> usize {
        pair_index(n, self.i, self.j)
    }
}

#[inline]
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Number of pairs over `n` items.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Number of pairwise disagreements between two rankings.
pub fn kendall_tau(a: &Permutation, b: &Permutation) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.distance(b))
}

/// Whether `a` ranks `pair.i` ahead of `pair.j`.
pub fn concordant(a: &Permutation, pair: ItemPair) -> Result<bool> {
    if pair.j >= a.len() {
        return Err(Error::InvalidInput(format!(
            "pair ({}, {}) out of range for {} items",
            pair.i + 1,
            pair.j + 1,
            a.len()
        )));
    }
    Ok(a.prefers(pair.i, pair.j))
}

/// All `n!` rankings in lexicographic order of their rank vectors, identity first.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>> {
    if n > ORACLE_CAP {
        return Err(Error::OracleScaleExceeded { n, cap: ORACLE_CAP });
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a ranking needs at least 2 items, got {n}"
        )));
    }
    let total: usize = (1..=n).product();
    let mut out = Vec::with_capacity(total);
    let mut ranks: Vec<usize> = (1..=n).collect();
    loop {
        out.push(Permutation {
            ranks: ranks.clone(),
        });
        if !next_lexicographic(&mut ranks) {
            break;
        }
    }
    Ok(out)
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let pivot = i - 1;
    let j = (i..v.len()).rev().find(|&j| v[j] > v[pivot]).unwrap();
    v.swap(pivot, j);
    v[i..].reverse();
    true
}
